#include "bosoncert/coarsegrain.hpp"

#include "bosoncert/parallel.hpp"
#include "bosoncert/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bosoncert {
namespace {

std::vector<std::pair<int, int>> sparse_modes(std::span<const int> occupations) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < occupations.size(); ++i)
    if (occupations[i] > 0) out.emplace_back(static_cast<int>(i), occupations[i]);
  return out;
}

int l1_to_center(const std::vector<std::pair<int, int>>& center, std::span<const int> state,
                 int particles) {
  int overlap = 0;
  for (const auto& [mode, n] : center) overlap += std::min(n, state[static_cast<std::size_t>(mode)]);
  return 2 * (particles - overlap);
}

int resolved_max_radius(const BubbleParams& params, int particles) {
  return params.max_radius > 0 ? params.max_radius : 2 * particles;
}

}  // namespace

BubblePartition::BubblePartition(ProblemShape shape, std::vector<Bubble> bubbles,
                                 std::vector<std::pair<int, int>> merges, BubbleParams params,
                                 std::string construction_sample)
    : shape_(shape),
      bubbles_(std::move(bubbles)),
      merges_(std::move(merges)),
      params_(params),
      construction_sample_(std::move(construction_sample)) {
  if (bubbles_.empty()) throw std::invalid_argument("bubble partition: no bubbles");
  const FockBasis basis(shape_.modes, shape_.particles);
  const int raw = static_cast<int>(bubbles_.size());
  center_modes_.reserve(bubbles_.size());
  for (const Bubble& b : bubbles_) {
    basis.validate(b.center.occupations());
    if (b.radius < 0 || b.radius % 2 != 0)
      throw std::invalid_argument("bubble partition: radii must be even and nonnegative");
    center_modes_.push_back(sparse_modes(b.center.occupations()));
  }

  std::vector<int> rep(static_cast<std::size_t>(raw));
  std::iota(rep.begin(), rep.end(), 0);
  for (const auto& [from, to] : merges_) {
    if (from < 0 || from >= raw || to < 0 || to >= raw || from == to)
      throw std::invalid_argument("bubble partition: invalid merge entry");
    if (rep[static_cast<std::size_t>(from)] != from || rep[static_cast<std::size_t>(to)] != to)
      throw std::invalid_argument("bubble partition: merge refers to an already merged bubble");
    for (int& r : rep)
      if (r == from) r = to;
  }
  labels_.assign(static_cast<std::size_t>(raw), -1);
  std::vector<int> label_of_rep(static_cast<std::size_t>(raw), -1);
  for (int b = 0; b < raw; ++b)
    if (rep[static_cast<std::size_t>(b)] == b) label_of_rep[static_cast<std::size_t>(b)] = bubble_count_++;
  for (int b = 0; b < raw; ++b)
    labels_[static_cast<std::size_t>(b)] = label_of_rep[static_cast<std::size_t>(rep[static_cast<std::size_t>(b)])];

  std::vector<std::uint64_t> words{static_cast<std::uint64_t>(shape_.modes),
                                   static_cast<std::uint64_t>(shape_.particles)};
  for (const Bubble& b : bubbles_) {
    words.push_back(b.center_rank);
    words.push_back(static_cast<std::uint64_t>(b.radius));
  }
  for (const auto& [from, to] : merges_) {
    words.push_back(static_cast<std::uint64_t>(from));
    words.push_back(static_cast<std::uint64_t>(to));
  }
  fingerprint_ = fnv1a64(std::span(reinterpret_cast<const unsigned char*>(words.data()),
                                   words.size() * sizeof(std::uint64_t)));
}

int BubblePartition::raw_index(std::span<const int> occupations) const {
  int best = 0;
  int best_distance = std::numeric_limits<int>::max();
  for (std::size_t b = 0; b < bubbles_.size(); ++b) {
    const int d = l1_to_center(center_modes_[b], occupations, shape_.particles);
    if (d <= bubbles_[b].radius) return static_cast<int>(b);
    if (d < best_distance) {
      best_distance = d;
      best = static_cast<int>(b);
    }
  }
  return best;
}

std::vector<std::uint64_t> BubblePartition::construction_counts() const {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(bubble_count_), 0);
  for (std::size_t b = 0; b < bubbles_.size(); ++b)
    out[static_cast<std::size_t>(labels_[b])] += bubbles_[b].count;
  return out;
}

namespace {

struct Observed {
  Rank rank;
  std::uint64_t count;
};

struct Construction {
  std::vector<Bubble> bubbles;
  std::vector<std::pair<int, int>> merges;
  int live = 0;
};

// Greedy growth at a fixed trigger threshold, followed by the merge pass.
Construction construct(const std::vector<Observed>& observed, std::span<const int> occ, int m,
                       int n, double threshold, const BubbleParams& params) {
  const int max_radius = resolved_max_radius(params, n);
  auto state_of = [&](std::size_t k) {
    return occ.subspan(k * static_cast<std::size_t>(m), static_cast<std::size_t>(m));
  };

  Construction out;
  std::vector<char> claimed(observed.size(), 0);
  std::uint64_t claimed_events = 0;
  int radius = std::min(params.initial_radius, max_radius);
  std::size_t next = 0;
  while (true) {
    while (next < observed.size() && claimed[next]) ++next;
    if (next == observed.size()) break;
    const auto center_state = state_of(next);
    const auto center = sparse_modes(center_state);
    Bubble bubble{FockState(std::vector<int>(center_state.begin(), center_state.end())),
                  observed[next].rank, radius, 0};
    for (std::size_t k = next; k < observed.size(); ++k) {
      if (claimed[k]) continue;
      if (l1_to_center(center, state_of(k), n) <= radius) {
        claimed[k] = 1;
        bubble.count += observed[k].count;
      }
    }
    claimed_events += bubble.count;
    out.bubbles.push_back(std::move(bubble));
    const double running_mean =
        static_cast<double>(claimed_events) / static_cast<double>(out.bubbles.size());
    if (running_mean < threshold) radius = std::min(radius + params.radius_step, max_radius);
  }

  // Merge undersized groups, smallest first, into the nearest surviving center.
  const int raw = static_cast<int>(out.bubbles.size());
  std::vector<std::uint64_t> group_count(static_cast<std::size_t>(raw));
  std::vector<char> alive(static_cast<std::size_t>(raw), 1);
  std::vector<std::vector<std::pair<int, int>>> centers;
  for (int b = 0; b < raw; ++b) {
    group_count[static_cast<std::size_t>(b)] = out.bubbles[static_cast<std::size_t>(b)].count;
    centers.push_back(sparse_modes(out.bubbles[static_cast<std::size_t>(b)].center.occupations()));
  }
  out.live = raw;
  while (out.live > 1) {
    int smallest = -1;
    for (int b = 0; b < raw; ++b) {
      const auto ub = static_cast<std::size_t>(b);
      if (!alive[ub] || group_count[ub] >= params.min_count) continue;
      if (smallest < 0 || group_count[ub] < group_count[static_cast<std::size_t>(smallest)]) smallest = b;
    }
    if (smallest < 0) break;
    int target = -1;
    int target_distance = std::numeric_limits<int>::max();
    const auto from_center = out.bubbles[static_cast<std::size_t>(smallest)].center.occupations();
    for (int b = 0; b < raw; ++b) {
      if (b == smallest || !alive[static_cast<std::size_t>(b)]) continue;
      const int d = l1_to_center(centers[static_cast<std::size_t>(b)], from_center, n);
      if (d < target_distance) {
        target_distance = d;
        target = b;
      }
    }
    out.merges.emplace_back(smallest, target);
    group_count[static_cast<std::size_t>(target)] += group_count[static_cast<std::size_t>(smallest)];
    alive[static_cast<std::size_t>(smallest)] = 0;
    --out.live;
  }
  return out;
}

constexpr double kMaxThresholdScale = 16.0;
constexpr int kBisections = 8;

}  // namespace

BubblePartition build_bubbles(const SampleSet& sample, const BubbleParams& params) {
  if (sample.counts.empty() || sample.total == 0)
    throw std::invalid_argument("build_bubbles: empty sample");
  if (params.target_bubbles < 2) throw std::invalid_argument("build_bubbles: target N_B must be >= 2");
  if (params.initial_radius < 0 || params.initial_radius % 2 != 0 || params.radius_step < 0 ||
      params.radius_step % 2 != 0)
    throw std::invalid_argument("build_bubbles: radii must be even and nonnegative");
  validate(sample);

  const FockBasis basis(sample.shape.modes, sample.shape.particles);
  const int m = basis.modes();
  const int n = basis.particles();

  std::vector<Observed> observed;
  observed.reserve(sample.counts.size());
  for (const auto& [rank, count] : sample.counts) observed.push_back({rank, count});
  std::stable_sort(observed.begin(), observed.end(), [](const Observed& a, const Observed& b) {
    return a.count != b.count ? a.count > b.count : a.rank < b.rank;
  });
  std::vector<int> occ(observed.size() * static_cast<std::size_t>(m));
  for (std::size_t k = 0; k < observed.size(); ++k)
    basis.unrank_into(observed[k].rank,
                      std::span(occ).subspan(k * static_cast<std::size_t>(m), static_cast<std::size_t>(m)));

  const double base = static_cast<double>(sample.total) / params.target_bubbles;
  Construction best;
  double best_threshold = base;
  double best_key[2] = {std::numeric_limits<double>::infinity(), 0};
  // Bubble count rises as the threshold falls; only roughly, so every
  // evaluated scale competes and the closest count wins.
  auto attempt = [&](double scale) {
    const double threshold = base / scale;
    Construction c = construct(observed, occ, m, n, threshold, params);
    const int live = c.live;
    if (c.bubbles.size() >= 2 && c.live >= 2) {
      const double key[2] = {static_cast<double>(std::abs(c.live - params.target_bubbles)),
                             std::abs(std::log(scale))};
      if (key[0] < best_key[0] || (key[0] == best_key[0] && key[1] < best_key[1])) {
        best_key[0] = key[0];
        best_key[1] = key[1];
        best = std::move(c);
        best_threshold = threshold;
      }
    }
    return live;
  };
  const int first = attempt(1.0);
  if (params.calibrate_threshold && params.radius_step > 0 && first != params.target_bubbles) {
    // Bracket the target in log-scale, then bisect.
    const bool up = first < params.target_bubbles;
    double lo = 1.0, hi = 1.0;
    double factor = up ? 2.0 : 0.5;
    bool bracketed = false;
    while (!bracketed) {
      const double next = hi * factor;
      if (next > kMaxThresholdScale || next < 1.0 / kMaxThresholdScale) break;
      lo = hi;
      hi = next;
      const int live = attempt(hi);
      bracketed = up ? live >= params.target_bubbles : live <= params.target_bubbles;
      if (live == params.target_bubbles) break;
    }
    for (int k = 0; bracketed && k < kBisections && best_key[0] > 0; ++k) {
      const double mid = std::sqrt(lo * hi);
      const int live = attempt(mid);
      if ((live < params.target_bubbles) == up)
        lo = mid;
      else
        hi = mid;
    }
  }
  if (best.bubbles.size() < 2)
    throw std::invalid_argument("build_bubbles: sample collapses into a single bubble");
  if (best.live < 2)
    throw std::invalid_argument("build_bubbles: fewer than two bubbles reach the minimum count");

  BubblePartition partition(sample.shape, std::move(best.bubbles), std::move(best.merges), params,
                            sample.provenance);
  partition.set_threshold(best_threshold);
  return partition;
}

int assign_state(const BubblePartition& partition, const FockState& state) {
  const FockBasis basis(partition.shape().modes, partition.shape().particles);
  basis.validate(state.occupations());
  return partition.label(state.occupations());
}

CoarseDistribution coarse_grain(const BubblePartition& partition, const SampleSet& samples) {
  if (!(samples.shape == partition.shape()))
    throw std::invalid_argument("coarse_grain: sample shape differs from the partition");
  const FockBasis basis(samples.shape.modes, samples.shape.particles);
  CoarseDistribution out;
  out.partition_id = partition.fingerprint();
  out.counts = true;
  out.masses = Eigen::VectorXd::Zero(partition.size());
  std::vector<int> occ(static_cast<std::size_t>(basis.modes()));
  std::uint64_t total = 0;
  for (const auto& [rank, count] : samples.counts) {
    basis.unrank_into(rank, occ);
    out.masses(partition.label(occ)) += static_cast<double>(count);
    total += count;
  }
  if (total != samples.total) throw std::invalid_argument("coarse_grain: sample counts do not sum to N_m");
  out.total = static_cast<double>(total);
  return out;
}

CoarseDistribution coarse_grain(const BubblePartition& partition, const OutcomeDistribution& dist,
                                unsigned threads) {
  if (!(dist.shape == partition.shape()))
    throw std::invalid_argument("coarse_grain: table shape differs from the partition");
  const FockBasis basis(dist.shape.modes, dist.shape.particles);
  const int nb = partition.size();
  if (threads == 0) threads = default_thread_count();
  const std::size_t d = basis.dimension();
  // Partial sums over fixed-size rank chunks, added in chunk order, so the
  // result does not depend on the worker count.
  constexpr std::size_t chunk = 1 << 14;
  const std::size_t chunks = (d + chunk - 1) / chunk;
  std::vector<Eigen::VectorXd> partial(chunks, Eigen::VectorXd::Zero(nb));
  parallel_for(
      chunks,
      [&](std::size_t c0, std::size_t c1) {
        std::vector<int> occ(static_cast<std::size_t>(basis.modes()));
        for (std::size_t c = c0; c < c1; ++c) {
          const std::size_t end = std::min(d, (c + 1) * chunk);
          for (std::size_t r = c * chunk; r < end; ++r) {
            basis.unrank_into(r, occ);
            partial[c](partition.label(occ)) += dist.probs(static_cast<Eigen::Index>(r));
          }
        }
      },
      threads);
  CoarseDistribution out;
  out.partition_id = partition.fingerprint();
  out.counts = false;
  out.masses = Eigen::VectorXd::Zero(nb);
  for (const auto& p : partial) out.masses += p;
  out.total = out.masses.sum();
  return out;
}

std::string partition_to_json(const BubblePartition& partition) {
  nlohmann::ordered_json j;
  j["m"] = partition.shape().modes;
  j["n"] = partition.shape().particles;
  auto bubbles = nlohmann::ordered_json::array();
  for (const Bubble& b : partition.raw_bubbles()) {
    nlohmann::ordered_json e;
    e["center_rank"] = b.center_rank;
    e["radius"] = b.radius;
    e["count"] = b.count;
    bubbles.push_back(std::move(e));
  }
  j["bubbles"] = std::move(bubbles);
  auto merges = nlohmann::ordered_json::array();
  for (const auto& [from, to] : partition.merges()) merges.push_back({from, to});
  j["merges"] = std::move(merges);
  const BubbleParams& p = partition.params();
  j["params"] = {{"target_n_b", p.target_bubbles},
                 {"min_count", p.min_count},
                 {"initial_radius", p.initial_radius},
                 {"radius_step", p.radius_step},
                 {"max_radius", p.max_radius},
                 {"calibrate_threshold", p.calibrate_threshold},
                 {"threshold", partition.threshold()},
                 {"construction_sample", partition.construction_sample()}};
  return j.dump();
}

BubblePartition partition_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const int m = j.at("m").get<int>();
    const int n = j.at("n").get<int>();
    const FockBasis basis(m, n);
    std::vector<Bubble> bubbles;
    for (const auto& e : j.at("bubbles")) {
      Bubble b;
      b.center_rank = e.at("center_rank").get<Rank>();
      b.center = basis.unrank(b.center_rank);
      b.radius = e.at("radius").get<int>();
      b.count = e.value("count", std::uint64_t{0});
      bubbles.push_back(std::move(b));
    }
    std::vector<std::pair<int, int>> merges;
    for (const auto& e : j.at("merges")) merges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    BubbleParams params;
    std::string sample_id;
    if (j.contains("params")) {
      const auto& p = j["params"];
      params.target_bubbles = p.value("target_n_b", params.target_bubbles);
      params.min_count = p.value("min_count", params.min_count);
      params.initial_radius = p.value("initial_radius", params.initial_radius);
      params.radius_step = p.value("radius_step", params.radius_step);
      params.max_radius = p.value("max_radius", params.max_radius);
      params.calibrate_threshold = p.value("calibrate_threshold", params.calibrate_threshold);
      sample_id = p.value("construction_sample", std::string{});
    }
    BubblePartition partition(basis.shape(), std::move(bubbles), std::move(merges), params, sample_id);
    if (j.contains("params")) partition.set_threshold(j["params"].value("threshold", 0.0));
    return partition;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("partition file: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw std::invalid_argument(std::string("partition file: ") + e.what());
  }
}

void save_partition(const BubblePartition& partition, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << partition_to_json(partition) << '\n';
}

BubblePartition load_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return partition_from_json(ss.str());
}

}  // namespace bosoncert
