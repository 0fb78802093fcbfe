#include "bosoncert/sampling.hpp"

#include "bosoncert/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bosoncert {
namespace {

constexpr double kNormalizationTolerance = 1e-9;

std::vector<int> collision_free_modes(const FockState& input, const char* who) {
  std::vector<int> modes;
  for (int i = 0; i < input.modes(); ++i) {
    if (input[i] > 1)
      throw std::invalid_argument(std::string(who) + ": collision inputs (s_i > 1) are unsupported");
    if (input[i] == 1) modes.push_back(i);
  }
  return modes;
}

std::string seed_tag(std::uint64_t seed) { return "seed=" + std::to_string(seed); }

}  // namespace

void validate(const SampleSet& samples) {
  std::uint64_t sum = 0;
  for (const auto& [rank, count] : samples.counts) {
    if (rank >= samples.shape.dimension)
      throw std::invalid_argument("sample set: rank " + std::to_string(rank) + " outside [0, D)");
    if (count == 0) throw std::invalid_argument("sample set: zero count stored");
    sum += count;
  }
  if (sum != samples.total)
    throw std::invalid_argument("sample set: counts sum to " + std::to_string(sum) +
                                ", expected " + std::to_string(samples.total));
}

TableSampler::TableSampler(const OutcomeDistribution& dist, bool use_alias)
    : shape_(dist.shape), provenance_(dist.provenance), use_alias_(use_alias) {
  const auto d = static_cast<std::size_t>(dist.probs.size());
  if (d == 0 || d != shape_.dimension) throw std::invalid_argument("table sampler: table length differs from D");
  if ((dist.probs.array() < 0).any() || !dist.probs.allFinite())
    throw std::invalid_argument("table sampler: table has negative or non-finite entries");
  const double total = dist.total();
  if (std::abs(total - 1.0) > kNormalizationTolerance)
    throw std::invalid_argument("table sampler: table is not normalized (sum = " +
                                std::to_string(total) + ")");

  if (!use_alias_) {
    cumulative_.resize(d);
    double acc = 0;
    for (std::size_t k = 0; k < d; ++k) cumulative_[k] = (acc += dist.probs(static_cast<Eigen::Index>(k)));
    return;
  }

  // Vose's alias method.
  alias_prob_.assign(d, 0.0);
  alias_index_.resize(d);
  std::vector<double> scaled(d);
  std::vector<Rank> small, large;
  for (std::size_t k = 0; k < d; ++k) {
    scaled[k] = dist.probs(static_cast<Eigen::Index>(k)) / total * static_cast<double>(d);
    (scaled[k] < 1.0 ? small : large).push_back(k);
  }
  while (!small.empty() && !large.empty()) {
    const Rank s = small.back();
    small.pop_back();
    const Rank l = large.back();
    alias_prob_[s] = scaled[s];
    alias_index_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (Rank k : large) {
    alias_prob_[k] = 1.0;
    alias_index_[k] = k;
  }
  for (Rank k : small) {  // leftovers from rounding
    alias_prob_[k] = 1.0;
    alias_index_[k] = k;
  }
}

SampleSet TableSampler::draw(std::uint64_t n_m, std::uint64_t seed) const {
  if (n_m < 1) throw std::invalid_argument("draw: N_m must be at least 1");
  Rng rng(seed);
  std::vector<Rank> draws(n_m);
  if (use_alias_) {
    const std::uint64_t d = alias_prob_.size();
    for (auto& r : draws) {
      const Rank column = rng.below(d);
      r = rng.uniform() < alias_prob_[column] ? column : alias_index_[column];
    }
  } else {
    const double total = cumulative_.back();
    // Last rank with positive mass, for the u * total == total rounding edge.
    auto last = static_cast<Rank>(cumulative_.size() - 1);
    while (last > 0 && cumulative_[last] == cumulative_[last - 1]) --last;
    for (auto& r : draws) {
      const double u = rng.uniform() * total;
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      r = it == cumulative_.end() ? last : static_cast<Rank>(it - cumulative_.begin());
    }
  }
  SampleSet out;
  out.shape = shape_;
  out.total = n_m;
  out.seed = seed;
  out.provenance = "table{" + provenance_ + "," + seed_tag(seed) + "}";
  for (Rank r : draws) ++out.counts[r];
  return out;
}

SampleSet draw_from_table(const OutcomeDistribution& dist, std::uint64_t n_m, std::uint64_t seed) {
  const bool alias = n_m > dist.shape.dimension / 10;
  return TableSampler(dist, alias).draw(n_m, seed);
}

SampleSet draw_distinguishable_direct(const Interferometer& device, const FockState& input,
                                      std::uint64_t n_m, std::uint64_t seed) {
  if (input.modes() != device.modes())
    throw std::invalid_argument("draw_distinguishable_direct: input and interferometer sizes differ");
  if (n_m < 1) throw std::invalid_argument("draw: N_m must be at least 1");
  const std::vector<int> sources = collision_free_modes(input, "draw_distinguishable_direct");
  const FockBasis basis(input.modes(), input.particles());
  const int m = input.modes();

  std::vector<std::vector<double>> cdf(sources.size(), std::vector<double>(static_cast<std::size_t>(m)));
  for (std::size_t p = 0; p < sources.size(); ++p) {
    double acc = 0;
    for (int j = 0; j < m; ++j) cdf[p][static_cast<std::size_t>(j)] = (acc += std::norm(device.u(j, sources[p])));
  }

  Rng rng(seed);
  SampleSet out;
  out.shape = basis.shape();
  out.total = n_m;
  out.seed = seed;
  out.provenance = "distinguishable_direct{u=" + describe(device.provenance) +
                   ",input=" + input.to_string() + "," + seed_tag(seed) + "}";
  std::vector<int> occ(static_cast<std::size_t>(m));
  for (std::uint64_t shot = 0; shot < n_m; ++shot) {
    std::fill(occ.begin(), occ.end(), 0);
    for (const auto& column : cdf) {
      const double u = rng.uniform() * column.back();
      auto it = std::upper_bound(column.begin(), column.end(), u);
      if (it == column.end()) --it;
      ++occ[static_cast<std::size_t>(it - column.begin())];
    }
    ++out.counts[basis.rank(occ)];
  }
  return out;
}

SampleSet draw_uniform(int modes, int particles, std::uint64_t n_m, std::uint64_t seed) {
  if (n_m < 1) throw std::invalid_argument("draw: N_m must be at least 1");
  SampleSet out;
  out.shape = ProblemShape::make(modes, particles);
  out.total = n_m;
  out.seed = seed;
  out.provenance = "uniform{" + seed_tag(seed) + "}";
  Rng rng(seed);
  for (std::uint64_t shot = 0; shot < n_m; ++shot) ++out.counts[rng.below(out.shape.dimension)];
  return out;
}

double fidelity(const SampleSet& a, const SampleSet& b) {
  if (!(a.shape == b.shape)) throw std::invalid_argument("fidelity: sample shapes differ");
  if (a.total == 0 || b.total == 0) throw std::invalid_argument("fidelity: empty sample set");
  double f = 0;
  auto ia = a.counts.begin();
  auto ib = b.counts.begin();
  while (ia != a.counts.end() && ib != b.counts.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      f += std::sqrt(static_cast<double>(ia->second) * static_cast<double>(ib->second));
      ++ia;
      ++ib;
    }
  }
  return f / std::sqrt(static_cast<double>(a.total) * static_cast<double>(b.total));
}

double fidelity(const SampleSet& a, const OutcomeDistribution& q) {
  if (!(a.shape == q.shape)) throw std::invalid_argument("fidelity: shapes differ");
  if (a.total == 0) throw std::invalid_argument("fidelity: empty sample set");
  double f = 0;
  for (const auto& [rank, count] : a.counts)
    f += std::sqrt(static_cast<double>(count) / static_cast<double>(a.total) *
                   q.probs(static_cast<Eigen::Index>(rank)));
  return f;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".json");
}

void save_samples(const SampleSet& samples, const std::filesystem::path& csv_path) {
  validate(samples);
  {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << "rank,count\n";
    for (const auto& [rank, count] : samples.counts) out << rank << ',' << count << '\n';
  }
  nlohmann::ordered_json meta;
  meta["m"] = samples.shape.modes;
  meta["n"] = samples.shape.particles;
  meta["n_m"] = samples.total;
  meta["seed"] = samples.seed;
  meta["provenance"] = samples.provenance;
  std::ofstream side(sidecar_path(csv_path));
  if (!side) throw std::runtime_error("cannot write " + sidecar_path(csv_path).string());
  side << meta.dump() << '\n';
}

SampleSet load_samples(const std::filesystem::path& csv_path) {
  std::ifstream side(sidecar_path(csv_path));
  if (!side) throw std::runtime_error("cannot read " + sidecar_path(csv_path).string());
  SampleSet s;
  try {
    const auto meta = nlohmann::json::parse(side);
    s.shape = ProblemShape::make(meta.at("m").get<int>(), meta.at("n").get<int>());
    s.total = meta.at("n_m").get<std::uint64_t>();
    s.seed = meta.at("seed").get<std::uint64_t>();
    s.provenance = meta.value("provenance", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("sample sidecar: " + std::string(e.what()));
  }
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot read " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "rank,count")
    throw std::invalid_argument("sample file: expected header 'rank,count'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Rank rank;
    std::uint64_t count;
    char comma;
    if (!(row >> rank >> comma >> count) || comma != ',')
      throw std::invalid_argument("sample file: malformed row '" + line + "'");
    if (count > 0) s.counts[rank] += count;
  }
  validate(s);
  return s;
}

}  // namespace bosoncert
