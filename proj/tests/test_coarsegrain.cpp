#include "bosoncert/coarsegrain.hpp"
#include "bosoncert/sampling.hpp"
#include "bosoncert/stats.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <filesystem>
#include <numeric>

using namespace bosoncert;

namespace {

SampleSet sample_of(int m, int n, std::initializer_list<std::pair<FockState, std::uint64_t>> items) {
  SampleSet s;
  s.shape = ProblemShape::make(m, n);
  for (const auto& [state, count] : items) {
    s.counts[rank(state, s.shape)] += count;
    s.total += count;
  }
  s.provenance = "hand";
  return s;
}

int direct_l1(std::span<const int> a, std::span<const int> b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace

TEST_SUITE("coarsegrain") {

TEST_CASE("three separated states with a fixed radius") {
  const SampleSet s = sample_of(3, 3, {{{3, 0, 0}, 50}, {{0, 3, 0}, 30}, {{0, 0, 3}, 20}});
  BubbleParams p;
  p.target_bubbles = 3;
  p.radius_step = 0;
  p.calibrate_threshold = false;
  const BubblePartition part = build_bubbles(s, p);
  REQUIRE(part.raw_bubbles().size() == 3);
  CHECK(part.size() == 3);
  CHECK(part.merges().empty());
  CHECK(part.raw_bubbles()[0].center == FockState{3, 0, 0});
  CHECK(part.raw_bubbles()[1].center == FockState{0, 3, 0});
  CHECK(part.raw_bubbles()[2].center == FockState{0, 0, 3});
  for (const Bubble& b : part.raw_bubbles()) CHECK(b.radius == 2);

  std::vector<int> sizes(3, 0);
  for (const FockState& t : enumerate_states(3, 3)) ++sizes[static_cast<std::size_t>(assign_state(part, t))];
  CHECK(std::accumulate(sizes.begin(), sizes.end(), 0) == 10);
  // (1,1,1) is 4 from every center and falls to the earliest.
  CHECK(assign_state(part, FockState{1, 1, 1}) == 0);
  CHECK(sizes == std::vector<int>{4, 3, 3});
}

TEST_CASE("ties between equal counts go to the lower rank") {
  const SampleSet s = sample_of(3, 3, {{{0, 0, 3}, 40}, {{3, 0, 0}, 40}, {{0, 3, 0}, 40}});
  BubbleParams p;
  p.target_bubbles = 3;
  p.radius_step = 0;
  p.calibrate_threshold = false;
  const BubblePartition part = build_bubbles(s, p);
  CHECK(part.raw_bubbles()[0].center_rank < part.raw_bubbles()[1].center_rank);
  CHECK(part.raw_bubbles()[1].center_rank < part.raw_bubbles()[2].center_rank);
}

TEST_CASE("degenerate inputs") {
  BubbleParams p;
  p.target_bubbles = 2;
  CHECK_THROWS_AS(build_bubbles(sample_of(3, 3, {{{3, 0, 0}, 100}}), p), std::invalid_argument);
  SampleSet empty;
  empty.shape = ProblemShape::make(3, 3);
  CHECK_THROWS_AS(build_bubbles(empty, p), std::invalid_argument);
  p.target_bubbles = 1;
  CHECK_THROWS_AS(build_bubbles(sample_of(3, 3, {{{3, 0, 0}, 50}, {{0, 3, 0}, 50}}), p),
                  std::invalid_argument);
  p.target_bubbles = 2;
  p.radius_step = 3;
  CHECK_THROWS_AS(build_bubbles(sample_of(3, 3, {{{3, 0, 0}, 50}, {{0, 3, 0}, 50}}), p),
                  std::invalid_argument);
  // Every state below the minimum count collapses to one bubble after merging.
  p.radius_step = 2;
  CHECK_THROWS_AS(build_bubbles(sample_of(3, 3, {{{3, 0, 0}, 3}, {{0, 3, 0}, 3}}), p),
                  std::invalid_argument);
}

TEST_CASE("realized bubble count tracks the target at (40,5)") {
  const TableSampler sampler(fixtures::haar40_boson(), true);
  for (int target : {26, 41, 70}) {
    BubbleParams p;
    p.target_bubbles = target;
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) sum += build_bubbles(sampler.draw(10000, seed), p).size();
    const double mean = sum / 100;
    INFO("target " << target << " realized " << mean);
    CHECK(mean >= 0.8 * target);
    CHECK(mean <= 1.2 * target);
  }
}

TEST_CASE("partition invariants and exhaustive totality at (8,8)") {
  const OutcomeDistribution q = boson_distribution(haar_unitary(8, 17), fixtures::first_modes(8, 8));
  const SampleSet s = draw_from_table(q, 10000, 3);
  BubbleParams p;
  p.target_bubbles = 30;
  const BubblePartition part = build_bubbles(s, p);
  const auto bubbles = part.raw_bubbles();

  for (std::size_t k = 0; k < bubbles.size(); ++k) {
    if (k > 0) CHECK(bubbles[k].radius >= bubbles[k - 1].radius);
    for (std::size_t j = 0; j < k; ++j)
      CHECK(direct_l1(bubbles[k].center.occupations(), bubbles[j].center.occupations()) > bubbles[j].radius);
  }
  for (std::uint64_t c : part.construction_counts()) CHECK(c >= 10);

  // Independent reference: first bubble by radius, else nearest center, ties to the earliest.
  const auto states = enumerate_states(8, 8);
  REQUIRE(states.size() == 6435);
  std::vector<int> sizes(static_cast<std::size_t>(part.size()), 0);
  int mismatches = 0;
  for (const FockState& t : states) {
    int raw = -1, nearest = 0, best = 1 << 30;
    for (std::size_t b = 0; b < bubbles.size() && raw < 0; ++b) {
      const int d = direct_l1(t.occupations(), bubbles[b].center.occupations());
      if (d <= bubbles[b].radius) raw = static_cast<int>(b);
      if (d < best) best = d, nearest = static_cast<int>(b);
    }
    if (raw < 0) raw = nearest;
    const int label = assign_state(part, t);
    mismatches += label != part.label_of_raw(raw) ? 1 : 0;
    REQUIRE(label >= 0);
    REQUIRE(label < part.size());
    ++sizes[static_cast<std::size_t>(label)];
  }
  CHECK(mismatches == 0);
  CHECK(std::accumulate(sizes.begin(), sizes.end(), 0) == 6435);
  for (int z : sizes) CHECK(z > 0);

  for (const Bubble& b : bubbles) CHECK(part.label_of_raw(static_cast<int>(&b - bubbles.data())) == assign_state(part, b.center));
}

TEST_CASE("coarse graining conserves mass") {
  const OutcomeDistribution q = boson_distribution(haar_unitary(8, 17), fixtures::first_modes(8, 4));
  const SampleSet s = draw_from_table(q, 10000, 3);
  BubbleParams p;
  p.target_bubbles = 12;
  const BubblePartition part = build_bubbles(s, p);
  const CoarseDistribution c = coarse_grain(part, s);
  CHECK(c.masses.sum() == 10000.0);
  const auto built = part.construction_counts();
  for (int b = 0; b < part.size(); ++b) CHECK(c.masses(b) == static_cast<double>(built[static_cast<std::size_t>(b)]));
  const CoarseDistribution other = coarse_grain(part, draw_uniform(8, 4, 777, 1));
  CHECK(other.masses.sum() == 777.0);
  const CoarseDistribution exact = coarse_grain(part, q);
  CHECK(std::abs(exact.masses.sum() - 1) < 1e-9);
  CHECK(exact.partition_id == c.partition_id);
  CHECK((coarse_grain(part, q, 1).masses.array() == coarse_grain(part, q, 3).masses.array()).all());
  CHECK_THROWS_AS(coarse_grain(part, draw_uniform(8, 3, 10, 1)), std::invalid_argument);
  CHECK_THROWS_AS(coarse_grain(part, uniform_distribution(7, 4)), std::invalid_argument);
  CHECK_THROWS_AS(assign_state(part, FockState{1, 1, 1}), std::invalid_argument);
}

TEST_CASE("single bubble partition") {
  const auto shape = ProblemShape::make(4, 2);
  const BubblePartition part(shape, {Bubble{FockState{2, 0, 0, 0}, 0, 4, 5}}, {}, {}, "x");
  CHECK(part.size() == 1);
  const CoarseDistribution c = coarse_grain(part, uniform_distribution(4, 2));
  CHECK(c.masses(0) == doctest::Approx(1.0));
}

TEST_CASE("construction is deterministic and serializes") {
  const SampleSet s = draw_from_table(fixtures::haar40_boson(), 10000, 42);
  const BubblePartition a = build_bubbles(s);
  const BubblePartition b = build_bubbles(s);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(partition_to_json(a) == partition_to_json(b));

  const BubblePartition back = partition_from_json(partition_to_json(a));
  CHECK(back.fingerprint() == a.fingerprint());
  CHECK(back.size() == a.size());
  CHECK(back.threshold() == a.threshold());
  CHECK(back.construction_counts() == a.construction_counts());
  CHECK((coarse_grain(back, s).masses.array() == coarse_grain(a, s).masses.array()).all());

  const auto path = std::filesystem::temp_directory_path() / "bosoncert_partition_test.json";
  save_partition(a, path);
  CHECK(load_partition(path).fingerprint() == a.fingerprint());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(partition_from_json("{\"m\": 3}"), std::invalid_argument);
  CHECK_THROWS_AS(load_partition(path), std::runtime_error);
}

TEST_CASE("coarse samples fit the coarse exact law at (40,5)") {
  const OutcomeDistribution& q = fixtures::haar40_boson();
  const TableSampler sampler(q, true);
  int tested = 0, rejected = 0;
  double n_b = 0;
  // 100 partitions, each checked against 5 held-out samples.
  for (std::uint64_t build = 0; build < 100; ++build) {
    const BubblePartition part = build_bubbles(sampler.draw(10000, 1000 + build));
    n_b += part.size();
    const Eigen::VectorXd expected = coarse_grain(part, q).masses * 10000.0;
    for (std::uint64_t k = 0; k < 5; ++k) {
      const CoarseDistribution obs = coarse_grain(part, sampler.draw(10000, 5000 + 5 * build + k));
      const double chi2 = ((obs.masses - expected).array().square() / expected.array()).sum();
      rejected += chi2_sf(chi2, part.size() - 1) <= 1e-3 ? 1 : 0;
      ++tested;
    }
  }
  CHECK(tested == 500);
  CHECK(n_b / 100 == doctest::Approx(40).epsilon(0.2));
  CHECK(rejected <= 5);  // at least 99% pass
}

}
