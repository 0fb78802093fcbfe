#include "bosoncert/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace bosoncert;

TEST_SUITE("rng") {

TEST_CASE("published reference outputs") {
  std::uint64_t state = 1234567;
  CHECK(splitmix64(state) == 6457827717110365317ULL);
  CHECK(splitmix64(state) == 3203168211198807973ULL);
  CHECK(splitmix64(state) == 9817491932198370423ULL);

  // xoshiro256** seeded by SplitMix64(42), computed with an independent script.
  Rng rng(42);
  CHECK(rng() == 1546998764402558742ULL);
  CHECK(rng() == 6990951692964543102ULL);
  CHECK(rng() == 12544586762248559009ULL);
  CHECK(rng() == 17057574109182124193ULL);

  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("streams are deterministic and distinct") {
  CHECK(Rng::stream_key(1, 2, "s1") == Rng::stream_key(1, 2, "s1"));
  std::set<std::uint64_t> keys;
  for (std::uint64_t run = 0; run < 200; ++run)
    for (const char* role : {"s1", "s2", "uniform", "distinguishable"})
      keys.insert(Rng::stream_key(9, run, role));
  CHECK(keys.size() == 800);
  CHECK(Rng::stream_key(1, 0, "s1") != Rng::stream_key(2, 0, "s1"));
}

TEST_CASE("bounded integers are in range and unbiased") {
  Rng rng(5);
  CHECK_THROWS(rng.below(0));
  CHECK(rng.below(1) == 0);
  std::vector<int> counts(6, 0);
  const int draws = 600000;
  for (int i = 0; i < draws; ++i) {
    const auto x = rng.below(6);
    REQUIRE(x < 6);
    ++counts[x];
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - draws / 6.0) * (c - draws / 6.0) / (draws / 6.0);
  CHECK(chi2 < 20.5);  // chi2(5) upper 0.1% point
  const std::uint64_t big = (1ULL << 63) + 12345;
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(big) < big);
}

TEST_CASE("uniform and normal moments") {
  Rng rng(17);
  const int n = 400000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sn / n) < 5 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 5 * std::sqrt(2.0 / n));
}

}
