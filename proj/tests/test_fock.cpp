#include "bosoncert/fock.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

using namespace bosoncert;

namespace {

// Colex order: compare from the last mode down, fewer particles first.
bool colex_less(std::span<const int> a, std::span<const int> b) {
  for (std::size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

}  // namespace

TEST_SUITE("fock") {

TEST_CASE("hilbert dimension") {
  CHECK(hilbert_dim(40, 5) == 1086008);
  CHECK(hilbert_dim(12, 12) == 1352078);
  CHECK(hilbert_dim(1, 7) == 1);
  CHECK(hilbert_dim(2, 1) == 2);
  CHECK_THROWS_AS(hilbert_dim(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(hilbert_dim(3, 0), std::invalid_argument);
  CHECK_THROWS_AS(hilbert_dim(2000, 2000), std::overflow_error);
  CHECK_THROWS_AS(binomial(200, 100), std::overflow_error);
  CHECK(binomial(67, 33) == 14226520737620288370ULL);
}

TEST_CASE("dimension matches explicit enumeration for small shapes") {
  for (int m = 1; m <= 8; ++m)
    for (int n = 1; n <= 8; ++n)
      CHECK(hilbert_dim(m, n) == oracle::all_states(m, n).size());
}

TEST_CASE("rank anchors") {
  const FockBasis basis(4, 3);
  CHECK(basis.rank(FockState{3, 0, 0, 0}) == 0);
  CHECK(basis.rank(FockState{0, 0, 0, 3}) == basis.dimension() - 1);
  CHECK(unrank(0, 2, 2) == FockState{2, 0});
  CHECK(unrank(2, 2, 2) == FockState{0, 2});
}

TEST_CASE("enumeration of (3,3)") {
  const auto states = enumerate_states(3, 3);
  CHECK(states.size() == 10);
  std::set<std::vector<int>> distinct;
  for (const auto& s : states) distinct.insert({s.occupations().begin(), s.occupations().end()});
  CHECK(distinct.size() == 10);
}

TEST_CASE("exhaustive round trip at (8,8)") {
  const FockBasis basis(8, 8);
  REQUIRE(basis.dimension() == 6435);
  std::vector<int> prev, occ(8);
  for (Rank r = 0; r < basis.dimension(); ++r) {
    basis.unrank_into(r, occ);
    CHECK(basis.rank(occ) == r);
    if (!prev.empty()) CHECK(colex_less(prev, occ));
    prev = occ;
  }
}

TEST_CASE("rank is a bijection matching the oracle enumeration") {
  const auto states = oracle::all_states(5, 4);
  const FockBasis basis(5, 4);
  std::vector<Rank> ranks;
  for (const auto& s : states) ranks.push_back(basis.rank(s));
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t k = 0; k < ranks.size(); ++k) CHECK(ranks[k] == k);
}

TEST_CASE("random round trips at (12,12)") {
  const FockBasis basis(12, 12);
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<Rank> pick(0, basis.dimension() - 1);
  for (int i = 0; i < 1000; ++i) {
    const Rank r = pick(gen);
    const FockState s = basis.unrank(r);
    CHECK(s.particles() == 12);
    CHECK(basis.rank(s) == r);
    if (r + 1 < basis.dimension()) CHECK(colex_less(s.occupations(), basis.unrank(r + 1).occupations()));
  }
}

TEST_CASE("validation errors") {
  const FockBasis basis(3, 2);
  CHECK_THROWS_AS(basis.rank(FockState{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(basis.rank(FockState{1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(FockState(std::vector<int>{1, -1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(basis.unrank(basis.dimension()), std::out_of_range);
  CHECK_THROWS_AS(FockBasis(0, 2), std::invalid_argument);
}

TEST_CASE("L1 distance") {
  CHECK(l1_distance(FockState{1, 1, 0}, FockState{0, 1, 1}) == 2);
  CHECK(l1_distance(FockState{1, 1, 0}, FockState{1, 1, 0}) == 0);
  CHECK(l1_distance(FockState{3, 0, 0}, FockState{0, 0, 3}) == 6);
  CHECK_THROWS_AS(l1_distance(FockState{1, 0}, FockState{1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(l1_distance(FockState{1, 0}, FockState{2, 0}), std::invalid_argument);

  const FockBasis basis(8, 8);
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<Rank> pick(0, basis.dimension() - 1);
  for (int i = 0; i < 2000; ++i) {
    const FockState a = basis.unrank(pick(gen)), b = basis.unrank(pick(gen)), c = basis.unrank(pick(gen));
    const int ab = l1_distance(a, b);
    CHECK(ab % 2 == 0);
    CHECK(ab == l1_distance(b, a));
    CHECK(ab <= l1_distance(a, c) + l1_distance(c, b));
    CHECK((ab == 0) == (a == b));
  }
}

TEST_CASE("state text") { CHECK(FockState{1, 0, 2}.to_string() == "|1,0,2>"); }

}
