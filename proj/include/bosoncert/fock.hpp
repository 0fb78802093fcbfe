#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace bosoncert {

using Rank = std::uint64_t;

/// Occupation-number basis state: particles per mode.
class FockState {
public:
  FockState() = default;
  explicit FockState(std::vector<int> occupations);
  FockState(std::initializer_list<int> occupations);

  int modes() const { return static_cast<int>(occ_.size()); }
  int particles() const { return total_; }
  std::span<const int> occupations() const { return occ_; }
  int operator[](int mode) const { return occ_[static_cast<std::size_t>(mode)]; }

  bool operator==(const FockState& other) const { return occ_ == other.occ_; }

  /// Ket notation, e.g. "|1,1,0>".
  std::string to_string() const;

private:
  std::vector<int> occ_;
  int total_ = 0;
};

/// Exact binomial coefficient; throws std::overflow_error past 64 bits.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Number of N-particle states over M modes, C(M+N-1, N).
std::uint64_t hilbert_dim(int modes, int particles);

struct ProblemShape {
  int modes = 0;
  int particles = 0;
  std::uint64_t dimension = 0;

  static ProblemShape make(int modes, int particles);
  bool operator==(const ProblemShape&) const = default;
};

/// Colexicographic ranking over the (M, N) Fock space.
///
/// States are ordered by comparing occupations from the last mode backwards,
/// so |N,0,...,0> has rank 0 and |0,...,0,N> has rank D-1. Writing the
/// occupied modes as a sorted multiset m_1 <= ... <= m_N, the rank is
/// sum_k C(m_k + k - 1, k), the combinatorial number system applied to the
/// strictly increasing sequence m_k + k - 1.
class FockBasis {
public:
  FockBasis(int modes, int particles);

  const ProblemShape& shape() const { return shape_; }
  int modes() const { return shape_.modes; }
  int particles() const { return shape_.particles; }
  std::uint64_t dimension() const { return shape_.dimension; }

  Rank rank(const FockState& state) const;
  Rank rank(std::span<const int> occupations) const;
  FockState unrank(Rank r) const;
  /// Allocation-free unrank into a caller buffer of length M.
  void unrank_into(Rank r, std::span<int> occupations) const;

  /// Throws std::invalid_argument unless the state belongs to this space.
  void validate(std::span<const int> occupations) const;

private:
  std::uint64_t choose(int n, int k) const {
    return table_[static_cast<std::size_t>(n) * stride_ + static_cast<std::size_t>(k)];
  }

  ProblemShape shape_;
  std::size_t stride_ = 0;
  // Pascal table, saturating; entries reachable from a valid rank are exact.
  std::vector<std::uint64_t> table_;
};

Rank rank(const FockState& state, const ProblemShape& shape);
FockState unrank(Rank r, int modes, int particles);

/// All D states in rank order. Intended for small spaces.
std::vector<FockState> enumerate_states(int modes, int particles);

/// Sum_i |a_i - b_i|. Even whenever both states hold the same particle count.
int l1_distance(const FockState& a, const FockState& b);

}  // namespace bosoncert
