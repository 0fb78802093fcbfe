#include "bosoncert/fock.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bosoncert {

FockState::FockState(std::vector<int> occupations) : occ_(std::move(occupations)) {
  for (int n : occ_) {
    if (n < 0) throw std::invalid_argument("FockState: negative occupation");
    total_ += n;
  }
}

FockState::FockState(std::initializer_list<int> occupations)
    : FockState(std::vector<int>(occupations)) {}

std::string FockState::to_string() const {
  std::ostringstream os;
  os << '|';
  for (std::size_t i = 0; i < occ_.size(); ++i) {
    if (i) os << ',';
    os << occ_[i];
  }
  os << '>';
  return os.str();
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i is exact at every step
    result = result * (n - k + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                                ") exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t hilbert_dim(int modes, int particles) {
  if (modes < 1 || particles < 1)
    throw std::invalid_argument("hilbert_dim: modes and particles must be positive");
  return binomial(static_cast<std::uint64_t>(modes) + static_cast<std::uint64_t>(particles) - 1,
                  static_cast<std::uint64_t>(particles));
}

ProblemShape ProblemShape::make(int modes, int particles) {
  return ProblemShape{modes, particles, hilbert_dim(modes, particles)};
}

FockBasis::FockBasis(int modes, int particles) : shape_(ProblemShape::make(modes, particles)) {
  const int rows = modes + particles;
  stride_ = static_cast<std::size_t>(particles) + 1;
  table_.assign(static_cast<std::size_t>(rows) * stride_, 0);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (int n = 0; n < rows; ++n) {
    table_[static_cast<std::size_t>(n) * stride_] = 1;
    for (int k = 1; k <= particles && k <= n; ++k) {
      const std::uint64_t a = choose(n - 1, k - 1);
      const std::uint64_t b = choose(n - 1, k);
      table_[static_cast<std::size_t>(n) * stride_ + static_cast<std::size_t>(k)] =
          (a > kMax - b) ? kMax : a + b;
    }
  }
}

void FockBasis::validate(std::span<const int> occupations) const {
  if (static_cast<int>(occupations.size()) != shape_.modes)
    throw std::invalid_argument("Fock state has " + std::to_string(occupations.size()) +
                                " modes, expected " + std::to_string(shape_.modes));
  long total = 0;
  for (int n : occupations) {
    if (n < 0) throw std::invalid_argument("Fock state has a negative occupation");
    total += n;
  }
  if (total != shape_.particles)
    throw std::invalid_argument("Fock state holds " + std::to_string(total) +
                                " particles, expected " + std::to_string(shape_.particles));
}

Rank FockBasis::rank(const FockState& state) const { return rank(state.occupations()); }

Rank FockBasis::rank(std::span<const int> occupations) const {
  validate(occupations);
  Rank r = 0;
  int k = 1;
  for (int mode = 0; mode < shape_.modes; ++mode) {
    for (int c = 0; c < occupations[static_cast<std::size_t>(mode)]; ++c, ++k)
      r += choose(mode + k - 1, k);
  }
  return r;
}

void FockBasis::unrank_into(Rank r, std::span<int> occupations) const {
  if (r >= shape_.dimension)
    throw std::out_of_range("rank " + std::to_string(r) + " outside [0, " +
                            std::to_string(shape_.dimension) + ")");
  if (static_cast<int>(occupations.size()) != shape_.modes)
    throw std::invalid_argument("unrank_into: buffer length differs from mode count");
  std::fill(occupations.begin(), occupations.end(), 0);
  int upper = shape_.modes + shape_.particles - 2;
  for (int k = shape_.particles; k >= 1; --k) {
    int c = upper;
    while (choose(c, k) > r) --c;
    r -= choose(c, k);
    ++occupations[static_cast<std::size_t>(c - (k - 1))];
    upper = c - 1;
  }
}

FockState FockBasis::unrank(Rank r) const {
  std::vector<int> occ(static_cast<std::size_t>(shape_.modes));
  unrank_into(r, occ);
  return FockState(std::move(occ));
}

Rank rank(const FockState& state, const ProblemShape& shape) {
  return FockBasis(shape.modes, shape.particles).rank(state);
}

FockState unrank(Rank r, int modes, int particles) {
  return FockBasis(modes, particles).unrank(r);
}

std::vector<FockState> enumerate_states(int modes, int particles) {
  const FockBasis basis(modes, particles);
  std::vector<FockState> states;
  states.reserve(basis.dimension());
  for (Rank r = 0; r < basis.dimension(); ++r) states.push_back(basis.unrank(r));
  return states;
}

int l1_distance(const FockState& a, const FockState& b) {
  if (a.modes() != b.modes())
    throw std::invalid_argument("l1_distance: mode counts differ");
  if (a.particles() != b.particles())
    throw std::invalid_argument("l1_distance: particle totals differ");
  int d = 0;
  for (int i = 0; i < a.modes(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace bosoncert
