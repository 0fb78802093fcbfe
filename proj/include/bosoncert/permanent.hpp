#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace bosoncert {

inline constexpr int kMaxRyserOrder = 30;
inline constexpr int kMaxNaiveOrder = 8;

struct PermanentOptions {
  /// Neumaier-compensated accumulation of the subset terms.
  bool compensated = false;
};

namespace detail {

template <typename Scalar>
bool is_finite(const Scalar& x) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    return std::isfinite(x);
  } else {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
  }
}

template <typename Derived>
void check_permanent_input(const Eigen::MatrixBase<Derived>& a, int max_order, const char* who) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix is not square");
  if (a.rows() == 0) throw std::invalid_argument(std::string(who) + ": empty matrix");
  if (a.rows() > max_order)
    throw std::invalid_argument(std::string(who) + ": order " + std::to_string(a.rows()) +
                                " exceeds the cap of " + std::to_string(max_order));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!is_finite(a(i, j)))
        throw std::invalid_argument(std::string(who) + ": non-finite entry");
}

// Neumaier summation, applied componentwise for complex scalars.
template <typename Real>
struct CompensatedSum {
  Real sum{0};
  Real carry{0};
  void add(Real x) {
    const Real t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  Real value() const { return sum + carry; }
};

}  // namespace detail

/// Ryser's formula with Gray-code subset order: one column update per step,
/// O(2^n n) operations in total.
template <typename Derived>
typename Derived::Scalar permanent_ryser(const Eigen::MatrixBase<Derived>& a,
                                         PermanentOptions options = {}) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  detail::check_permanent_input(a, kMaxRyserOrder, "permanent_ryser");

  const int n = static_cast<int>(a.rows());
  using Local = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                              kMaxRyserOrder, kMaxRyserOrder>;
  using Sums = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxRyserOrder, 1>;
  const Local m = a;
  Sums row_sums = Sums::Zero(n);

  Scalar total{0};
  detail::CompensatedSum<Real> re, im;
  std::uint32_t gray = 0;
  const std::uint32_t steps = std::uint32_t{1} << n;
  for (std::uint32_t k = 1; k < steps; ++k) {
    const int j = std::countr_zero(k);
    const std::uint32_t bit = std::uint32_t{1} << j;
    gray ^= bit;
    if (gray & bit)
      row_sums += m.col(j);
    else
      row_sums -= m.col(j);
    Scalar prod = row_sums(0);
    for (int i = 1; i < n; ++i) prod *= row_sums(i);
    if (std::popcount(gray) & 1) prod = -prod;
    if (options.compensated) {
      if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
        re.add(prod.real());
        im.add(prod.imag());
      } else {
        re.add(prod);
      }
    } else {
      total += prod;
    }
  }
  if (options.compensated) {
    if constexpr (Eigen::NumTraits<Scalar>::IsComplex)
      total = Scalar(re.value(), im.value());
    else
      total = re.value();
  }
  return (n & 1) ? -total : total;
}

/// Direct sum over all n! permutations. Verification oracle only.
template <typename Derived>
typename Derived::Scalar permanent_naive(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::check_permanent_input(a, kMaxNaiveOrder, "permanent_naive");
  const int n = static_cast<int>(a.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Scalar total{0};
  do {
    Scalar prod{1};
    for (int i = 0; i < n; ++i) prod *= a(i, perm[static_cast<std::size_t>(i)]);
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

}  // namespace bosoncert
