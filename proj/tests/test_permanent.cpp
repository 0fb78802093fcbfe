#include "bosoncert/permanent.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <random>

using namespace bosoncert;
using cplx = std::complex<double>;

namespace {

Eigen::MatrixXcd random_complex(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(gen), g(gen));
  return a;
}

double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace

TEST_SUITE("permanent") {

TEST_CASE("hand values") {
  for (int n = 1; n <= 12; ++n) CHECK(permanent_ryser(Eigen::MatrixXd::Identity(n, n)) == doctest::Approx(1.0));
  Eigen::Matrix2d a;
  a << 1, 2, 3, 4;
  CHECK(permanent_ryser(a) == doctest::Approx(10.0));
  CHECK(permanent_naive(a) == doctest::Approx(10.0));
  Eigen::Matrix2d swap;
  swap << 0, 1, 1, 0;
  CHECK(permanent_naive(swap) == doctest::Approx(1.0));
  double fact = 1;
  for (int n = 1; n <= 8; ++n) {
    fact *= n;
    CHECK(permanent_naive(Eigen::MatrixXd::Ones(n, n)) == doctest::Approx(fact));
    CHECK(permanent_ryser(Eigen::MatrixXd::Ones(n, n)) == doctest::Approx(fact));
  }
}

TEST_CASE("Ryser agrees with the naive expansion") {
  std::mt19937_64 gen(3);
  const Eigen::MatrixXcd six = random_complex(6, gen);
  CHECK(rel_err(permanent_ryser(six), permanent_naive(six)) < 1e-10);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 6;
    const Eigen::MatrixXcd a = random_complex(n, gen);
    CHECK(rel_err(permanent_ryser(a), permanent_naive(a)) < 1e-10);
    CHECK(rel_err(permanent_ryser(a, {.compensated = true}), permanent_naive(a)) < 1e-10);
  }
}

TEST_CASE("row and column symmetries") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 5;
    Eigen::MatrixXcd a = random_complex(n, gen);
    const cplx p = permanent_ryser(a);
    Eigen::MatrixXcd b = a;
    b.row(0).swap(b.row(n - 1));
    CHECK(rel_err(permanent_ryser(b), p) < 1e-10);
    b = a;
    b.col(1).swap(b.col(n - 1));
    CHECK(rel_err(permanent_ryser(b), p) < 1e-10);
    b = a;
    const cplx c(0.3, -1.7);
    b.row(1) *= c;
    CHECK(rel_err(permanent_ryser(b), c * p) < 1e-10);
  }
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(permanent_ryser(Eigen::MatrixXd(0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(permanent_ryser(Eigen::MatrixXd::Ones(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(permanent_ryser(Eigen::MatrixXd::Ones(31, 31)), std::invalid_argument);
  CHECK_THROWS_AS(permanent_naive(Eigen::MatrixXd::Ones(9, 9)), std::invalid_argument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(3, 3);
  bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(permanent_ryser(bad), std::invalid_argument);
  bad(1, 2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(permanent_naive(bad), std::invalid_argument);
}

}
