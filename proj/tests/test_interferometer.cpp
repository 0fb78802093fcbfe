#include "bosoncert/distributions.hpp"
#include "bosoncert/interferometer.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace bosoncert;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

IonChain yb_chain(int ions) {
  return IonChain::make(ions, constants::kYb171Mass, kTwoPi * 0.03e6, kTwoPi * 4e6);
}

Eigen::MatrixXcd random_hermitian(int m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = Complex(g(gen), g(gen));
  return (a + a.adjoint()) / 2.0;
}

}  // namespace

TEST_SUITE("interferometer") {

TEST_CASE("Haar unitaries") {
  const Interferometer one = haar_unitary(1, 4);
  CHECK(std::abs(std::abs(one.u(0, 0)) - 1.0) < 1e-14);
  CHECK(unitarity_residual(haar_unitary(40, 1).u) < 1e-10);
  CHECK(haar_unitary(6, 9).u == haar_unitary(6, 9).u);
  CHECK(describe(haar_unitary(3, 9).provenance) == "haar{seed=9}");
  CHECK_THROWS_AS(haar_unitary(0, 1), std::invalid_argument);

  std::set<std::pair<double, double>> firsts;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Complex z = haar_unitary(3, seed).u(0, 0);
    firsts.insert({z.real(), z.imag()});
  }
  CHECK(firsts.size() == 1000);
}

TEST_CASE("Haar eigenangles are uniform") {
  std::vector<int> bins(16, 0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(haar_unitary(8, 1000 + seed).u);
    for (const Complex& z : eig.eigenvalues()) {
      const double theta = std::arg(z) + std::numbers::pi;  // [0, 2 pi]
      ++bins[std::min(15, static_cast<int>(theta / kTwoPi * 16))];
    }
  }
  const double expected = 2000.0 * 8 / 16;
  double chi2 = 0;
  for (int b : bins) chi2 += (b - expected) * (b - expected) / expected;
  CHECK(chi2 < 37.6972982183538);  // chi2(15) upper 0.1% point
}

TEST_CASE("ion equilibrium positions") {
  const Eigen::VectorXd two = ion_equilibrium_positions_dimensionless(2);
  CHECK(two(0) == doctest::Approx(-0.6299605249474366).epsilon(1e-12));
  CHECK(two(1) == doctest::Approx(0.6299605249474366).epsilon(1e-12));
  for (int m : {3, 5, 8, 12, 20}) {
    const Eigen::VectorXd u = ion_equilibrium_positions_dimensionless(m);
    CHECK(ion_force_residual(u) < 1e-12);
    for (int i = 0; i < m; ++i) CHECK(std::abs(u(i) + u(m - 1 - i)) < 1e-12);
    for (int i = 1; i < m; ++i) CHECK(u(i) > u(i - 1));
  }
  const Eigen::VectorXd z = ion_equilibrium_positions(12, constants::kYb171Mass, kTwoPi * 0.03e6);
  const double ell = coulomb_length(constants::kYb171Mass, kTwoPi * 0.03e6);
  CHECK(ion_force_residual(z / ell) < 1e-12);
  CHECK_THROWS_AS(ion_equilibrium_positions_dimensionless(1), std::invalid_argument);
}

TEST_CASE("ion hopping matrix") {
  const IonChain two = yb_chain(2);
  const Eigen::MatrixXd h2 = ion_hopping_matrix(two);
  const double e = 1.602176634e-19, eps0 = 8.8541878128e-12, mass = 171 * 1.66053906660e-27;
  const double t0 = e * e / (8 * std::numbers::pi * eps0 * mass * kTwoPi * 4e6);
  const double d = std::abs(two.positions(1) - two.positions(0));
  CHECK(h2(0, 1) == doctest::Approx(t0 / (d * d * d)).epsilon(1e-12));
  CHECK(h2(0, 0) == doctest::Approx(-h2(0, 1)).epsilon(1e-12));

  const IonChain chain = yb_chain(12);
  const Eigen::MatrixXd h = ion_hopping_matrix(chain);
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const double scale = h.cwiseAbs().maxCoeff();
  for (int i = 0; i < 12; ++i) {
    CHECK(std::abs(h.row(i).sum()) < 1e-12 * scale);
    for (int j = 0; j < 12; ++j)
      if (i != j) CHECK(h(i, j) > 0);
  }
  for (int i = 1; i + 2 < 12; ++i) CHECK(h(i, i + 1) > h(i, i + 2));

  IonChain broken = chain;
  broken.positions(3) = broken.positions(2);
  CHECK_THROWS_AS(ion_hopping_matrix(broken), std::invalid_argument);
}

TEST_CASE("evolution") {
  const Eigen::MatrixXcd h = ion_hopping_matrix(yb_chain(12)).cast<Complex>();
  CHECK((evolve(h, 0).u - Eigen::MatrixXcd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-14);
  const Eigen::MatrixXcd ab = evolve(h, 37e-6).u * evolve(h, 63e-6).u;
  CHECK((ab - evolve(h, 100e-6).u).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(unitarity_residual(ion_interferometer(yb_chain(12), 100e-6).u) < 1e-10);
  Eigen::MatrixXcd bad = h;
  bad(0, 1) += Complex(0, 1e3);
  CHECK_THROWS_AS(evolve(bad, 1e-6), std::invalid_argument);
}

TEST_CASE("random phase unitaries") {
  const Eigen::MatrixXcd h = ion_hopping_matrix(yb_chain(8)).cast<Complex>();
  const Interferometer zero = random_phase_unitary(h, Eigen::VectorXd::Zero(8));
  CHECK((zero.u - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
  const Interferometer u = random_phase_unitary(h, 5);
  CHECK(unitarity_residual(u.u) < 1e-10);
  CHECK((u.u * h - h * u.u).cwiseAbs().maxCoeff() < 1e-8 * h.cwiseAbs().maxCoeff());
  CHECK(u.u == random_phase_unitary(h, 5).u);
  CHECK_THROWS_AS(random_phase_unitary(h, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("timing noise") {
  const Eigen::MatrixXcd h = ion_hopping_matrix(yb_chain(12)).cast<Complex>();
  const EvolutionRequest request{h, 100e-6, IonSource{}};
  CHECK((perturb_timing(request, 0).u - evolve(h, 100e-6).u).cwiseAbs().maxCoeff() == 0.0);
  CHECK((perturb_timing(request, 0.01).u - evolve(h, 101e-6).u).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((perturb_timing(request, 0.03).u - evolve(h, 103e-6).u).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(perturb_timing(request, -1.5), std::invalid_argument);
}

TEST_CASE("Hamiltonian noise") {
  const Interferometer u = haar_unitary(40, 2);
  CHECK((perturb_hamiltonian(u, 0, 1).u - u.u).cwiseAbs().maxCoeff() < 1e-10);
  const Interferometer noisy = perturb_hamiltonian(u, 0.01, 1);
  CHECK(unitarity_residual(noisy.u) < 1e-10);
  CHECK(unitarity_residual(perturb_hamiltonian(u, 0.01, 1, NoiseLaw::uniform).u) < 1e-10);
  CHECK(noisy.u == perturb_hamiltonian(u, 0.01, 1).u);

  // The deviation grows linearly at small eta.
  double prev = 0;
  for (double eta : {1e-3, 1e-2, 1e-1}) {
    const double dev = (perturb_hamiltonian(u, eta, 3).u - u.u).cwiseAbs().maxCoeff();
    if (prev > 0) CHECK(dev / prev == doctest::Approx(10.0).epsilon(0.1));
    prev = dev;
  }

  const Eigen::MatrixXcd heff = effective_hamiltonian(u.u);
  CHECK(hermiticity_residual(heff) < 1e-12);
  CHECK((evolve(heff, 1.0).u - u.u).cwiseAbs().maxCoeff() < 1e-10);

  // Eigenvalue exactly on the branch cut.
  Eigen::MatrixXcd cut = Eigen::MatrixXcd::Identity(3, 3);
  cut(0, 0) = -1;
  const Eigen::MatrixXcd rotated = haar_unitary(3, 4).u * cut * haar_unitary(3, 4).u.adjoint();
  const Interferometer same = perturb_hamiltonian(Interferometer{rotated, HaarSource{}}, 0, 1);
  CHECK((same.u - rotated).cwiseAbs().maxCoeff() < 1e-8);

  Eigen::MatrixXcd not_unitary = u.u;
  not_unitary(0, 0) *= 1.1;
  CHECK_THROWS_AS(perturb_hamiltonian(Interferometer{not_unitary, HaarSource{}}, 0.01, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(perturb_hamiltonian(u, -0.1, 1), std::invalid_argument);
}

TEST_CASE("single-particle evolution reproduces the many-body propagator") {
  const Eigen::MatrixXcd h = random_hermitian(3, 21);
  const double tau = 0.7;
  const Eigen::MatrixXcd u = evolve(h, tau).u;
  const auto states = oracle::all_states(3, 2);
  const Eigen::MatrixXcd big = oracle::many_body_hamiltonian(h, states);
  const Eigen::MatrixXcd prop = (Complex(0, -tau) * big).exp();
  double worst = 0;
  for (std::size_t s = 0; s < states.size(); ++s)
    for (std::size_t t = 0; t < states.size(); ++t) {
      const Complex amp = boson_amplitude(u, states[s], states[t]);
      worst = std::max(worst, std::abs(amp - prop(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s))));
    }
  CHECK(worst < 1e-8);
}

TEST_CASE("unitary file round trip is bit exact") {
  const Interferometer u = perturb_hamiltonian(haar_unitary(7, 3), 0.02, 8);
  const Interferometer back = interferometer_from_json(interferometer_to_json(u));
  CHECK(back.u == u.u);
  CHECK(describe(back.provenance) == describe(u.provenance));
  CHECK_THROWS_AS(interferometer_from_json("{\"m\":2}"), std::invalid_argument);
  CHECK_THROWS_AS(interferometer_from_json("not json"), std::invalid_argument);
}

}
