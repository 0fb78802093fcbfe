#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace bosoncert {

using Complex = std::complex<double>;

namespace constants {
inline constexpr double kElementaryCharge = 1.602176634e-19;     // C
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;     // kg
inline constexpr double kYb171Mass = 171.0 * kAtomicMassUnit;    // kg
}  // namespace constants

// Where a unitary came from. Serialized as a one-line descriptor.
struct HaarSource {
  std::uint64_t seed = 0;
};
struct IonSource {
  int ions = 0;
  double omega_z = 0;  // rad/s
  double omega_x = 0;  // rad/s
  double mass = 0;     // kg
  double tau = 0;      // s
};
struct RandomPhaseSource {
  std::uint64_t seed = 0;
};
struct NoisySource {
  std::string base;
  std::string model;  // "timing" | "hamiltonian"
  double strength = 0;
  std::uint64_t seed = 0;
};
struct ImportedSource {
  std::string text;
};
using Provenance =
    std::variant<HaarSource, IonSource, RandomPhaseSource, NoisySource, ImportedSource>;

std::string describe(const Provenance& provenance);

/// Single-particle transfer matrix: column i holds the output amplitudes of
/// a particle injected into mode i.
struct Interferometer {
  Eigen::MatrixXcd u;
  Provenance provenance;

  int modes() const { return static_cast<int>(u.rows()); }
};

/// max_ij |(U^dagger U - I)_ij|
template <typename Derived>
double unitarity_residual(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat gram = u.adjoint() * u;
  return (gram - Mat::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

template <typename Derived>
double hermiticity_residual(const Eigen::MatrixBase<Derived>& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

/// Haar-random U(M) from the QR decomposition of a complex Ginibre matrix,
/// with the phases of R's diagonal moved into Q.
Interferometer haar_unitary(int modes, std::uint64_t seed);

/// Axial Coulomb crystal in a harmonic trap with transverse local phonons.
struct IonChain {
  int ions = 0;
  double mass = 0;     // kg
  double omega_z = 0;  // rad/s, axial
  double omega_x = 0;  // rad/s, transverse
  Eigen::VectorXd positions;  // m, ascending

  /// Solves for equilibrium positions.
  static IonChain make(int ions, double mass, double omega_z, double omega_x);

  /// t0 = e^2 / (8 pi eps0 m omega_x), in m^3/s.
  double hopping_scale() const;
};

/// Coulomb length (e^2 / (4 pi eps0 m omega_z^2))^(1/3), in meters.
double coulomb_length(double mass, double omega_z);

/// Dimensionless equilibrium positions u_i of M ions:
/// u_i = sum_{j<i} (u_i - u_j)^-2 - sum_{j>i} (u_i - u_j)^-2.
Eigen::VectorXd ion_equilibrium_positions_dimensionless(int ions);

/// Residual force of the dimensionless equilibrium equations, max norm.
double ion_force_residual(const Eigen::VectorXd& u);

/// Equilibrium positions in meters.
Eigen::VectorXd ion_equilibrium_positions(int ions, double mass, double omega_z);

/// h_ij = t0 / |z_i - z_j|^3 off the diagonal, h_ii = -sum_{j != i} h_ij (rad/s).
Eigen::MatrixXd ion_hopping_matrix(const IonChain& chain);

/// U = exp(-i h tau) from the eigendecomposition of Hermitian h.
Interferometer evolve(const Eigen::MatrixXcd& h, double tau);

/// Phonon transfer matrix of `chain` after time `tau`.
Interferometer ion_interferometer(const IonChain& chain, double tau);

/// V diag(exp(i theta_k)) V^dagger, V the eigenvectors of h.
Interferometer random_phase_unitary(const Eigen::MatrixXcd& h, std::uint64_t seed);
Interferometer random_phase_unitary(const Eigen::MatrixXcd& h, const Eigen::VectorXd& phases);

struct EvolutionRequest {
  Eigen::MatrixXcd hamiltonian;  // rad/s
  double tau = 0;                // s
  Provenance provenance;         // describes the unperturbed device
};

/// Systematic timing error: evolve for tau * (1 + relative_error).
Interferometer perturb_timing(const EvolutionRequest& request, double relative_error);

enum class NoiseLaw { gaussian, uniform };

/// Hermitian generator with U = exp(-i H), eigenphases on the principal branch (-pi, pi].
Eigen::MatrixXcd effective_hamiltonian(const Eigen::MatrixXcd& u);

/// Multiplies the real and imaginary part of every independent entry of
/// H = i log U by (1 + eta xi) and re-exponentiates. eta = 0 returns U.
Interferometer perturb_hamiltonian(const Interferometer& device, double eta, std::uint64_t seed,
                                   NoiseLaw law = NoiseLaw::gaussian);

// {"m": M, "provenance": "...", "re": [[...]], "im": [[...]]}
std::string interferometer_to_json(const Interferometer& device);
Interferometer interferometer_from_json(const std::string& text);
void save_interferometer(const Interferometer& device, const std::filesystem::path& path);
Interferometer load_interferometer(const std::filesystem::path& path);

}  // namespace bosoncert
