#include "bosoncert/interferometer.hpp"

#include "bosoncert/rng.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bosoncert {
namespace {

constexpr double kHermitianTolerance = 1e-12;
constexpr double kUnitaryTolerance = 1e-10;
constexpr double kBranchCutGuard = 1e-9;

std::string shortest(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

void require_hermitian(const Eigen::MatrixXcd& h, const char* who) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw std::invalid_argument(std::string(who) + ": generator must be a nonempty square matrix");
  const double scale = std::max(h.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (hermiticity_residual(h) > kHermitianTolerance * scale)
    throw std::invalid_argument(std::string(who) + ": generator is not Hermitian");
}

Eigen::MatrixXcd exp_minus_i(const Eigen::MatrixXcd& h, double tau) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
  if (eig.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  const Eigen::VectorXcd phases =
      (-Complex(0, 1) * tau * eig.eigenvalues().cast<Complex>()).array().exp();
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

std::string describe(const Provenance& provenance) {
  struct Visitor {
    std::string operator()(const HaarSource& s) const {
      return "haar{seed=" + std::to_string(s.seed) + "}";
    }
    std::string operator()(const IonSource& s) const {
      return "ion{ions=" + std::to_string(s.ions) + ",omega_z=" + shortest(s.omega_z) +
             ",omega_x=" + shortest(s.omega_x) + ",mass=" + shortest(s.mass) +
             ",tau=" + shortest(s.tau) + "}";
    }
    std::string operator()(const RandomPhaseSource& s) const {
      return "random_phase{seed=" + std::to_string(s.seed) + "}";
    }
    std::string operator()(const NoisySource& s) const {
      return "noisy{base=" + s.base + ",model=" + s.model + ",strength=" + shortest(s.strength) +
             ",seed=" + std::to_string(s.seed) + "}";
    }
    std::string operator()(const ImportedSource& s) const { return s.text; }
  };
  return std::visit(Visitor{}, provenance);
}

Interferometer haar_unitary(int modes, std::uint64_t seed) {
  if (modes < 1) throw std::invalid_argument("haar_unitary: modes must be positive");
  Rng rng(seed);
  Eigen::MatrixXcd ginibre(modes, modes);
  const double scale = std::numbers::sqrt2 / 2.0;
  for (Eigen::Index j = 0; j < modes; ++j)
    for (Eigen::Index i = 0; i < modes; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      ginibre(i, j) = Complex(re, im) * scale;
    }
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(ginibre);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::VectorXcd diag = qr.matrixQR().diagonal();
  for (Eigen::Index k = 0; k < modes; ++k) {
    const double mag = std::abs(diag(k));
    if (mag > 0) q.col(k) *= diag(k) / mag;
  }
  return Interferometer{std::move(q), HaarSource{seed}};
}

double coulomb_length(double mass, double omega_z) {
  using namespace constants;
  const double coulomb = kElementaryCharge * kElementaryCharge /
                         (4.0 * std::numbers::pi * kVacuumPermittivity);
  return std::cbrt(coulomb / (mass * omega_z * omega_z));
}

double ion_force_residual(const Eigen::VectorXd& u) {
  const Eigen::Index m = u.size();
  double worst = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double f = u(i);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      const double d = u(i) - u(j);
      f += (j < i ? -1.0 : 1.0) / (d * d);
    }
    worst = std::max(worst, std::abs(f));
  }
  return worst;
}

Eigen::VectorXd ion_equilibrium_positions_dimensionless(int ions) {
  if (ions < 2) throw std::invalid_argument("ion chain needs at least two ions");
  constexpr int kMaxIterations = 200;
  constexpr double kForceTolerance = 1e-12;

  const Eigen::Index m = ions;
  const double spacing = 2.018 / std::pow(static_cast<double>(ions), 0.559);
  Eigen::VectorXd u(m);
  for (Eigen::Index i = 0; i < m; ++i)
    u(i) = spacing * (static_cast<double>(i + 1) - (ions + 1) / 2.0);

  Eigen::VectorXd force(m);
  Eigen::MatrixXd jacobian(m, m);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    jacobian.setZero();
    for (Eigen::Index i = 0; i < m; ++i) {
      double f = u(i);
      double diag = 1.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j == i) continue;
        const double d = u(i) - u(j);
        const double ad = std::abs(d);
        f += (j < i ? -1.0 : 1.0) / (d * d);
        const double k = 2.0 / (ad * ad * ad);
        diag += k;
        jacobian(i, j) = -k;
      }
      jacobian(i, i) = diag;
      force(i) = f;
    }
    if (force.cwiseAbs().maxCoeff() < kForceTolerance) return u;

    const Eigen::VectorXd step = jacobian.ldlt().solve(force);
    // Halve the step until the ordering survives.
    double scale = 1.0;
    Eigen::VectorXd next = u - step;
    auto ordered = [](const Eigen::VectorXd& v) {
      for (Eigen::Index i = 1; i < v.size(); ++i)
        if (!(v(i) > v(i - 1))) return false;
      return true;
    };
    while (!ordered(next) && scale > 1e-6) {
      scale *= 0.5;
      next = u - scale * step;
    }
    u = next;
  }
  if (ion_force_residual(u) < kForceTolerance) return u;
  throw std::runtime_error("ion equilibrium: Newton iteration did not converge for " +
                           std::to_string(ions) + " ions");
}

Eigen::VectorXd ion_equilibrium_positions(int ions, double mass, double omega_z) {
  if (!(mass > 0) || !(omega_z > 0))
    throw std::invalid_argument("ion chain: mass and axial frequency must be positive");
  return ion_equilibrium_positions_dimensionless(ions) * coulomb_length(mass, omega_z);
}

IonChain IonChain::make(int ions, double mass, double omega_z, double omega_x) {
  if (!(omega_x > 0)) throw std::invalid_argument("ion chain: transverse frequency must be positive");
  IonChain chain;
  chain.ions = ions;
  chain.mass = mass;
  chain.omega_z = omega_z;
  chain.omega_x = omega_x;
  chain.positions = ion_equilibrium_positions(ions, mass, omega_z);
  return chain;
}

double IonChain::hopping_scale() const {
  using namespace constants;
  return kElementaryCharge * kElementaryCharge /
         (8.0 * std::numbers::pi * kVacuumPermittivity * mass * omega_x);
}

Eigen::MatrixXd ion_hopping_matrix(const IonChain& chain) {
  const Eigen::Index m = chain.positions.size();
  if (m != chain.ions) throw std::invalid_argument("ion chain: position count differs from ion count");
  const double t0 = chain.hopping_scale();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double d = std::abs(chain.positions(i) - chain.positions(j));
      if (!(d > 0)) throw std::invalid_argument("ion chain: coincident ion positions");
      const double t = t0 / (d * d * d);
      h(i, j) = t;
      h(j, i) = t;
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) h(i, i) = -h.row(i).sum();
  return h;
}

Interferometer evolve(const Eigen::MatrixXcd& h, double tau) {
  require_hermitian(h, "evolve");
  return Interferometer{exp_minus_i(h, tau), ImportedSource{"evolve{tau=" + shortest(tau) + "}"}};
}

Interferometer ion_interferometer(const IonChain& chain, double tau) {
  const Eigen::MatrixXcd h = ion_hopping_matrix(chain).cast<Complex>();
  Interferometer device = evolve(h, tau);
  device.provenance = IonSource{chain.ions, chain.omega_z, chain.omega_x, chain.mass, tau};
  return device;
}

Interferometer random_phase_unitary(const Eigen::MatrixXcd& h, const Eigen::VectorXd& phases) {
  require_hermitian(h, "random_phase_unitary");
  if (phases.size() != h.rows())
    throw std::invalid_argument("random_phase_unitary: one phase per mode required");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
  if (eig.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  const Eigen::VectorXcd diag = (Complex(0, 1) * phases.cast<Complex>()).array().exp();
  Eigen::MatrixXcd u = eig.eigenvectors() * diag.asDiagonal() * eig.eigenvectors().adjoint();
  return Interferometer{std::move(u), ImportedSource{"random_phase{explicit}"}};
}

Interferometer random_phase_unitary(const Eigen::MatrixXcd& h, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd phases(h.rows());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) = 2.0 * std::numbers::pi * rng.uniform();
  Interferometer device = random_phase_unitary(h, phases);
  device.provenance = RandomPhaseSource{seed};
  return device;
}

Interferometer perturb_timing(const EvolutionRequest& request, double relative_error) {
  const double tau = request.tau * (1.0 + relative_error);
  if (tau < 0) throw std::invalid_argument("perturb_timing: perturbed time is negative");
  Interferometer device = evolve(request.hamiltonian, tau);
  device.provenance = NoisySource{describe(request.provenance), "timing", relative_error, 0};
  return device;
}

Eigen::MatrixXcd effective_hamiltonian(const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols() || u.rows() == 0)
    throw std::invalid_argument("effective_hamiltonian: expected a nonempty square matrix");
  if (unitarity_residual(u) > kUnitaryTolerance)
    throw std::invalid_argument("effective_hamiltonian: input is not unitary");
  // A unitary is normal, so its complex Schur form is diagonal with unitary Q.
  const Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u);
  if (schur.info() != Eigen::Success) throw std::runtime_error("complex Schur decomposition failed");
  const Eigen::MatrixXcd& q = schur.matrixU();
  const Eigen::VectorXcd t = schur.matrixT().diagonal();
  Eigen::VectorXd energies(t.size());
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    double phase = std::arg(t(k));  // [-pi, pi]
    if (phase < -std::numbers::pi + kBranchCutGuard) phase += kBranchCutGuard;
    energies(k) = -phase;
  }
  Eigen::MatrixXcd h = q * energies.cast<Complex>().asDiagonal() * q.adjoint();
  return 0.5 * (h + h.adjoint());
}

Interferometer perturb_hamiltonian(const Interferometer& device, double eta, std::uint64_t seed,
                                   NoiseLaw law) {
  if (!(eta >= 0)) throw std::invalid_argument("perturb_hamiltonian: noise strength must be >= 0");
  const Eigen::MatrixXcd h = effective_hamiltonian(device.u);
  Rng rng(seed);
  auto draw = [&]() { return law == NoiseLaw::gaussian ? rng.normal() : 2.0 * rng.uniform() - 1.0; };
  Eigen::MatrixXcd noisy = h;
  const Eigen::Index m = h.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      if (i == j) {
        noisy(i, i) = h(i, i).real() * (1.0 + eta * draw());
      } else {
        const double re = h(i, j).real() * (1.0 + eta * draw());
        const double im = h(i, j).imag() * (1.0 + eta * draw());
        noisy(i, j) = Complex(re, im);
        noisy(j, i) = Complex(re, -im);
      }
    }
  }
  Interferometer out{exp_minus_i(noisy, 1.0),
                     NoisySource{describe(device.provenance), "hamiltonian", eta, seed}};
  return out;
}

std::string interferometer_to_json(const Interferometer& device) {
  nlohmann::json j;
  const Eigen::Index m = device.u.rows();
  j["m"] = m;
  j["provenance"] = describe(device.provenance);
  auto re = nlohmann::json::array();
  auto im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m; ++r) {
    std::vector<double> row_re(static_cast<std::size_t>(m)), row_im(static_cast<std::size_t>(m));
    for (Eigen::Index c = 0; c < m; ++c) {
      row_re[static_cast<std::size_t>(c)] = device.u(r, c).real();
      row_im[static_cast<std::size_t>(c)] = device.u(r, c).imag();
    }
    re.push_back(row_re);
    im.push_back(row_im);
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j.dump();
}

Interferometer interferometer_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("unitary file: ") + e.what());
  }
  try {
    const int m = j.at("m").get<int>();
    if (m < 1) throw std::invalid_argument("unitary file: m must be positive");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != static_cast<std::size_t>(m) || im.size() != static_cast<std::size_t>(m))
      throw std::invalid_argument("unitary file: expected m rows");
    Eigen::MatrixXcd u(m, m);
    for (int r = 0; r < m; ++r) {
      if (re[r].size() != static_cast<std::size_t>(m) || im[r].size() != static_cast<std::size_t>(m))
        throw std::invalid_argument("unitary file: expected m columns");
      for (int c = 0; c < m; ++c) u(r, c) = Complex(re[r][c].get<double>(), im[r][c].get<double>());
    }
    return Interferometer{std::move(u), ImportedSource{j.value("provenance", std::string{})}};
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("unitary file: ") + e.what());
  }
}

void save_interferometer(const Interferometer& device, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << interferometer_to_json(device) << '\n';
}

Interferometer load_interferometer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return interferometer_from_json(ss.str());
}

}  // namespace bosoncert
