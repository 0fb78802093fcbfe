#include "bosoncert/distributions.hpp"

#include "bosoncert/parallel.hpp"
#include "bosoncert/permanent.hpp"
#include "bosoncert/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace bosoncert {
namespace {

template <typename Scalar>
using SubMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                                kMaxRyserOrder, kMaxRyserOrder>;

std::vector<int> expand_modes(std::span<const int> occupations) {
  std::vector<int> modes;
  for (std::size_t i = 0; i < occupations.size(); ++i)
    for (int c = 0; c < occupations[i]; ++c) modes.push_back(static_cast<int>(i));
  return modes;
}

double factorial_product(std::span<const int> occupations) {
  double f = 1.0;
  for (int n : occupations)
    for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void check_device_and_input(const Interferometer& device, const FockState& input) {
  if (device.u.rows() != device.u.cols())
    throw std::invalid_argument("interferometer matrix is not square");
  if (input.modes() != device.modes())
    throw std::invalid_argument("input state has " + std::to_string(input.modes()) +
                                " modes but the interferometer has " +
                                std::to_string(device.modes()));
  if (input.particles() < 1) throw std::invalid_argument("input state holds no particles");
  if (input.particles() > kMaxRyserOrder)
    throw std::invalid_argument("input state exceeds the permanent size cap");
}

// Fills probs[r] = weight(T_r) for every rank, in parallel over rank chunks.
template <typename Scalar, typename Weight>
Eigen::VectorXd sweep(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& matrix,
                      const FockState& input, Weight&& weight, unsigned threads) {
  const FockBasis basis(input.modes(), input.particles());
  const std::vector<int> columns = expand_modes(input.occupations());
  const int n = input.particles();
  Eigen::VectorXd probs(static_cast<Eigen::Index>(basis.dimension()));
  parallel_for(
      basis.dimension(),
      [&](std::size_t begin, std::size_t end) {
        std::vector<int> occ(static_cast<std::size_t>(basis.modes()));
        SubMatrix<Scalar> sub(n, n);
        for (std::size_t r = begin; r < end; ++r) {
          basis.unrank_into(r, occ);
          int row = 0;
          for (int mode = 0; mode < basis.modes(); ++mode)
            for (int c = 0; c < occ[static_cast<std::size_t>(mode)]; ++c, ++row)
              for (int k = 0; k < n; ++k) sub(row, k) = matrix(mode, columns[static_cast<std::size_t>(k)]);
          probs(static_cast<Eigen::Index>(r)) = weight(permanent_ryser(sub), occ);
        }
      },
      threads);
  return probs;
}

// "BSD1", u32 M, u32 N, u64 D
constexpr std::size_t kHeaderBytes = 20;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
std::uint64_t get_le(std::span<const unsigned char> bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i)
    v |= static_cast<std::uint64_t>(bytes[offset + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

}  // namespace

Complex boson_amplitude(const Eigen::MatrixXcd& u, std::span<const int> input,
                        std::span<const int> output) {
  const std::vector<int> cols = expand_modes(input);
  const std::vector<int> rows = expand_modes(output);
  if (cols.size() != rows.size())
    throw std::invalid_argument("boson_amplitude: particle number not conserved");
  if (cols.empty()) return Complex(1.0, 0.0);
  const Eigen::MatrixXcd sub = u(rows, cols);
  return permanent_ryser(sub) / std::sqrt(factorial_product(input) * factorial_product(output));
}

OutcomeDistribution boson_distribution(const Interferometer& device, const FockState& input,
                                       unsigned threads) {
  check_device_and_input(device, input);
  const double input_norm = factorial_product(input.occupations());
  auto weight = [input_norm](Complex perm, std::span<const int> occ) {
    return std::norm(perm) / (input_norm * factorial_product(occ));
  };
  OutcomeDistribution dist;
  dist.shape = ProblemShape::make(input.modes(), input.particles());
  dist.probs = sweep<Complex>(device.u, input, weight, threads);
  dist.provenance = "boson{u=" + describe(device.provenance) + ",input=" + input.to_string() + "}";
  return dist;
}

OutcomeDistribution distinguishable_distribution(const Interferometer& device,
                                                 const FockState& input, unsigned threads) {
  check_device_and_input(device, input);
  for (int s : input.occupations())
    if (s > 1)
      throw std::invalid_argument(
          "distinguishable_distribution: collision inputs (s_i > 1) are unsupported");
  const Eigen::MatrixXd transfer = device.u.cwiseAbs2();
  // Perm of a nonnegative matrix is nonnegative; Ryser's alternating sum can
  // land a few ulps below zero when it should be 0.
  auto weight = [](double perm, std::span<const int> occ) {
    return std::max(perm, 0.0) / factorial_product(occ);
  };
  OutcomeDistribution dist;
  dist.shape = ProblemShape::make(input.modes(), input.particles());
  dist.probs = sweep<double>(transfer, input, weight, threads);
  dist.provenance =
      "distinguishable{u=" + describe(device.provenance) + ",input=" + input.to_string() + "}";
  return dist;
}

OutcomeDistribution uniform_distribution(int modes, int particles) {
  OutcomeDistribution dist;
  dist.shape = ProblemShape::make(modes, particles);
  dist.probs = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dist.shape.dimension),
                                         1.0 / static_cast<double>(dist.shape.dimension));
  dist.provenance = "uniform";
  return dist;
}

double fidelity(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  if (!(p.shape == q.shape) || p.probs.size() != q.probs.size())
    throw std::invalid_argument("fidelity: distributions have different shapes");
  if (std::abs(p.total() - 1.0) > 1e-6 || std::abs(q.total() - 1.0) > 1e-6)
    throw std::invalid_argument("fidelity: distributions are not normalized");
  return (p.probs.array() * q.probs.array()).sqrt().sum();
}

std::vector<unsigned char> encode_distribution(const OutcomeDistribution& dist) {
  std::vector<unsigned char> out;
  const std::uint64_t d = dist.shape.dimension;
  if (static_cast<std::uint64_t>(dist.probs.size()) != d)
    throw std::invalid_argument("encode_distribution: table length differs from D");
  out.reserve(kHeaderBytes + 8 * d + 8);
  out.insert(out.end(), {'B', 'S', 'D', '1'});
  put_u32(out, static_cast<std::uint32_t>(dist.shape.modes));
  put_u32(out, static_cast<std::uint32_t>(dist.shape.particles));
  put_u64(out, d);
  const std::size_t payload = out.size();
  for (Eigen::Index k = 0; k < dist.probs.size(); ++k) {
    std::uint64_t bits;
    const double x = dist.probs(k);
    std::memcpy(&bits, &x, sizeof bits);
    put_u64(out, bits);
  }
  put_u64(out, fnv1a64(std::span(out).subspan(payload)));
  return out;
}

OutcomeDistribution decode_distribution(std::span<const unsigned char> bytes) {
  if (bytes.size() < kHeaderBytes + 8 || std::memcmp(bytes.data(), "BSD1", 4) != 0)
    throw std::invalid_argument("distribution file: bad magic");
  const auto m = static_cast<int>(get_le(bytes, 4, 4));
  const auto n = static_cast<int>(get_le(bytes, 8, 4));
  const std::uint64_t d = get_le(bytes, 12, 8);
  const ProblemShape shape = ProblemShape::make(m, n);
  if (shape.dimension != d) throw std::invalid_argument("distribution file: D disagrees with (M, N)");
  if (bytes.size() != kHeaderBytes + 8 * d + 8) throw std::invalid_argument("distribution file: truncated");
  const auto payload = bytes.subspan(kHeaderBytes, 8 * d);
  if (fnv1a64(payload) != get_le(bytes, kHeaderBytes + 8 * d, 8))
    throw std::invalid_argument("distribution file: checksum mismatch");
  OutcomeDistribution dist;
  dist.shape = shape;
  dist.probs.resize(static_cast<Eigen::Index>(d));
  for (std::uint64_t k = 0; k < d; ++k) {
    const std::uint64_t bits = get_le(payload, 8 * k, 8);
    double x;
    std::memcpy(&x, &bits, sizeof x);
    dist.probs(static_cast<Eigen::Index>(k)) = x;
  }
  dist.provenance = "file";
  return dist;
}

void save_distribution(const OutcomeDistribution& dist, const std::filesystem::path& path) {
  const auto bytes = encode_distribution(dist);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

OutcomeDistribution load_distribution(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  return decode_distribution(bytes);
}

}  // namespace bosoncert
