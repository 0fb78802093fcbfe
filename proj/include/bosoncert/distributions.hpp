#pragma once

#include "bosoncert/fock.hpp"
#include "bosoncert/interferometer.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bosoncert {

/// Dense probability table indexed by colex rank.
struct OutcomeDistribution {
  ProblemShape shape;
  Eigen::VectorXd probs;
  std::string provenance;

  double total() const { return probs.sum(); }
};

/// <T| U |S> = Perm(U[T, S]) / sqrt(prod s_i! prod t_j!), where U[T, S]
/// repeats row j t_j times and column i s_i times.
Complex boson_amplitude(const Eigen::MatrixXcd& u, std::span<const int> input,
                        std::span<const int> output);

/// Bosonic output law |<T|U|S>|^2 over every T.
OutcomeDistribution boson_distribution(const Interferometer& device, const FockState& input,
                                       unsigned threads = 0);

/// Output law of distinguishable particles: Perm(|U|^2 [T, S]) / prod t_j!.
/// Requires a collision-free input (every s_i is 0 or 1).
OutcomeDistribution distinguishable_distribution(const Interferometer& device,
                                                 const FockState& input, unsigned threads = 0);

OutcomeDistribution uniform_distribution(int modes, int particles);

/// Bhattacharyya coefficient sum_k sqrt(p_k q_k).
double fidelity(const OutcomeDistribution& p, const OutcomeDistribution& q);

// Binary table: "BSD1", u32 M, u32 N, u64 D, D doubles, u64 FNV-1a of the
// D doubles' bytes. Little-endian throughout.
std::vector<unsigned char> encode_distribution(const OutcomeDistribution& dist);
OutcomeDistribution decode_distribution(std::span<const unsigned char> bytes);
void save_distribution(const OutcomeDistribution& dist, const std::filesystem::path& path);
OutcomeDistribution load_distribution(const std::filesystem::path& path);

}  // namespace bosoncert
