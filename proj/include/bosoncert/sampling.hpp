#pragma once

#include "bosoncert/distributions.hpp"
#include "bosoncert/fock.hpp"
#include "bosoncert/interferometer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace bosoncert {

/// Observed counts per state rank from N_m measurement runs.
struct SampleSet {
  ProblemShape shape;
  std::map<Rank, std::uint64_t> counts;  // only occupied ranks
  std::uint64_t total = 0;               // N_m
  std::uint64_t seed = 0;
  std::string provenance;

  std::size_t distinct() const { return counts.size(); }
};

/// Throws std::invalid_argument if the counts do not add up or a rank is out of range.
void validate(const SampleSet& samples);

/// Reusable i.i.d. sampler over a dense table. Builds a cumulative table for
/// binary search, or a Vose alias table when `use_alias` is set.
class TableSampler {
public:
  explicit TableSampler(const OutcomeDistribution& dist, bool use_alias = false);

  SampleSet draw(std::uint64_t n_m, std::uint64_t seed) const;
  bool uses_alias() const { return use_alias_; }

private:
  ProblemShape shape_;
  std::string provenance_;
  bool use_alias_ = false;
  std::vector<double> cumulative_;
  std::vector<double> alias_prob_;
  std::vector<Rank> alias_index_;
};

/// N_m draws from `dist`; alias table when N_m > D/10, binary search otherwise.
SampleSet draw_from_table(const OutcomeDistribution& dist, std::uint64_t n_m, std::uint64_t seed);

/// Independent-particle sampler: the particle entering mode i exits in mode j
/// with probability |U_ji|^2. Requires a collision-free input.
SampleSet draw_distinguishable_direct(const Interferometer& device, const FockState& input,
                                      std::uint64_t n_m, std::uint64_t seed);

/// N_m ranks uniform on [0, D).
SampleSet draw_uniform(int modes, int particles, std::uint64_t n_m, std::uint64_t seed);

/// Bhattacharyya coefficient between two empirical frequency tables.
double fidelity(const SampleSet& a, const SampleSet& b);
/// Between an empirical table and an exact one.
double fidelity(const SampleSet& a, const OutcomeDistribution& q);

/// "rank,count" CSV plus a JSON sidecar at `sidecar_path(path)`.
void save_samples(const SampleSet& samples, const std::filesystem::path& csv_path);
SampleSet load_samples(const std::filesystem::path& csv_path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace bosoncert
