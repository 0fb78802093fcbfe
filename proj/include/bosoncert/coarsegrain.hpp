#pragma once

#include "bosoncert/distributions.hpp"
#include "bosoncert/fock.hpp"
#include "bosoncert/sampling.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bosoncert {

/// Radius schedule and merge threshold for `build_bubbles`.
struct BubbleParams {
  int target_bubbles = 40;
  /// Bubbles with fewer construction-sample events are merged away.
  std::uint64_t min_count = 10;
  int initial_radius = 2;
  /// Radius increment applied while the running mean count per bubble is
  /// below N_m / target_bubbles. Zero keeps the radius fixed.
  int radius_step = 2;
  /// Upper bound on the radius; 0 means 2N, which covers the whole space.
  int max_radius = 0;
  /// Rescale the growth threshold N_m / target_bubbles so that the merged
  /// bubble count lands as close to the target as the radius grid allows.
  /// L1 balls grow by roughly an order of magnitude per radius step, so the
  /// unscaled trigger saturates well below large targets.
  bool calibrate_threshold = true;
};

struct Bubble {
  FockState center;
  Rank center_rank = 0;
  /// Inclusive L1 cutoff. L1 distances between equal-N states are even, so
  /// "<= r" with r even is the same as "< r + 2".
  int radius = 0;
  /// Construction-sample events claimed when the bubble was formed.
  std::uint64_t count = 0;
};

/// Total partition of the Fock space into bubbles.
///
/// Membership is lazy: a state belongs to the first bubble (in construction
/// order) whose radius covers it, otherwise to the nearest center with ties
/// going to the earlier bubble. Merges then relabel whole raw bubbles.
class BubblePartition {
public:
  BubblePartition(ProblemShape shape, std::vector<Bubble> bubbles,
                  std::vector<std::pair<int, int>> merges, BubbleParams params,
                  std::string construction_sample);

  const ProblemShape& shape() const { return shape_; }
  std::span<const Bubble> raw_bubbles() const { return bubbles_; }
  const std::vector<std::pair<int, int>>& merges() const { return merges_; }
  const BubbleParams& params() const { return params_; }
  const std::string& construction_sample() const { return construction_sample_; }
  /// Growth threshold actually used, in events per bubble.
  double threshold() const { return threshold_; }
  void set_threshold(double events) { threshold_ = events; }

  /// N_B after merging.
  int size() const { return bubble_count_; }
  int label_of_raw(int raw) const { return labels_[static_cast<std::size_t>(raw)]; }

  /// Raw bubble index for a state of the right shape; no validation.
  int raw_index(std::span<const int> occupations) const;
  /// Final bubble label; no validation.
  int label(std::span<const int> occupations) const {
    return labels_[static_cast<std::size_t>(raw_index(occupations))];
  }

  /// Construction-sample events per final bubble.
  std::vector<std::uint64_t> construction_counts() const;

  /// Hash of shape, centers, radii and merges.
  std::uint64_t fingerprint() const { return fingerprint_; }

private:
  ProblemShape shape_;
  std::vector<Bubble> bubbles_;
  std::vector<std::pair<int, int>> merges_;
  BubbleParams params_;
  std::string construction_sample_;
  // Sparse (mode, occupation) view of each center; L1 = 2 (N - overlap).
  std::vector<std::vector<std::pair<int, int>>> center_modes_;
  std::vector<int> labels_;
  int bubble_count_ = 0;
  std::uint64_t fingerprint_ = 0;
  double threshold_ = 0;
};

/// Greedy bubble construction from one sample set:
///  1. observed states sorted by descending count, ties by ascending rank;
///  2. the top unassigned state becomes a center and claims every unassigned
///     state within the current radius;
///  3. the radius grows by `radius_step` whenever the running mean of
///     claimed events per bubble drops below N_m / target_bubbles;
///  4. repeat until all observed states are claimed;
///  5. bubbles below `min_count` merge into the nearest remaining center,
///     smallest first.
/// With `calibrate_threshold`, steps 2-5 are repeated while a bracketing
/// search rescales the threshold, and the partition whose bubble count is
/// nearest the target wins (ties go to the scale nearest 1).
BubblePartition build_bubbles(const SampleSet& sample, const BubbleParams& params = {});

/// Final bubble label of `state`.
int assign_state(const BubblePartition& partition, const FockState& state);

/// Bubble masses: event counts (from samples) or probabilities (from tables).
struct CoarseDistribution {
  std::uint64_t partition_id = 0;
  Eigen::VectorXd masses;
  bool counts = false;
  /// N_m for counts, 1 for probabilities.
  double total = 0;

  int size() const { return static_cast<int>(masses.size()); }
};

CoarseDistribution coarse_grain(const BubblePartition& partition, const SampleSet& samples);
CoarseDistribution coarse_grain(const BubblePartition& partition, const OutcomeDistribution& dist,
                                unsigned threads = 0);

// {"m", "n", "bubbles": [{"center_rank", "radius", "count"}], "merges": [[from, to]], "params": {...}}
std::string partition_to_json(const BubblePartition& partition);
BubblePartition partition_from_json(const std::string& text);
void save_partition(const BubblePartition& partition, const std::filesystem::path& path);
BubblePartition load_partition(const std::filesystem::path& path);

}  // namespace bosoncert
