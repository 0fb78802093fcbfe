#pragma once

#include "bosoncert/coarsegrain.hpp"
#include "bosoncert/interferometer.hpp"
#include "bosoncert/stats.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bosoncert {

/// Flat campaign configuration. JSON keys are the member names.
struct CampaignConfig {
  std::string system = "haar";  // "haar" | "ion"
  int m = 40;
  int n = 5;
  std::uint64_t seed = 1;  // Haar unitary seed
  double omega_z = 2 * 3.14159265358979323846 * 0.03e6;  // rad/s
  double omega_x = 2 * 3.14159265358979323846 * 4e6;     // rad/s
  std::string species = "Yb171";
  double tau = 100e-6;  // s
  /// Occupations of the input modes; empty means one particle in each of the first n modes.
  std::vector<int> input_state;
  /// Load the device from a unitary file instead of generating it.
  std::string unitary_file;

  std::uint64_t n_m = 10000;
  int n_s = 100;
  /// "quantum2", "distinguishable", "uniform", "noisy:<hamiltonian|timing>:<strength>".
  std::vector<std::string> targets{"quantum2", "distinguishable", "uniform"};
  std::vector<int> target_n_b{40};
  double alpha = 0.01;
  std::uint64_t master_seed = 2024;
  std::string output_dir = "campaign";

  std::uint64_t min_count = 10;
  int initial_radius = 2;
  int radius_step = 2;
  bool calibrate_threshold = true;
  /// Build one partition from run 0 and reuse it for every run.
  bool fixed_partition = false;
  /// Draw a fresh noisy device for every run instead of one per campaign.
  bool noise_per_run = false;
  std::string noise_law = "gaussian";
  int histogram_bins = 30;
  /// Keep run-0 samples and partitions on disk for emit_figure_data.
  bool save_artifacts = true;
  unsigned threads = 0;
};

/// Throws std::invalid_argument on an inconsistent configuration.
void validate(const CampaignConfig& cfg);

nlohmann::ordered_json config_to_json(const CampaignConfig& cfg);
/// Unknown keys are an error; missing keys keep their defaults.
CampaignConfig config_from_json(const nlohmann::json& j, CampaignConfig base = {});

FockState campaign_input(const CampaignConfig& cfg);

/// Device under test, from the `system` fields or `unitary_file`.
Interferometer campaign_device(const CampaignConfig& cfg);

/// Parsed sampler role.
struct Role {
  std::string name;
  std::string kind;   // quantum2 | distinguishable | uniform | noisy
  std::string model;  // noisy only: hamiltonian | timing
  double strength = 0;
};
Role parse_role(const std::string& text);

struct Histogram {
  double lo = 0;
  double hi = 1;
  std::vector<std::uint64_t> counts;
  /// Expected counts per bin under the reference law, when one applies.
  std::vector<double> expected;
};

struct RoleResult {
  std::string role;
  int target_n_b = 0;
  CampaignSummary summary;
  double n_b_mean = 0;
  std::vector<double> chi2;
  std::vector<double> p_values;
  std::vector<int> n_b;
  std::vector<char> pass;
  Histogram chi2_hist;
  Histogram p_hist;
};

struct CampaignReport {
  CampaignConfig config;
  std::string device;
  double fidelity_mean = 0;  // raw fidelity of sample 1 vs the quantum2 sample, if present
  std::vector<RoleResult> results;

  const RoleResult& find(const std::string& role, int target_n_b) const;
};

/// Runs the campaign and writes report.json plus cached tables and run-0
/// artifacts under cfg.output_dir (when it is non-empty).
CampaignReport run_campaign(const CampaignConfig& cfg);

std::string report_to_json(const CampaignReport& report);

/// Writes plot-ready CSV tables for a finished campaign directory and
/// returns the files written.
std::vector<std::filesystem::path> emit_figure_data(const std::filesystem::path& campaign_dir,
                                                    const std::filesystem::path& out_dir);

/// Multinomial standard error of a bubble frequency: sqrt(N_m p (1 - p)) / N_m.
inline double multinomial_sigma(double p, double n_m) { return std::sqrt(n_m * p * (1 - p)) / n_m; }

}  // namespace bosoncert
