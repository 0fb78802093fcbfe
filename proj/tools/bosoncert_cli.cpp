// bosoncert: command-line front end for the certification pipeline.
//
// Every subcommand accepts --config FILE.json whose keys are that
// subcommand's long option names; flags on the command line win.

#include "bosoncert/coarsegrain.hpp"
#include "bosoncert/distributions.hpp"
#include "bosoncert/harness.hpp"
#include "bosoncert/interferometer.hpp"
#include "bosoncert/sampling.hpp"
#include "bosoncert/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bc = bosoncert;

namespace {

constexpr int kValidationError = 2;
constexpr int kRuntimeError = 1;

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Appends "--key value" for each config entry not already given as a flag.
void merge_config(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config file " + path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    std::string text;
    if (value.is_array()) {
      for (std::size_t k = 0; k < value.size(); ++k) text += (k ? "," : "") + scalar_text(value[k]);
      if (value.empty()) continue;
    } else {
      text = scalar_text(value);
    }
    args.push_back(flag);
    args.push_back(text);
  }
}

bc::FockState input_from(const std::vector<int>& occupations, int m, int n) {
  if (!occupations.empty()) {
    if (static_cast<int>(occupations.size()) != m)
      throw std::invalid_argument("input_state must list " + std::to_string(m) + " occupations");
    return bc::FockState(occupations);
  }
  if (n < 1 || n > m) throw std::invalid_argument("need 1 <= n <= m for the default input state");
  std::vector<int> occ(static_cast<std::size_t>(m), 0);
  std::fill_n(occ.begin(), n, 1);
  return bc::FockState(occ);
}

double species_mass(const std::string& species) {
  if (species == "Yb171") return bc::constants::kYb171Mass;
  throw std::invalid_argument("unknown species '" + species + "' (supported: Yb171)");
}

void print_summary(const bc::CampaignReport& report) {
  std::printf("%-28s %8s %8s %9s %8s %8s\n", "role", "target", "N_B", "pass %", "p_mean", "p_std");
  for (const auto& r : report.results)
    std::printf("%-28s %8d %8.2f %9.2f %8.4f %8.4f\n", r.role.c_str(), r.target_n_b, r.n_b_mean,
                r.summary.pass_rate, r.summary.p_mean, r.summary.p_std);
  if (report.fidelity_mean > 0) std::printf("raw fidelity s1 vs s2: %.5f\n", report.fidelity_mean);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boson sampling certification by coarse-grained two-sample tests"};
  app.require_subcommand(1);
  std::string config_path;

  // gen-unitary
  auto* gen = app.add_subcommand("gen-unitary", "Haar-random unitary, optionally with Hamiltonian noise");
  struct {
    int m = 0;
    std::uint64_t seed = 1;
    std::string base, out, noise_law = "gaussian";
    double noise = 0;
    std::uint64_t noise_seed = 1;
  } g;
  gen->add_option("--config", config_path, "JSON file with option values");
  gen->add_option("--m", g.m, "modes");
  gen->add_option("--seed", g.seed, "Haar seed");
  gen->add_option("--base", g.base, "perturb this unitary file instead of drawing a Haar one");
  gen->add_option("--noise", g.noise, "relative Hamiltonian noise eta");
  gen->add_option("--noise_seed", g.noise_seed);
  gen->add_option("--noise_law", g.noise_law, "gaussian | uniform");
  gen->add_option("--out", g.out, "output unitary JSON")->required();

  // ion-chain
  auto* ion = app.add_subcommand("ion-chain", "Trapped-ion phonon transfer matrix");
  struct {
    int m = 12;
    double omega_z = 2 * 3.14159265358979323846 * 0.03e6;
    double omega_x = 2 * 3.14159265358979323846 * 4e6;
    double tau = 100e-6;
    double timing_error = 0;
    std::string species = "Yb171", out, positions, hopping;
    std::int64_t random_phase_seed = -1;
  } ic;
  ion->add_option("--config", config_path, "JSON file with option values");
  ion->add_option("--m", ic.m, "ions");
  ion->add_option("--omega_z", ic.omega_z, "axial frequency, rad/s");
  ion->add_option("--omega_x", ic.omega_x, "transverse frequency, rad/s");
  ion->add_option("--species", ic.species);
  ion->add_option("--tau", ic.tau, "evolution time, s");
  ion->add_option("--timing_error", ic.timing_error, "relative timing error");
  ion->add_option("--random_phase_seed", ic.random_phase_seed,
                  "fixed normal modes with random phases instead of exp(-i h tau)");
  ion->add_option("--positions", ic.positions, "CSV of equilibrium positions");
  ion->add_option("--hopping", ic.hopping, "CSV of the hopping matrix (rad/s)");
  ion->add_option("--out", ic.out, "output unitary JSON")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Exact output distribution table");
  struct {
    std::string unitary, out, kind = "boson";
    std::vector<int> input_state;
    int n = 0;
    unsigned threads = 0;
  } s;
  sim->add_option("--config", config_path, "JSON file with option values");
  sim->add_option("--unitary", s.unitary, "unitary JSON")->required();
  sim->add_option("--input_state", s.input_state, "comma-separated occupations")->delimiter(',');
  sim->add_option("--n", s.n, "particles in the first n modes when input_state is absent");
  sim->add_option("--kind", s.kind, "boson | distinguishable");
  sim->add_option("--threads", s.threads);
  sim->add_option("--out", s.out, "output table")->required();

  // sample
  auto* smp = app.add_subcommand("sample", "Draw N_m events from a table or the uniform law");
  struct {
    std::string table, out;
    bool uniform = false;
    int m = 0, n = 0;
    std::uint64_t n_m = 10000, seed = 1;
  } sp;
  smp->add_option("--config", config_path, "JSON file with option values");
  smp->add_option("--table", sp.table, "distribution table");
  smp->add_option("--uniform", sp.uniform, "draw uniformly over all states");
  smp->add_option("--m", sp.m);
  smp->add_option("--n", sp.n);
  smp->add_option("--n_m", sp.n_m);
  smp->add_option("--seed", sp.seed);
  smp->add_option("--out", sp.out, "output CSV")->required();

  // coarsegrain
  auto* cg = app.add_subcommand("coarsegrain", "Build or apply a bubble partition");
  struct {
    std::string samples, partition, out, counts;
    std::vector<std::string> apply;
    bc::BubbleParams params;
  } c;
  cg->add_option("--config", config_path, "JSON file with option values");
  cg->add_option("--samples", c.samples, "construction sample CSV");
  cg->add_option("--partition", c.partition, "existing partition instead of building one");
  cg->add_option("--target_n_b", c.params.target_bubbles);
  cg->add_option("--min_count", c.params.min_count);
  cg->add_option("--initial_radius", c.params.initial_radius);
  cg->add_option("--radius_step", c.params.radius_step);
  cg->add_option("--max_radius", c.params.max_radius);
  cg->add_option("--calibrate_threshold", c.params.calibrate_threshold);
  cg->add_option("--apply", c.apply, "sample CSVs to coarse-grain")->delimiter(',');
  cg->add_option("--counts", c.counts, "CSV of bubble counts for --apply");
  cg->add_option("--out", c.out, "partition JSON to write");

  // certify
  auto* cert = app.add_subcommand("certify", "Two-sample chi-square test of one pair");
  struct {
    std::string sample1, sample2, partition, out;
    double alpha = 0.01;
    bc::BubbleParams params;
  } ct;
  cert->add_option("--config", config_path, "JSON file with option values");
  cert->add_option("--sample1", ct.sample1)->required();
  cert->add_option("--sample2", ct.sample2)->required();
  cert->add_option("--partition", ct.partition, "reuse a partition; default builds one from sample1");
  cert->add_option("--target_n_b", ct.params.target_bubbles);
  cert->add_option("--min_count", ct.params.min_count);
  cert->add_option("--initial_radius", ct.params.initial_radius);
  cert->add_option("--radius_step", ct.params.radius_step);
  cert->add_option("--calibrate_threshold", ct.params.calibrate_threshold);
  cert->add_option("--alpha", ct.alpha);
  cert->add_option("--out", ct.out, "report JSON");

  // campaign
  auto* camp = app.add_subcommand("campaign", "Repeated certification runs");
  bc::CampaignConfig cfg;
  camp->add_option("--config", config_path, "campaign JSON");
  camp->add_option("--system", cfg.system, "haar | ion");
  camp->add_option("--m", cfg.m);
  camp->add_option("--n", cfg.n);
  camp->add_option("--seed", cfg.seed, "Haar seed");
  camp->add_option("--omega_z", cfg.omega_z);
  camp->add_option("--omega_x", cfg.omega_x);
  camp->add_option("--species", cfg.species);
  camp->add_option("--tau", cfg.tau);
  camp->add_option("--input_state", cfg.input_state)->delimiter(',');
  camp->add_option("--unitary_file", cfg.unitary_file);
  camp->add_option("--n_m", cfg.n_m);
  camp->add_option("--n_s", cfg.n_s);
  camp->add_option("--targets", cfg.targets)->delimiter(',');
  camp->add_option("--target_n_b", cfg.target_n_b)->delimiter(',');
  camp->add_option("--alpha", cfg.alpha);
  camp->add_option("--master_seed", cfg.master_seed);
  camp->add_option("--output_dir", cfg.output_dir);
  camp->add_option("--min_count", cfg.min_count);
  camp->add_option("--initial_radius", cfg.initial_radius);
  camp->add_option("--radius_step", cfg.radius_step);
  camp->add_option("--calibrate_threshold", cfg.calibrate_threshold);
  camp->add_option("--fixed_partition", cfg.fixed_partition);
  camp->add_option("--noise_per_run", cfg.noise_per_run);
  camp->add_option("--noise_law", cfg.noise_law);
  camp->add_option("--histogram_bins", cfg.histogram_bins);
  camp->add_option("--save_artifacts", cfg.save_artifacts);
  camp->add_option("--threads", cfg.threads);

  // emit-plots
  auto* plots = app.add_subcommand("emit-plots", "Plot-ready CSV tables from a campaign directory");
  std::string campaign_dir, plot_dir;
  plots->add_option("--config", config_path, "JSON file with option values");
  plots->add_option("--campaign_dir", campaign_dir)->required();
  plots->add_option("--out_dir", plot_dir)->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    merge_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  }

  try {
    if (*gen) {
      bc::Interferometer device;
      if (!g.base.empty()) {
        const auto law = g.noise_law == "uniform" ? bc::NoiseLaw::uniform : bc::NoiseLaw::gaussian;
        if (g.noise_law != "uniform" && g.noise_law != "gaussian")
          throw std::invalid_argument("noise_law must be gaussian or uniform");
        device = bc::perturb_hamiltonian(bc::load_interferometer(g.base), g.noise, g.noise_seed, law);
      } else {
        if (g.m < 1) throw std::invalid_argument("--m must be >= 1");
        device = bc::haar_unitary(g.m, g.seed);
      }
      bc::save_interferometer(device, g.out);
      std::printf("wrote %s (M=%d, unitarity residual %.3g)\n", g.out.c_str(), device.modes(),
                  bc::unitarity_residual(device.u));
    } else if (*ion) {
      const bc::IonChain chain = bc::IonChain::make(ic.m, species_mass(ic.species), ic.omega_z, ic.omega_x);
      const Eigen::MatrixXd h = bc::ion_hopping_matrix(chain);
      bc::Interferometer device;
      if (ic.random_phase_seed >= 0) {
        device = bc::random_phase_unitary(h.cast<bc::Complex>(), static_cast<std::uint64_t>(ic.random_phase_seed));
      } else if (ic.timing_error != 0) {
        const bc::Interferometer clean = bc::ion_interferometer(chain, ic.tau);
        device = bc::perturb_timing({h.cast<bc::Complex>(), ic.tau, clean.provenance}, ic.timing_error);
      } else {
        device = bc::ion_interferometer(chain, ic.tau);
      }
      bc::save_interferometer(device, ic.out);
      if (!ic.positions.empty()) {
        std::ofstream out(ic.positions);
        if (!out) throw std::runtime_error("cannot write " + ic.positions);
        out.precision(17);
        out << "ion,z_m\n";
        for (int i = 0; i < ic.m; ++i) out << i << ',' << chain.positions(i) << '\n';
      }
      if (!ic.hopping.empty()) {
        std::ofstream out(ic.hopping);
        if (!out) throw std::runtime_error("cannot write " + ic.hopping);
        out.precision(17);
        for (int i = 0; i < ic.m; ++i)
          for (int j = 0; j < ic.m; ++j) out << h(i, j) << (j + 1 < ic.m ? ',' : '\n');
      }
      std::printf("wrote %s (M=%d, t0=%.6g m^3/s)\n", ic.out.c_str(), ic.m, chain.hopping_scale());
    } else if (*sim) {
      const bc::Interferometer device = bc::load_interferometer(s.unitary);
      const bc::FockState input = input_from(s.input_state, device.modes(), s.n);
      bc::OutcomeDistribution dist;
      if (s.kind == "boson")
        dist = bc::boson_distribution(device, input, s.threads);
      else if (s.kind == "distinguishable")
        dist = bc::distinguishable_distribution(device, input, s.threads);
      else
        throw std::invalid_argument("--kind must be boson or distinguishable");
      bc::save_distribution(dist, s.out);
      std::printf("wrote %s (D=%llu, total probability %.15f)\n", s.out.c_str(),
                  static_cast<unsigned long long>(dist.shape.dimension), dist.total());
    } else if (*smp) {
      bc::SampleSet set;
      if (sp.uniform) {
        set = bc::draw_uniform(sp.m, sp.n, sp.n_m, sp.seed);
      } else {
        if (sp.table.empty()) throw std::invalid_argument("give --table or --uniform true");
        set = bc::draw_from_table(bc::load_distribution(sp.table), sp.n_m, sp.seed);
      }
      bc::save_samples(set, sp.out);
      std::printf("wrote %s (%llu events, %zu distinct)\n", sp.out.c_str(),
                  static_cast<unsigned long long>(set.total), set.distinct());
    } else if (*cg) {
      if (c.partition.empty() && c.samples.empty())
        throw std::invalid_argument("give --samples to build a partition or --partition to reuse one");
      const bc::BubblePartition partition = c.partition.empty()
                                                ? bc::build_bubbles(bc::load_samples(c.samples), c.params)
                                                : bc::load_partition(c.partition);
      if (!c.out.empty()) bc::save_partition(partition, c.out);
      std::printf("N_B = %d (%zu raw bubbles)\n", partition.size(), partition.raw_bubbles().size());
      if (!c.apply.empty()) {
        std::vector<bc::CoarseDistribution> coarse;
        for (const auto& file : c.apply) coarse.push_back(bc::coarse_grain(partition, bc::load_samples(file)));
        std::ofstream file_out;
        if (!c.counts.empty()) {
          file_out.open(c.counts);
          if (!file_out) throw std::runtime_error("cannot write " + c.counts);
        }
        std::ostream& out = c.counts.empty() ? std::cout : file_out;
        out << "bubble";
        for (const auto& file : c.apply) out << ',' << file;
        out << '\n';
        for (int b = 0; b < partition.size(); ++b) {
          out << b;
          for (const auto& cd : coarse) out << ',' << static_cast<std::uint64_t>(cd.masses(b));
          out << '\n';
        }
      }
    } else if (*cert) {
      const bc::SampleSet s1 = bc::load_samples(ct.sample1);
      const bc::SampleSet s2 = bc::load_samples(ct.sample2);
      const bc::BubblePartition partition =
          ct.partition.empty() ? bc::build_bubbles(s1, ct.params) : bc::load_partition(ct.partition);
      const bc::ChiSquare chi =
          bc::chi2_two_sample(bc::coarse_grain(partition, s1), bc::coarse_grain(partition, s2));
      bc::TestReport report = bc::verdict(chi.statistic, chi.df, ct.alpha);
      report.n_b = partition.size();
      report.sample1 = s1.provenance;
      report.sample2 = s2.provenance;
      const std::string text = bc::report_to_json(report);
      if (!ct.out.empty()) {
        std::ofstream out(ct.out);
        if (!out) throw std::runtime_error("cannot write " + ct.out);
        out << text << '\n';
      }
      std::cout << text << '\n';
    } else if (*camp) {
      const bc::CampaignReport report = bc::run_campaign(cfg);
      print_summary(report);
      if (!cfg.output_dir.empty())
        std::printf("report: %s\n", (std::filesystem::path(cfg.output_dir) / "report.json").c_str());
    } else if (*plots) {
      for (const auto& path : bc::emit_figure_data(campaign_dir, plot_dir)) std::printf("%s\n", path.c_str());
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
