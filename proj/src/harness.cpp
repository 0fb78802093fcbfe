#include "bosoncert/harness.hpp"

#include "bosoncert/parallel.hpp"
#include "bosoncert/permanent.hpp"
#include "bosoncert/rng.hpp"
#include "bosoncert/sampling.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bosoncert {
namespace {

using ordered_json = nlohmann::ordered_json;

double species_mass(const std::string& species) {
  if (species == "Yb171") return constants::kYb171Mass;
  throw std::invalid_argument("unknown ion species '" + species + "' (supported: Yb171)");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_tag(const std::string& role) {
  std::string out = role;
  for (char& c : out)
    if (c == ':' || c == '/' || c == ' ') c = '_';
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing artifact " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::filesystem::path run_dir(const std::filesystem::path& root) { return root / "run0001"; }

std::filesystem::path partition_file(const std::filesystem::path& root, int target) {
  return run_dir(root) / ("partition_nb" + std::to_string(target) + ".json");
}

std::filesystem::path sample_file(const std::filesystem::path& root, const std::string& role) {
  return run_dir(root) / (file_tag(role) + ".csv");
}

// Exact tables are cached by a hash of the device and input.
OutcomeDistribution cached_table(const std::filesystem::path& dir, const std::string& kind,
                                 const Interferometer& device, const FockState& input,
                                 unsigned threads) {
  auto compute = [&] {
    return kind == "boson" ? boson_distribution(device, input, threads)
                           : distinguishable_distribution(device, input, threads);
  };
  if (dir.empty()) return compute();
  const std::string key = interferometer_to_json(device) + "|" + input.to_string();
  const auto path = dir / (kind + "_" + hex64(fnv1a64(key)) + ".bsd");
  const ProblemShape shape = ProblemShape::make(input.modes(), input.particles());
  if (std::filesystem::exists(path)) {
    try {
      OutcomeDistribution dist = load_distribution(path);
      if (dist.shape == shape) {
        dist.provenance = kind + "{u=" + describe(device.provenance) + ",input=" + input.to_string() + "}";
        return dist;
      }
    } catch (const std::invalid_argument&) {
      // Corrupt cache entry; recompute below.
    }
  }
  OutcomeDistribution dist = compute();
  save_distribution(dist, path);
  return dist;
}

std::unique_ptr<TableSampler> make_sampler(const OutcomeDistribution& dist, std::uint64_t n_m) {
  return std::make_unique<TableSampler>(dist, n_m > dist.shape.dimension / 10);
}

Interferometer noisy_device(const CampaignConfig& cfg, const Role& role, const Interferometer& device,
                            std::uint64_t seed) {
  if (role.model == "hamiltonian") {
    const NoiseLaw law = cfg.noise_law == "uniform" ? NoiseLaw::uniform : NoiseLaw::gaussian;
    return perturb_hamiltonian(device, role.strength, seed, law);
  }
  const IonChain chain = IonChain::make(cfg.m, species_mass(cfg.species), cfg.omega_z, cfg.omega_x);
  EvolutionRequest request{ion_hopping_matrix(chain).cast<Complex>(), cfg.tau, device.provenance};
  return perturb_timing(request, role.strength);
}

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, int bins) {
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    if (!(v >= lo) || v > hi) continue;
    auto b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

ordered_json histogram_json(const Histogram& h) {
  return ordered_json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}, {"expected", h.expected}};
}

Histogram histogram_from_json(const nlohmann::json& j) {
  Histogram h;
  h.lo = j.at("lo").get<double>();
  h.hi = j.at("hi").get<double>();
  h.counts = j.at("counts").get<std::vector<std::uint64_t>>();
  h.expected = j.at("expected").get<std::vector<double>>();
  return h;
}

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Role parse_role(const std::string& text) {
  Role role;
  role.name = text;
  if (text == "quantum2" || text == "distinguishable" || text == "uniform") {
    role.kind = text;
    return role;
  }
  // noisy:<model>:<strength>
  const auto first = text.find(':');
  const auto second = first == std::string::npos ? first : text.find(':', first + 1);
  if (text.substr(0, first) != "noisy" || second == std::string::npos)
    throw std::invalid_argument("unknown sampler role '" + text + "'");
  role.kind = "noisy";
  role.model = text.substr(first + 1, second - first - 1);
  if (role.model != "hamiltonian" && role.model != "timing")
    throw std::invalid_argument("noise model must be hamiltonian or timing in '" + text + "'");
  const std::string number = text.substr(second + 1);
  std::size_t used = 0;
  try {
    role.strength = std::stod(number, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != number.size() || !(role.strength >= 0))
    throw std::invalid_argument("bad noise strength in '" + text + "'");
  return role;
}

void validate(const CampaignConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (cfg.system != "haar" && cfg.system != "ion") fail("system must be haar or ion");
  if (cfg.m < 1 || cfg.n < 1) fail("m and n must be positive");
  if (cfg.n > kMaxRyserOrder) fail("n exceeds the permanent size cap");
  try {
    (void)hilbert_dim(cfg.m, cfg.n);
  } catch (const std::overflow_error&) {
    fail("Hilbert space dimension overflows");
  }
  if (cfg.system == "ion" && cfg.unitary_file.empty()) {
    if (cfg.m < 2) fail("an ion chain needs at least two ions");
    if (!(cfg.omega_z > 0) || !(cfg.omega_x > 0)) fail("trap frequencies must be positive");
    if (!(cfg.tau >= 0)) fail("tau must be nonnegative");
    (void)species_mass(cfg.species);
  }
  if (!cfg.input_state.empty()) {
    if (static_cast<int>(cfg.input_state.size()) != cfg.m) fail("input_state must list m occupations");
    int total = 0;
    for (int s : cfg.input_state) {
      if (s < 0) fail("input_state occupations must be nonnegative");
      total += s;
    }
    if (total != cfg.n) fail("input_state must hold n particles");
  } else if (cfg.n > cfg.m) {
    fail("default input needs n <= m; give input_state explicitly");
  }
  if (cfg.n_m < 1) fail("n_m must be >= 1");
  if (cfg.n_s < 1) fail("n_s must be >= 1");
  if (!(cfg.alpha > 0 && cfg.alpha < 1)) fail("alpha must lie in (0, 1)");
  if (cfg.targets.empty()) fail("targets must not be empty");
  std::set<std::string> seen;
  for (const auto& t : cfg.targets) {
    const Role role = parse_role(t);
    if (!seen.insert(t).second) fail("duplicate target '" + t + "'");
    if (role.kind == "noisy" && role.model == "timing" &&
        (cfg.system != "ion" || !cfg.unitary_file.empty()))
      fail("timing noise needs a generated ion system");
    if (role.kind == "distinguishable") {
      const FockState input = campaign_input(cfg);
      for (int s : input.occupations())
        if (s > 1) fail("distinguishable role needs a collision-free input");
    }
  }
  if (cfg.target_n_b.empty()) fail("target_n_b must not be empty");
  for (int t : cfg.target_n_b)
    if (t < 2) fail("every target_n_b must be >= 2");
  if (cfg.initial_radius < 0 || cfg.initial_radius % 2 || cfg.radius_step < 0 || cfg.radius_step % 2)
    fail("radii must be even and nonnegative");
  if (cfg.noise_law != "gaussian" && cfg.noise_law != "uniform") fail("noise_law must be gaussian or uniform");
  if (cfg.histogram_bins < 1) fail("histogram_bins must be positive");
}

ordered_json config_to_json(const CampaignConfig& cfg) {
  ordered_json j;
  j["system"] = cfg.system;
  j["m"] = cfg.m;
  j["n"] = cfg.n;
  j["seed"] = cfg.seed;
  j["omega_z"] = cfg.omega_z;
  j["omega_x"] = cfg.omega_x;
  j["species"] = cfg.species;
  j["tau"] = cfg.tau;
  j["input_state"] = cfg.input_state;
  j["unitary_file"] = cfg.unitary_file;
  j["n_m"] = cfg.n_m;
  j["n_s"] = cfg.n_s;
  j["targets"] = cfg.targets;
  j["target_n_b"] = cfg.target_n_b;
  j["alpha"] = cfg.alpha;
  j["master_seed"] = cfg.master_seed;
  j["output_dir"] = cfg.output_dir;
  j["min_count"] = cfg.min_count;
  j["initial_radius"] = cfg.initial_radius;
  j["radius_step"] = cfg.radius_step;
  j["calibrate_threshold"] = cfg.calibrate_threshold;
  j["fixed_partition"] = cfg.fixed_partition;
  j["noise_per_run"] = cfg.noise_per_run;
  j["noise_law"] = cfg.noise_law;
  j["histogram_bins"] = cfg.histogram_bins;
  j["save_artifacts"] = cfg.save_artifacts;
  j["threads"] = cfg.threads;
  return j;
}

CampaignConfig config_from_json(const nlohmann::json& j, CampaignConfig cfg) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  const ordered_json known = config_to_json(cfg);
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw std::invalid_argument("config: unknown field '" + key + "'");
  try {
    take(j, "system", cfg.system);
    take(j, "m", cfg.m);
    take(j, "n", cfg.n);
    take(j, "seed", cfg.seed);
    take(j, "omega_z", cfg.omega_z);
    take(j, "omega_x", cfg.omega_x);
    take(j, "species", cfg.species);
    take(j, "tau", cfg.tau);
    take(j, "input_state", cfg.input_state);
    take(j, "unitary_file", cfg.unitary_file);
    take(j, "n_m", cfg.n_m);
    take(j, "n_s", cfg.n_s);
    take(j, "targets", cfg.targets);
    take(j, "target_n_b", cfg.target_n_b);
    take(j, "alpha", cfg.alpha);
    take(j, "master_seed", cfg.master_seed);
    take(j, "output_dir", cfg.output_dir);
    take(j, "min_count", cfg.min_count);
    take(j, "initial_radius", cfg.initial_radius);
    take(j, "radius_step", cfg.radius_step);
    take(j, "calibrate_threshold", cfg.calibrate_threshold);
    take(j, "fixed_partition", cfg.fixed_partition);
    take(j, "noise_per_run", cfg.noise_per_run);
    take(j, "noise_law", cfg.noise_law);
    take(j, "histogram_bins", cfg.histogram_bins);
    take(j, "save_artifacts", cfg.save_artifacts);
    take(j, "threads", cfg.threads);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

FockState campaign_input(const CampaignConfig& cfg) {
  if (!cfg.input_state.empty()) return FockState(cfg.input_state);
  std::vector<int> occ(static_cast<std::size_t>(cfg.m), 0);
  for (int i = 0; i < cfg.n && i < cfg.m; ++i) occ[static_cast<std::size_t>(i)] = 1;
  return FockState(occ);
}

Interferometer campaign_device(const CampaignConfig& cfg) {
  if (!cfg.unitary_file.empty()) {
    Interferometer device = load_interferometer(cfg.unitary_file);
    if (device.modes() != cfg.m)
      throw std::invalid_argument("config: unitary_file has " + std::to_string(device.modes()) +
                                  " modes, expected m = " + std::to_string(cfg.m));
    return device;
  }
  if (cfg.system == "haar") return haar_unitary(cfg.m, cfg.seed);
  const IonChain chain = IonChain::make(cfg.m, species_mass(cfg.species), cfg.omega_z, cfg.omega_x);
  return ion_interferometer(chain, cfg.tau);
}

const RoleResult& CampaignReport::find(const std::string& role, int target_n_b) const {
  for (const auto& r : results)
    if (r.role == role && r.target_n_b == target_n_b) return r;
  throw std::out_of_range("no result for role " + role + " at target N_B " + std::to_string(target_n_b));
}

CampaignReport run_campaign(const CampaignConfig& cfg) {
  validate(cfg);
  const FockState input = campaign_input(cfg);
  const Interferometer device = campaign_device(cfg);
  const unsigned threads = cfg.threads ? cfg.threads : default_thread_count();

  const std::filesystem::path root = cfg.output_dir;
  std::filesystem::path table_dir;
  if (!root.empty()) {
    std::filesystem::create_directories(root);
    table_dir = root / "tables";
    std::filesystem::create_directories(table_dir);
    save_interferometer(device, root / "device.json");
  }

  std::vector<Role> roles;
  for (const auto& t : cfg.targets) roles.push_back(parse_role(t));

  const OutcomeDistribution pq = cached_table(table_dir, "boson", device, input, threads);
  const auto q_sampler = make_sampler(pq, cfg.n_m);

  // Per-role samplers shared read-only across runs; null when drawn per run.
  std::vector<std::unique_ptr<TableSampler>> samplers(roles.size());
  std::vector<OutcomeDistribution> role_tables(roles.size());
  for (std::size_t k = 0; k < roles.size(); ++k) {
    const Role& role = roles[k];
    if (role.kind == "distinguishable") {
      role_tables[k] = cached_table(table_dir, "distinguishable", device, input, threads);
    } else if (role.kind == "noisy" && !(cfg.noise_per_run && role.model == "hamiltonian")) {
      const std::uint64_t noise_seed = Rng::stream_key(cfg.master_seed, 0, "noise:" + role.name);
      const Interferometer noisy = noisy_device(cfg, role, device, noise_seed);
      if (!root.empty()) save_interferometer(noisy, root / ("device_" + file_tag(role.name) + ".json"));
      role_tables[k] = cached_table(table_dir, "boson", noisy, input, threads);
    } else {
      continue;
    }
    samplers[k] = make_sampler(role_tables[k], cfg.n_m);
  }

  BubbleParams base_params;
  base_params.min_count = cfg.min_count;
  base_params.initial_radius = cfg.initial_radius;
  base_params.radius_step = cfg.radius_step;
  base_params.calibrate_threshold = cfg.calibrate_threshold;
  auto params_for = [&](int target) {
    BubbleParams p = base_params;
    p.target_bubbles = target;
    return p;
  };
  auto draw_s1 = [&](std::uint64_t run) {
    return q_sampler->draw(cfg.n_m, Rng::stream_key(cfg.master_seed, run, "s1"));
  };

  std::vector<std::optional<BubblePartition>> fixed(cfg.target_n_b.size());
  if (cfg.fixed_partition) {
    const SampleSet s1 = draw_s1(1);
    for (std::size_t t = 0; t < cfg.target_n_b.size(); ++t)
      fixed[t] = build_bubbles(s1, params_for(cfg.target_n_b[t]));
  }

  const std::size_t n_targets = cfg.target_n_b.size();
  const std::size_t n_roles = roles.size();
  const auto runs = static_cast<std::size_t>(cfg.n_s);
  // reports[(run * n_targets + t) * n_roles + k]
  std::vector<TestReport> reports(runs * n_targets * n_roles);
  std::vector<double> fidelities(runs, 0.0);
  const bool has_quantum2 = std::any_of(roles.begin(), roles.end(), [](const Role& r) { return r.kind == "quantum2"; });

  auto one_run = [&](std::size_t i) {
    const std::uint64_t run = i + 1;
    const SampleSet s1 = draw_s1(run);
    std::vector<SampleSet> samples(n_roles);
    for (std::size_t k = 0; k < n_roles; ++k) {
      const Role& role = roles[k];
      if (role.kind == "quantum2") {
        samples[k] = q_sampler->draw(cfg.n_m, Rng::stream_key(cfg.master_seed, run, "s2"));
        fidelities[i] = fidelity(s1, samples[k]);
      } else if (role.kind == "uniform") {
        samples[k] = draw_uniform(cfg.m, cfg.n, cfg.n_m, Rng::stream_key(cfg.master_seed, run, role.name));
      } else if (samplers[k]) {
        samples[k] = samplers[k]->draw(cfg.n_m, Rng::stream_key(cfg.master_seed, run, role.name));
      } else {
        const Interferometer noisy =
            noisy_device(cfg, role, device, Rng::stream_key(cfg.master_seed, run, "noise:" + role.name));
        const OutcomeDistribution table = boson_distribution(noisy, input, 1);
        samples[k] = make_sampler(table, cfg.n_m)->draw(cfg.n_m, Rng::stream_key(cfg.master_seed, run, role.name));
      }
    }
    for (std::size_t t = 0; t < n_targets; ++t) {
      const BubblePartition partition =
          cfg.fixed_partition ? *fixed[t] : build_bubbles(s1, params_for(cfg.target_n_b[t]));
      const CoarseDistribution c1 = coarse_grain(partition, s1);
      for (std::size_t k = 0; k < n_roles; ++k) {
        const ChiSquare chi = chi2_two_sample(c1, coarse_grain(partition, samples[k]));
        TestReport report = verdict(chi.statistic, chi.df, cfg.alpha);
        report.n_b = partition.size();
        report.sample1 = s1.provenance;
        report.sample2 = samples[k].provenance;
        reports[(i * n_targets + t) * n_roles + k] = std::move(report);
      }
      if (run == 1 && !root.empty() && cfg.save_artifacts) {
        std::filesystem::create_directories(run_dir(root));
        save_partition(partition, partition_file(root, cfg.target_n_b[t]));
      }
    }
    if (run == 1 && !root.empty() && cfg.save_artifacts) {
      save_samples(s1, sample_file(root, "s1"));
      for (std::size_t k = 0; k < n_roles; ++k) save_samples(samples[k], sample_file(root, roles[k].name));
    }
  };

  parallel_for(
      runs,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          try {
            one_run(i);
          } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("run " + std::to_string(i + 1) + ": " + e.what());
          } catch (const std::exception& e) {
            throw std::runtime_error("run " + std::to_string(i + 1) + ": " + e.what());
          }
        }
      },
      threads);

  CampaignReport out;
  out.config = cfg;
  out.device = describe(device.provenance);
  if (has_quantum2) out.fidelity_mean = std::accumulate(fidelities.begin(), fidelities.end(), 0.0) / static_cast<double>(runs);
  const int bins = cfg.histogram_bins;
  for (std::size_t t = 0; t < n_targets; ++t) {
    for (std::size_t k = 0; k < n_roles; ++k) {
      RoleResult r;
      r.role = roles[k].name;
      r.target_n_b = cfg.target_n_b[t];
      std::vector<TestReport> mine;
      mine.reserve(runs);
      for (std::size_t i = 0; i < runs; ++i) {
        const TestReport& rep = reports[(i * n_targets + t) * n_roles + k];
        mine.push_back(rep);
        r.chi2.push_back(rep.chi2);
        r.p_values.push_back(rep.p_value);
        r.n_b.push_back(rep.n_b);
        r.pass.push_back(rep.pass ? 1 : 0);
      }
      r.summary = campaign_summary(mine);
      r.n_b_mean = std::accumulate(r.n_b.begin(), r.n_b.end(), 0.0) / static_cast<double>(runs);

      double hi = *std::max_element(r.chi2.begin(), r.chi2.end());
      hi = std::max(hi, 3.0 * r.n_b_mean);
      r.chi2_hist = make_histogram(r.chi2, 0.0, hi, bins);
      // Null reference: mixture of chi2(df_r) over the realized per-run df.
      r.chi2_hist.expected.assign(static_cast<std::size_t>(bins), 0.0);
      const double width = hi / bins;
      for (const TestReport& rep : mine) {
        const double a = rep.df / 2.0;
        for (int b = 0; b < bins; ++b)
          r.chi2_hist.expected[static_cast<std::size_t>(b)] +=
              gamma_q(a, b * width / 2) - gamma_q(a, (b + 1) * width / 2);
      }
      r.p_hist = make_histogram(r.p_values, 0.0, 1.0, bins);
      r.p_hist.expected.assign(static_cast<std::size_t>(bins), static_cast<double>(runs) / bins);
      out.results.push_back(std::move(r));
    }
  }

  if (!root.empty()) write_text(root / "report.json", report_to_json(out) + "\n");
  return out;
}

std::string report_to_json(const CampaignReport& report) {
  ordered_json j;
  ordered_json cfg = config_to_json(report.config);
  // Scheduling and location do not change results, so they stay out of the report.
  cfg.erase("threads");
  cfg.erase("output_dir");
  j["config"] = std::move(cfg);
  j["device"] = report.device;
  j["input"] = campaign_input(report.config).to_string();
  j["dimension"] = hilbert_dim(report.config.m, report.config.n);
  j["fidelity_mean"] = report.fidelity_mean;
  auto results = ordered_json::array();
  for (const RoleResult& r : report.results) {
    ordered_json e;
    e["role"] = r.role;
    e["target_n_b"] = r.target_n_b;
    e["n_b_mean"] = r.n_b_mean;
    e["runs"] = r.summary.runs;
    e["pass_rate"] = r.summary.pass_rate;
    e["p_mean"] = r.summary.p_mean;
    e["p_std"] = r.summary.p_std;
    e["chi2"] = r.chi2;
    e["p_values"] = r.p_values;
    e["n_b"] = r.n_b;
    std::vector<int> pass(r.pass.begin(), r.pass.end());
    e["pass"] = pass;
    e["chi2_histogram"] = histogram_json(r.chi2_hist);
    e["p_histogram"] = histogram_json(r.p_hist);
    results.push_back(std::move(e));
  }
  j["results"] = std::move(results);
  return j.dump(1);
}

namespace {

CampaignReport report_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CampaignReport report;
  report.config = config_from_json(j.at("config"));
  report.device = j.at("device").get<std::string>();
  report.fidelity_mean = j.at("fidelity_mean").get<double>();
  for (const auto& e : j.at("results")) {
    RoleResult r;
    r.role = e.at("role").get<std::string>();
    r.target_n_b = e.at("target_n_b").get<int>();
    r.n_b_mean = e.at("n_b_mean").get<double>();
    r.summary.runs = e.at("runs").get<std::size_t>();
    r.summary.pass_rate = e.at("pass_rate").get<double>();
    r.summary.p_mean = e.at("p_mean").get<double>();
    r.summary.p_std = e.at("p_std").get<double>();
    r.chi2 = e.at("chi2").get<std::vector<double>>();
    r.p_values = e.at("p_values").get<std::vector<double>>();
    r.n_b = e.at("n_b").get<std::vector<int>>();
    for (int p : e.at("pass").get<std::vector<int>>()) r.pass.push_back(static_cast<char>(p));
    r.chi2_hist = histogram_from_json(e.at("chi2_histogram"));
    r.p_hist = histogram_from_json(e.at("p_histogram"));
    report.results.push_back(std::move(r));
  }
  return report;
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "lo,hi,count,expected\n";
  const std::size_t bins = h.counts.size();
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  out.precision(17);
  for (std::size_t b = 0; b < bins; ++b)
    out << h.lo + width * static_cast<double>(b) << ',' << h.lo + width * static_cast<double>(b + 1) << ','
        << h.counts[b] << ',' << (b < h.expected.size() ? h.expected[b] : 0.0) << '\n';
}

}  // namespace

std::vector<std::filesystem::path> emit_figure_data(const std::filesystem::path& campaign_dir,
                                                    const std::filesystem::path& out_dir) {
  CampaignReport report;
  try {
    report = report_from_json_text(read_text(campaign_dir / "report.json"));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("report.json: ") + e.what());
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  // Coarse-grained run-1 distributions with multinomial error bars.
  std::vector<std::string> series{"s1"};
  for (const auto& t : report.config.targets) series.push_back(t);
  std::vector<SampleSet> samples;
  for (const auto& s : series) samples.push_back(load_samples(sample_file(campaign_dir, s)));
  for (int target : report.config.target_n_b) {
    const BubblePartition partition = load_partition(partition_file(campaign_dir, target));
    std::vector<CoarseDistribution> coarse;
    for (const auto& s : samples) coarse.push_back(coarse_grain(partition, s));
    const auto path = out_dir / ("coarse_nb" + std::to_string(target) + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    out << "bubble";
    for (const auto& s : series) out << ",p_" << file_tag(s) << ",sigma_" << file_tag(s);
    out << '\n';
    for (int b = 0; b < partition.size(); ++b) {
      out << b;
      for (const auto& c : coarse) {
        const double p = c.masses(b) / c.total;
        out << ',' << p << ',' << multinomial_sigma(p, c.total);
      }
      out << '\n';
    }
    written.push_back(path);
  }

  for (const RoleResult& r : report.results) {
    const std::string stem = file_tag(r.role) + "_nb" + std::to_string(r.target_n_b) + ".csv";
    write_histogram_csv(out_dir / ("chi2_hist_" + stem), r.chi2_hist);
    write_histogram_csv(out_dir / ("pvalue_hist_" + stem), r.p_hist);
    written.push_back(out_dir / ("chi2_hist_" + stem));
    written.push_back(out_dir / ("pvalue_hist_" + stem));
  }

  const auto summary = out_dir / "pass_rates.csv";
  std::ofstream out(summary);
  if (!out) throw std::runtime_error("cannot write " + summary.string());
  out.precision(17);
  out << "role,target_n_b,n_b_mean,runs,pass_rate,p_mean,p_std\n";
  for (const RoleResult& r : report.results)
    out << r.role << ',' << r.target_n_b << ',' << r.n_b_mean << ',' << r.summary.runs << ','
        << r.summary.pass_rate << ',' << r.summary.p_mean << ',' << r.summary.p_std << '\n';
  written.push_back(summary);
  return written;
}

}  // namespace bosoncert
