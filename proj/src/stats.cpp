#include "bosoncert/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bosoncert {
namespace {

constexpr int kMaxGammaIterations = 10000;
constexpr double kGammaEpsilon = 1e-16;

// exp(-x + a ln x - lgamma(a)), the common prefactor of both expansions.
double gamma_prefactor(double a, double x) {
  return std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kMaxGammaIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEpsilon) return sum * gamma_prefactor(a, x);
  }
  throw std::runtime_error("incomplete gamma series did not converge");
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEpsilon;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEpsilon) return gamma_prefactor(a, x) * h;
  }
  throw std::runtime_error("incomplete gamma continued fraction did not converge");
}

}  // namespace

ChiSquare chi2_two_sample(const CoarseDistribution& first, const CoarseDistribution& second) {
  if (!first.counts || !second.counts)
    throw std::invalid_argument("chi2_two_sample: expects event counts, not probabilities");
  if (first.partition_id != second.partition_id || first.size() != second.size())
    throw std::invalid_argument("chi2_two_sample: samples were coarse-grained by different partitions");
  const double n1 = first.masses.sum();
  const double n2 = second.masses.sum();
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("chi2_two_sample: empty sample");
  const double k1 = std::sqrt(n2 / n1);
  const double k2 = std::sqrt(n1 / n2);
  double chi2 = 0;
  for (int b = 0; b < first.size(); ++b) {
    const double o1 = first.masses(b);
    const double o2 = second.masses(b);
    if (o1 + o2 <= 0) continue;
    const double diff = k1 * o1 - k2 * o2;
    chi2 += diff * diff / (o1 + o2);
  }
  return ChiSquare{chi2, first.size() - 1};
}

double gamma_q(double a, double x) {
  if (!(a > 0)) throw std::invalid_argument("gamma_q: a must be positive");
  if (!(x >= 0)) throw std::invalid_argument("gamma_q: x must be nonnegative");
  if (x == 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_fraction(a, x), 0.0, 1.0);
}

double chi2_sf(double x, int df) {
  if (df <= 0) throw std::invalid_argument("chi2_sf: degrees of freedom must be positive");
  if (!(x >= 0)) throw std::invalid_argument("chi2_sf: statistic must be nonnegative");
  return gamma_q(0.5 * df, 0.5 * x);
}

double chi2_pdf(double x, double df) {
  if (x < 0) return 0.0;
  if (x == 0) return df == 2 ? 0.5 : (df < 2 ? std::numeric_limits<double>::infinity() : 0.0);
  const double k = 0.5 * df;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

TestReport verdict(double chi2, int df, double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("verdict: alpha must lie in (0, 1)");
  TestReport r;
  r.chi2 = chi2;
  r.df = df;
  r.n_b = df + 1;
  r.alpha = alpha;
  r.p_value = chi2_sf(chi2, df);
  r.p_underflow = r.p_value == 0.0 && chi2 > 0;
  r.pass = r.p_value > alpha;
  return r;
}

CampaignSummary campaign_summary(std::span<const TestReport> reports) {
  if (reports.empty()) throw std::invalid_argument("campaign_summary: no reports");
  CampaignSummary s;
  s.runs = reports.size();
  std::size_t passed = 0;
  double sum = 0;
  for (const auto& r : reports) {
    passed += r.pass ? 1 : 0;
    sum += r.p_value;
  }
  const auto n = static_cast<double>(reports.size());
  s.pass_rate = 100.0 * static_cast<double>(passed) / n;
  s.p_mean = sum / n;
  if (reports.size() > 1) {
    double ss = 0;
    for (const auto& r : reports) ss += (r.p_value - s.p_mean) * (r.p_value - s.p_mean);
    s.p_std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double statistic, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * statistic;
  if (lambda < 1e-3) return 1.0;
  double sum = 0;
  double sign = 1;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

std::string report_to_json(const TestReport& r) {
  nlohmann::ordered_json j;
  j["chi2"] = r.chi2;
  j["df"] = r.df;
  j["p_value"] = r.p_value;
  j["alpha"] = r.alpha;
  j["pass"] = r.pass;
  j["n_b"] = r.n_b;
  j["sample1"] = r.sample1;
  j["sample2"] = r.sample2;
  j["p_underflow"] = r.p_underflow;
  return j.dump();
}

TestReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TestReport r;
    r.chi2 = j.at("chi2").get<double>();
    r.df = j.at("df").get<int>();
    r.p_value = j.at("p_value").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.pass = j.at("pass").get<bool>();
    r.n_b = j.at("n_b").get<int>();
    r.sample1 = j.value("sample1", std::string{});
    r.sample2 = j.value("sample2", std::string{});
    r.p_underflow = j.value("p_underflow", false);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("test report: ") + e.what());
  }
}

}  // namespace bosoncert
