#pragma once

#include "bosoncert/coarsegrain.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bosoncert {

struct ChiSquare {
  double statistic = 0;
  int df = 0;
};

/// Two-sample chi-square over a shared partition:
///   sum_b (sqrt(N2/N1) O1_b - sqrt(N1/N2) O2_b)^2 / (O1_b + O2_b)
/// over bins with O1_b + O2_b > 0, and df = N_B - 1 regardless of empty bins.
ChiSquare chi2_two_sample(const CoarseDistribution& first, const CoarseDistribution& second);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Upper tail of the chi-square law, Q(df/2, x/2). Underflows to 0 for
/// extreme x rather than reporting a denormal-free bound.
double chi2_sf(double x, int df);
inline double chi2_cdf(double x, int df) { return 1.0 - chi2_sf(x, df); }

/// Density of the chi-square law.
double chi2_pdf(double x, double df);

struct TestReport {
  double chi2 = 0;
  int df = 0;
  double p_value = 1;
  double alpha = 0.01;
  bool pass = true;
  /// p_value underflowed to 0 in double precision.
  bool p_underflow = false;
  int n_b = 0;
  std::string sample1;
  std::string sample2;
};

/// pass iff chi2_sf(chi2, df) > alpha.
TestReport verdict(double chi2, int df, double alpha);

struct CampaignSummary {
  std::size_t runs = 0;
  double pass_rate = 0;  // percent
  double p_mean = 0;
  double p_std = 0;  // sample standard deviation
};

CampaignSummary campaign_summary(std::span<const TestReport> reports);

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `samples`.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov p-value with Stephens' finite-n correction.
double ks_pvalue(double statistic, std::size_t n);

std::string report_to_json(const TestReport& report);
TestReport report_from_json(const std::string& text);

}  // namespace bosoncert
