#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace twl::stats {

// Asymptotic slack applied to KS critical values in acceptance tests to absorb
// pre-limit bias at finite scale.
inline constexpr double kKsSlack = 1.7;

double normal_cdf(double x, double mean, double variance);

// max_i max(i/N - F(x_(i)), F(x_(i)) - (i-1)/N) over the sorted sample.
double ks_one_sample(std::span<const double> sample,
                     const std::function<double(double)>& cdf);

// sup |F_a - F_b| over the merged support.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

// c(alpha) of the limiting Kolmogorov distribution, sqrt(-ln(alpha/2)/2).
double kolmogorov_c(double alpha);
double ks_one_sample_critical(double alpha, std::size_t n);
double ks_two_sample_critical(double alpha, std::size_t n, std::size_t m);

struct Estimate {
  double value;
  double halfwidth;  // 3-sigma
};

// k-th raw sample moment with a 3-sigma interval from the sample variance of
// the k-th powers.
Estimate moment_ci(std::span<const double> sample, int k);

// Sample variance with a 3-sigma interval from the fourth central moment.
Estimate variance_ci(std::span<const double> sample);

double mean(std::span<const double> sample);
double correlation(std::span<const double> x, std::span<const double> y);

struct TestReport {
  std::string statistic_name;
  double value = 0.0;
  double threshold = 0.0;
  std::vector<std::size_t> sample_sizes;
  bool pass = false;
  std::map<std::string, std::string> provenance;
};

// verdict = value <= threshold.
TestReport distance_report(std::string name, double value, double threshold,
                           std::vector<std::size_t> sample_sizes,
                           std::map<std::string, std::string> provenance = {});

nlohmann::json to_json(const TestReport& report);
TestReport report_from_json(const nlohmann::json& j);

// One human-readable line: `[PASS] name value <= threshold`.
std::string render_line(const TestReport& report);

}  // namespace twl::stats
