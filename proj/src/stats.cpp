#include "twl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "twl/error.hpp"
#include "twl/io.hpp"

namespace twl::stats {

namespace {

std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> out(xs.begin(), xs.end());
  std::stable_sort(out.begin(), out.end());
  return out;
}

}  // namespace

double normal_cdf(double x, double mean, double variance) {
  if (!(variance > 0.0)) throw InvalidArgument("normal_cdf needs variance > 0");
  const double z = (x - mean) / std::sqrt(2.0 * variance);
  return 0.5 * std::erfc(-z);
}

double ks_one_sample(std::span<const double> sample,
                     const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidArgument("ks_one_sample: empty sample");
  const std::vector<double> xs = sorted_copy(sample);
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    const double rank = static_cast<double>(i);
    d = std::max({d, (rank + 1.0) / n - f, f - rank / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
  const std::vector<double> xa = sorted_copy(a);
  const std::vector<double> xb = sorted_copy(b);
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double x = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_c(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must be in (0,1)");
  return std::sqrt(-0.5 * std::log(0.5 * alpha));
}

double ks_one_sample_critical(double alpha, std::size_t n) {
  return kolmogorov_c(alpha) / std::sqrt(static_cast<double>(n));
}

double ks_two_sample_critical(double alpha, std::size_t n, std::size_t m) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return kolmogorov_c(alpha) * std::sqrt((dn + dm) / (dn * dm));
}

double mean(std::span<const double> sample) {
  if (sample.empty()) throw InvalidArgument("mean of empty sample");
  return std::accumulate(sample.begin(), sample.end(), 0.0) /
         static_cast<double>(sample.size());
}

Estimate moment_ci(std::span<const double> sample, int k) {
  if (sample.size() < 2) throw InvalidArgument("moment_ci needs >= 2 points");
  std::vector<double> powers(sample.size());
  std::transform(sample.begin(), sample.end(), powers.begin(),
                 [k](double x) { return std::pow(x, k); });
  const double est = mean(powers);
  double ss = 0.0;
  for (double p : powers) ss += (p - est) * (p - est);
  const double n = static_cast<double>(powers.size());
  const double sd = std::sqrt(ss / (n - 1.0));
  return {est, 3.0 * sd / std::sqrt(n)};
}

Estimate variance_ci(std::span<const double> sample) {
  if (sample.size() < 2) throw InvalidArgument("variance_ci needs >= 2 points");
  const double mu = mean(sample);
  double m2 = 0.0, m4 = 0.0;
  for (double x : sample) {
    const double d2 = (x - mu) * (x - mu);
    m2 += d2;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(sample.size());
  const double var = m2 / (n - 1.0);
  const double spread = std::max(m4 / n - (m2 / n) * (m2 / n), 0.0);
  return {var, 3.0 * std::sqrt(spread / n)};
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("correlation needs equal-length samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

TestReport distance_report(std::string name, double value, double threshold,
                           std::vector<std::size_t> sample_sizes,
                           std::map<std::string, std::string> provenance) {
  TestReport r;
  r.statistic_name = std::move(name);
  r.value = value;
  r.threshold = threshold;
  r.sample_sizes = std::move(sample_sizes);
  r.pass = value <= threshold;
  r.provenance = std::move(provenance);
  return r;
}

nlohmann::json to_json(const TestReport& report) {
  return {{"statistic_name", report.statistic_name},
          {"value", report.value},
          {"threshold", report.threshold},
          {"sample_sizes", report.sample_sizes},
          {"verdict", report.pass ? "pass" : "fail"},
          {"provenance", report.provenance}};
}

TestReport report_from_json(const nlohmann::json& j) {
  TestReport r;
  r.statistic_name = j.at("statistic_name").get<std::string>();
  r.value = j.at("value").get<double>();
  r.threshold = j.at("threshold").get<double>();
  r.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
  r.pass = j.at("verdict").get<std::string>() == "pass";
  r.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
  return r;
}

std::string render_line(const TestReport& report) {
  std::ostringstream out;
  out << (report.pass ? "[PASS] " : "[FAIL] ") << report.statistic_name << "  "
      << io::format_double(report.value) << (report.pass ? " <= " : " > ")
      << io::format_double(report.threshold);
  return out.str();
}

}  // namespace twl::stats
