#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "twl/error.hpp"
#include "twl/stats.hpp"

namespace twl::stats {
namespace {

TEST(NormalCdf, KnownValues) {
  EXPECT_NEAR(normal_cdf(0.0, 0.0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_cdf(1.96, 0.0, 1.0), 0.9750021048517795, 1e-7);
  EXPECT_NEAR(normal_cdf(-1.0, 1.0, 4.0), 0.15865525393145707, 1e-7);
  EXPECT_NEAR(normal_cdf(1.959964, 0.0, 1.0), 0.975, 1e-6);
  EXPECT_THROW(normal_cdf(0.0, 0.0, 0.0), InvalidArgument);
}

TEST(NormalCdf, SymmetricAndMonotone) {
  double prev = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    EXPECT_NEAR(normal_cdf(x, 0.0, 1.0) + normal_cdf(-x, 0.0, 1.0), 1.0, 2e-7);
    EXPECT_GE(normal_cdf(x, 0.0, 1.0), prev);
    prev = normal_cdf(x, 0.0, 1.0);
  }
}

TEST(Ks, OneSampleSmallCase) {
  const std::vector<double> xs{0.1, 0.4, 0.7};
  // Uniform CDF: max over i of (i/3 - x_i, x_i - (i-1)/3).
  const double d = ks_one_sample(xs, [](double x) { return x; });
  EXPECT_NEAR(d, 0.3, 1e-15);
}

TEST(Ks, QuantileSampleAndNonFit) {
  const int n = 200;
  std::vector<double> xs;
  for (int i = 1; i <= n; ++i) xs.push_back((i - 0.5) / n);
  EXPECT_NEAR(ks_one_sample(xs, [](double x) { return x; }), 0.5 / n, 1e-12);
  const std::vector<double> same(100, 0.0);
  EXPECT_GE(ks_one_sample(same, [](double x) { return normal_cdf(x, 0.0, 1.0); }), 0.5);
  EXPECT_NEAR(ks_one_sample_critical(0.01, 20'000), 0.011509, 1e-6);
}

TEST(Ks, TwoSampleProperties) {
  EXPECT_DOUBLE_EQ(ks_two_sample(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 1.0);
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{3, 4, 5, 6};
  EXPECT_DOUBLE_EQ(ks_two_sample(a, b), 0.5);
  EXPECT_DOUBLE_EQ(ks_two_sample(b, a), 0.5);
  EXPECT_DOUBLE_EQ(ks_two_sample(a, std::vector<double>{4, 3, 1, 2}), 0.0);
  // Ties across samples are handled at the shared atom.
  EXPECT_DOUBLE_EQ(ks_two_sample(std::vector<double>{0, 0, 1},
                                 std::vector<double>{0, 1, 1}),
                   1.0 / 3.0);
}

TEST(Ks, CriticalValues) {
  EXPECT_NEAR(kolmogorov_c(0.01), 1.6276236, 1e-6);
  EXPECT_NEAR(ks_one_sample_critical(0.01, 10'000), 0.016276236, 1e-8);
  EXPECT_NEAR(ks_two_sample_critical(0.01, 100, 100), 1.6276236 * std::sqrt(0.02), 1e-6);
}

TEST(Moments, ConstantSampleHasZeroWidth) {
  const std::vector<double> xs(50, 2.5);
  const Estimate e = moment_ci(xs, 2);
  EXPECT_DOUBLE_EQ(e.value, 6.25);
  EXPECT_DOUBLE_EQ(e.halfwidth, 0.0);
  EXPECT_NEAR(variance_ci(xs).value, 0.0, 1e-15);
}

TEST(Reports, JsonRoundTrip) {
  const TestReport r = distance_report("ks", 0.01, 0.02, {100, 200}, {{"seed", "7"}});
  EXPECT_TRUE(r.pass);
  const TestReport back = report_from_json(to_json(r));
  EXPECT_EQ(back.statistic_name, "ks");
  EXPECT_EQ(back.value, 0.01);
  EXPECT_EQ(back.sample_sizes, r.sample_sizes);
  EXPECT_EQ(back.provenance, r.provenance);
  EXPECT_EQ(render_line(r).rfind("[PASS]", 0), 0u);
  EXPECT_FALSE(distance_report("ks", 0.03, 0.02, {1}).pass);
}

}  // namespace
}  // namespace twl::stats
