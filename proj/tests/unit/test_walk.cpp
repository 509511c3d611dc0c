#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "twl/error.hpp"
#include "twl/measure.hpp"
#include "twl/stats.hpp"
#include "lattice.hpp"
#include "twl/walk.hpp"

namespace twl::walk {
namespace {

const double kLn3 = std::log(3.0);

FiniteLaw two_point() { return FiniteLaw({{1.0, 0.25}, {-1.0, 0.75}}); }

std::vector<PathGrid> ensemble(std::uint64_t m, double T, std::uint64_t n,
                               std::uint64_t seed) {
  const SimConfig config{m, T, n, seed};
  const ScaledWalk walk(two_point(), measure::make_params(two_point(), m));
  std::vector<PathGrid> out;
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(walk.path(config, i));
  return out;
}

TEST(AliasSampler, FrequenciesWithinBinomialBand) {
  const FiniteLaw law({{-2.0, 0.1}, {0.5, 0.2}, {3.0, 0.3}, {7.0, 0.4}});
  const AliasSampler sampler(law);
  rng::Stream stream(11, rng::Domain::kTestData, 1);
  const int n = 200'000;
  std::vector<int> counts(law.size(), 0);
  for (int i = 0; i < n; ++i) ++counts[sampler.draw_index(stream)];
  for (std::size_t j = 0; j < law.size(); ++j) {
    const double p = law[j].prob;
    EXPECT_NEAR(counts[j] / static_cast<double>(n), p,
                4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(ScaledWalk, DeterministicAndOnLattice) {
  const auto a = ensemble(100, 1.0, 3, 42);
  const auto b = ensemble(100, 1.0, 3, 42);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].values, b[i].values);
    ASSERT_EQ(a[i].values.size(), 101u);
    EXPECT_DOUBLE_EQ(a[i].dt, 0.01);
    for (std::size_t k = 1; k < a[i].values.size(); ++k)
      EXPECT_NEAR(std::abs(a[i].values[k] - a[i].values[k - 1]), 0.1, 1e-12);
  }
  EXPECT_NE(a[0].values, a[1].values);
}

TEST(ScaledWalk, MarginalMomentsAndIncrements) {
  const std::uint64_t m = 100;
  const auto paths = ensemble(m, 1.0, 20'000, 5);
  const auto h1 = marginal(paths, m);
  const stats::Estimate mu = stats::moment_ci(h1, 1);
  EXPECT_LE(std::abs(mu.value + kLn3 / 2.0), mu.halfwidth);
  const stats::Estimate var = stats::variance_ci(h1);
  EXPECT_NEAR(var.value, 1.0, 0.05);

  // Centered H(t) + beta t/2 has uncorrelated increments.
  std::vector<double> first, second;
  for (const PathGrid& p : paths) {
    first.push_back(p.values[50] - p.values[0]);
    second.push_back(p.values[100] - p.values[50]);
  }
  EXPECT_LT(std::abs(stats::correlation(first, second)),
            4.0 / std::sqrt(static_cast<double>(paths.size())));
}

TEST(ScaledWalk, ExactLatticeLaw) {
  // H(1) at m=100 is (2 Bin(100, p) - 100)/10 with p the tilted up mass.
  const std::uint64_t m = 100;
  const double p = 0.5 - kLn3 / 40.0;
  const auto h1 = marginal(ensemble(m, 1.0, 20'000, 9), m);
  const auto cdf = testing::binomial_cdf(static_cast<int>(m), p);
  auto exact = [&](double x) {
    const double k = std::floor((x * 10.0 + 100.0) / 2.0 + 1e-9);
    if (k < 0) return 0.0;
    if (k >= static_cast<double>(m)) return 1.0;
    return cdf[static_cast<std::size_t>(k)];
  };
  EXPECT_LE(testing::lattice_ks(h1, exact, 0.2),
            stats::ks_one_sample_critical(0.01, h1.size()));
}

TEST(Brownian, MeanAndVariance) {
  std::vector<double> end;
  for (std::uint64_t i = 0; i < 20'000; ++i)
    end.push_back(simulate_bm_with_drift(1.5, 0.8, 2.0, 0.1, 3, i).values.back());
  const stats::Estimate mu = stats::moment_ci(end, 1);
  EXPECT_LE(std::abs(mu.value + 0.8), mu.halfwidth);
  const stats::Estimate var = stats::variance_ci(end);
  EXPECT_LE(std::abs(var.value - 4.5), var.halfwidth);
}

TEST(Brownian, GridRefinementKeepsMarginal) {
  std::vector<double> coarse, fine;
  for (std::uint64_t i = 0; i < 5'000; ++i) {
    coarse.push_back(simulate_bm_with_drift(1.0, 1.0, 1.0, 0.02, 1, i).values.back());
    fine.push_back(simulate_bm_with_drift(1.0, 1.0, 1.0, 0.01, 2, i).values.back());
  }
  EXPECT_LE(stats::ks_two_sample(coarse, fine),
            stats::ks_two_sample_critical(0.01, coarse.size(), fine.size()));
}

TEST(MaxExcursion, BoundHoldsAndIsReported) {
  const std::uint64_t m = 100;
  const SimConfig config{m, 1.0, 2'000, 17};
  const double lambdas[] = {10.0, 1000.0};
  const stats::TestReport r = max_excursion_bound_check(
      two_point(), measure::make_params(two_point(), m), config, lambdas);
  EXPECT_TRUE(r.pass);
}

TEST(SimConfig, Validation) {
  EXPECT_THROW((SimConfig{100, 1.0, 0, 1}.validate()), InvalidArgument);
  EXPECT_THROW((SimConfig{0, 1.0, 1, 1}.validate()), InvalidArgument);
  EXPECT_THROW((SimConfig{100, -1.0, 1, 1}.validate()), InvalidArgument);
  EXPECT_THROW(measure::make_params(FiniteLaw({{1.0, 0.5}, {-1.0, 0.5}}), 100),
               NonNegativeDrift);
}

TEST(PathCsv, RoundTrip) {
  const auto paths = ensemble(16, 1.0, 2, 1);
  const PathGrid back = path_from_csv(path_to_csv(paths[0]));
  EXPECT_EQ(back.values, paths[0].values);
  EXPECT_EQ(back.dt, paths[0].dt);
  EXPECT_EQ(back.meta, paths[0].meta);
  const auto many = ensemble_from_csv(ensemble_to_csv(paths));
  ASSERT_EQ(many.size(), 2u);
  EXPECT_EQ(many[1].values, paths[1].values);
}

}  // namespace
}  // namespace twl::walk
