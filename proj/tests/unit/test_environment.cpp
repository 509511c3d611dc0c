#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "twl/environment.hpp"
#include "twl/error.hpp"
#include "twl/stats.hpp"
#include "lattice.hpp"

namespace twl::env {
namespace {

const double kLn3 = std::log(3.0);

EnvironmentLaw quarter_law() {
  return EnvironmentLaw(FiniteLaw({{0.75, 0.75}, {0.25, 0.25}}));
}

double mass_at(const FiniteLaw& law, double x) {
  return law.mass_where([x](double v) { return std::abs(v - x) < 1e-9; });
}

TEST(Environment, LogRhoLaw) {
  const FiniteLaw pi = log_rho_law(quarter_law());
  ASSERT_EQ(pi.size(), 2u);
  EXPECT_NEAR(mass_at(pi, -kLn3), 0.75, 1e-15);
  EXPECT_NEAR(mass_at(pi, kLn3), 0.25, 1e-15);
  EXPECT_NEAR(solve_kappa(pi), 1.0, 1e-12);

  const FiniteLaw merged = log_rho_law(EnvironmentLaw(
      FiniteLaw({{0.5, 0.5}, {0.5 + 1e-14, 0.25}, {0.25, 0.25}}),
      EnvironmentLaw::Regime::kAny));
  EXPECT_EQ(merged.size(), 2u);
}

TEST(Environment, RejectsNonTransientOrDegenerateLaws) {
  EXPECT_THROW(EnvironmentLaw(FiniteLaw({{0.75, 0.5}, {0.25, 0.5}})),
               NonNegativeDrift);
  EXPECT_NO_THROW(EnvironmentLaw(FiniteLaw({{0.75, 0.5}, {0.25, 0.5}}),
                                 EnvironmentLaw::Regime::kAny));
  EXPECT_THROW(EnvironmentLaw(FiniteLaw({{0.999, 1.0}}), 0.01), InvalidLaw);
}

TEST(Environment, TiltedSiteLaw) {
  const TiltedEnvironment t = tilt_env(quarter_law(), 100);
  EXPECT_NEAR(t.kappa, 1.0, 1e-12);
  EXPECT_NEAR(mass_at(t.pi_m, kLn3), 0.5 - 1.0 / (40.0 * kLn3), 1e-12);
  EXPECT_NEAR(t.pi_m.mean(), -0.05, 1e-12);
  EXPECT_NEAR(log_rho_m_law(t).mean(), -1.0 / 200.0, 1e-12);
}

TEST(Environment, OmegaMap) {
  EXPECT_NEAR(omega_from_delta(kLn3, 100), 1.0 / (1.0 + std::pow(3.0, 0.1)), 1e-15);
  EXPECT_NEAR(omega_from_delta(0.0, 7), 0.5, 1e-15);
  EXPECT_NEAR(delta_from_omega(omega_from_delta(-2.5, 9), 9), -2.5, 1e-12);
}

TEST(Environment, KappaM) {
  const TiltedEnvironment t = tilt_env(quarter_law(), 100);
  const double k = solve_kappa_m(t);
  // The root of p 3^{k/10} + (1-p) 3^{-k/10} = 1 is 10 log_3((1-p)/p).
  const double p = mass_at(t.pi_m, kLn3);
  EXPECT_NEAR(k, 10.0 * std::log((1.0 - p) / p) / kLn3, 1e-10);
}

TEST(LazyEnvironment, GrowthKeepsExistingSites) {
  const TiltedEnvironment t = tilt_env(quarter_law(), 100);
  LazyEnvironment lazy(t.pi_m, 100, 99);
  lazy.ensure(-5, 5);
  const std::vector<double> before(lazy.slice().omegas().begin(),
                                   lazy.slice().omegas().end());
  lazy.ensure(-500, 800);
  for (std::int64_t s = -5; s <= 5; ++s)
    EXPECT_EQ(lazy.slice().omega(s), before[static_cast<std::size_t>(s + 5)]);
  const EnvironmentSlice direct = materialize_environment(t, -500, 800, 99);
  EXPECT_EQ(std::vector<double>(direct.omegas().begin(), direct.omegas().end()),
            std::vector<double>(lazy.slice().omegas().begin(),
                                lazy.slice().omegas().end()));
  EXPECT_THROW(direct.omega(801), RangeNotMaterialized);
}

TEST(LazyEnvironment, SiteMeanMatchesTilt) {
  const TiltedEnvironment t = tilt_env(quarter_law(), 100);
  const EnvironmentSlice s = materialize_environment(t, 0, 999'999, 3);
  const double mean = stats::mean(s.deltas());
  const double sd = std::sqrt(t.pi_m.variance() / 1e6);
  EXPECT_LE(std::abs(mean - t.pi_m.mean()), 4.0 * sd);
}

TEST(LazyEnvironment, UntiltedSitesFollowPi) {
  const EnvironmentSlice s = seignourel_environment(quarter_law(), 100, 0, 199'999, 8);
  double up = 0.0;
  for (double d : s.deltas()) up += d > 0.0;
  up /= 200'000.0;
  EXPECT_NEAR(up, 0.25, 4.0 * std::sqrt(0.25 * 0.75 / 200'000.0));
}

TEST(Rwre, StepsAreNearestNeighbour) {
  const TiltedEnvironment t = tilt_env(quarter_law(), 10);
  LazyEnvironment lazy(t.pi_m, 10, 4);
  const auto z = simulate_rwre(lazy, 5'000, 1, 0);
  ASSERT_EQ(z.size(), 5'001u);
  EXPECT_EQ(z[0], 0);
  for (std::size_t k = 1; k < z.size(); ++k) EXPECT_EQ(std::abs(z[k] - z[k - 1]), 1);
}

TEST(Rwre, ConstantEnvironmentIsBiasedWalk) {
  const std::uint64_t m = 4;
  const double omega = 0.6;
  const EnvironmentSlice s = EnvironmentSlice::from_deltas(
      m, -401, std::vector<double>(803, delta_from_omega(omega, m)));
  std::vector<double> end;
  for (std::uint64_t i = 0; i < 5'000; ++i)
    end.push_back(static_cast<double>(simulate_rwre(s, 400, 2, i).back()));
  const stats::Estimate mu = stats::moment_ci(end, 1);
  EXPECT_LE(std::abs(mu.value - 80.0), mu.halfwidth);
  const stats::Estimate var = stats::variance_ci(end);
  EXPECT_LE(std::abs(var.value - 384.0), var.halfwidth);
}

TEST(Rwre, QuenchedFirstStepFrequency) {
  const std::uint64_t m = 100;
  const EnvironmentSlice s =
      EnvironmentSlice::from_deltas(m, -1, {0.0, kLn3, 0.0});
  const double w0 = s.omega(0);
  double right = 0.0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) right += simulate_rwre(s, 1, 6, i).back() == 1;
  EXPECT_NEAR(right / n, w0, 4.0 * std::sqrt(w0 * (1 - w0) / n));
  EXPECT_THROW(simulate_rwre(s, 10, 6, 0), RangeNotMaterialized);
}

TEST(Rwre, ScaledPathGrid) {
  const TiltedEnvironment t = tilt_env(quarter_law(), 10);
  const walk::PathGrid p = scaled_rwre(t, 2.0, 5, 0);
  ASSERT_EQ(p.values.size(), 201u);
  EXPECT_DOUBLE_EQ(p.dt, 0.01);
  for (std::size_t k = 1; k < p.values.size(); ++k)
    EXPECT_NEAR(std::abs(p.values[k] - p.values[k - 1]), 0.1, 1e-12);
  EXPECT_EQ(scaled_rwre(t, 2.0, 5, 0).values, p.values);
}

TEST(Potential, PiecewiseDefinition) {
  // Sites -2..4 at m = 4.
  const EnvironmentSlice s =
      EnvironmentSlice::from_deltas(4, -2, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0});
  EXPECT_DOUBLE_EQ(potential_at(s, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(potential_at(s, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(potential_at(s, 0.5), (4.0 + 5.0) / 2.0);
  EXPECT_DOUBLE_EQ(potential_at(s, 1.0), (4.0 + 5.0 + 6.0 + 7.0) / 2.0);
  EXPECT_DOUBLE_EQ(potential_at(s, -0.25), -3.0 / 2.0);
  EXPECT_DOUBLE_EQ(potential_at(s, -0.5), -(2.0 + 3.0) / 2.0);
  const walk::PathGrid g = potential_grid(s);
  for (std::size_t k = 0; k < g.values.size(); ++k)
    EXPECT_DOUBLE_EQ(g.values[k], potential_at(s, g.time(k)));
}

TEST(Potential, ExactLatticeLawAtOne) {
  // V(1) at m = 100 is (ln 3 / 10)(2 Bin(100, p) - 100), p the tilted up mass.
  const std::uint64_t m = 100;
  const TiltedEnvironment t = tilt_env(quarter_law(), m);
  const double p = mass_at(t.pi_m, kLn3);
  std::vector<double> v1;
  for (std::uint64_t i = 0; i < 5'000; ++i) {
    const EnvironmentSlice s = materialize_environment(t, 0, 100, 1000 + i);
    v1.push_back(potential_at(s, 1.0));
  }
  const int n = 100;
  const auto cdf = testing::binomial_cdf(n, p);
  auto exact = [&](double x) {
    const double k = std::floor((x * 10.0 / kLn3 + n) / 2.0 + 1e-9);
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    return cdf[static_cast<std::size_t>(k)];
  };
  EXPECT_LE(testing::lattice_ks(v1, exact, 0.2 * kLn3),
            stats::ks_one_sample_critical(0.01, v1.size()));
}

TEST(SliceCsv, RoundTrip) {
  const EnvironmentSlice s = materialize_environment(tilt_env(quarter_law(), 100), -3, 4, 1);
  const EnvironmentSlice back = slice_from_csv(slice_to_csv(s), 100);
  EXPECT_EQ(back.lo(), -3);
  EXPECT_EQ(std::vector<double>(back.deltas().begin(), back.deltas().end()),
            std::vector<double>(s.deltas().begin(), s.deltas().end()));
  EXPECT_THROW(slice_from_csv("site,delta,omega\n0,1,0.1\n", 100), Error);
}

}  // namespace
}  // namespace twl::env
