#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "twl/diffusion.hpp"
#include "twl/error.hpp"
#include "twl/stats.hpp"

namespace twl::diffusion {
namespace {

std::vector<double> endpoints(PotentialPath& v, const DiffusionConfig& c) {
  std::vector<double> out;
  for (std::uint64_t i = 0; i < c.num_paths; ++i)
    out.push_back(simulate_diffusion_in_potential(v, c, i).values.back());
  return out;
}

TEST(Potential, AnchoredAndGaussianAtOne) {
  const double h = 0.05, sigma = 1.3, kappa = 0.8;
  std::vector<double> v1;
  for (std::uint64_t i = 0; i < 10'000; ++i) {
    const PotentialPath v = sample_brownian_potential(sigma, kappa, h, 1.0, 4, i);
    EXPECT_EQ(v.at(0), 0.0);
    v1.push_back(v.at(20));
  }
  const stats::Estimate mu = stats::moment_ci(v1, 1);
  EXPECT_LE(std::abs(mu.value + kappa / 2.0), mu.halfwidth);
  const stats::Estimate var = stats::variance_ci(v1);
  EXPECT_LE(std::abs(var.value - sigma * sigma), var.halfwidth);
}

TEST(Potential, ExtensionMatchesUpfrontSampling) {
  PotentialPath grown = sample_brownian_potential(1.0, 1.0, 0.05, 1.0, 8, 3);
  const PotentialPath wide = sample_brownian_potential(1.0, 1.0, 0.05, 5.0, 8, 3);
  grown.ensure(-100, 100);
  for (std::int64_t k = -100; k <= 100; ++k) EXPECT_EQ(grown.at(k), wide.at(k));
  EXPECT_THROW(wide.at(101), RangeNotMaterialized);
}

TEST(Chain, FlatPotentialIsSimpleWalk) {
  PotentialPath flat = PotentialPath::from_function(0.05, -400, 400, [](double) { return 0.0; });
  const DiffusionConfig c{0.05, 1.0, 10'000, 2};
  const std::vector<double> x = endpoints(flat, c);
  const stats::Estimate mu = stats::moment_ci(x, 1);
  EXPECT_LE(std::abs(mu.value), mu.halfwidth);
  const stats::Estimate var = stats::variance_ci(x);
  EXPECT_LE(std::abs(var.value - 1.0), var.halfwidth);
}

TEST(Chain, LinearPotentialPushesDownhill) {
  PotentialPath slope = PotentialPath::from_function(0.05, -400, 400, [](double x) { return 2.0 * x; });
  const std::vector<double> x = endpoints(slope, {0.05, 1.0, 2'000, 3});
  const stats::Estimate mu = stats::moment_ci(x, 1);
  EXPECT_LT(mu.value + mu.halfwidth, 0.0);
}

TEST(Chain, ReflectionFlipsStepProbabilities) {
  const PotentialPath v = sample_brownian_potential(1.0, 1.0, 0.05, 2.0, 12, 0);
  const PotentialPath r = v.reflected();
  for (std::int64_t k = v.k_lo(); k < v.k_hi(); ++k)
    EXPECT_NEAR(r.right_probability(k), 1.0 - v.right_probability(k), 1e-15);
}

TEST(Chain, SpeedLimitAndDeterminism) {
  const DiffusionConfig c{0.05, 1.0, 3, 7};
  const auto a = diffusion_ensemble(1.0, 1.0, c, 1);
  const auto b = diffusion_ensemble(1.0, 1.0, c, 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].values, b[i].values);
    for (std::size_t k = 0; k < a[i].values.size(); ++k)
      EXPECT_LE(std::abs(a[i].values[k]), a[i].time(k) / 0.05 + 1e-9);
  }
}

TEST(Chain, MeshRefinementAgrees) {
  const auto coarse = diffusion_ensemble(1.0, 1.0, {0.05, 1.0, 3'000, 31}, 1);
  const auto fine = diffusion_ensemble(1.0, 1.0, {0.025, 1.0, 3'000, 32}, 1);
  std::vector<double> a, b;
  for (const auto& p : coarse) a.push_back(p.values.back());
  for (const auto& p : fine) b.push_back(p.values.back());
  EXPECT_LE(stats::ks_two_sample(a, b),
            stats::kKsSlack * stats::ks_two_sample_critical(0.01, a.size(), b.size()));
}

TEST(Chain, Validation) {
  PotentialPath v = sample_brownian_potential(1.0, 1.0, 0.05, 1.0, 1, 0);
  DiffusionConfig c{0.05, 1.0, 1, 1};
  c.step_budget = 10;
  EXPECT_THROW(simulate_diffusion_in_potential(v, c, 0), StepBudgetExceeded);
  EXPECT_THROW((DiffusionConfig{0.2, 1.0, 1, 1}.validate()), InvalidArgument);
  EXPECT_THROW((DiffusionConfig{0.05, 1.0, 0, 1}.validate()), InvalidArgument);
  EXPECT_THROW(simulate_diffusion_in_potential(v, {0.025, 1.0, 1, 1}, 0), InvalidArgument);
  PotentialPath tiny = PotentialPath::from_function(0.05, -1, 1, [](double) { return 0.0; });
  EXPECT_THROW(simulate_diffusion_in_potential(tiny, {0.05, 1.0, 1, 1}, 0),
               RangeNotMaterialized);
}

}  // namespace
}  // namespace twl::diffusion
