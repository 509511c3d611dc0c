#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "twl/finite_law.hpp"
#include "twl/measure.hpp"
#include "twl/rng.hpp"
#include "twl/stats.hpp"

namespace twl::walk {

// Values of a process at t0 + k*dt. `meta` carries provenance (m, seed,
// process kind) and is written as `#` header lines on export.
struct PathGrid {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;
  std::map<std::string, std::string> meta;

  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double horizon() const { return time(values.size() - 1); }
  // Linear interpolation between grid points; clamps outside the grid.
  double value_at(double t) const;
};

struct SimConfig {
  std::uint64_t m = 1;
  double horizon_T = 1.0;
  std::uint64_t num_paths = 1;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidArgument
  // floor(m*T): index of the last grid point.
  std::uint64_t steps() const;
};

// Vose alias table: O(n) construction, O(1) draws.
class AliasSampler {
 public:
  explicit AliasSampler(const FiniteLaw& law);

  double draw(rng::Stream& stream) const;
  std::size_t draw_index(rng::Stream& stream) const;
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
  std::vector<double> accept_;
  std::vector<std::uint32_t> alias_;
};

AliasSampler build_sampler(const FiniteLaw& law);

// Simulates k -> S_k / sqrt(m) for the tilted law at scale `params.m`. The
// tilt and its alias table are built once and shared across paths.
class ScaledWalk {
 public:
  ScaledWalk(const FiniteLaw& law, const measure::TiltParams& params);

  PathGrid path(const SimConfig& config, std::uint64_t path_index) const;
  const measure::TiltReport& report() const { return report_; }

 private:
  measure::TiltReport report_;
  AliasSampler sampler_;
};

PathGrid simulate_scaled_walk(const FiniteLaw& law,
                              const measure::TiltParams& params,
                              const SimConfig& config, std::uint64_t path_index);

// Brownian motion sigma*B(t) - (beta/2) t sampled exactly on its grid.
PathGrid simulate_bm_with_drift(double sigma, double beta, double horizon_T,
                                double dt, std::uint64_t seed,
                                std::uint64_t path_index);

// Monte Carlo estimate of P(sup_{t<=T} |H(t)| >= lambda) for every lambda,
// compared against 2TC/lambda^2 plus three binomial standard errors, with C
// the supremum of the increment variance over the valid scale range.
// Throws BoundViolated for the first offending lambda.
stats::TestReport max_excursion_bound_check(const FiniteLaw& law,
                                            const measure::TiltParams& params,
                                            const SimConfig& config,
                                            std::span<const double> lambdas);

// `#key=value` meta lines, then `t,value` rows.
std::string path_to_csv(const PathGrid& path);
PathGrid path_from_csv(const std::string& text);

// `#key=value` meta lines, then `path_index,t,value` rows.
std::string ensemble_to_csv(std::span<const PathGrid> paths,
                            std::uint64_t first_index = 0);
std::vector<PathGrid> ensemble_from_csv(const std::string& text);

// `index,value` rows, one per sample.
std::string samples_to_csv(std::span<const double> samples);
std::vector<double> samples_from_csv(const std::string& text);

// Values of every path at grid index k.
std::vector<double> marginal(std::span<const PathGrid> paths, std::size_t k);

}  // namespace twl::walk
