#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "twl/finite_law.hpp"
#include "twl/measure.hpp"
#include "twl/walk.hpp"

namespace twl::env {

// Law of a site's right-step probability, supported in [epsilon, 1-epsilon].
class EnvironmentLaw {
 public:
  enum class Regime {
    kTransient,  // E log rho < 0 and a positive kappa must exist
    kAny,        // only ellipticity is checked (e.g. recurrent sites)
  };

  EnvironmentLaw(FiniteLaw omega_atoms, double epsilon,
                 Regime regime = Regime::kTransient);
  // epsilon taken as the distance of the support from {0, 1}.
  explicit EnvironmentLaw(FiniteLaw omega_atoms,
                          Regime regime = Regime::kTransient);

  const FiniteLaw& omega_atoms() const { return omega_atoms_; }
  double epsilon() const { return epsilon_; }

 private:
  FiniteLaw omega_atoms_;
  double epsilon_;
};

EnvironmentLaw load_environment_law(const std::string& path,
                                    EnvironmentLaw::Regime regime =
                                        EnvironmentLaw::Regime::kTransient);

struct TiltedEnvironment {
  FiniteLaw pi;     // law of log rho_0
  FiniteLaw pi_m;   // tilted law of delta^(m)
  std::uint64_t m = 1;
  double kappa = 0.0;
  double c = 0.0;
  double sigma2 = 0.0;
};

// Law of log((1 - omega)/omega); atoms closer than 1e-12 are merged.
FiniteLaw log_rho_law(const EnvironmentLaw& env);

double solve_kappa(const FiniteLaw& pi);

TiltedEnvironment tilt_env(const FiniteLaw& pi, double kappa, std::uint64_t m);
TiltedEnvironment tilt_env(const EnvironmentLaw& env, std::uint64_t m);

// (1 + exp(delta / sqrt(m)))^{-1}
double omega_from_delta(double delta, std::uint64_t m);
// sqrt(m) * log((1 - omega)/omega)
double delta_from_omega(double omega, std::uint64_t m);

// Law of log rho^(m) = delta^(m)/sqrt(m).
FiniteLaw log_rho_m_law(const TiltedEnvironment& tilted);

// Positive root of E (rho^(m))^s = 1. Throws IdentityViolation if the drift
// of log rho^(m) is not -kappa/(2m).
double solve_kappa_m(const TiltedEnvironment& tilted);

// Sites [lo, hi] with their delta draws and induced omegas.
class EnvironmentSlice {
 public:
  EnvironmentSlice(std::uint64_t m, std::uint64_t seed_key)
      : m_(m), seed_key_(seed_key) {}

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }
  bool empty() const { return deltas_.empty(); }
  bool contains(std::int64_t site) const {
    return !empty() && site >= lo_ && site <= hi_;
  }
  std::uint64_t m() const { return m_; }
  std::uint64_t seed_key() const { return seed_key_; }

  double delta(std::int64_t site) const;  // throws RangeNotMaterialized
  double omega(std::int64_t site) const;  // throws RangeNotMaterialized
  std::span<const double> deltas() const { return deltas_; }
  std::span<const double> omegas() const { return omegas_; }

  // Builds a slice from explicit per-site deltas starting at `lo`.
  static EnvironmentSlice from_deltas(std::uint64_t m, std::int64_t lo,
                                      std::vector<double> deltas,
                                      std::uint64_t seed_key = 0);

 private:
  friend class LazyEnvironment;
  std::uint64_t m_;
  std::uint64_t seed_key_;
  std::int64_t lo_ = 0;
  std::int64_t hi_ = -1;
  std::vector<double> deltas_;
  std::vector<double> omegas_;
};

// Site sampler plus slice; grows on demand. Site i always draws from the
// stream keyed by (seed_key, i), so growth never alters existing sites.
class LazyEnvironment {
 public:
  LazyEnvironment(const FiniteLaw& delta_law, std::uint64_t m,
                  std::uint64_t seed_key);

  void ensure(std::int64_t lo, std::int64_t hi);
  double omega(std::int64_t site) {
    if (!slice_.contains(site)) grow_to(site);
    return slice_.omegas_[static_cast<std::size_t>(site - slice_.lo_)];
  }
  const EnvironmentSlice& slice() const { return slice_; }
  EnvironmentSlice release() && { return std::move(slice_); }

 private:
  void grow_to(std::int64_t site);
  double draw_site(std::int64_t site) const;

  walk::AliasSampler sampler_;
  EnvironmentSlice slice_;
};

EnvironmentSlice materialize_environment(const TiltedEnvironment& tilted,
                                         std::int64_t lo, std::int64_t hi,
                                         std::uint64_t seed);

// Untilted sites: delta_i = log rho_i drawn from pi, omega via the same map.
EnvironmentSlice seignourel_environment(const EnvironmentLaw& env,
                                        std::uint64_t m, std::int64_t lo,
                                        std::int64_t hi, std::uint64_t seed);

// Nearest-neighbour walk from 0. Step k consumes the k-th uniform of the
// stream keyed by (seed, walk_index).
std::vector<std::int64_t> simulate_rwre(LazyEnvironment& environment,
                                        std::uint64_t n_steps,
                                        std::uint64_t seed,
                                        std::uint64_t walk_index);
// Frozen environment; throws RangeNotMaterialized if the walk leaves it.
std::vector<std::int64_t> simulate_rwre(const EnvironmentSlice& environment,
                                        std::uint64_t n_steps,
                                        std::uint64_t seed,
                                        std::uint64_t walk_index);

enum class Mode { kAnnealed, kQuenched };

// Seed key of the environment used by annealed replica `walk_index`, and of
// the shared quenched environment.
std::uint64_t annealed_environment_key(std::uint64_t seed,
                                       std::uint64_t walk_index);
std::uint64_t quenched_environment_key(std::uint64_t seed);

// t -> Z_{[m^2 t]} / m with a fresh environment for this walk_index.
walk::PathGrid scaled_rwre(const TiltedEnvironment& tilted, double horizon_T,
                           std::uint64_t seed, std::uint64_t walk_index);
// Same walk on a shared frozen environment.
walk::PathGrid scaled_rwre_quenched(const EnvironmentSlice& frozen,
                                    double horizon_T, std::uint64_t seed,
                                    std::uint64_t walk_index);

// Materializes the sites a walk of floor(m^2 T) steps can reach.
EnvironmentSlice quenched_environment(const TiltedEnvironment& tilted,
                                      double horizon_T, std::uint64_t seed);

std::vector<walk::PathGrid> rwre_ensemble(const TiltedEnvironment& tilted,
                                          double horizon_T,
                                          std::uint64_t num_walks,
                                          std::uint64_t seed, Mode mode,
                                          unsigned workers);

// V^(m)(x). Zero for 0 <= [mx] <= 1, (1/sqrt m) sum_{i=1}^{[mx]} delta_i for
// [mx] >= 2 and -(1/sqrt m) sum_{i=[mx]+1}^{0} delta_i for [mx] < 0.
double potential_at(const EnvironmentSlice& slice, double x);
std::vector<double> potential(const EnvironmentSlice& slice,
                              std::span<const double> xs);
// V^(m) at x = k/m for every k with the required sites materialized.
walk::PathGrid potential_grid(const EnvironmentSlice& slice);

std::string slice_to_csv(const EnvironmentSlice& slice);
EnvironmentSlice slice_from_csv(const std::string& text, std::uint64_t m);

}  // namespace twl::env
