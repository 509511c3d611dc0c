#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "twl/walk.hpp"

namespace twl::diffusion {

// Grid values V(k h) for k in [k_lo, k_hi] with V(0) = 0. A Brownian path
// extends itself on demand: cell k's increment V(kh) - V((k-1)h) is drawn
// from the stream keyed by (seed_key, k), so extension never touches
// existing cells. A fixed path cannot be extended.
class PotentialPath {
 public:
  struct Brownian {
    double sigma;
    double kappa;
    std::uint64_t seed_key;
  };

  // Samples cells for |x| <= extent.
  PotentialPath(double mesh_h, Brownian source, double extent);

  // Deterministic potential f evaluated on k in [k_lo, k_hi]; f(0) is
  // subtracted so the anchor holds.
  static PotentialPath from_function(double mesh_h, std::int64_t k_lo,
                                     std::int64_t k_hi,
                                     const std::function<double(double)>& f);

  double mesh_h() const { return mesh_h_; }
  std::int64_t k_lo() const { return k_lo_; }
  std::int64_t k_hi() const { return k_hi_; }
  double lo() const { return static_cast<double>(k_lo_) * mesh_h_; }
  double hi() const { return static_cast<double>(k_hi_) * mesh_h_; }
  const std::vector<double>& values() const { return values_; }
  bool extensible() const { return source_.has_value(); }

  double at(std::int64_t k) const;  // throws RangeNotMaterialized
  void ensure(std::int64_t k_lo, std::int64_t k_hi);

  // Right-step probability (1 + exp(V((k+1)h) - V(kh)))^{-1}.
  double right_probability(std::int64_t k) const;

  // Copy with every increment negated.
  PotentialPath reflected() const;

 private:
  PotentialPath() = default;
  double draw_increment(std::int64_t k) const;

  double mesh_h_ = 0.0;
  std::int64_t k_lo_ = 0;
  std::int64_t k_hi_ = 0;
  std::vector<double> values_{0.0};
  std::optional<Brownian> source_;
};

struct DiffusionConfig {
  double mesh_h = 0.05;
  double horizon_T = 1.0;
  std::uint64_t num_paths = 1;
  std::uint64_t seed = 0;
  std::uint64_t step_budget = 100'000'000;

  void validate() const;
  std::uint64_t steps() const;  // floor(T / h^2)
};

PotentialPath sample_brownian_potential(double sigma, double kappa,
                                        double mesh_h, double extent,
                                        std::uint64_t seed,
                                        std::uint64_t env_index);

// Nearest-neighbour chain on {k h} driven by the potential, one step per h^2
// of process time. Extends a Brownian potential as the chain explores.
walk::PathGrid simulate_diffusion_in_potential(PotentialPath& potential,
                                               const DiffusionConfig& config,
                                               std::uint64_t path_index);

// Annealed ensemble: path i runs in its own potential (env_index = i).
std::vector<walk::PathGrid> diffusion_ensemble(double sigma, double kappa,
                                               const DiffusionConfig& config,
                                               unsigned workers);

// `x,V` rows.
std::string potential_to_csv(const PotentialPath& potential);

}  // namespace twl::diffusion
