#include "twl/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "twl/ensemble.hpp"
#include "twl/error.hpp"
#include "twl/io.hpp"

namespace twl::diffusion {

namespace {

constexpr double kMaxMesh = 0.1;

std::int64_t cells_for(double extent, double mesh_h) {
  return static_cast<std::int64_t>(std::ceil(extent / mesh_h - 1e-9));
}

}  // namespace

PotentialPath::PotentialPath(double mesh_h, Brownian source, double extent)
    : mesh_h_(mesh_h), source_(source) {
  if (!(mesh_h > 0.0)) throw InvalidArgument("mesh_h must be > 0");
  if (!(source.sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
  if (source.kappa < 0.0) throw InvalidArgument("kappa must be >= 0");
  const std::int64_t cells = std::max<std::int64_t>(1, cells_for(extent, mesh_h));
  ensure(-cells, cells);
}

PotentialPath PotentialPath::from_function(
    double mesh_h, std::int64_t k_lo, std::int64_t k_hi,
    const std::function<double(double)>& f) {
  if (!(mesh_h > 0.0)) throw InvalidArgument("mesh_h must be > 0");
  if (k_lo > 0 || k_hi < 0) throw InvalidArgument("grid must contain 0");
  PotentialPath p;
  p.mesh_h_ = mesh_h;
  p.k_lo_ = k_lo;
  p.k_hi_ = k_hi;
  p.values_.clear();
  const double anchor = f(0.0);
  for (std::int64_t k = k_lo; k <= k_hi; ++k)
    p.values_.push_back(k == 0 ? 0.0 : f(static_cast<double>(k) * mesh_h) - anchor);
  return p;
}

double PotentialPath::at(std::int64_t k) const {
  if (k < k_lo_ || k > k_hi_) throw RangeNotMaterialized(k, k_lo_, k_hi_);
  return values_[static_cast<std::size_t>(k - k_lo_)];
}

double PotentialPath::draw_increment(std::int64_t k) const {
  rng::Stream stream(source_->seed_key, rng::Domain::kPotentialCells,
                     static_cast<std::uint64_t>(k));
  std::normal_distribution<double> gauss(-0.5 * source_->kappa * mesh_h_,
                                         source_->sigma * std::sqrt(mesh_h_));
  return gauss(stream);
}

void PotentialPath::ensure(std::int64_t lo, std::int64_t hi) {
  if (lo >= k_lo_ && hi <= k_hi_) return;
  if (!source_) throw RangeNotMaterialized(lo < k_lo_ ? lo : hi, k_lo_, k_hi_);
  if (lo < k_lo_) {
    std::vector<double> front(static_cast<std::size_t>(k_lo_ - lo));
    double v = values_.front();
    for (std::int64_t k = k_lo_; k > lo; --k) {
      v -= draw_increment(k);
      front[static_cast<std::size_t>(k - 1 - lo)] = v;
    }
    values_.insert(values_.begin(), front.begin(), front.end());
    k_lo_ = lo;
  }
  for (std::int64_t k = k_hi_ + 1; k <= hi; ++k)
    values_.push_back(values_.back() + draw_increment(k));
  k_hi_ = std::max(k_hi_, hi);
}

double PotentialPath::right_probability(std::int64_t k) const {
  return 1.0 / (1.0 + std::exp(at(k + 1) - at(k)));
}

PotentialPath PotentialPath::reflected() const {
  PotentialPath p = *this;
  for (double& v : p.values_) v = -v;
  p.source_.reset();
  return p;
}

void DiffusionConfig::validate() const {
  if (!(mesh_h > 0.0 && mesh_h <= kMaxMesh))
    throw InvalidArgument("mesh_h must lie in (0, 0.1]");
  if (!(horizon_T > 0.0)) throw InvalidArgument("horizon_T must be > 0");
  if (num_paths < 1) throw InvalidArgument("num_paths must be >= 1");
  if (steps() < 1) throw InvalidArgument("horizon_T / mesh_h^2 must be >= 1");
}

std::uint64_t DiffusionConfig::steps() const {
  return static_cast<std::uint64_t>(
      std::floor(horizon_T / (mesh_h * mesh_h) + 1e-9));
}

PotentialPath sample_brownian_potential(double sigma, double kappa,
                                        double mesh_h, double extent,
                                        std::uint64_t seed,
                                        std::uint64_t env_index) {
  return PotentialPath(
      mesh_h,
      {sigma, kappa, rng::derive_seed(seed, rng::Domain::kPotentialSeed, env_index)},
      extent);
}

walk::PathGrid simulate_diffusion_in_potential(PotentialPath& potential,
                                               const DiffusionConfig& config,
                                               std::uint64_t path_index) {
  config.validate();
  if (potential.mesh_h() != config.mesh_h)
    throw InvalidArgument("potential mesh differs from config mesh");
  const std::uint64_t n = config.steps();
  if (n > config.step_budget) throw StepBudgetExceeded(n, config.step_budget);

  rng::Stream stream(config.seed, rng::Domain::kDiffusionSteps, path_index);
  walk::PathGrid path;
  path.dt = config.mesh_h * config.mesh_h;
  path.values.resize(n + 1);
  path.values[0] = 0.0;
  std::int64_t k = 0;
  for (std::uint64_t step = 1; step <= n; ++step) {
    if (k + 1 > potential.k_hi() || k < potential.k_lo()) {
      const std::int64_t width = potential.k_hi() - potential.k_lo();
      potential.ensure(std::min(potential.k_lo(), k - width),
                       std::max(potential.k_hi(), k + width));
    }
    k += stream.uniform() < potential.right_probability(k) ? 1 : -1;
    path.values[step] = static_cast<double>(k) * config.mesh_h;
  }
  path.meta = {{"process", "diffusion_in_potential"},
               {"h", io::format_double(config.mesh_h)},
               {"seed", std::to_string(config.seed)},
               {"path_index", std::to_string(path_index)}};
  return path;
}

std::vector<walk::PathGrid> diffusion_ensemble(double sigma, double kappa,
                                               const DiffusionConfig& config,
                                               unsigned workers) {
  config.validate();
  const double extent = 4.0 * std::sqrt(config.horizon_T) + config.mesh_h;
  return run_ensemble(config.num_paths, workers, [&](std::uint64_t i) {
    PotentialPath v =
        sample_brownian_potential(sigma, kappa, config.mesh_h, extent, config.seed, i);
    walk::PathGrid p = simulate_diffusion_in_potential(v, config, i);
    p.meta["sigma"] = io::format_double(sigma);
    p.meta["kappa"] = io::format_double(kappa);
    return p;
  });
}

std::string potential_to_csv(const PotentialPath& potential) {
  std::string out = "x,V\n";
  for (std::int64_t k = potential.k_lo(); k <= potential.k_hi(); ++k) {
    out += io::format_double(static_cast<double>(k) * potential.mesh_h());
    out += ',';
    out += io::format_double(potential.at(k));
    out += '\n';
  }
  return out;
}

}  // namespace twl::diffusion
