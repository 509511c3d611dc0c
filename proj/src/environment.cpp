#include "twl/environment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twl/ensemble.hpp"
#include "twl/error.hpp"
#include "twl/io.hpp"

namespace twl::env {

namespace {

constexpr double kMergeTolerance = 1e-12;
constexpr double kKappaMTolerance = 1e-10;

double support_margin(const FiniteLaw& omegas) {
  return std::min(omegas.min_value(), 1.0 - omegas.max_value());
}

std::uint64_t site_id(std::int64_t site) {
  return static_cast<std::uint64_t>(site);
}

walk::PathGrid to_scaled_path(const std::vector<std::int64_t>& z,
                              std::uint64_t m) {
  walk::PathGrid p;
  const double md = static_cast<double>(m);
  p.dt = 1.0 / (md * md);
  p.values.resize(z.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    p.values[k] = static_cast<double>(z[k]) / md;
  return p;
}

std::uint64_t rwre_steps(std::uint64_t m, double horizon_T) {
  if (!(horizon_T > 0.0)) throw InvalidArgument("horizon_T must be > 0");
  const double md = static_cast<double>(m);
  return static_cast<std::uint64_t>(std::floor(md * md * horizon_T + 1e-9));
}

template <typename Environment>
std::vector<std::int64_t> run_walk(Environment& environment,
                                   std::uint64_t n_steps, std::uint64_t seed,
                                   std::uint64_t walk_index) {
  if (n_steps < 1) throw InvalidArgument("n_steps must be >= 1");
  rng::Stream stream(seed, rng::Domain::kRwreSteps, walk_index);
  std::vector<std::int64_t> z(n_steps + 1, 0);
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    const std::int64_t here = z[k];
    z[k + 1] = here + (stream.uniform() < environment.omega(here) ? 1 : -1);
  }
  return z;
}

}  // namespace

EnvironmentLaw::EnvironmentLaw(FiniteLaw omega_atoms, double epsilon,
                               Regime regime)
    : omega_atoms_(std::move(omega_atoms)), epsilon_(epsilon) {
  if (!(epsilon_ > 0.0 && epsilon_ < 0.5))
    throw InvalidLaw("ellipticity margin must lie in (0, 1/2)");
  if (omega_atoms_.min_value() < epsilon_ ||
      omega_atoms_.max_value() > 1.0 - epsilon_)
    throw InvalidLaw("omega atoms must lie in [epsilon, 1 - epsilon]");
  if (regime == Regime::kTransient) solve_kappa(log_rho_law(*this));
}

EnvironmentLaw::EnvironmentLaw(FiniteLaw omega_atoms, Regime regime)
    : EnvironmentLaw(omega_atoms, support_margin(omega_atoms), regime) {}

EnvironmentLaw load_environment_law(const std::string& path,
                                    EnvironmentLaw::Regime regime) {
  FiniteLaw law = load_finite_law(path);
  if (law.min_value() <= 0.0 || law.max_value() >= 1.0)
    throw InvalidLaw("omega atoms must lie in (0, 1)");
  return EnvironmentLaw(std::move(law), regime);
}

FiniteLaw log_rho_law(const EnvironmentLaw& env) {
  std::vector<Atom> atoms;
  for (const Atom& a : env.omega_atoms().atoms())
    atoms.push_back({std::log1p(-a.value) - std::log(a.value), a.prob});
  return FiniteLaw::merged(std::move(atoms), kMergeTolerance);
}

double solve_kappa(const FiniteLaw& pi) { return measure::solve_beta(pi); }

TiltedEnvironment tilt_env(const FiniteLaw& pi, double kappa, std::uint64_t m) {
  const double c = measure::compute_c(pi, kappa);
  measure::TiltReport report = measure::tilt(pi, kappa, c, m);
  return TiltedEnvironment{.pi = pi,
                           .pi_m = std::move(report.tilted),
                           .m = m,
                           .kappa = kappa,
                           .c = c,
                           .sigma2 = report.params.sigma2};
}

TiltedEnvironment tilt_env(const EnvironmentLaw& env, std::uint64_t m) {
  const FiniteLaw pi = log_rho_law(env);
  return tilt_env(pi, solve_kappa(pi), m);
}

double omega_from_delta(double delta, std::uint64_t m) {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  return 1.0 / (1.0 + std::exp(delta / std::sqrt(static_cast<double>(m))));
}

double delta_from_omega(double omega, std::uint64_t m) {
  return std::sqrt(static_cast<double>(m)) * (std::log1p(-omega) - std::log(omega));
}

FiniteLaw log_rho_m_law(const TiltedEnvironment& tilted) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(tilted.m));
  std::vector<Atom> atoms;
  for (const Atom& a : tilted.pi_m.atoms())
    atoms.push_back({a.value * scale, a.prob});
  return FiniteLaw(std::move(atoms));
}

double solve_kappa_m(const TiltedEnvironment& tilted) {
  const FiniteLaw law = log_rho_m_law(tilted);
  const double drift = law.mean();
  const double expected = -tilted.kappa / (2.0 * static_cast<double>(tilted.m));
  if (std::abs(drift - expected) > measure::kIdentityTolerance)
    throw IdentityViolation("E log rho^(m) = -kappa/(2m)", drift, expected);
  const double kappa_m = measure::solve_beta(law);
  const double moment =
      law.expect([kappa_m](double x) { return std::exp(kappa_m * x); });
  if (std::abs(moment - 1.0) > kKappaMTolerance)
    throw IdentityViolation("E rho^(m)^kappa_m = 1", moment, 1.0);
  return kappa_m;
}

double EnvironmentSlice::delta(std::int64_t site) const {
  if (!contains(site)) throw RangeNotMaterialized(site, lo_, hi_);
  return deltas_[static_cast<std::size_t>(site - lo_)];
}

double EnvironmentSlice::omega(std::int64_t site) const {
  if (!contains(site)) throw RangeNotMaterialized(site, lo_, hi_);
  return omegas_[static_cast<std::size_t>(site - lo_)];
}

EnvironmentSlice EnvironmentSlice::from_deltas(std::uint64_t m, std::int64_t lo,
                                               std::vector<double> deltas,
                                               std::uint64_t seed_key) {
  EnvironmentSlice s(m, seed_key);
  s.lo_ = lo;
  s.hi_ = lo + static_cast<std::int64_t>(deltas.size()) - 1;
  s.omegas_.reserve(deltas.size());
  for (double d : deltas) s.omegas_.push_back(omega_from_delta(d, m));
  s.deltas_ = std::move(deltas);
  return s;
}

LazyEnvironment::LazyEnvironment(const FiniteLaw& delta_law, std::uint64_t m,
                                 std::uint64_t seed_key)
    : sampler_(delta_law), slice_(m, seed_key) {}

double LazyEnvironment::draw_site(std::int64_t site) const {
  rng::Stream stream(slice_.seed_key_, rng::Domain::kEnvironmentSites,
                     site_id(site));
  return sampler_.draw(stream);
}

void LazyEnvironment::ensure(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw InvalidArgument("empty site range");
  EnvironmentSlice& s = slice_;
  if (s.empty()) {
    s.lo_ = lo;
    s.hi_ = lo - 1;
  }
  if (lo < s.lo_) {
    std::vector<double> front;
    for (std::int64_t i = lo; i < s.lo_; ++i) front.push_back(draw_site(i));
    std::vector<double> front_omegas;
    for (double d : front) front_omegas.push_back(omega_from_delta(d, s.m_));
    s.deltas_.insert(s.deltas_.begin(), front.begin(), front.end());
    s.omegas_.insert(s.omegas_.begin(), front_omegas.begin(), front_omegas.end());
    s.lo_ = lo;
  }
  for (std::int64_t i = s.hi_ + 1; i <= hi; ++i) {
    const double d = draw_site(i);
    s.deltas_.push_back(d);
    s.omegas_.push_back(omega_from_delta(d, s.m_));
  }
  s.hi_ = std::max(s.hi_, hi);
}

void LazyEnvironment::grow_to(std::int64_t site) {
  if (slice_.empty()) {
    ensure(std::min<std::int64_t>(site, 0) - 16, std::max<std::int64_t>(site, 0) + 16);
    return;
  }
  // Geometric growth keeps front insertions amortized.
  const std::int64_t width = slice_.hi() - slice_.lo() + 1;
  if (site < slice_.lo()) ensure(std::min(site, slice_.lo() - width), slice_.hi());
  if (site > slice_.hi()) ensure(slice_.lo(), std::max(site, slice_.hi() + width));
}

EnvironmentSlice materialize_environment(const TiltedEnvironment& tilted,
                                         std::int64_t lo, std::int64_t hi,
                                         std::uint64_t seed) {
  if (lo > 0 || hi < 0) throw InvalidArgument("site range must contain 0");
  LazyEnvironment lazy(tilted.pi_m, tilted.m, seed);
  lazy.ensure(lo, hi);
  return std::move(lazy).release();
}

EnvironmentSlice seignourel_environment(const EnvironmentLaw& env,
                                        std::uint64_t m, std::int64_t lo,
                                        std::int64_t hi, std::uint64_t seed) {
  if (lo > 0 || hi < 0) throw InvalidArgument("site range must contain 0");
  LazyEnvironment lazy(log_rho_law(env), m, seed);
  lazy.ensure(lo, hi);
  return std::move(lazy).release();
}

std::vector<std::int64_t> simulate_rwre(LazyEnvironment& environment,
                                        std::uint64_t n_steps,
                                        std::uint64_t seed,
                                        std::uint64_t walk_index) {
  return run_walk(environment, n_steps, seed, walk_index);
}

std::vector<std::int64_t> simulate_rwre(const EnvironmentSlice& environment,
                                        std::uint64_t n_steps,
                                        std::uint64_t seed,
                                        std::uint64_t walk_index) {
  return run_walk(environment, n_steps, seed, walk_index);
}

std::uint64_t annealed_environment_key(std::uint64_t seed,
                                       std::uint64_t walk_index) {
  return rng::derive_seed(seed, rng::Domain::kEnvironmentSeed, walk_index);
}

std::uint64_t quenched_environment_key(std::uint64_t seed) {
  return rng::derive_seed(seed, rng::Domain::kEnvironmentSeed,
                          ~std::uint64_t{0});
}

walk::PathGrid scaled_rwre(const TiltedEnvironment& tilted, double horizon_T,
                           std::uint64_t seed, std::uint64_t walk_index) {
  const std::uint64_t n = rwre_steps(tilted.m, horizon_T);
  LazyEnvironment lazy(tilted.pi_m, tilted.m,
                       annealed_environment_key(seed, walk_index));
  walk::PathGrid p = to_scaled_path(simulate_rwre(lazy, n, seed, walk_index), tilted.m);
  p.meta = {{"process", "scaled_rwre"},
            {"mode", "annealed"},
            {"m", std::to_string(tilted.m)},
            {"seed", std::to_string(seed)},
            {"path_index", std::to_string(walk_index)}};
  return p;
}

EnvironmentSlice quenched_environment(const TiltedEnvironment& tilted,
                                      double horizon_T, std::uint64_t seed) {
  const auto reach = static_cast<std::int64_t>(rwre_steps(tilted.m, horizon_T));
  return materialize_environment(tilted, -reach, reach,
                                 quenched_environment_key(seed));
}

walk::PathGrid scaled_rwre_quenched(const EnvironmentSlice& frozen,
                                    double horizon_T, std::uint64_t seed,
                                    std::uint64_t walk_index) {
  const std::uint64_t n = rwre_steps(frozen.m(), horizon_T);
  walk::PathGrid p =
      to_scaled_path(simulate_rwre(frozen, n, seed, walk_index), frozen.m());
  p.meta = {{"process", "scaled_rwre"},
            {"mode", "quenched"},
            {"m", std::to_string(frozen.m())},
            {"seed", std::to_string(seed)},
            {"path_index", std::to_string(walk_index)}};
  return p;
}

std::vector<walk::PathGrid> rwre_ensemble(const TiltedEnvironment& tilted,
                                          double horizon_T,
                                          std::uint64_t num_walks,
                                          std::uint64_t seed, Mode mode,
                                          unsigned workers) {
  if (mode == Mode::kAnnealed) {
    return run_ensemble(num_walks, workers, [&](std::uint64_t i) {
      return scaled_rwre(tilted, horizon_T, seed, i);
    });
  }
  const EnvironmentSlice frozen = quenched_environment(tilted, horizon_T, seed);
  return run_ensemble(num_walks, workers, [&](std::uint64_t i) {
    return scaled_rwre_quenched(frozen, horizon_T, seed, i);
  });
}

double potential_at(const EnvironmentSlice& slice, double x) {
  const double md = static_cast<double>(slice.m());
  const auto k = static_cast<std::int64_t>(std::floor(md * x + 1e-9));
  const double scale = 1.0 / std::sqrt(md);
  double sum = 0.0;
  if (k >= 2) {
    for (std::int64_t i = 1; i <= k; ++i) sum += slice.delta(i);
    return sum * scale;
  }
  if (k >= 0) return 0.0;
  for (std::int64_t i = k + 1; i <= 0; ++i) sum += slice.delta(i);
  return -sum * scale;
}

std::vector<double> potential(const EnvironmentSlice& slice,
                              std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(potential_at(slice, x));
  return out;
}

walk::PathGrid potential_grid(const EnvironmentSlice& slice) {
  if (slice.empty() || slice.lo() > 0 || slice.hi() < 1)
    throw InvalidArgument("potential grid needs sites 0 and 1");
  const double md = static_cast<double>(slice.m());
  const double scale = 1.0 / std::sqrt(md);
  const std::int64_t k_lo = slice.lo() - 1;
  const std::int64_t k_hi = slice.hi();

  std::vector<double> values(static_cast<std::size_t>(k_hi - k_lo + 1), 0.0);
  auto at = [&](std::int64_t k) -> double& {
    return values[static_cast<std::size_t>(k - k_lo)];
  };
  double sum = 0.0;
  for (std::int64_t k = 1; k <= k_hi; ++k) {
    sum += slice.delta(k);
    at(k) = k >= 2 ? sum * scale : 0.0;
  }
  sum = 0.0;
  for (std::int64_t k = -1; k >= k_lo; --k) {
    sum += slice.delta(k + 1);
    at(k) = -sum * scale;
  }

  walk::PathGrid p;
  p.t0 = static_cast<double>(k_lo) / md;
  p.dt = 1.0 / md;
  p.values = std::move(values);
  p.meta = {{"process", "rwre_potential"}, {"m", std::to_string(slice.m())}};
  return p;
}

std::string slice_to_csv(const EnvironmentSlice& slice) {
  std::string out = "site,delta,omega\n";
  for (std::int64_t i = slice.lo(); !slice.empty() && i <= slice.hi(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += io::format_double(slice.delta(i));
    out += ',';
    out += io::format_double(slice.omega(i));
    out += '\n';
  }
  return out;
}

EnvironmentSlice slice_from_csv(const std::string& text, std::uint64_t m) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "site,delta,omega")
    throw ParseError("expected header 'site,delta,omega'");
  std::vector<double> deltas;
  std::int64_t lo = 0;
  std::int64_t expected_site = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string site_tok, delta_tok, omega_tok;
    if (!std::getline(ss, site_tok, ',') || !std::getline(ss, delta_tok, ',') ||
        !std::getline(ss, omega_tok))
      throw ParseError("malformed slice row '" + line + "'");
    const auto site = static_cast<std::int64_t>(io::parse_double(site_tok));
    if (deltas.empty()) {
      lo = site;
      expected_site = site;
    }
    if (site != expected_site) throw ParseError("slice sites must be contiguous");
    ++expected_site;
    const double delta = io::parse_double(delta_tok);
    if (io::parse_double(omega_tok) != omega_from_delta(delta, m))
      throw ParseError("omega inconsistent with delta at site " + site_tok);
    deltas.push_back(delta);
  }
  return EnvironmentSlice::from_deltas(m, lo, std::move(deltas));
}

}  // namespace twl::env
