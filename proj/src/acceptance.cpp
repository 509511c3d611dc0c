#include "twl/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "twl/diffusion.hpp"
#include "twl/ensemble.hpp"
#include "twl/environment.hpp"
#include "twl/error.hpp"
#include "twl/io.hpp"
#include "twl/measure.hpp"
#include "twl/walk.hpp"

namespace twl::acceptance {

namespace {

using stats::TestReport;
using stats::distance_report;

constexpr double kExact = 1e-12;
constexpr double kAlpha = 0.01;
const double kLn3 = std::log(3.0);
const std::uint64_t kSuiteScales[] = {4, 100, 10'000};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x) { return io::format_double(x); }

std::string samples_csv(const std::vector<double>& xs) {
  return walk::samples_to_csv(xs);
}

FiniteLaw two_point_law() { return FiniteLaw({{1.0, 0.25}, {-1.0, 0.75}}); }
FiniteLaw three_point_law() { return FiniteLaw({{2.0, 0.1}, {-1.0, 0.9}}); }

env::EnvironmentLaw criterion_env_law() {
  return env::EnvironmentLaw(FiniteLaw({{0.75, 0.75}, {0.25, 0.25}}));
}

// Random law with 2..8 atoms on [-3, 3], negative mean, mass on both sides.
FiniteLaw random_law(rng::Stream& stream) {
  for (;;) {
    const auto n = 2 + static_cast<std::size_t>(stream.uniform() * 7.0);
    std::vector<Atom> atoms;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double value = std::round((stream.uniform() * 6.0 - 3.0) * 1e3) / 1e3;
      const double weight = 0.05 + stream.uniform();
      atoms.push_back({value, weight});
      total += weight;
    }
    for (Atom& a : atoms) a.prob /= total;
    try {
      FiniteLaw law(std::move(atoms));
      if (law.mean() < 0.0 && law.max_value() > 0.0 && law.min_value() < 0.0 &&
          law.mass_where([](double x) { return x == 0.0; }) == 0.0)
        return law;
    } catch (const InvalidLaw&) {
      // duplicate rounded values; redraw
    }
  }
}

std::vector<FiniteLaw> law_suite(std::uint64_t seed) {
  rng::Stream stream(seed, rng::Domain::kTestData, 1);
  std::vector<FiniteLaw> laws;
  for (int i = 0; i < 200; ++i) laws.push_back(random_law(stream));
  return laws;
}

struct SuiteErrors {
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  int valid_cases = 0;
  int negative_mass_cases = 0;
  int bad_hints = 0;
};

SuiteErrors run_law_suite(std::uint64_t seed) {
  SuiteErrors e;
  for (const FiniteLaw& law : law_suite(seed)) {
    const double beta = measure::solve_beta(law);
    const double c = measure::compute_c(law, beta);
    for (std::uint64_t m : kSuiteScales) {
      const double target = -beta / (2.0 * std::sqrt(static_cast<double>(m)));
      try {
        const measure::TiltReport r = measure::tilt(law, beta, c, m);
        double total = 0.0;
        for (const Atom& a : r.tilted.atoms()) total += a.prob;
        e.mass = std::max(e.mass, std::abs(total - 1.0));
        e.mean = std::max(e.mean, std::abs(r.mean - target));
        const double d = measure::second_moment_formula(law, beta, c, m) -
                         beta * beta / (4.0 * static_cast<double>(m));
        e.variance = std::max(e.variance, std::abs(d - r.variance));
        ++e.valid_cases;
      } catch (const NegativeMass& neg) {
        ++e.negative_mass_cases;
        // The signed measure still carries unit mass and the exact mean.
        const std::vector<double> w = measure::tilted_masses(law, beta, c, m);
        double total = 0.0, first = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
          total += w[i];
          first += w[i] * law[i].value;
        }
        e.mass = std::max(e.mass, std::abs(total - 1.0));
        e.mean = std::max(e.mean, std::abs(first - target));
        const std::uint64_t hint = neg.m_min_hint();
        bool hint_ok = hint > m;
        try {
          measure::tilt(law, beta, c, hint);
        } catch (const NegativeMass&) {
          hint_ok = false;
        }
        if (hint > 1) {
          try {
            measure::tilt(law, beta, c, hint - 1);
            hint_ok = false;
          } catch (const NegativeMass&) {
          }
        }
        if (!hint_ok) ++e.bad_hints;
      }
    }
  }
  return e;
}

TestReport abs_error_report(std::string name, double value, double target,
                            double tol, std::map<std::string, std::string> prov = {}) {
  prov["estimate"] = fmt(value);
  prov["target"] = fmt(target);
  return distance_report(std::move(name), std::abs(value - target), tol, {},
                         std::move(prov));
}

CriterionResult start(int id, std::string title, double time_limit_seconds) {
  CriterionResult res;
  res.id = id;
  res.title = std::move(title);
  res.time_limit_seconds = time_limit_seconds;
  return res;
}

std::map<std::string, std::string> seed_prov(std::uint64_t seed) {
  return {{"seed", std::to_string(seed)}};
}

}  // namespace

bool CriterionResult::pass() const {
  if (reports.empty()) return false;
  for (const TestReport& r : reports)
    if (!r.pass) return false;
  return within_time();
}

CriterionResult tilt_identities(const Options& options) {
  Stopwatch clock;
  CriterionResult res = start(1, "exact tilt identities over 200 random laws", 5.0);
  const SuiteErrors e = run_law_suite(options.law_suite_seed);
  std::map<std::string, std::string> prov = seed_prov(options.law_suite_seed);
  prov["valid_cases"] = std::to_string(e.valid_cases);
  prov["negative_mass_cases"] = std::to_string(e.negative_mass_cases);
  res.reports.push_back(distance_report("max |total tilted mass - 1|", e.mass, kExact,
                                        {200, 3}, prov));
  res.reports.push_back(distance_report("max |tilted mean + beta/(2 sqrt m)|", e.mean,
                                        kExact, {200, 3}, prov));
  res.reports.push_back(distance_report("negative-mass cases with a wrong m_min hint",
                                        e.bad_hints, 0.0, {200, 3}, prov));
  res.seconds = clock.seconds();
  return res;
}

CriterionResult two_point_closed_forms(const Options&) {
  Stopwatch clock;
  CriterionResult res = start(2, "two- and three-point closed forms", 1.0);
  const FiniteLaw two = two_point_law();
  const measure::TiltParams p2 = measure::make_params(two, 1);
  res.reports.push_back(abs_error_report("two-point beta vs ln 3", p2.beta, kLn3, 1e-10));
  res.reports.push_back(abs_error_report("two-point c vs 1/2", p2.c, 0.5, 1e-10));
  res.reports.push_back(abs_error_report("two-point sigma2 vs 1", p2.sigma2, 1.0, 1e-10));
  for (std::uint64_t m : kSuiteScales) {
    const measure::TiltReport r = measure::tilt(two, p2.beta, p2.c, m);
    const double shift = kLn3 / (4.0 * std::sqrt(static_cast<double>(m)));
    const std::string tag = " (m=" + std::to_string(m) + ")";
    // atoms are sorted: [-1, +1]
    res.reports.push_back(abs_error_report("mass at +1 vs 1/2 - ln3/(4 sqrt m)" + tag,
                                           r.tilted[1].prob, 0.5 - shift, 1e-10));
    res.reports.push_back(abs_error_report("mass at -1 vs 1/2 + ln3/(4 sqrt m)" + tag,
                                           r.tilted[0].prob, 0.5 + shift, 1e-10));
  }
  const FiniteLaw three = three_point_law();
  const measure::TiltParams p3 = measure::make_params(three, 1);
  res.reports.push_back(abs_error_report("three-point beta vs ln((-1+sqrt 37)/2)", p3.beta,
                                         std::log((-1.0 + std::sqrt(37.0)) / 2.0), 1e-10));
  res.reports.push_back(abs_error_report("three-point sigma2 vs 2", p3.sigma2, 2.0, 1e-10));
  res.seconds = clock.seconds();
  return res;
}

CriterionResult variance_formula_suite(const Options& options) {
  Stopwatch clock;
  CriterionResult res = start(3, "closed-form increment variance", 5.0);
  const SuiteErrors e = run_law_suite(options.law_suite_seed);
  res.reports.push_back(distance_report("max |closed-form variance - tilted variance|",
                                        e.variance, kExact, {200, 3},
                                        seed_prov(options.law_suite_seed)));

  // The leading O(m^{-1/2}) gap term vanishes for laws symmetric in value
  // (u + v = 0 on every pair), so the rate is checked on the three-point law.
  const FiniteLaw law = three_point_law();
  const measure::TiltParams p = measure::make_params(law, 1);
  auto gap = [&](std::uint64_t m) {
    return std::abs(measure::variance_formula(measure::tilt(law, p.beta, p.c, m)) -
                    p.sigma2);
  };
  const double g2 = gap(100), g4 = gap(10'000), g6 = gap(1'000'000);
  const double ratio = gap(10'000) / gap(40'000);
  res.reports.push_back(distance_report(
      "gap decreasing over m = 1e2, 1e4, 1e6 (violations)",
      (g4 < g2 ? 0.0 : 1.0) + (g6 < g4 ? 0.0 : 1.0), 0.0, {},
      {{"gap@1e2", fmt(g2)}, {"gap@1e4", fmt(g4)}, {"gap@1e6", fmt(g6)}}));
  res.reports.push_back(distance_report("|gap(1e4)/gap(4e4) - 2| (ratio in [1.8, 2.2])",
                                        std::abs(ratio - 2.0), 0.2, {},
                                        {{"ratio", fmt(ratio)}}));
  res.seconds = clock.seconds();
  return res;
}

CriterionResult walk_marginal(const Options& options) {
  Stopwatch clock;
  CriterionResult res = start(4, "scaled walk marginal at t=1 (m=400)", 30.0);
  const FiniteLaw law = two_point_law();
  const walk::SimConfig config{.m = 400, .horizon_T = 1.0, .num_paths = 20'000,
                               .seed = options.walk_seed};
  const measure::TiltParams params = measure::make_params(law, config.m);
  const walk::ScaledWalk walker(law, params);
  const std::size_t last = config.steps();
  const std::vector<double> sample =
      run_ensemble(config.num_paths, options.workers, [&](std::uint64_t i) {
        return walker.path(config, i).values[last];
      });

  const double mean_target = -params.beta / 2.0;
  const double ks = stats::ks_one_sample(sample, [&](double x) {
    return stats::normal_cdf(x, mean_target, params.sigma2);
  });
  auto prov = seed_prov(config.seed);
  prov["m"] = "400";
  prov["alpha_0.01_critical"] = fmt(stats::ks_one_sample_critical(kAlpha, sample.size()));
  res.reports.push_back(distance_report("KS(H(1), Normal(-ln3/2, 1))", ks, 0.02,
                                        {sample.size()}, prov));
  const double mu = stats::mean(sample);
  res.reports.push_back(distance_report(
      "|mean H(1) + ln3/2|", std::abs(mu - mean_target),
      3.0 / std::sqrt(static_cast<double>(sample.size())), {sample.size()},
      {{"estimate", fmt(mu)}, {"target", fmt(mean_target)}}));
  res.artifacts["paths/walk_m400_t1.csv"] = samples_csv(sample);
  res.seconds = clock.seconds();
  return res;
}

CriterionResult environment_identities(const Options&) {
  Stopwatch clock;
  CriterionResult res = start(5, "environment exponent identities", 1.0);
  const env::EnvironmentLaw nu = criterion_env_law();
  const FiniteLaw pi = env::log_rho_law(nu);
  const double kappa = env::solve_kappa(pi);
  res.reports.push_back(abs_error_report("kappa vs 1", kappa, 1.0, kExact));
  for (std::uint64_t m : kSuiteScales) {
    const env::TiltedEnvironment t = env::tilt_env(pi, kappa, m);
    const double drift = env::log_rho_m_law(t).mean();
    res.reports.push_back(abs_error_report(
        "E log rho^(m) vs -1/(2m) (m=" + std::to_string(m) + ")", drift,
        -1.0 / (2.0 * static_cast<double>(m)), kExact));
  }
  const env::TiltedEnvironment t100 = env::tilt_env(pi, kappa, 100);
  const double kappa_m = env::solve_kappa_m(t100);
  const double p = 0.5 - 1.0 / (40.0 * kLn3);
  const double closed = (10.0 / kLn3) * std::log((1.0 - p) / p);
  res.reports.push_back(abs_error_report("kappa_m(100) vs two-point closed form", kappa_m,
                                         closed, 1e-5));
  const double moment = env::log_rho_m_law(t100).expect(
      [kappa_m](double x) { return std::exp(kappa_m * x); });
  res.reports.push_back(abs_error_report("E (rho^(m))^kappa_m vs 1", moment, 1.0, 1e-10));
  res.seconds = clock.seconds();
  return res;
}

CriterionResult potential_convergence(const Options& options) {
  Stopwatch clock;
  CriterionResult res = start(6, "potential V^(m)(1) vs drifted Brownian marginal", 30.0);
  constexpr std::uint64_t m = 400;
  constexpr std::uint64_t draws = 10'000;
  const env::TiltedEnvironment t = env::tilt_env(criterion_env_law(), m);
  struct Sample {
    double v1;
    double v2;
  };
  const std::vector<Sample> samples = run_ensemble(draws, options.workers, [&](std::uint64_t j) {
    const env::EnvironmentSlice slice = env::materialize_environment(
        t, 0, 2 * static_cast<std::int64_t>(m),
        rng::derive_seed(options.potential_seed, rng::Domain::kEnvironmentSeed, j));
    return Sample{env::potential_at(slice, 1.0), env::potential_at(slice, 2.0)};
  });
  std::vector<double> first, second;
  for (const Sample& s : samples) {
    first.push_back(s.v1);
    second.push_back(s.v2 - s.v1);
  }
  const double ks = stats::ks_one_sample(first, [&](double x) {
    return stats::normal_cdf(x, -t.kappa / 2.0, t.sigma2);
  });
  auto prov = seed_prov(options.potential_seed);
  prov["m"] = std::to_string(m);
  prov["sigma2"] = fmt(t.sigma2);
  res.reports.push_back(distance_report("KS(V(1), Normal(-1/2, (ln3)^2))", ks, 0.03,
                                        {draws}, prov));
  const double corr = stats::correlation(first, second);
  res.reports.push_back(distance_report("|corr(V(1)-V(0), V(2)-V(1))|", std::abs(corr),
                                        3.0 / std::sqrt(static_cast<double>(draws)),
                                        {draws}, {{"correlation", fmt(corr)}}));
  res.artifacts["paths/potential_m400_x1.csv"] = samples_csv(first);
  res.artifacts["paths/potential_m400_increment_1_2.csv"] = samples_csv(second);
  res.seconds = clock.seconds();
  return res;
}

CriterionResult rwre_stabilization(const Options& options) {
  Stopwatch clock;
  CriterionResult res = start(7, "scaled RWRE marginal stabilization at t=1", 600.0);
  constexpr std::uint64_t n = 5000;
  const env::EnvironmentLaw nu = criterion_env_law();

  auto rwre_marginal = [&](std::uint64_t m) {
    const env::TiltedEnvironment t = env::tilt_env(nu, m);
    // Independent seeds per scale so the two samples are independent.
    const std::uint64_t seed =
        rng::derive_seed(options.rwre_seed, rng::Domain::kTestData, m);
    return run_ensemble(n, options.workers, [&](std::uint64_t i) {
      return env::scaled_rwre(t, 1.0, seed, i).values.back();
    });
  };
  const std::vector<double> m20 = rwre_marginal(20);
  const std::vector<double> m40 = rwre_marginal(40);

  const FiniteLaw pi = env::log_rho_law(nu);
  const double kappa = env::solve_kappa(pi);
  const double sigma = std::sqrt(measure::compute_sigma2(pi, kappa, measure::compute_c(pi, kappa)));
  const diffusion::DiffusionConfig dcfg{
      .mesh_h = 0.05, .horizon_T = 1.0, .num_paths = n,
      .seed = rng::derive_seed(options.rwre_seed, rng::Domain::kTestData, 0xD1FF)};
  const std::vector<walk::PathGrid> dpaths =
      diffusion::diffusion_ensemble(sigma, kappa, dcfg, options.workers);
  const std::vector<double> diff = walk::marginal(dpaths, dpaths.front().values.size() - 1);

  const double threshold = stats::kKsSlack * stats::ks_two_sample_critical(kAlpha, n, n);
  auto prov = seed_prov(options.rwre_seed);
  prov["slack"] = fmt(stats::kKsSlack);
  res.reports.push_back(distance_report("KS2(RWRE m=20, RWRE m=40)",
                                        stats::ks_two_sample(m20, m40), threshold, {n, n},
                                        prov));
  prov["sigma"] = fmt(sigma);
  prov["h"] = "0.05";
  res.reports.push_back(distance_report("KS2(RWRE m=40, grid diffusion h=0.05)",
                                        stats::ks_two_sample(m40, diff), threshold, {n, n},
                                        prov));
  res.artifacts["paths/rwre_m20_t1.csv"] = samples_csv(m20);
  res.artifacts["paths/rwre_m40_t1.csv"] = samples_csv(m40);
  res.artifacts["paths/diffusion_h0.05_t1.csv"] = samples_csv(diff);
  res.seconds = clock.seconds();
  return res;
}

CriterionResult seignourel_cross_check(const Options& options) {
  Stopwatch clock;
  CriterionResult res = start(8, "untilted vs tilted site construction", 10.0);
  constexpr std::uint64_t m = 100;
  constexpr std::int64_t sites = 1'000'000;
  const env::EnvironmentLaw symmetric(FiniteLaw({{0.75, 0.5}, {0.25, 0.5}}),
                                      env::EnvironmentLaw::Regime::kAny);
  const env::EnvironmentSlice untilted = env::seignourel_environment(
      symmetric, m, 0, sites - 1, options.seignourel_seed);
  const double sd = kLn3;
  const double band = 3.0 * sd / std::sqrt(static_cast<double>(sites));
  const double mean_untilted = stats::mean(untilted.deltas());
  res.reports.push_back(distance_report("|mean log rho| (untilted, symmetric)",
                                        std::abs(mean_untilted), band, {sites},
                                        {{"estimate", fmt(mean_untilted)}}));

  const env::TiltedEnvironment t = env::tilt_env(criterion_env_law(), m);
  const env::EnvironmentSlice tilted = env::materialize_environment(
      t, 0, sites - 1, rng::derive_seed(options.seignourel_seed, rng::Domain::kTestData, 1));
  const double target = -t.kappa / (2.0 * std::sqrt(static_cast<double>(m)));
  const double sd_tilted = std::sqrt(t.pi_m.variance());
  const double mean_tilted = stats::mean(tilted.deltas());
  res.reports.push_back(distance_report(
      "|mean delta + kappa/(2 sqrt m)| (tilted)", std::abs(mean_tilted - target),
      3.0 * sd_tilted / std::sqrt(static_cast<double>(sites)), {sites},
      {{"estimate", fmt(mean_tilted)}, {"target", fmt(target)}}));
  // The tilted drift must be resolved by the same band that contains 0 above.
  res.reports.push_back(distance_report("band / |tilted mean| (separation)",
                                        band / std::abs(mean_tilted), 1.0, {sites}));
  res.seconds = clock.seconds();
  return res;
}

CriterionResult determinism(const Options& options) {
  Stopwatch clock;
  CriterionResult res = start(9, "byte-identical reruns of criteria 4, 6, 7", 1200.0);
  Options other = options;
  other.workers = options.workers == 1 ? 4 : 1;
  using Fn = CriterionResult (*)(const Options&);
  for (Fn f : {Fn{walk_marginal}, Fn{potential_convergence}, Fn{rwre_stabilization}}) {
    const CriterionResult a = f(options);
    const CriterionResult b = f(other);
    std::size_t mismatched = a.artifacts.size() == b.artifacts.size() ? 0 : 1;
    for (const auto& [name, bytes] : a.artifacts) {
      const auto it = b.artifacts.find(name);
      if (it == b.artifacts.end() || it->second != bytes) ++mismatched;
    }
    std::string reports_a, reports_b;
    for (const auto& r : a.reports) reports_a += stats::to_json(r).dump();
    for (const auto& r : b.reports) reports_b += stats::to_json(r).dump();
    if (reports_a != reports_b) ++mismatched;
    res.reports.push_back(distance_report(
        "mismatched artifacts for criterion " + std::to_string(a.id),
        static_cast<double>(mismatched), 0.0, {a.artifacts.size()},
        {{"workers_a", std::to_string(options.workers)},
         {"workers_b", std::to_string(other.workers)}}));
  }
  res.seconds = clock.seconds();
  return res;
}

std::vector<CriterionResult> run_all(const Options& options) {
  return {tilt_identities(options),        two_point_closed_forms(options),
          variance_formula_suite(options), walk_marginal(options),
          environment_identities(options), potential_convergence(options),
          rwre_stabilization(options),     seignourel_cross_check(options),
          determinism(options)};
}

void write_results(const std::vector<CriterionResult>& results,
                   const std::filesystem::path& dir) {
  for (const CriterionResult& r : results) {
    for (const auto& [name, bytes] : r.artifacts) io::write_file(dir / name, bytes);
    nlohmann::json j = {{"criterion", r.id},
                        {"title", r.title},
                        {"time_limit_seconds", r.time_limit_seconds},
                        {"reports", nlohmann::json::array()}};
    for (const auto& rep : r.reports) j["reports"].push_back(stats::to_json(rep));
    io::write_file(dir / "reports" / ("criterion_" + std::to_string(r.id) + ".json"),
                   j.dump(2) + "\n");
  }
}

std::string render(const CriterionResult& result) {
  std::ostringstream out;
  out << (result.pass() ? "[PASS]" : "[FAIL]") << " criterion " << result.id << ": "
      << result.title << " (" << std::fixed;
  out.precision(2);
  out << result.seconds << " s / limit " << result.time_limit_seconds << " s)\n";
  for (const TestReport& r : result.reports) out << "    " << stats::render_line(r) << "\n";
  if (!result.within_time()) out << "    runtime limit exceeded\n";
  return out.str();
}

}  // namespace twl::acceptance
