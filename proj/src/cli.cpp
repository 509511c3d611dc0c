#include "twl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include "twl/acceptance.hpp"
#include "twl/diffusion.hpp"
#include "twl/ensemble.hpp"
#include "twl/environment.hpp"
#include "twl/error.hpp"
#include "twl/io.hpp"
#include "twl/measure.hpp"
#include "twl/stats.hpp"
#include "twl/walk.hpp"

namespace twl::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using stats::TestReport;

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitInvalid = 2;
constexpr double kAlpha = 0.01;

const char* const kKinds[] = {"tilt-inspect", "walk-sim", "rwre-sim",
                              "diffusion-sim", "convergence-report"};

class ChecksFailed : public Error {
 public:
  explicit ChecksFailed(const std::vector<std::string>& names)
      : Error("ChecksFailed", describe(names)), names_(names) {}
  const std::vector<std::string>& names() const { return names_; }

 private:
  static std::string describe(const std::vector<std::string>& names) {
    std::string s = std::to_string(names.size()) + " check(s) failed:";
    for (const auto& n : names) s += " " + n;
    return s;
  }
  std::vector<std::string> names_;
};

std::string fmt(double x) { return io::format_double(x); }

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw InvalidArgument(what + " must be a nonnegative integer, got '" + text + "'");
  return v;
}

unsigned workers_for(const ExperimentSpec& spec) {
  return spec.workers ? spec.workers : default_workers();
}

// Output bundle rooted at the run directory.
class Bundle {
 public:
  explicit Bundle(const std::string& dir) : dir_(dir) {}
  void write(const std::string& rel, const std::string& bytes) const {
    io::write_file(dir_ / rel, bytes);
  }
  void write_json(const std::string& rel, const json& j) const {
    write(rel, j.dump(2) + "\n");
  }
  void write_spec(const ExperimentSpec& spec) const {
    // The output directory is left out so a bundle is relocatable.
    json j = to_json(spec);
    j.erase("out");
    write_json("spec.json", j);
    for (const std::string& input : {spec.law_path, spec.env_path, spec.config_path})
      if (!input.empty())
        write("inputs/" + fs::path(input).filename().string(), io::read_file(input));
  }

 private:
  fs::path dir_;
};

double max_tie_fraction(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  std::size_t best = 0;
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    best = std::max(best, j - i);
    i = j;
  }
  return static_cast<double>(best) / static_cast<double>(xs.size());
}

// KS against a continuous limit. A lattice-valued sample cannot get closer
// than half its largest atom, so that is added to the slackened critical value.
TestReport ks_report(const std::string& name, const std::vector<double>& sample,
                     double mean, double variance) {
  const double ks = stats::ks_one_sample(
      sample, [&](double x) { return stats::normal_cdf(x, mean, variance); });
  const double crit = stats::ks_one_sample_critical(kAlpha, sample.size());
  const double atom = max_tie_fraction(sample);
  return stats::distance_report(
      name, ks, stats::kKsSlack * crit + 0.5 * atom, {sample.size()},
      {{"alpha", fmt(kAlpha)},
       {"critical", fmt(crit)},
       {"slack", fmt(stats::kKsSlack)},
       {"largest_atom", fmt(atom)},
       {"limit_mean", fmt(mean)},
       {"limit_variance", fmt(variance)}});
}

TestReport mean_report(const std::string& name, const std::vector<double>& sample,
                       double target, double sd) {
  const double mu = stats::mean(sample);
  return stats::distance_report(
      name, std::abs(mu - target),
      3.0 * sd / std::sqrt(static_cast<double>(sample.size())), {sample.size()},
      {{"estimate", fmt(mu)}, {"target", fmt(target)}});
}

json law_json(const FiniteLaw& law) {
  json atoms = json::array();
  for (const Atom& a : law.atoms()) atoms.push_back({a.value, a.prob});
  return atoms;
}

// Prints and writes the reports; throws ChecksFailed if any failed.
void finish(const Bundle& bundle, std::ostream& out,
            const std::vector<std::pair<std::string, TestReport>>& reports) {
  std::vector<std::string> failed;
  for (const auto& [key, rep] : reports) {
    bundle.write_json("reports/" + key + ".json", stats::to_json(rep));
    out << stats::render_line(rep) << "\n";
    if (!rep.pass) failed.push_back(key);
  }
  if (!failed.empty()) throw ChecksFailed(failed);
}

template <typename T>
std::vector<T> head(const std::vector<T>& xs, std::uint64_t n) {
  return {xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(std::min<std::uint64_t>(n, xs.size()))};
}

void tilt_inspect(const ExperimentSpec& spec, std::ostream& out) {
  const FiniteLaw law = load_finite_law(spec.law_path);
  const double beta = measure::solve_beta(law);
  const double c = measure::compute_c(law, beta);
  const double sigma2 = measure::compute_sigma2(law, beta, c);
  const std::uint64_t m_min = measure::min_valid_m(law, beta, c);
  json records = json::array();
  for (std::uint64_t m : spec.m_list) {
    const measure::TiltReport r = measure::tilt(law, {beta, c, sigma2, m});
    records.push_back({{"m", m},
                       {"beta", beta},
                       {"c", c},
                       {"sigma2", sigma2},
                       {"m_min", m_min},
                       {"mean", r.mean},
                       {"mean_target", -beta / (2.0 * std::sqrt(static_cast<double>(m)))},
                       {"second_moment", r.second_moment},
                       {"variance", r.variance},
                       {"variance_formula", measure::variance_formula(r)},
                       {"tilted", law_json(r.tilted)}});
  }
  out << records.dump(2) << "\n";
  if (!spec.out_dir.empty()) {
    const Bundle bundle(spec.out_dir);
    bundle.write_spec(spec);
    for (const json& rec : records)
      bundle.write_json("reports/tilt_m" + std::to_string(rec["m"].get<std::uint64_t>()) + ".json", rec);
  }
}

void walk_sim(const ExperimentSpec& spec, std::ostream& out) {
  const FiniteLaw law = load_finite_law(spec.law_path);
  const walk::SimConfig config{spec.m_list.front(), spec.horizon_T, spec.num_paths,
                               *spec.seed};
  config.validate();
  const measure::TiltParams params = measure::make_params(law, config.m);
  const walk::ScaledWalk walker(law, params);
  const std::size_t last = config.steps();

  struct Result {
    walk::PathGrid path;
    double end = 0.0;
  };
  const auto results = run_ensemble(config.num_paths, workers_for(spec), [&](std::uint64_t i) {
    walk::PathGrid p = walker.path(config, i);
    Result r{{}, p.values[last]};
    if (i < spec.store_paths) r.path = std::move(p);
    return r;
  });
  std::vector<walk::PathGrid> stored;
  std::vector<double> ends;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i < spec.store_paths) stored.push_back(results[i].path);
    ends.push_back(results[i].end);
  }

  const Bundle bundle(spec.out_dir);
  bundle.write_spec(spec);
  const measure::TiltReport& rep = walker.report();
  bundle.write_json("reports/tilt.json", {{"m", config.m},
                                          {"beta", params.beta},
                                          {"c", params.c},
                                          {"sigma2", params.sigma2},
                                          {"mean", rep.mean},
                                          {"variance", rep.variance},
                                          {"tilted", law_json(rep.tilted)}});
  bundle.write("paths/walk.csv", walk::ensemble_to_csv(stored));
  bundle.write("paths/marginal.csv", walk::samples_to_csv(ends));

  const double t = static_cast<double>(last) / static_cast<double>(config.m);
  finish(bundle, out,
         {{"marginal_ks", ks_report("KS(H(T), Normal(-beta T/2, sigma2 T))", ends,
                                    -params.beta * t / 2.0, params.sigma2 * t)},
          {"marginal_mean", mean_report("|mean H(T) + beta T/2|", ends,
                                        -params.beta * t / 2.0,
                                        std::sqrt(params.sigma2 * t))}});
}

void rwre_sim(const ExperimentSpec& spec, std::ostream& out) {
  const env::EnvironmentLaw law = env::load_environment_law(spec.env_path);
  const std::uint64_t m = spec.m_list.front();
  const std::uint64_t seed = *spec.seed;
  const env::TiltedEnvironment tilted = env::tilt_env(law, m);
  const double kappa_m = env::solve_kappa_m(tilted);
  const double md = static_cast<double>(m);
  const env::Mode mode = spec.mode == "quenched" ? env::Mode::kQuenched : env::Mode::kAnnealed;
  const unsigned workers = workers_for(spec);

  const Bundle bundle(spec.out_dir);
  bundle.write_spec(spec);
  const double log_rho_mean = env::log_rho_m_law(tilted).mean();
  bundle.write_json("reports/environment.json", {{"m", m},
                                                 {"kappa", tilted.kappa},
                                                 {"kappa_m", kappa_m},
                                                 {"c", tilted.c},
                                                 {"sigma2", tilted.sigma2},
                                                 {"mean_log_rho_m", log_rho_mean},
                                                 {"pi", law_json(tilted.pi)},
                                                 {"pi_m", law_json(tilted.pi_m)}});

  const auto paths = env::rwre_ensemble(tilted, spec.horizon_T, spec.num_paths, seed,
                                        mode, workers);
  bundle.write("paths/rwre.csv", walk::ensemble_to_csv(head(paths, spec.store_paths)));
  bundle.write("paths/marginal.csv",
               walk::samples_to_csv(walk::marginal(paths, paths.front().values.size() - 1)));

  // Environment of walk 0 (or the shared one) and its potential.
  const env::EnvironmentSlice first =
      mode == env::Mode::kQuenched
          ? env::quenched_environment(tilted, spec.horizon_T, seed)
          : env::materialize_environment(
                tilted, -2 * static_cast<std::int64_t>(m), 2 * static_cast<std::int64_t>(m),
                env::annealed_environment_key(seed, 0));
  bundle.write("paths/environment.csv", env::slice_to_csv(first));
  bundle.write("paths/potential.csv", walk::path_to_csv(env::potential_grid(first)));

  // V(1) and V(2) - V(1) across the annealed environment draws.
  const auto increments = run_ensemble(spec.num_paths, workers, [&](std::uint64_t i) {
    const env::EnvironmentSlice s = env::materialize_environment(
        tilted, 0, 2 * static_cast<std::int64_t>(m), env::annealed_environment_key(seed, i));
    const double v1 = env::potential_at(s, 1.0);
    return std::pair{v1, env::potential_at(s, 2.0) - v1};
  });
  std::vector<double> v1, v21;
  for (const auto& [a, b] : increments) {
    v1.push_back(a);
    v21.push_back(b);
  }
  bundle.write("paths/potential_at_1.csv", walk::samples_to_csv(v1));

  const double n = static_cast<double>(v1.size());
  std::vector<std::pair<std::string, TestReport>> reports = {
      {"log_rho_mean",
       stats::distance_report("|E log rho^(m) + kappa/(2m)|",
                              std::abs(log_rho_mean + tilted.kappa / (2.0 * md)),
                              measure::kIdentityTolerance, {},
                              {{"kappa", fmt(tilted.kappa)}, {"m", std::to_string(m)}})},
      {"potential_ks", ks_report("KS(V(1), Normal(-kappa/2, sigma2))", v1,
                                 -tilted.kappa / 2.0, tilted.sigma2)}};
  if (v1.size() >= 3)
    reports.push_back(
        {"potential_increment_correlation",
         stats::distance_report("|corr(V(1), V(2) - V(1))|",
                                std::abs(stats::correlation(v1, v21)), 3.0 / std::sqrt(n),
                                {v1.size()})});
  finish(bundle, out, reports);
}

void diffusion_sim(const ExperimentSpec& spec, std::ostream& out) {
  const diffusion::DiffusionConfig config{spec.mesh_h, spec.horizon_T, spec.num_paths,
                                          *spec.seed};
  const auto paths = diffusion::diffusion_ensemble(spec.sigma, spec.kappa, config,
                                                   workers_for(spec));
  const Bundle bundle(spec.out_dir);
  bundle.write_spec(spec);
  bundle.write("paths/diffusion.csv", walk::ensemble_to_csv(head(paths, spec.store_paths)));
  const std::vector<double> ends = walk::marginal(paths, paths.front().values.size() - 1);
  bundle.write("paths/marginal.csv", walk::samples_to_csv(ends));
  const diffusion::PotentialPath v0 = diffusion::sample_brownian_potential(
      spec.sigma, spec.kappa, spec.mesh_h, 4.0 * std::sqrt(spec.horizon_T) + spec.mesh_h,
      config.seed, 0);
  bundle.write("paths/potential_0.csv", diffusion::potential_to_csv(v0));

  json summary = {{"steps", config.steps()}, {"paths", ends.size()}};
  if (ends.size() >= 2) {
    const stats::Estimate mu = stats::moment_ci(ends, 1);
    const stats::Estimate var = stats::variance_ci(ends);
    summary["mean"] = {{"value", mu.value}, {"halfwidth", mu.halfwidth}};
    summary["variance"] = {{"value", var.value}, {"halfwidth", var.halfwidth}};
  }
  bundle.write_json("reports/summary.json", summary);

  // A nearest-neighbour chain moves at most one cell per step.
  double excess = -1.0;
  for (const walk::PathGrid& p : paths)
    for (std::size_t k = 0; k < p.values.size(); ++k)
      excess = std::max(excess, std::abs(p.values[k]) - static_cast<double>(k) * spec.mesh_h);
  finish(bundle, out,
         {{"speed_limit", stats::distance_report("max_k |X_k| - k h", excess, 1e-9,
                                                 {paths.size()})}});
}

void convergence_report(ExperimentSpec& spec, std::ostream& out) {
  const json config = json::parse(io::read_file(spec.config_path));
  if (!config.is_object()) throw ParseError("config must be a JSON object");
  acceptance::Options options;
  const std::map<std::string, std::uint64_t*> seeds = {
      {"law_suite_seed", &options.law_suite_seed},
      {"walk_seed", &options.walk_seed},
      {"potential_seed", &options.potential_seed},
      {"rwre_seed", &options.rwre_seed},
      {"seignourel_seed", &options.seignourel_seed}};
  std::string out_dir = spec.out_dir;
  for (const auto& [key, value] : config.items()) {
    if (auto it = seeds.find(key); it != seeds.end()) {
      *it->second = value.get<std::uint64_t>();
    } else if (key == "workers") {
      options.workers = value.get<unsigned>();
    } else if (key == "out") {
      if (out_dir.empty()) out_dir = value.get<std::string>();
    } else {
      throw ParseError("unknown config key '" + key + "'");
    }
  }
  if (spec.workers) options.workers = spec.workers;
  if (options.workers == 0) options.workers = default_workers();
  if (out_dir.empty()) throw InvalidArgument("no output directory (--out or \"out\")");

  spec.out_dir = out_dir;
  const Bundle bundle(out_dir);
  bundle.write_spec(spec);

  const auto results = acceptance::run_all(options);
  acceptance::write_results(results, out_dir);
  json summary = json::array();
  std::vector<std::string> failed;
  for (const auto& r : results) {
    out << acceptance::render(r);
    summary.push_back({{"criterion", r.id}, {"title", r.title}, {"pass", r.pass()}});
    if (!r.pass()) failed.push_back("criterion_" + std::to_string(r.id));
  }
  bundle.write_json("reports/summary.json", summary);
  out << (results.size() - failed.size()) << "/" << results.size()
      << " criteria passed\n";
  if (!failed.empty()) throw ChecksFailed(failed);
}

}  // namespace

void ExperimentSpec::validate() const {
  if (std::find(std::begin(kKinds), std::end(kKinds), kind) == std::end(kKinds))
    throw InvalidArgument("unknown experiment kind '" + kind + "'");
  if (kind == "convergence-report") {
    if (config_path.empty()) throw InvalidArgument("--config is required");
    return;
  }
  if (kind == "tilt-inspect" || kind == "walk-sim") {
    if (law_path.empty()) throw InvalidArgument("--law is required");
  }
  if (kind == "rwre-sim") {
    if (env_path.empty()) throw InvalidArgument("--env is required");
    if (mode != "annealed" && mode != "quenched")
      throw InvalidArgument("mode must be 'annealed' or 'quenched'");
  }
  if (kind != "diffusion-sim") {
    if (m_list.empty()) throw InvalidArgument("m list must not be empty");
    for (std::size_t i = 0; i < m_list.size(); ++i) {
      if (m_list[i] < 1) throw InvalidArgument("m must be >= 1");
      if (i > 0 && m_list[i] <= m_list[i - 1])
        throw InvalidArgument("m list must be strictly increasing");
    }
    if (kind != "tilt-inspect" && m_list.size() != 1)
      throw InvalidArgument(kind + " takes a single m");
  }
  if (kind == "tilt-inspect") return;

  if (!(horizon_T > 0.0)) throw InvalidArgument("T must be > 0");
  if (num_paths < 1) throw InvalidArgument("paths must be >= 1");
  if (!seed) throw InvalidArgument("no seed: pass --seed or set TWL_SEED");
  if (out_dir.empty()) throw InvalidArgument("--out is required");
  if (kind == "diffusion-sim") {
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
    if (!(kappa >= 0.0)) throw InvalidArgument("kappa must be >= 0");
    diffusion::DiffusionConfig{mesh_h, horizon_T, num_paths, *seed}.validate();
  }
}

json to_json(const ExperimentSpec& spec) {
  json j = {{"kind", spec.kind}};
  if (!spec.law_path.empty()) j["law"] = spec.law_path;
  if (!spec.env_path.empty()) j["env"] = spec.env_path;
  if (!spec.config_path.empty()) j["config"] = spec.config_path;
  if (spec.kind == "convergence-report") {
    if (!spec.out_dir.empty()) j["out"] = spec.out_dir;
    return j;
  }
  j["m"] = spec.m_list;
  if (spec.kind == "tilt-inspect") return j;
  j["T"] = spec.horizon_T;
  j["paths"] = spec.num_paths;
  j["seed"] = spec.seed ? json(*spec.seed) : json(nullptr);
  if (spec.kind == "rwre-sim") j["mode"] = spec.mode;
  if (spec.kind == "diffusion-sim") {
    j["sigma"] = spec.sigma;
    j["kappa"] = spec.kappa;
    j["h"] = spec.mesh_h;
  }
  j["store_paths"] = spec.store_paths;
  j["out"] = spec.out_dir;
  return j;
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("experiment spec must be a JSON object");
  ExperimentSpec spec;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "kind") spec.kind = value.get<std::string>();
      else if (key == "law") spec.law_path = value.get<std::string>();
      else if (key == "env") spec.env_path = value.get<std::string>();
      else if (key == "config") spec.config_path = value.get<std::string>();
      else if (key == "m") spec.m_list = value.is_array() ? value.get<std::vector<std::uint64_t>>()
                                                        : std::vector{value.get<std::uint64_t>()};
      else if (key == "T") spec.horizon_T = value.get<double>();
      else if (key == "paths") spec.num_paths = value.get<std::uint64_t>();
      else if (key == "seed") {
        if (!value.is_null()) spec.seed = value.get<std::uint64_t>();
      } else if (key == "mode") spec.mode = value.get<std::string>();
      else if (key == "sigma") spec.sigma = value.get<double>();
      else if (key == "kappa") spec.kappa = value.get<double>();
      else if (key == "h") spec.mesh_h = value.get<double>();
      else if (key == "store_paths") spec.store_paths = value.get<std::uint64_t>();
      else if (key == "workers") spec.workers = value.get<unsigned>();
      else if (key == "out") spec.out_dir = value.get<std::string>();
      else throw ParseError("unknown spec key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad spec value: ") + e.what());
  }
  return spec;
}

std::vector<std::uint64_t> parse_m_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_u64(tok, "m"));
  if (out.empty()) throw InvalidArgument("m list must not be empty");
  return out;
}

void resolve_seed(ExperimentSpec& spec) {
  if (spec.seed) return;
  if (const char* env = std::getenv("TWL_SEED"); env && *env)
    spec.seed = parse_u64(env, "TWL_SEED");
}

json error_record(const std::string& kind, const std::exception& e) {
  json rec = {{"status", "error"}, {"kind", kind}, {"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    rec["error"] = err->code();
    if (const auto* neg = dynamic_cast<const NegativeMass*>(err))
      rec["m_min"] = neg->m_min_hint();
    if (const auto* failed = dynamic_cast<const ChecksFailed*>(err))
      rec["failed"] = failed->names();
  } else {
    rec["error"] = "InternalError";
  }
  return rec;
}

int run(ExperimentSpec spec, std::ostream& out, std::ostream& err) {
  try {
    resolve_seed(spec);
    spec.validate();
    if (spec.kind == "tilt-inspect") tilt_inspect(spec, out);
    else if (spec.kind == "walk-sim") walk_sim(spec, out);
    else if (spec.kind == "rwre-sim") rwre_sim(spec, out);
    else if (spec.kind == "diffusion-sim") diffusion_sim(spec, out);
    else convergence_report(spec, out);
    if (!spec.out_dir.empty()) fs::remove(fs::path(spec.out_dir) / "error.json");
    return 0;
  } catch (const std::exception& e) {
    const json rec = error_record(spec.kind, e);
    err << rec.dump() << "\n";
    if (!spec.out_dir.empty()) {
      try {
        io::write_file(fs::path(spec.out_dir) / "error.json", rec.dump(2) + "\n");
      } catch (const std::exception&) {
        // The record on stderr is the primary channel.
      }
    }
    return dynamic_cast<const ChecksFailed*>(&e) ? kExitChecksFailed : kExitInvalid;
  }
}

}  // namespace twl::cli
