#include "twl/walk.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "twl/error.hpp"
#include "twl/io.hpp"

namespace twl::walk {

namespace {

constexpr double kGridEpsilon = 1e-9;

std::uint64_t grid_steps(double horizon, double dt) {
  return static_cast<std::uint64_t>(std::floor(horizon / dt + kGridEpsilon));
}

std::string meta_header(const std::map<std::string, std::string>& meta,
                        double t0, double dt) {
  std::string out;
  std::map<std::string, std::string> all = meta;
  all["dt"] = io::format_double(dt);
  all["t0"] = io::format_double(t0);
  for (const auto& [k, v] : all) out += "#" + k + "=" + v + "\n";
  return out;
}

// Splits one CSV line on commas.
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

struct ParsedCsv {
  std::map<std::string, std::string> meta;
  std::vector<std::vector<std::string>> rows;
};

ParsedCsv parse_csv(const std::string& text, const std::string& header) {
  ParsedCsv out;
  std::istringstream in(text);
  std::string line;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      out.meta[line.substr(1, eq - 1)] = line.substr(eq + 1);
      continue;
    }
    if (!seen_header) {
      if (line != header)
        throw ParseError("expected header '" + header + "', got '" + line + "'");
      seen_header = true;
      continue;
    }
    out.rows.push_back(split_fields(line));
  }
  if (!seen_header) throw ParseError("missing header '" + header + "'");
  return out;
}

PathGrid grid_from_meta(std::map<std::string, std::string> meta) {
  PathGrid p;
  if (!meta.contains("dt")) throw ParseError("missing #dt meta line");
  p.dt = io::parse_double(meta.at("dt"));
  p.t0 = meta.contains("t0") ? io::parse_double(meta.at("t0")) : 0.0;
  meta.erase("dt");
  meta.erase("t0");
  p.meta = std::move(meta);
  return p;
}

}  // namespace

double PathGrid::value_at(double t) const {
  if (values.empty()) throw InvalidArgument("empty path");
  const double pos = (t - t0) / dt;
  if (pos <= 0.0) return values.front();
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(k);
  return values[k] + frac * (values[k + 1] - values[k]);
}

void SimConfig::validate() const {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (!(horizon_T > 0.0)) throw InvalidArgument("horizon_T must be > 0");
  if (num_paths < 1) throw InvalidArgument("num_paths must be >= 1");
  if (steps() < 1) throw InvalidArgument("horizon_T * m must be >= 1");
}

std::uint64_t SimConfig::steps() const {
  return grid_steps(horizon_T * static_cast<double>(m), 1.0);
}

AliasSampler::AliasSampler(const FiniteLaw& law) {
  const std::size_t n = law.size();
  values_.resize(n);
  accept_.assign(n, 1.0);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    values_[i] = law[i].value;
    alias_[i] = static_cast<std::uint32_t>(i);
    scaled[i] = law[i].prob * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::uint32_t i : small) accept_[i] = 1.0;
  for (std::uint32_t i : large) accept_[i] = 1.0;
}

std::size_t AliasSampler::draw_index(rng::Stream& stream) const {
  const double u = stream.uniform() * static_cast<double>(values_.size());
  const auto column = std::min(static_cast<std::size_t>(u), values_.size() - 1);
  const double coin = u - static_cast<double>(column);
  return coin < accept_[column] ? column : alias_[column];
}

double AliasSampler::draw(rng::Stream& stream) const {
  return values_[draw_index(stream)];
}

AliasSampler build_sampler(const FiniteLaw& law) { return AliasSampler(law); }

ScaledWalk::ScaledWalk(const FiniteLaw& law, const measure::TiltParams& params)
    : report_(measure::tilt(law, params)), sampler_(report_.tilted) {}

PathGrid ScaledWalk::path(const SimConfig& config,
                          std::uint64_t path_index) const {
  config.validate();
  if (config.m != report_.params.m)
    throw InvalidArgument("config.m does not match the tilt scale");
  if (path_index >= config.num_paths)
    throw InvalidArgument("path_index out of range");

  const std::uint64_t n = config.steps();
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.m));
  rng::Stream stream(config.seed, rng::Domain::kWalkIncrements, path_index);

  PathGrid path;
  path.dt = 1.0 / static_cast<double>(config.m);
  path.values.resize(n + 1);
  double sum = 0.0;
  path.values[0] = 0.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    sum += sampler_.draw(stream);
    path.values[k] = sum * scale;
  }
  path.meta = {{"process", "scaled_walk"},
               {"m", std::to_string(config.m)},
               {"seed", std::to_string(config.seed)},
               {"path_index", std::to_string(path_index)}};
  return path;
}

PathGrid simulate_scaled_walk(const FiniteLaw& law,
                              const measure::TiltParams& params,
                              const SimConfig& config,
                              std::uint64_t path_index) {
  return ScaledWalk(law, params).path(config, path_index);
}

PathGrid simulate_bm_with_drift(double sigma, double beta, double horizon_T,
                                double dt, std::uint64_t seed,
                                std::uint64_t path_index) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (!(horizon_T > 0.0)) throw InvalidArgument("horizon_T must be > 0");
  const std::uint64_t n = grid_steps(horizon_T, dt);
  rng::Stream stream(seed, rng::Domain::kBrownianIncrements, path_index);
  std::normal_distribution<double> gauss(-0.5 * beta * dt, sigma * std::sqrt(dt));

  PathGrid path;
  path.dt = dt;
  path.values.resize(n + 1);
  path.values[0] = 0.0;
  for (std::uint64_t k = 1; k <= n; ++k)
    path.values[k] = path.values[k - 1] + gauss(stream);
  path.meta = {{"process", "bm_with_drift"},
               {"sigma", io::format_double(sigma)},
               {"beta", io::format_double(beta)},
               {"seed", std::to_string(seed)},
               {"path_index", std::to_string(path_index)}};
  return path;
}

stats::TestReport max_excursion_bound_check(const FiniteLaw& law,
                                            const measure::TiltParams& params,
                                            const SimConfig& config,
                                            std::span<const double> lambdas) {
  config.validate();
  if (lambdas.empty()) throw InvalidArgument("no lambda values supplied");
  const ScaledWalk walker(law, params);
  const std::uint64_t m_from = measure::min_valid_m(law, params.beta, params.c);
  const double bound_c =
      measure::variance_upper_bound(law, params.beta, params.c, m_from);

  std::vector<double> sup_abs(config.num_paths);
  for (std::uint64_t i = 0; i < config.num_paths; ++i) {
    const PathGrid p = walker.path(config, i);
    double s = 0.0;
    for (double v : p.values) s = std::max(s, std::abs(v));
    sup_abs[i] = s;
  }

  const double n = static_cast<double>(config.num_paths);
  double worst_margin = -std::numeric_limits<double>::infinity();
  std::map<std::string, std::string> prov = {
      {"m", std::to_string(config.m)},
      {"seed", std::to_string(config.seed)},
      {"T", io::format_double(config.horizon_T)},
      {"C", io::format_double(bound_c)}};
  for (double lambda : lambdas) {
    const auto hits = std::count_if(sup_abs.begin(), sup_abs.end(),
                                    [lambda](double s) { return s >= lambda; });
    const double tail = static_cast<double>(hits) / n;
    const double halfwidth = 3.0 * std::sqrt(tail * (1.0 - tail) / n);
    const double bound = 2.0 * config.horizon_T * bound_c / (lambda * lambda);
    const double margin = tail - (bound + halfwidth);
    prov["tail@" + io::format_double(lambda)] = io::format_double(tail);
    prov["bound@" + io::format_double(lambda)] = io::format_double(bound);
    if (margin > 0.0) throw BoundViolated(lambda, tail, bound + halfwidth);
    worst_margin = std::max(worst_margin, margin);
  }
  return stats::distance_report("max_excursion_tail_minus_bound", worst_margin,
                                0.0, {config.num_paths}, std::move(prov));
}

std::string path_to_csv(const PathGrid& path) {
  std::string out = meta_header(path.meta, path.t0, path.dt);
  out += "t,value\n";
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    out += io::format_double(path.time(k));
    out += ',';
    out += io::format_double(path.values[k]);
    out += '\n';
  }
  return out;
}

PathGrid path_from_csv(const std::string& text) {
  ParsedCsv csv = parse_csv(text, "t,value");
  PathGrid p = grid_from_meta(std::move(csv.meta));
  for (const auto& row : csv.rows) {
    if (row.size() != 2) throw ParseError("expected 2 fields per row");
    p.values.push_back(io::parse_double(row[1]));
  }
  if (p.values.empty()) throw ParseError("path has no rows");
  return p;
}

std::string ensemble_to_csv(std::span<const PathGrid> paths,
                            std::uint64_t first_index) {
  if (paths.empty()) return "path_index,t,value\n";
  std::map<std::string, std::string> meta = paths.front().meta;
  meta.erase("path_index");
  std::string out = meta_header(meta, paths.front().t0, paths.front().dt);
  out += "path_index,t,value\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::string idx = std::to_string(first_index + i);
    for (std::size_t k = 0; k < paths[i].values.size(); ++k) {
      out += idx;
      out += ',';
      out += io::format_double(paths[i].time(k));
      out += ',';
      out += io::format_double(paths[i].values[k]);
      out += '\n';
    }
  }
  return out;
}

std::vector<PathGrid> ensemble_from_csv(const std::string& text) {
  ParsedCsv csv = parse_csv(text, "path_index,t,value");
  const PathGrid proto = grid_from_meta(std::move(csv.meta));
  std::vector<PathGrid> paths;
  std::string current;
  for (const auto& row : csv.rows) {
    if (row.size() != 3) throw ParseError("expected 3 fields per row");
    if (paths.empty() || row[0] != current) {
      current = row[0];
      paths.push_back(proto);
      paths.back().meta["path_index"] = current;
    }
    paths.back().values.push_back(io::parse_double(row[2]));
  }
  return paths;
}

std::string samples_to_csv(std::span<const double> samples) {
  std::string out = "index,value\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += io::format_double(samples[i]);
    out += '\n';
  }
  return out;
}

std::vector<double> samples_from_csv(const std::string& text) {
  const ParsedCsv csv = parse_csv(text, "index,value");
  std::vector<double> out;
  for (const auto& row : csv.rows) {
    if (row.size() != 2) throw ParseError("expected 2 fields per row");
    if (row[0] != std::to_string(out.size()))
      throw ParseError("sample indices must run 0, 1, ...");
    out.push_back(io::parse_double(row[1]));
  }
  return out;
}

std::vector<double> marginal(std::span<const PathGrid> paths, std::size_t k) {
  std::vector<double> out;
  out.reserve(paths.size());
  for (const PathGrid& p : paths) {
    if (k >= p.values.size()) throw InvalidArgument("grid index beyond path");
    out.push_back(p.values[k]);
  }
  return out;
}

}  // namespace twl::walk
