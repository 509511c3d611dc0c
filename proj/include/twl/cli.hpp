#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace twl::cli {

// One experiment. Serialized as a flat JSON object; the copy written to the
// output directory has every default and the resolved seed filled in.
struct ExperimentSpec {
  std::string kind;  // tilt-inspect | walk-sim | rwre-sim | diffusion-sim | convergence-report
  std::string law_path;
  std::string env_path;
  std::string config_path;
  std::vector<std::uint64_t> m_list;
  double horizon_T = 1.0;
  std::uint64_t num_paths = 1000;
  std::optional<std::uint64_t> seed;
  std::string mode = "annealed";
  double sigma = 1.0;
  double kappa = 1.0;
  double mesh_h = 0.05;
  std::uint64_t store_paths = 20;  // full paths kept in paths/; marginals keep all
  unsigned workers = 0;            // 0 = hardware concurrency
  std::string out_dir;

  void validate() const;  // throws InvalidArgument
};

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);

// Comma-separated positive integers, e.g. "100,400".
std::vector<std::uint64_t> parse_m_list(const std::string& text);

// Fills `seed` from TWL_SEED when unset; throws InvalidArgument if neither
// is available.
void resolve_seed(ExperimentSpec& spec);

// Runs the experiment. Human-readable lines go to `out`; on failure a
// one-line JSON error record goes to `err` (and to <out>/error.json when an
// output directory is set). Returns the process exit status: 0 on success,
// 1 when a statistical check fails, 2 on invalid input.
int run(ExperimentSpec spec, std::ostream& out, std::ostream& err);

// Machine-readable record for an exception.
nlohmann::json error_record(const std::string& kind, const std::exception& e);

}  // namespace twl::cli
