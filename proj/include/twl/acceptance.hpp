#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twl/stats.hpp"

namespace twl::acceptance {

struct Options {
  // Frozen seeds; changing them changes the artifacts, not the thresholds.
  std::uint64_t law_suite_seed = 20240101;
  std::uint64_t walk_seed = 20240117;
  std::uint64_t potential_seed = 20240131;
  std::uint64_t rwre_seed = 20240214;
  std::uint64_t seignourel_seed = 20240301;
  unsigned workers = 1;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<stats::TestReport> reports;
  double seconds = 0.0;
  double time_limit_seconds = 0.0;
  // Deterministic output files keyed by relative path.
  std::map<std::string, std::string> artifacts;

  bool within_time() const { return seconds <= time_limit_seconds; }
  bool pass() const;
};

CriterionResult tilt_identities(const Options& options);        // 1
CriterionResult two_point_closed_forms(const Options& options); // 2
CriterionResult variance_formula_suite(const Options& options); // 3
CriterionResult walk_marginal(const Options& options);          // 4
CriterionResult environment_identities(const Options& options); // 5
CriterionResult potential_convergence(const Options& options);  // 6
CriterionResult rwre_stabilization(const Options& options);     // 7
CriterionResult seignourel_cross_check(const Options& options); // 8
CriterionResult determinism(const Options& options);            // 9

std::vector<CriterionResult> run_all(const Options& options);

// Writes every criterion's artifacts plus reports/criterion_<id>.json under
// `dir`. Only deterministic content is written.
void write_results(const std::vector<CriterionResult>& results,
                   const std::filesystem::path& dir);

// `[PASS] criterion 4: ... (12.3 s / 30 s)` plus one indented line per report.
std::string render(const CriterionResult& result);

}  // namespace twl::acceptance
