#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "walkbounds/config.hpp"

namespace walkbounds {

using Json = nlohmann::ordered_json;

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::set<std::string>> stages;
  std::optional<std::uint64_t> memory_bytes;
  bool timestamp = true;  // false leaves the header timestamp empty
};

/// Exit codes of run / report / validate.
enum ExitCode : int {
  kExitOk = 0,
  kExitViolated = 1,    // some inequality row is violated
  kExitStageError = 2,  // a stage failed (budget, domain, property)
  kExitConfig = 3,      // config schema or semantic error
  kExitUsage = 4,
};

struct RunResult {
  Json report;             // report.json
  std::string series_csv;  // series.csv
  std::string bounds_md;   // bounds.md
  int exit_code = kExitOk;
};

/// Runs every enabled stage in order census, exact_walk, monte_carlo,
/// boundary, poisson, chebyshev, bounds, properties. Stage failures are
/// recorded in report["errors"] and do not stop later stages.
RunResult run_pipeline(const RunConfig& cfg, const RunOverrides& ov = {});

/// bounds.md from a report produced by run_pipeline.
std::string render_bounds_markdown(const Json& report);

/// Writes report.json, series.csv and bounds.md into `dir` (created).
void write_bundle(const RunResult& result, const std::string& dir);

/// Re-renders bounds.md from `dir`/report.json; returns the stored exit code.
int rerender_bundle(const std::string& dir);

}  // namespace walkbounds
