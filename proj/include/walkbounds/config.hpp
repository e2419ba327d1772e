#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "walkbounds/error.hpp"
#include "walkbounds/group.hpp"

namespace walkbounds {

/// Schema violation; `field` is the dotted path of the offending entry.
class ConfigError : public InvalidInput {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidInput(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline const std::vector<std::string>& known_stages() {
  static const std::vector<std::string> s{"census",   "exact_walk", "monte_carlo", "boundary",
                                          "bounds",   "chebyshev",  "poisson",     "properties"};
  return s;
}

struct MeasureConfig {
  bool uniform = false;
  std::vector<std::pair<std::string, double>> support;
  double mass_tol = 1e-9;
};

struct Budgets {
  int n_max = 10;
  int ball_radius = 10;
  std::size_t max_elements = 50'000'000;
  std::uint64_t memory_bytes = 2'000'000'000ULL;
  std::size_t mc_paths = 4000;
  int mc_steps = 400;
  std::size_t hitting_samples = 20000;
  long horizon = 100000;
  std::size_t cocycle_samples = 2000;
  double prune_eps = 0.0;
  double poisson_prune_eps = 1e-14;  // relative; the Poisson chain is never exact
  int chebyshev_n = 8;
};

struct Tolerances {
  double equality = 1e-9;
  double sigma_factor = 3.0;
  double detector = 1e-9;
};

/// A constant supplied from outside the computation.
struct Constant {
  double value = 0.0;
  std::string citation;  // required for external constants
};

struct RunConfig {
  std::string name;
  std::string description;
  std::optional<GroupSpec> group;
  std::optional<MeasureConfig> measure;
  std::set<std::string> stages;
  Budgets budgets;
  std::optional<std::uint64_t> seed;
  Tolerances tolerances;
  int series_terms = 20;
  std::vector<double> poisson_times;
  /// Quantity (h, ell, rho, v) -> sources tried in order: exact, boundary,
  /// exact_walk, monte_carlo, census, external.
  std::map<std::string, std::vector<std::string>> sources;
  /// Closed-form values known for this example (provenance exact).
  std::map<std::string, Constant> exact;
  /// Published values: h, ell, rho, v, rho_upper, rho_lower, M2.
  std::map<std::string, Constant> external;
};

/// YAML or JSON text (JSON is read as YAML flow style).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Default source order for one quantity.
std::vector<std::string> default_sources(const std::string& quantity);

struct Diagnostic {
  std::string severity;  // "error" or "warning"
  std::string field;
  std::string message;
};

/// Semantic checks without running any stage: group and measure build,
/// mass, symmetry, generation, seeds and budgets.
std::vector<Diagnostic> validate_config(const RunConfig& cfg);

}  // namespace walkbounds
