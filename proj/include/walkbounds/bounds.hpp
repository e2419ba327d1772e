#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace walkbounds {

enum class Provenance { Exact, Estimated, External };
std::string to_string(Provenance p);

/// A numeric input to the bounds engine with its provenance. `source` is
/// the method (estimates) or the citation (external constants).
struct Quantity {
  double value = 0.0;
  Provenance provenance = Provenance::Exact;
  double error = 0.0;
  std::string source;

  static Quantity exact(double v, std::string source = "") {
    return {v, Provenance::Exact, 0.0, std::move(source)};
  }
  static Quantity estimated(double v, double err, std::string method) {
    return {v, Provenance::Estimated, err, std::move(method)};
  }
  static Quantity external(double v, std::string citation) {
    return {v, Provenance::External, 0.0, std::move(citation)};
  }
  /// "exact", "estimated +- 1.2e-3 (increment)" or "external [citation]".
  std::string tag() const;
};

enum class Verdict { Strict, Equality, Violated, Skipped };
std::string to_string(Verdict v);

struct BoundRow {
  std::string name;
  std::string statement;  // e.g. "F(sqrt(1-rho^2)) <= h"
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double sigma = 0.0;  // propagated input error
  double tolerance = 0.0;
  Verdict verdict = Verdict::Skipped;
  std::string reason;  // skip reason
  std::vector<std::string> inputs;
};

struct BoundInputs {
  std::optional<Quantity> h, rho, ell, v;
  /// M_p(mu) keyed by p. M_2 is needed by most rows.
  std::map<double, Quantity> moments;
  std::optional<double> support_radius;  // k for the Carne row
  bool symmetric = true;
  int series_terms = 20;  // N in the moment series row
};

struct BoundOptions {
  double equality_tol = 1e-9;
  double sigma_factor = 3.0;
};

struct BoundReport {
  std::vector<BoundRow> rows;
  BoundInputs inputs;

  const BoundRow* find(const std::string& name) const;
  bool any_violated() const;
  /// Columns: inequality, lhs, rhs, slack, verdict; inputs listed below.
  std::string to_markdown() const;
};

/// Exponents 1 + 1/(2n-1), n = 1..N, used by the moment series row.
std::vector<double> series_moment_orders(int N);

/// Rows relating h to rho and ell, with the classical Avez / Ledrappier
/// rows and the dominance row.
std::vector<BoundRow> theorem2_check(const BoundInputs& in, const BoundOptions& opt = {});

struct GrowthBounds {
  double v_tilde = 0.0;  // M_2 v
  double ell_max = 0.0;  // M_2 tanh(v~/2)
  double h_max = 0.0;    // v~ tanh(v~/2)
  double rho_min = 1.0;  // 1/cosh(v~/2)
  /// |F(sqrt(1-r^2)) - v~ tanh(v~/2)| at r = rho_min.
  double identity_residual = 0.0;
};
GrowthBounds theorem1_bounds(double v, double M2);

/// Lower bounds implied by an upper bound on rho: h >= FG_inv(1 - rho_up)
/// and, through h <= ell v, ell >= h / v.
struct ImpliedBounds {
  double h_min = 0.0;
  double ell_min = 0.0;
};
ImpliedBounds implied_lower_bounds(double rho_upper, double v);

/// Growth rows, fundamental inequality, combined corollaries, moment
/// series and Varopoulos-Carne.
std::vector<BoundRow> auxiliary_checks(const BoundInputs& in, const BoundOptions& opt = {});

/// Every row.
BoundReport evaluate_bounds(const BoundInputs& in, const BoundOptions& opt = {});

}  // namespace walkbounds
