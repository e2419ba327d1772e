#pragma once

#include <string>
#include <vector>

#include "walkbounds/walk.hpp"

namespace walkbounds {

/// T_k(x) by the three-term recurrence on [-1, 1], cosh form outside.
double chebyshev_value(int k, double x);

/// P(S_n = k) for k = -n..n, index k + n; simple walk on Z.
std::vector<double> simple_walk_law(int n);

/// |x^n - sum_k P(|S_n| = k) T_k(x)|.
double decomposition_residual(int n, double x);

struct ChernovCheck {
  double exact_tail = 0.0;  // P(S_n >= k)
  double bound = 0.0;       // exp(-(n/2) A(k/n))
  bool holds = false;
};

/// exp(-(n/2) A(k/n)), 0 <= k <= n.
double chernov_tail_bound(int n, int k);
ChernovCheck chernov_check(int n, int k);

/// Per-radius aggregate of exact mu^{*n}(g) against the two upper bounds.
struct PointwiseRow {
  double length = 0.0;  // |g|
  std::size_t count = 0;
  double exact_max = 0.0;
  double loeuillot = 0.0;  // 2 rho^n exp(-(n/2) A(|g|/(nk)))
  double carne = 0.0;      // 2 exp(-|g|^2 / (2 n k^2))
  double ratio = 0.0;      // exact_max / min(loeuillot, carne)
};

struct PointwiseReport {
  int n = 0;
  double rho_upper = 1.0;
  double k = 1.0;
  std::vector<PointwiseRow> rows;
  std::size_t elements = 0;
  std::size_t loeuillot_violations = 0;
  std::size_t carne_violations = 0;

  bool holds() const { return loeuillot_violations == 0 && carne_violations == 0; }
  /// Columns: |g|, count, exact_max, loeuillot, carne, ratio.
  std::string to_csv() const;
};

/// `rho_upper` must be a true upper bound on the spectral radius; 1 is
/// always valid. Throws InvalidInput when |g| > n k for some support point.
PointwiseReport pointwise_bounds(const Distribution& law, const Measure& mu, double rho_upper);
PointwiseReport pointwise_bounds(const Measure& mu, int n, double rho_upper);

}  // namespace walkbounds
