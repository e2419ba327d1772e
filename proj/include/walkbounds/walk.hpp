#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "walkbounds/group.hpp"
#include "walkbounds/interner.hpp"

namespace walkbounds {

/// Finitely supported probability measure on a group.
class Measure {
 public:
  /// Duplicated elements are merged. The mass must be 1 within `mass_tol`;
  /// it is then renormalised exactly.
  Measure(Group group, std::vector<std::pair<Element, double>> support,
          double mass_tol = 1e-9);

  const Group& group() const noexcept { return group_; }
  const std::vector<Element>& elements() const noexcept { return elements_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }

  bool is_symmetric() const noexcept { return symmetric_; }
  /// Mass as given, before renormalisation.
  double input_mass() const noexcept { return input_mass_; }
  /// Index of the inverse of support point j, or -1 if it is off-support.
  int inverse_index(std::size_t j) const noexcept { return inverse_index_[j]; }
  /// Radius k of the smallest ball containing the support.
  double max_length() const noexcept { return max_length_; }
  double identity_mass() const noexcept { return identity_mass_; }

 private:
  Group group_;
  std::vector<Element> elements_;
  std::vector<double> probs_;
  std::vector<int> inverse_index_;
  bool symmetric_ = false;
  double input_mass_ = 0.0;
  double max_length_ = 0.0;
  double identity_mass_ = 0.0;
};

/// Parses each element with Group::parse.
Measure build_measure(const Group& group,
                      const std::vector<std::pair<std::string, double>>& support,
                      double mass_tol = 1e-9);

/// Uniform on the generating set.
Measure uniform_on_generators(const Group& group);

/// (sum |g|^p mu(g))^(1/p), p >= 1.
double moment(const Measure& mu, double p);

/// Sparse law over interned ids, sorted by id.
struct Distribution {
  std::shared_ptr<ElementTable> table;
  std::vector<ElementId> ids;
  std::vector<double> probs;
  int step = 0;
  double pruned_mass = 0.0;

  std::size_t size() const noexcept { return ids.size(); }
  double prob(ElementId id) const;
  double prob(const Element& x) const;
  double total() const;
};

struct DistributionStats {
  double entropy = 0.0;      // H, nats
  double mean_length = 0.0;  // L
  double return_prob = 0.0;
  double pruned_mass = 0.0;
};

DistributionStats distribution_stats(const Distribution& d);

struct ConvolutionBudget {
  double prune_eps = 0.0;
  std::size_t max_support = 20'000'000;
  std::size_t max_elements = 60'000'000;
};

/// Iterated right convolution by a fixed measure over a shared table.
class Convolver {
 public:
  explicit Convolver(Measure mu, ConvolutionBudget budget = {});

  Distribution delta() const;
  /// d * mu. Entries below `prune_eps` move into pruned_mass.
  Distribution step(const Distribution& d, double prune_eps);
  Distribution step(const Distribution& d) { return step(d, budget_.prune_eps); }

  const Measure& measure() const noexcept { return mu_; }
  const std::shared_ptr<ElementTable>& table() const noexcept { return table_; }
  const ConvolutionBudget& budget() const noexcept { return budget_; }

 private:
  Measure mu_;
  ConvolutionBudget budget_;
  std::shared_ptr<ElementTable> table_;
  NeighborCache right_;
  std::vector<double> acc_;
  std::vector<double> comp_;
  std::vector<ElementId> touched_;
};

/// mu^{*n}.
Distribution nstep(const Measure& mu, int n, const ConvolutionBudget& budget = {});

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct WalkRow {
  int n = 0;
  double entropy = 0.0;
  double mean_length = 0.0;
  double return_prob = 0.0;
  double h_inc = kNaN;
  double l_inc = kNaN;
  double rho_ratio = kNaN;  // even n only
  std::size_t support = 0;
  double pruned_mass = 0.0;
};

struct Estimate {
  double value = kNaN;
  double error = kNaN;  // empirical, not certified
  std::string method;
};

/// Diagnostics for the structural properties of the computed laws.
struct WalkChecks {
  double mass_defect = 0.0;          // max_n |sum + pruned - 1| / max(n,1)
  double symmetry_defect = 0.0;      // max |mu^n(g) - mu^n(g^-1)|
  double subadditivity_excess = 0.0; // max H(m+n) - H(m) - H(n)
  double monotonicity_excess = 0.0;  // max of consecutive increment rises
  bool exact = true;                 // no pruning happened
};

struct WalkSeries {
  std::vector<WalkRow> rows;
  Estimate h, ell, rho;
  double h_cesaro = kNaN;
  double ell_cesaro = kNaN;
  double rho_root = kNaN;
  double rho_full_ratio = kNaN;  // only when mu(e) > 0
  WalkChecks checks;

  std::string to_csv() const;
};

/// Exact laws up to n_max and the increment / ratio estimators.
WalkSeries asymptotic_estimates(const Measure& mu, int n_max,
                                const ConvolutionBudget& budget = {});

struct PoissonizedLaw {
  double t = 0.0;
  int truncation = 0;   // N
  Distribution law;     // e^-t sum_{n<=N} t^n/n! mu^{*n}
  double defect = 0.0;  // e^-t sum_{n>N} t^n/n!
};

struct PoissonOptions {
  double defect_tol = 1e-12;
  // Relative threshold on mu_t contributions; the chain mu^{*n} is pruned
  // at prune_eps / max_t w_n(t).
  double prune_eps = 0.0;
  int max_terms = 400;
  ConvolutionBudget budget{};
};

/// Poisson tail e^-t sum_{n>N} t^n/n!.
double poisson_tail(double t, int N);
int poisson_truncation(double t, double tol);

PoissonizedLaw poissonize(const Measure& mu, double t, const PoissonOptions& opts = {});
/// Several times over one shared convolution chain.
std::vector<PoissonizedLaw> poissonize_many(const Measure& mu,
                                            const std::vector<double>& times,
                                            const PoissonOptions& opts = {});

struct Derivatives {
  double dH = 0.0;
  double dL = 0.0;
  double dirichlet = 0.0;
  double dL_direct = 0.0;      // sum |x| ((mu_t * mu)(x) - mu_t(x))
  double boundary_mass = 0.0;  // mass on pairs leaving the support
};

/// Symmetrized time derivatives of H(mu_t), L(mu_t) and the Dirichlet form
/// of sqrt(mu_t). Requires a symmetric measure.
Derivatives symmetrized_derivatives(const Measure& mu, const PoissonizedLaw& law);

}  // namespace walkbounds
