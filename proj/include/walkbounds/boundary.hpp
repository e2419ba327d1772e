#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "walkbounds/walk.hpp"

namespace walkbounds {

/// First-passage probabilities q(s) for the one-syllable elements of a
/// free product of cyclic groups (free groups included). q is
/// multiplicative along reduced words, so the table determines q(g) for
/// every g.
struct HittingTable {
  std::string method;       // "tree-exact", "free-product-exact", "monte-carlo"
  std::vector<long> orders; // per factor, 0 for Z
  /// Finite factor of order m: q[f][k] for k = 0..m-1 (q[f][0] = 1).
  /// Infinite factor: q[f] = {q(a^-1), q(a)}.
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> error;  // same layout; 0 for exact tables
  double z = 1.0;        // generating-function argument
  int iterations = 0;
  double residual = 0.0;  // max |Phi(q) - q| at the solution

  double syllable(int factor, long exponent) const;
  double syllable_error(int factor, long exponent) const;
  /// q(g) for a canonical element of the group that produced the table.
  double operator()(const Element& g) const;
};

/// Exact table for a symmetric nearest-neighbour measure on a tree
/// (free group of rank >= 2, or a free product of copies of Z and Z/2
/// other than Z/2 * Z/2). Throws InvalidInput otherwise.
HittingTable solve_hitting_tree(const Measure& mu);

/// Exact table for a measure carried by one-syllable elements (and e) of a
/// free product of cyclic groups; infinite factors may only carry a and
/// a^-1. Solves the first-passage system at argument z by monotone
/// iteration and Newton polishing. Throws DomainError when z lies beyond
/// the radius of convergence.
HittingTable solve_hitting_free_product(const Measure& mu, double z = 1.0);

struct SpectralRadius {
  double rho = 1.0;
  double radius = 1.0;  // R = 1/rho, radius of convergence of the Green function
  bool recurrent = false;
  int continuation_steps = 0;
};

/// rho = 1/R where R is the fold of the first-passage system in z.
SpectralRadius spectral_radius_free_product(const Measure& mu);

struct HittingOptions {
  std::size_t samples = 100000;
  long horizon = 100000;      // steps per path before it counts as censored
  double escape_margin = 60;  // |X_n| - |target| at which a path counts as escaped
  std::uint64_t seed = 1;
};

struct HittingEstimate {
  double estimate = 0.0;
  double sigma = 0.0;      // binomial standard error
  double wilson_lo = 0.0;  // Wilson interval at 3 sigma
  double wilson_hi = 0.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
  std::size_t escaped = 0;
  std::size_t censored = 0;
  double censored_fraction = 0.0;
};

/// Monte Carlo estimate of the probability of ever visiting `target`.
HittingEstimate hitting_mc(const Measure& mu, const Element& target,
                           const HittingOptions& opt = {});

/// Monte Carlo table with the layout of solve_hitting_free_product.
HittingTable hitting_table_mc(const Measure& mu, const HittingOptions& opt = {});

/// c(g, xi) = q(g w) / q(w) with w a prefix of xi long enough that g w
/// keeps the rest of the ray.
double cocycle(const HittingTable& table, const Group& group, const Element& g,
               const Element& prefix);

/// c_0(a, xi) for a one-syllable a, depending on the first syllable xi1.
double rn_cocycle(const HittingTable& table, const Group& group, const Element& a,
                  const Element& xi1);

/// |c(g1 g2, xi) - c(g1, g2 xi) c(g2, xi)| along the prefix.
double cocycle_multiplicativity_defect(const HittingTable& table, const Group& group,
                                       const Element& g1, const Element& g2,
                                       const Element& prefix);

struct FirstSyllable {
  int factor = 0;
  long exponent = 0;
  double nu = 0.0;  // harmonic measure of rays starting with this syllable
};

struct BoundaryQuantities {
  std::vector<FirstSyllable> first;  // truncated where q^|k| < 1e-18 on Z factors
  double green = 0.0;                // G(e, e)
  double nu_total = 0.0;             // sum of first[i].nu, 1 up to truncation
  double h = 0.0;                    // -int log c_0
  double ell = 0.0;                  // int (|a xi| - |xi|)
  double rho_lower = 0.0;            // int sqrt(c_0) <= rho
  double residual = 0.0;             // |int c_0 - 1|
};

/// Entropy, drift and a spectral-radius lower bound from the harmonic
/// measure. Requires a transient walk.
BoundaryQuantities boundary_quantities(const Measure& mu, const HittingTable& table);

/// h of the simple random walk on F_d through the boundary.
double boundary_entropy_free(int d);

struct CocycleSample {
  double log_c = 0.0;
  double weight = 1.0;
  double error = 0.0;  // propagated from the table
};

/// Exact law of log c_0(a, xi) over a ~ mu, xi1 ~ nu.
std::vector<CocycleSample> cocycle_law(const Measure& mu, const HittingTable& table);

/// Draws a ~ mu and xi1 from the first syllable of an independent path run
/// until |X_n| >= path_radius.
std::vector<CocycleSample> sample_cocycle(const Measure& mu, const HittingTable& table,
                                          std::size_t count, std::uint64_t seed,
                                          double path_radius = 30);

struct DetectorResult {
  bool two_valued = false;
  double alpha = 0.0;  // minimax fit of |log c|
  double max_deviation = 0.0;
  double outlier_fraction = 0.0;  // weight with ||log c| - alpha| > tol + 3 error
  std::size_t samples = 0;
};

/// Tests whether log c_0 takes only the values +-alpha. Samples with
/// nonzero `error` get 3 error of extra room.
DetectorResult equality_detector(const std::vector<CocycleSample>& samples, double tol = 1e-9);

/// q(u v) - q(u) q(v) from the table; u v must be reduced.
double cutpoint_check(const HittingTable& table, const Group& group, const Element& u,
                      const Element& v);

struct CutpointCheck {
  double direct = 0.0;   // Monte Carlo q(u v)
  double product = 0.0;  // q(u) q(v) from the table
  double sigma = 0.0;
  double zscore = 0.0;
};

/// Compares q(u v) with q(u) q(v) for u, v ending and starting in
/// different factors.
CutpointCheck cutpoint_check_mc(const Measure& mu, const HittingTable& table, const Element& u,
                             const Element& v, const HittingOptions& opt = {});

}  // namespace walkbounds
