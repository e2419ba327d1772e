#include "walkbounds/chebyshev.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "numfmt.hpp"
#include "walkbounds/error.hpp"
#include "walkbounds/special_functions.hpp"
#include "walkbounds/summation.hpp"

namespace walkbounds {

double chebyshev_value(int k, double x) {
  if (k < 0) throw DomainError("Chebyshev degree must be >= 0");
  if (x > 1.0) return std::cosh(k * std::acosh(x));
  if (x < -1.0) return (k % 2 == 0 ? 1.0 : -1.0) * std::cosh(k * std::acosh(-x));
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> simple_walk_law(int n) {
  if (n < 0) throw DomainError("n must be >= 0");
  std::vector<double> p(2 * n + 1, 0.0);
  const double lg = std::lgamma(n + 1.0) - n * std::log(2.0);
  for (int j = 0; j <= n; ++j) {  // j steps up, position 2j - n
    p[2 * j] = std::exp(lg - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0));
  }
  return p;
}

double decomposition_residual(int n, double x) {
  const auto p = simple_walk_law(n);
  CompensatedSum s;
  for (int k = 0; k <= n; ++k) {
    const double mass = k == 0 ? p[n] : 2.0 * p[n + k];
    if (mass != 0.0) s += mass * chebyshev_value(k, x);
  }
  return std::abs(std::pow(x, n) - s.value());
}

double chernov_tail_bound(int n, int k) {
  if (n < 1 || k < 0 || k > n) throw DomainError("need 0 <= k <= n, n >= 1");
  return std::exp(-0.5 * n * A_carne(static_cast<double>(k) / n));
}

ChernovCheck chernov_check(int n, int k) {
  ChernovCheck c;
  c.bound = chernov_tail_bound(n, k);
  const auto p = simple_walk_law(n);
  CompensatedSum tail;
  for (int pos = n; pos >= k; --pos) tail += p[n + pos];
  c.exact_tail = tail.value();
  // Equality at k = n; allow rounding there.
  c.holds = c.exact_tail <= c.bound * (1.0 + 1e-12);
  return c;
}

PointwiseReport pointwise_bounds(const Distribution& law, const Measure& mu, double rho_upper) {
  if (!(rho_upper > 0.0 && rho_upper <= 1.0)) {
    throw InvalidInput("rho upper bound must lie in (0, 1]");
  }
  if (!mu.is_symmetric()) throw InvalidInput("pointwise bounds need a symmetric measure");
  PointwiseReport rep;
  rep.n = law.step;
  rep.rho_upper = rho_upper;
  rep.k = mu.max_length();
  const int n = law.step;
  std::map<double, PointwiseRow> by_len;
  for (std::size_t i = 0; i < law.ids.size(); ++i) {
    const double len = law.table->length(law.ids[i]);
    const double p = law.probs[i];
    if (n == 0) {
      if (len != 0.0) throw InvalidInput("step 0 law is not a point mass at e");
    } else if (len > n * rep.k * (1.0 + 1e-12)) {
      throw InvalidInput("|g| = " + detail::num(len) + " exceeds n k at step " +
                         std::to_string(n));
    }
    auto [it, fresh] = by_len.try_emplace(len);
    PointwiseRow& r = it->second;
    if (fresh) {
      r.length = len;
      const double x = n == 0 ? 0.0 : std::min(1.0, len / (n * rep.k));
      r.loeuillot = 2.0 * std::pow(rho_upper, n) * std::exp(-0.5 * n * A_carne(x));
      r.carne = n == 0 ? 2.0 : 2.0 * std::exp(-len * len / (2.0 * n * rep.k * rep.k));
    }
    ++r.count;
    r.exact_max = std::max(r.exact_max, p);
    if (p > r.loeuillot * (1.0 + 1e-12)) ++rep.loeuillot_violations;
    if (p > r.carne * (1.0 + 1e-12)) ++rep.carne_violations;
    ++rep.elements;
  }
  for (auto& [len, r] : by_len) {
    r.ratio = r.exact_max / std::min(r.loeuillot, r.carne);
    rep.rows.push_back(r);
  }
  return rep;
}

PointwiseReport pointwise_bounds(const Measure& mu, int n, double rho_upper) {
  return pointwise_bounds(nstep(mu, n), mu, rho_upper);
}

std::string PointwiseReport::to_csv() const {
  std::ostringstream os;
  os << "|g|,count,exact_max,loeuillot,carne,ratio\n";
  for (const auto& r : rows) {
    os << detail::num(r.length) << ',' << r.count << ',' << detail::num(r.exact_max) << ','
       << detail::num(r.loeuillot) << ',' << detail::num(r.carne) << ','
       << detail::num(r.ratio) << '\n';
  }
  return os.str();
}

}  // namespace walkbounds
