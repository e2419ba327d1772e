#include "walkbounds/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "walkbounds/error.hpp"
#include "walkbounds/monte_carlo.hpp"
#include "walkbounds/summation.hpp"

namespace walkbounds {

namespace {

std::vector<long> factor_orders(const GroupSpec& spec) {
  switch (spec.kind) {
    case GroupKind::Free: return std::vector<long>(spec.rank, 0);
    case GroupKind::Cyclic: return {spec.order};
    case GroupKind::FreeProduct: {
      std::vector<long> out;
      for (const auto& f : spec.factors) out.push_back(f.order);
      return out;
    }
    default:
      throw InvalidInput("boundary computations need a free product of cyclic groups, got " +
                         to_string(spec.kind));
  }
}

long mod(long a, long m) { return ((a % m) + m) % m; }

// The first-passage system q = Phi(q, z) on one-syllable elements.
class HittingSystem {
 public:
  explicit HittingSystem(const Measure& mu) : orders_(factor_orders(mu.group().spec())) {
    const std::size_t nf = orders_.size();
    if (nf < 2) throw InvalidInput("boundary computations need at least two free factors");
    mass_.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      mass_[f].assign(orders_[f] == 0 ? 2 : orders_[f], 0.0);
    }
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const auto& c = mu.elements()[j].code();
      const double p = mu.probs()[j];
      if (c.empty()) {
        mu_e_ += p;
        continue;
      }
      if (c.size() != 2) throw InvalidInput("measure must be carried by one-syllable elements");
      const int f = c[0];
      const long k = c[1];
      if (orders_[f] == 0) {
        if (k != 1 && k != -1) {
          throw InvalidInput("infinite factors may only carry a and a^-1");
        }
        mass_[f][k > 0 ? 1 : 0] += p;
      } else {
        mass_[f][k] += p;
      }
    }
    for (std::size_t f = 0; f < nf; ++f) {
      double m = 0;
      for (double x : mass_[f]) m += x;
      if (!(m > 0)) throw InvalidInput("measure must charge every free factor");
      offset_.push_back(n_);
      n_ += orders_[f] == 0 ? 2 : static_cast<int>(orders_[f]) - 1;
    }
  }

  int size() const { return n_; }
  const std::vector<long>& orders() const { return orders_; }

  // q of syllable (f, k) from the unknown vector; k = 0 gives 1.
  double q(const std::vector<double>& x, int f, long k) const {
    if (orders_[f] == 0) {
      if (k == 0) return 1.0;
      return std::pow(x[offset_[f] + (k > 0 ? 1 : 0)], std::abs(k));
    }
    k = mod(k, orders_[f]);
    return k == 0 ? 1.0 : x[offset_[f] + k - 1];
  }

  std::vector<double> phi(const std::vector<double>& x, double z) const {
    const std::size_t nf = orders_.size();
    // pull[f] = sum_t mu_f(t) q(t^-1), the return pull of factor f.
    std::vector<double> pull(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
      if (orders_[f] == 0) {
        pull[f] = mass_[f][1] * q(x, f, -1) + mass_[f][0] * q(x, f, 1);
      } else {
        for (long t = 1; t < orders_[f]; ++t) pull[f] += mass_[f][t] * q(x, f, -t);
      }
    }
    double total_pull = 0;
    for (double p : pull) total_pull += p;
    std::vector<double> out(n_);
    for (std::size_t f = 0; f < nf; ++f) {
      const double sigma = mu_e_ + total_pull - pull[f];
      const int o = offset_[f];
      if (orders_[f] == 0) {
        const double qm = x[o], qp = x[o + 1];
        out[o] = z * (mass_[f][0] + mass_[f][1] * qm * qm + sigma * qm);
        out[o + 1] = z * (mass_[f][1] + mass_[f][0] * qp * qp + sigma * qp);
      } else {
        const long m = orders_[f];
        for (long s = 1; s < m; ++s) {
          double acc = sigma * x[o + s - 1];
          for (long t = 1; t < m; ++t) acc += mass_[f][t] * q(x, f, s - t);
          out[o + s - 1] = z * acc;
        }
      }
    }
    return out;
  }

  HittingTable table(const std::vector<double>& x, double z) const {
    HittingTable t;
    t.orders = orders_;
    t.z = z;
    for (std::size_t f = 0; f < orders_.size(); ++f) {
      if (orders_[f] == 0) {
        t.q.push_back({x[offset_[f]], x[offset_[f] + 1]});
        t.error.push_back({0.0, 0.0});
      } else {
        std::vector<double> row(orders_[f], 1.0);
        for (long k = 1; k < orders_[f]; ++k) row[k] = x[offset_[f] + k - 1];
        t.q.push_back(row);
        t.error.push_back(std::vector<double>(orders_[f], 0.0));
      }
    }
    return t;
  }

  std::vector<std::pair<int, long>> unknowns() const {
    std::vector<std::pair<int, long>> out;
    for (std::size_t f = 0; f < orders_.size(); ++f) {
      if (orders_[f] == 0) {
        out.push_back({static_cast<int>(f), -1});
        out.push_back({static_cast<int>(f), 1});
      } else {
        for (long k = 1; k < orders_[f]; ++k) out.push_back({static_cast<int>(f), k});
      }
    }
    return out;
  }

 private:
  std::vector<long> orders_;
  std::vector<std::vector<double>> mass_;  // finite: by exponent; Z: {a^-1, a}
  std::vector<int> offset_;
  double mu_e_ = 0.0;
  int n_ = 0;
};

using Matrix = std::vector<std::vector<double>>;

// Solves A d = b in place by partial pivoting; false when singular.
bool solve_linear(Matrix a, std::vector<double> b, std::vector<double>& out) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (!(std::abs(a[piv][c]) > 1e-300)) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * out[k];
    out[r] = s / a[r][r];
  }
  return true;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// d Phi / d q by central differences.
Matrix jacobian(const HittingSystem& sys, const std::vector<double>& x, double z) {
  const int n = sys.size();
  Matrix j(n, std::vector<double>(n));
  for (int c = 0; c < n; ++c) {
    const double h = 1e-7 * std::max(1.0, std::abs(x[c]));
    auto xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    const auto fp = sys.phi(xp, z), fm = sys.phi(xm, z);
    for (int r = 0; r < n; ++r) j[r][c] = (fp[r] - fm[r]) / (2 * h);
  }
  return j;
}

// Perron root of a nonnegative matrix by power iteration on J + I, which
// is aperiodic.
double perron_root(const Matrix& j) {
  const std::size_t n = j.size();
  std::vector<double> v(n, 1.0), w(n);
  double lambda = 0;
  for (int it = 0; it < 5000; ++it) {
    double norm = 0;
    for (std::size_t r = 0; r < n; ++r) {
      w[r] = v[r];
      for (std::size_t c = 0; c < n; ++c) w[r] += std::max(0.0, j[r][c]) * v[c];
      norm = std::max(norm, w[r]);
    }
    for (auto& x : w) x /= norm;
    const double change = max_abs_diff(v, w);
    v = w;
    lambda = norm - 1.0;
    if (change < 1e-15) break;
  }
  return lambda;
}

struct Solution {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;
  double perron = 0.0;
};

Solution solve_at(const HittingSystem& sys, double z) {
  Solution s;
  s.x.assign(sys.size(), 0.0);
  const int max_iter = 200000;
  for (; s.iterations < max_iter; ++s.iterations) {
    auto next = sys.phi(s.x, z);
    if (!std::all_of(next.begin(), next.end(), [](double v) { return std::isfinite(v); }) ||
        *std::max_element(next.begin(), next.end()) > 1e6) {
      throw DomainError("first-passage iteration diverges at z = " + std::to_string(z));
    }
    const double change = max_abs_diff(next, s.x);
    s.x = std::move(next);
    if (change < 1e-15) break;
  }
  const int n = sys.size();
  for (int it = 0; it < 8; ++it) {
    const auto f = sys.phi(s.x, z);
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = f[i] - s.x[i];
    s.residual = *std::max_element(r.begin(), r.end(), [](double a, double b) {
      return std::abs(a) < std::abs(b);
    });
    s.residual = std::abs(s.residual);
    if (s.residual < 1e-16) break;
    auto j = jacobian(sys, s.x, z);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < n; ++c) j[i][c] = (i == c ? 1.0 : 0.0) - j[i][c];
    }
    std::vector<double> d;
    if (!solve_linear(j, r, d)) break;
    auto trial = s.x;
    for (int i = 0; i < n; ++i) trial[i] += d[i];
    if (!std::all_of(trial.begin(), trial.end(), [](double v) { return v >= 0 && std::isfinite(v); })) {
      break;
    }
    s.x = std::move(trial);
  }
  s.perron = perron_root(jacobian(sys, s.x, z));
  return s;
}

// Perron root within this of 1 marks z = R. The monotone iteration
// approaches a recurrent fixed point only like 1/n, hence the loose value.
constexpr double kCritical = 1e-4;

HittingTable make_table(const HittingSystem& sys, const Solution& s, double z,
                        std::string method) {
  HittingTable t = sys.table(s.x, z);
  t.method = std::move(method);
  t.iterations = s.iterations;
  t.residual = s.residual;
  return t;
}

void require_symmetric(const Measure& mu) {
  if (!mu.is_symmetric()) throw InvalidInput("boundary computations need a symmetric measure");
}

}  // namespace

double HittingTable::syllable(int factor, long exponent) const {
  const long m = orders.at(factor);
  if (m == 0) {
    if (exponent == 0) return 1.0;
    return std::pow(q[factor][exponent > 0 ? 1 : 0], std::abs(exponent));
  }
  return q[factor][mod(exponent, m)];
}

double HittingTable::syllable_error(int factor, long exponent) const {
  const long m = orders.at(factor);
  if (m == 0) {
    if (exponent == 0) return 0.0;
    const int i = exponent > 0 ? 1 : 0;
    const long k = std::abs(exponent);
    return k * std::pow(q[factor][i], k - 1) * error[factor][i];
  }
  return error[factor][mod(exponent, m)];
}

double HittingTable::operator()(const Element& g) const {
  const auto& c = g.code();
  double out = 1.0;
  for (std::size_t i = 0; i + 1 < c.size(); i += 2) out *= syllable(c[i], c[i + 1]);
  return out;
}

HittingTable solve_hitting_free_product(const Measure& mu, double z) {
  if (!(z > 0) || !std::isfinite(z)) throw DomainError("z must be > 0");
  const HittingSystem sys(mu);
  const auto s = solve_at(sys, z);
  return make_table(sys, s, z, "free-product-exact");
}

HittingTable solve_hitting_tree(const Measure& mu) {
  const Group& g = mu.group();
  if (!g.is_tree()) throw InvalidInput("Cayley graph is not a tree; use the free-product solver or Monte Carlo");
  require_symmetric(mu);
  const auto orders = factor_orders(g.spec());
  if (orders.size() < 2) throw InvalidInput("rank 1: the walk is recurrent");
  if (orders.size() == 2 && orders[0] == 2 && orders[1] == 2) {
    throw InvalidInput("Z/2 * Z/2: the walk is recurrent");
  }
  for (const auto& e : mu.elements()) {
    if (g.length(e) > 0 && e.code().size() == 2 && orders[e.code()[0]] == 0 &&
        std::abs(e.code()[1]) != 1) {
      throw InvalidInput("measure is not nearest-neighbour");
    }
  }
  const HittingSystem sys(mu);
  const auto s = solve_at(sys, 1.0);
  return make_table(sys, s, 1.0, "tree-exact");
}

SpectralRadius spectral_radius_free_product(const Measure& mu) {
  require_symmetric(mu);
  const HittingSystem sys(mu);
  SpectralRadius out;
  const auto base = solve_at(sys, 1.0);
  if (base.perron > 1.0 - kCritical) {
    out.recurrent = true;
    return out;
  }
  const int n = sys.size();
  // Follow the solution curve parametrised by s = x[0]; unknowns are the
  // other coordinates and z. z(s) peaks at the fold s*, where z = R.
  struct Point {
    double s;
    std::vector<double> y;  // x[1..n-1], z
  };
  auto residual = [&](double s, const std::vector<double>& y) {
    std::vector<double> x(n);
    x[0] = s;
    for (int i = 1; i < n; ++i) x[i] = y[i - 1];
    const double z = y[n - 1];
    const auto f = sys.phi(x, z);
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = f[i] - x[i];
    return r;
  };
  auto newton = [&](double s, std::vector<double> y, std::vector<double>& out_y) {
    for (int it = 0; it < 60; ++it) {
      const auto r = residual(s, y);
      double rn = 0;
      for (double v : r) rn = std::max(rn, std::abs(v));
      if (rn < 1e-15) {
        out_y = y;
        return true;
      }
      Matrix j(n, std::vector<double>(n));
      for (int c = 0; c < n; ++c) {
        const double h = 1e-7 * std::max(1.0, std::abs(y[c]));
        auto yp = y, ym = y;
        yp[c] += h;
        ym[c] -= h;
        const auto rp = residual(s, yp), rm = residual(s, ym);
        for (int r2 = 0; r2 < n; ++r2) j[r2][c] = (rp[r2] - rm[r2]) / (2 * h);
      }
      std::vector<double> d;
      std::vector<double> neg(n);
      for (int i = 0; i < n; ++i) neg[i] = -r[i];
      if (!solve_linear(j, neg, d)) return false;
      for (int i = 0; i < n; ++i) y[i] += d[i];
      if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
        return false;
      }
    }
    const auto r = residual(s, y);
    double rn = 0;
    for (double v : r) rn = std::max(rn, std::abs(v));
    out_y = y;
    return rn < 1e-12;
  };

  std::vector<double> y0(base.x.begin() + 1, base.x.end());
  y0.push_back(1.0);
  std::vector<Point> path{{base.x[0], y0}};
  const double ds = (1.0 - base.x[0]) / 200.0;
  bool bracketed = false;
  for (int step = 0; step < 400; ++step) {
    const Point& last = path.back();
    std::vector<double> y;
    if (!newton(last.s + ds, last.y, y)) break;
    path.push_back({last.s + ds, y});
    ++out.continuation_steps;
    if (path.size() >= 3 && path.back().y[n - 1] < path[path.size() - 2].y[n - 1]) {
      bracketed = true;
      break;
    }
  }
  if (!bracketed) throw Error("spectral radius: fold of the first-passage system not found");
  // Golden-section search for max z(s) on the last three points.
  const std::size_t k = path.size();
  double a = path[k - 3].s, b = path[k - 1].s;
  std::vector<double> guess = path[k - 2].y;
  auto zof = [&](double s) {
    std::vector<double> y;
    if (!newton(s, guess, y)) throw Error("spectral radius: continuation failed near the fold");
    guess = y;
    return y[n - 1];
  };
  const double r = (std::sqrt(5.0) - 1) / 2;
  double c = b - r * (b - a), d = a + r * (b - a);
  double zc = zof(c), zd = zof(d);
  while (b - a > 1e-9) {
    if (zc > zd) {
      b = d;
      d = c;
      zd = zc;
      c = b - r * (b - a);
      zc = zof(c);
    } else {
      a = c;
      c = d;
      zc = zd;
      d = a + r * (b - a);
      zd = zof(d);
    }
  }
  out.radius = std::max(zc, zd);
  out.rho = 1.0 / out.radius;
  return out;
}

HittingEstimate hitting_mc(const Measure& mu, const Element& target, const HittingOptions& opt) {
  if (opt.samples < 1) throw InvalidInput("need at least one sample");
  const Group& g = mu.group();
  g.validate(target);
  const StepSampler pick(mu);
  const double target_len = g.length(target);
  HittingEstimate est;
  est.samples = opt.samples;
  for (std::size_t i = 0; i < opt.samples; ++i) {
    std::mt19937_64 rng(stream_seed(opt.seed, i));
    Element x = g.identity();
    bool done = false;
    if (x == target) {
      ++est.hits;
      continue;
    }
    for (long step = 0; step < opt.horizon; ++step) {
      g.compose_inplace(x, mu.elements()[pick(rng)]);
      if (x == target) {
        ++est.hits;
        done = true;
        break;
      }
      if (g.length(x) - target_len >= opt.escape_margin) {
        ++est.escaped;
        done = true;
        break;
      }
    }
    if (!done) ++est.censored;
  }
  const double n = static_cast<double>(est.samples);
  const double p = est.hits / n;
  est.estimate = p;
  est.sigma = std::sqrt(p * (1 - p) / n);
  est.censored_fraction = est.censored / n;
  const double z = 3.0, z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  est.wilson_lo = centre - half;
  est.wilson_hi = centre + half;
  return est;
}

HittingTable hitting_table_mc(const Measure& mu, const HittingOptions& opt) {
  const HittingSystem sys(mu);
  const Group& g = mu.group();
  std::vector<double> x, err;
  std::uint64_t salt = 0;
  for (auto [f, k] : sys.unknowns()) {
    HittingOptions o = opt;
    o.seed = stream_seed(opt.seed, 1000003 + salt++);
    const auto est = hitting_mc(mu, Element(Code{f, static_cast<std::int32_t>(k)}), o);
    x.push_back(est.estimate);
    err.push_back(est.sigma);
  }
  HittingTable t = sys.table(x, 1.0);
  const auto e = sys.table(err, 1.0);
  t.error = e.q;
  for (std::size_t f = 0; f < t.orders.size(); ++f) {
    if (t.orders[f] != 0) t.error[f][0] = 0.0;
  }
  t.method = "monte-carlo";
  (void)g;
  return t;
}

double cocycle(const HittingTable& table, const Group& group, const Element& g,
               const Element& prefix) {
  const double den = table(prefix);
  if (!(den > 0)) throw DomainError("q(prefix) = 0");
  return table(group.compose(g, prefix)) / den;
}

double rn_cocycle(const HittingTable& table, const Group& group, const Element& a,
                  const Element& xi1) {
  if (a.code().size() > 2 || xi1.code().size() != 2) {
    throw InvalidInput("rn_cocycle takes a one-syllable a and first syllable xi1");
  }
  return cocycle(table, group, a, xi1);
}

double cocycle_multiplicativity_defect(const HittingTable& table, const Group& group,
                                       const Element& g1, const Element& g2,
                                       const Element& prefix) {
  const double whole = cocycle(table, group, group.compose(g1, g2), prefix);
  const double split =
      cocycle(table, group, g1, group.compose(g2, prefix)) * cocycle(table, group, g2, prefix);
  return std::abs(whole - split);
}

namespace {

struct Harmonic {
  std::vector<FirstSyllable> first;
  double green = 0.0;
};

Harmonic harmonic_measure(const Measure& mu, const HittingTable& t) {
  const Group& g = mu.group();
  const std::size_t nf = t.orders.size();
  double ret = 0;                       // sum_t mu(t) q(t^-1)
  std::vector<double> escape(nf, 0.0);  // E_f = sum_{t not in factor f} mu(t)(1 - q(t^-1))
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const auto& c = mu.elements()[j].code();
    const double p = mu.probs()[j];
    if (c.empty()) {
      ret += p;
      continue;
    }
    const double back = t.syllable(c[0], -static_cast<long>(c[1]));
    ret += p * back;
    for (std::size_t f = 0; f < nf; ++f) {
      if (static_cast<int>(f) != c[0]) escape[f] += p * (1 - back);
    }
  }
  if (!(ret < 1.0 - 1e-12)) throw DomainError("walk is recurrent; no boundary");
  Harmonic h;
  h.green = 1.0 / (1.0 - ret);
  (void)g;
  for (std::size_t f = 0; f < nf; ++f) {
    const long m = t.orders[f];
    const int fi = static_cast<int>(f);
    if (m == 0) {
      for (int sign : {-1, 1}) {
        for (long k = 1; k < 100000; ++k) {
          const double q = t.syllable(fi, sign * k);
          if (q < 1e-18) break;
          h.first.push_back({fi, sign * k, q * h.green * escape[f]});
        }
      }
    } else {
      for (long k = 1; k < m; ++k) {
        h.first.push_back({fi, k, t.syllable(fi, k) * h.green * escape[f]});
      }
    }
  }
  return h;
}

}  // namespace

BoundaryQuantities boundary_quantities(const Measure& mu, const HittingTable& table) {
  require_symmetric(mu);
  const Group& g = mu.group();
  const auto hm = harmonic_measure(mu, table);
  BoundaryQuantities out;
  out.first = hm.first;
  out.green = hm.green;
  CompensatedSum total, h, ell, root, mass;
  for (const auto& s : hm.first) total += s.nu;
  out.nu_total = total.value();
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const Element& a = mu.elements()[j];
    const double p = mu.probs()[j];
    if (a.empty()) {
      root += p * out.nu_total;
      mass += p * out.nu_total;
      continue;
    }
    for (const auto& s : hm.first) {
      const Element xi(Code{s.factor, static_cast<std::int32_t>(s.exponent)});
      const double c = rn_cocycle(table, g, a, xi);
      const double w = p * s.nu;
      h += -w * std::log(c);
      ell += w * (g.length(g.compose(a, xi)) - g.length(xi));
      root += w * std::sqrt(c);
      mass += w * c;
    }
  }
  out.h = h.value();
  out.ell = ell.value();
  out.rho_lower = root.value();
  out.residual = std::abs(mass.value() - 1.0);
  return out;
}

double boundary_entropy_free(int d) {
  if (d < 2) throw InvalidInput("rank must be >= 2");
  const Group g(GroupSpec::free(d));
  const Measure mu = uniform_on_generators(g);
  return boundary_quantities(mu, solve_hitting_tree(mu)).h;
}

std::vector<CocycleSample> cocycle_law(const Measure& mu, const HittingTable& table) {
  require_symmetric(mu);
  const Group& g = mu.group();
  const auto hm = harmonic_measure(mu, table);
  std::vector<CocycleSample> out;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const Element& a = mu.elements()[j];
    if (a.empty()) {
      out.push_back({0.0, mu.probs()[j], 0.0});
      continue;
    }
    for (const auto& s : hm.first) {
      const Element xi(Code{s.factor, static_cast<std::int32_t>(s.exponent)});
      out.push_back({std::log(rn_cocycle(table, g, a, xi)), mu.probs()[j] * s.nu, 0.0});
    }
  }
  return out;
}

std::vector<CocycleSample> sample_cocycle(const Measure& mu, const HittingTable& table,
                                          std::size_t count, std::uint64_t seed,
                                          double path_radius) {
  require_symmetric(mu);
  const Group& g = mu.group();
  const StepSampler pick(mu);
  std::vector<CocycleSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(stream_seed(seed, i));
    const Element& a = mu.elements()[pick(rng)];
    Element x = g.identity();
    for (long step = 0; step < 10'000'000 && g.length(x) < path_radius; ++step) {
      g.compose_inplace(x, mu.elements()[pick(rng)]);
    }
    if (g.length(x) < path_radius) throw Error("sample_cocycle: path did not escape");
    if (a.empty()) {
      out.push_back({0.0, 1.0, 0.0});
      continue;
    }
    const Element xi(Code{x.code()[0], x.code()[1]});
    const Element axi = g.compose(a, xi);
    const double num = table(axi), den = table(xi);
    // d log c from the table errors of the two syllables involved.
    auto rel = [&](const Element& e, double q) {
      if (e.empty()) return 0.0;
      return table.syllable_error(e.code()[0], e.code()[1]) / q;
    };
    double err = 0;
    if (axi.code().size() <= 2) {
      err = std::hypot(rel(axi, num), rel(xi, den));
    } else {
      err = rel(a, table(a));
    }
    out.push_back({std::log(num / den), 1.0, err});
  }
  return out;
}

DetectorResult equality_detector(const std::vector<CocycleSample>& samples, double tol) {
  DetectorResult r;
  r.samples = samples.size();
  // alpha minimises the largest deviation of |log c| from it.
  double lo = std::numeric_limits<double>::infinity(), hi = 0, total = 0;
  for (const auto& s : samples) {
    if (!(s.weight > 0)) continue;
    lo = std::min(lo, std::abs(s.log_c));
    hi = std::max(hi, std::abs(s.log_c));
    total += s.weight;
  }
  if (!(total > 0)) return r;
  r.alpha = 0.5 * (lo + hi);
  double out_w = 0, worst = 0;
  for (const auto& s : samples) {
    if (!(s.weight > 0)) continue;
    const double dev = std::abs(std::abs(s.log_c) - r.alpha);
    r.max_deviation = std::max(r.max_deviation, dev);
    worst = std::max(worst, dev - 3 * s.error);
    if (dev > tol + 3 * s.error) out_w += s.weight;
  }
  r.outlier_fraction = out_w / total;
  r.two_valued = worst <= tol;
  return r;
}

double cutpoint_check(const HittingTable& table, const Group& group, const Element& u,
                      const Element& v) {
  if (std::abs(group.length(group.compose(u, v)) - group.length(u) - group.length(v)) > 1e-12) {
    throw InvalidInput("u v is not reduced");
  }
  return table(group.compose(u, v)) - table(u) * table(v);
}

CutpointCheck cutpoint_check_mc(const Measure& mu, const HittingTable& table, const Element& u,
                             const Element& v, const HittingOptions& opt) {
  const Group& g = mu.group();
  const auto& cu = u.code();
  const auto& cv = v.code();
  if (cu.empty() || cv.empty() || cu[cu.size() - 2] == cv[0]) {
    throw InvalidInput("cut point check needs u and v ending and starting in different factors");
  }
  CutpointCheck c;
  const auto est = hitting_mc(mu, g.compose(u, v), opt);
  c.direct = est.estimate;
  c.product = table(u) * table(v);
  c.sigma = est.sigma;
  c.zscore = c.sigma > 0 ? (c.direct - c.product) / c.sigma : 0.0;
  return c;
}

}  // namespace walkbounds
