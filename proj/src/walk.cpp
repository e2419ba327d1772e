#include "walkbounds/walk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "group_model.hpp"
#include "numfmt.hpp"
#include "walkbounds/error.hpp"
#include "walkbounds/summation.hpp"

namespace walkbounds {

Measure::Measure(Group group, std::vector<std::pair<Element, double>> support,
                 double mass_tol)
    : group_(std::move(group)) {
  if (support.empty()) throw InvalidInput("measure has empty support");
  std::map<Element, std::size_t> index;
  CompensatedSum mass;
  for (auto& [x, p] : support) {
    if (!std::isfinite(p) || p <= 0.0) {
      throw InvalidInput("measure probability must be positive, got " +
                         detail::num(p) + " at " + group_.format(x));
    }
    group_.validate(x);
    mass += p;
    auto [it, fresh] = index.emplace(x, elements_.size());
    if (fresh) {
      elements_.push_back(x);
      probs_.push_back(p);
    } else {
      probs_[it->second] += p;
    }
  }
  input_mass_ = mass.value();
  if (std::abs(input_mass_ - 1.0) > mass_tol) {
    throw InvalidInput("measure mass is " + detail::num(input_mass_) +
                       ", expected 1");
  }
  for (auto& p : probs_) p /= input_mass_;

  symmetric_ = true;
  inverse_index_.assign(elements_.size(), -1);
  for (std::size_t j = 0; j < elements_.size(); ++j) {
    auto it = index.find(group_.inverse(elements_[j]));
    if (it != index.end()) inverse_index_[j] = static_cast<int>(it->second);
    const double q = it == index.end() ? 0.0 : probs_[it->second];
    if (std::abs(probs_[j] - q) > 1e-14 * std::max(probs_[j], q)) symmetric_ = false;
    max_length_ = std::max(max_length_, group_.length(elements_[j]));
    if (elements_[j] == group_.identity()) identity_mass_ = probs_[j];
  }
}

Measure build_measure(const Group& group,
                      const std::vector<std::pair<std::string, double>>& support,
                      double mass_tol) {
  std::vector<std::pair<Element, double>> pts;
  for (const auto& [w, p] : support) pts.emplace_back(group.parse(w), p);
  return Measure(group, std::move(pts), mass_tol);
}

Measure uniform_on_generators(const Group& group) {
  const auto& gens = group.generators();
  std::vector<std::pair<Element, double>> pts;
  for (const auto& g : gens) pts.emplace_back(g.element, 1.0 / gens.size());
  return Measure(group, std::move(pts));
}

double moment(const Measure& mu, double p) {
  if (!(p >= 1.0)) throw DomainError("moment order must be >= 1");
  CompensatedSum s;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    s += std::pow(mu.group().length(mu.elements()[j]), p) * mu.probs()[j];
  }
  return std::pow(s.value(), 1.0 / p);
}

double Distribution::prob(ElementId id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return 0.0;
  return probs[it - ids.begin()];
}

double Distribution::prob(const Element& x) const {
  const ElementId id = table->find(x.view());
  return id < 0 ? 0.0 : prob(id);
}

double Distribution::total() const {
  CompensatedSum s;
  for (double p : probs) s += p;
  return s.value();
}

DistributionStats distribution_stats(const Distribution& d) {
  CompensatedSum h, l;
  for (std::size_t i = 0; i < d.ids.size(); ++i) {
    const double p = d.probs[i];
    h += -p * std::log(p);
    l += d.table->length(d.ids[i]) * p;
  }
  DistributionStats s;
  s.entropy = h.value();
  s.mean_length = l.value();
  s.return_prob = d.prob(ElementId{0});
  s.pruned_mass = d.pruned_mass;
  return s;
}

Convolver::Convolver(Measure mu, ConvolutionBudget budget)
    : mu_(std::move(mu)),
      budget_(budget),
      table_(std::make_shared<ElementTable>(mu_.group(), budget.max_elements)),
      right_(*table_, mu_.elements(), NeighborCache::Side::Right) {}

Distribution Convolver::delta() const {
  Distribution d;
  d.table = table_;
  d.ids = {0};
  d.probs = {1.0};
  return d;
}

Distribution Convolver::step(const Distribution& d, double prune_eps) {
  if (d.table != table_) throw InvalidInput("distribution from a different table");
  const int n = d.step + 1;
  touched_.clear();
  const auto& mp = mu_.probs();
  try {
    for (std::size_t i = 0; i < d.ids.size(); ++i) {
      const double px = d.probs[i];
      for (std::size_t j = 0; j < mp.size(); ++j) {
        const ElementId y = right_.get(d.ids[i], j);
        if (static_cast<std::size_t>(y) >= acc_.size()) {
          const std::size_t cap = std::max<std::size_t>(table_->size(), 1024);
          acc_.resize(cap, 0.0);
          comp_.resize(cap, 0.0);
        }
        const double v = px * mp[j];
        double& s = acc_[y];
        if (s == 0.0) {
          touched_.push_back(y);
          if (touched_.size() > budget_.max_support) {
            throw BudgetExceeded("support exceeded " +
                                     std::to_string(budget_.max_support) +
                                     " entries at step " + std::to_string(n),
                                 n);
          }
        }
        const double t = s + v;
        comp_[y] += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
      }
    }
  } catch (const BudgetExceeded& e) {
    for (ElementId y : touched_) acc_[y] = comp_[y] = 0.0;
    if (e.reached() >= 0) throw;
    throw BudgetExceeded(std::string(e.what()) + " at step " + std::to_string(n), n);
  }
  std::sort(touched_.begin(), touched_.end());
  Distribution out;
  out.table = table_;
  out.step = n;
  out.ids.reserve(touched_.size());
  out.probs.reserve(touched_.size());
  CompensatedSum pruned;
  pruned += d.pruned_mass;
  for (ElementId y : touched_) {
    const double v = acc_[y] + comp_[y];
    acc_[y] = comp_[y] = 0.0;
    if (v < prune_eps) {
      pruned += v;
    } else {
      out.ids.push_back(y);
      out.probs.push_back(v);
    }
  }
  out.pruned_mass = pruned.value();
  return out;
}

Distribution nstep(const Measure& mu, int n, const ConvolutionBudget& budget) {
  if (n < 0) throw InvalidInput("step count must be >= 0");
  Convolver conv(mu, budget);
  Distribution d = conv.delta();
  for (int k = 0; k < n; ++k) d = conv.step(d);
  return d;
}

namespace {

double symmetry_defect(const Distribution& d) {
  const auto& t = *d.table;
  const auto& g = t.group();
  double worst = 0.0;
  for (std::size_t i = 0; i < d.ids.size(); ++i) {
    const Code inv = g.model().inverse(t.code(d.ids[i]));
    const ElementId j = t.find(inv);
    const double q = j < 0 ? 0.0 : d.prob(j);
    worst = std::max(worst, std::abs(d.probs[i] - q));
  }
  return worst;
}

}  // namespace

WalkSeries asymptotic_estimates(const Measure& mu, int n_max,
                                const ConvolutionBudget& budget) {
  if (n_max < 3) throw InvalidInput("n_max must be >= 3");
  Convolver conv(mu, budget);
  Distribution d = conv.delta();
  WalkSeries s;
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) d = conv.step(d);
    const auto st = distribution_stats(d);
    WalkRow r;
    r.n = n;
    r.entropy = st.entropy;
    r.mean_length = st.mean_length;
    r.return_prob = st.return_prob;
    r.support = d.size();
    r.pruned_mass = d.pruned_mass;
    if (n > 0) {
      r.h_inc = r.entropy - s.rows.back().entropy;
      r.l_inc = r.mean_length - s.rows.back().mean_length;
    }
    if (n >= 2 && n % 2 == 0) {
      const double prev = s.rows[n - 2].return_prob;
      if (prev > 0.0) r.rho_ratio = std::sqrt(r.return_prob / prev);
    }
    s.rows.push_back(r);
    auto& c = s.checks;
    c.mass_defect = std::max(
        c.mass_defect, std::abs(d.total() + d.pruned_mass - 1.0) / std::max(n, 1));
    if (d.pruned_mass > 0.0) c.exact = false;
    if (mu.is_symmetric()) c.symmetry_defect = std::max(c.symmetry_defect, symmetry_defect(d));
  }

  const auto& rows = s.rows;
  const auto& last = rows[n_max];
  s.h = {last.h_inc, std::abs(last.h_inc - rows[n_max - 2].h_inc), "increment"};
  s.ell = {last.l_inc, std::abs(last.l_inc - rows[n_max - 2].l_inc), "increment"};
  const int even = n_max - n_max % 2;
  const double r_hi = rows[even].rho_ratio;
  const double r_lo = even >= 4 ? rows[even - 2].rho_ratio : kNaN;
  s.rho = {r_hi, std::abs(r_hi - r_lo), "even_ratio"};
  s.h_cesaro = last.entropy / n_max;
  s.ell_cesaro = last.mean_length / n_max;
  if (rows[even].return_prob > 0.0) {
    s.rho_root = std::pow(rows[even].return_prob, 1.0 / even);
  }
  if (mu.identity_mass() > 0.0 && rows[n_max - 1].return_prob > 0.0) {
    s.rho_full_ratio = last.return_prob / rows[n_max - 1].return_prob;
  }

  auto& c = s.checks;
  for (int a = 1; a <= n_max; ++a) {
    for (int b = a; a + b <= n_max; ++b) {
      c.subadditivity_excess =
          std::max(c.subadditivity_excess,
                   rows[a + b].entropy - rows[a].entropy - rows[b].entropy);
    }
  }
  for (int n = 2; n <= n_max; ++n) {
    c.monotonicity_excess =
        std::max(c.monotonicity_excess, rows[n].h_inc - rows[n - 1].h_inc);
  }
  return s;
}

std::string WalkSeries::to_csv() const {
  std::ostringstream os;
  os << "n,H,L,return_prob,h_inc,l_inc,rho_ratio\n";
  for (const auto& r : rows) {
    os << r.n << ',' << detail::num(r.entropy) << ',' << detail::num(r.mean_length)
       << ',' << detail::num(r.return_prob) << ',' << detail::num(r.h_inc) << ','
       << detail::num(r.l_inc) << ',' << detail::num(r.rho_ratio) << '\n';
  }
  return os.str();
}

namespace {

double poisson_weight(double t, int n) {
  if (t == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-t + n * std::log(t) - std::lgamma(n + 1.0));
}

}  // namespace

double poisson_tail(double t, int N) {
  if (t < 0.0) throw DomainError("poisson time must be >= 0");
  if (t == 0.0) return 0.0;
  CompensatedSum tail;
  for (int n = N + 1;; ++n) {
    const double w = poisson_weight(t, n);
    tail += w;
    if (n > t && w < 1e-18 * tail.value()) break;
    if (w == 0.0 && n > t) break;
  }
  return tail.value();
}

int poisson_truncation(double t, double tol) {
  if (t < 0.0) throw DomainError("poisson time must be >= 0");
  int N = 0;
  while (poisson_tail(t, N) >= tol) {
    ++N;
    if (N > 100000) throw BudgetExceeded("poisson truncation did not converge", N);
  }
  return N;
}

std::vector<PoissonizedLaw> poissonize_many(const Measure& mu,
                                            const std::vector<double>& times,
                                            const PoissonOptions& opts) {
  std::vector<int> Ns;
  int N = 0;
  for (double t : times) {
    const int n = poisson_truncation(t, opts.defect_tol);
    if (n > opts.max_terms) {
      throw BudgetExceeded("poissonization at t=" + detail::num(t) + " needs " +
                               std::to_string(n) + " terms",
                           opts.max_terms);
    }
    Ns.push_back(n);
    N = std::max(N, n);
  }
  Convolver conv(mu, opts.budget);
  const auto& table = conv.table();
  struct Acc {
    std::vector<double> sum, comp;
    CompensatedSum pruned;
  };
  std::vector<Acc> acc(times.size());
  Distribution d = conv.delta();
  for (int n = 0; n <= N; ++n) {
    if (n > 0) {
      double wmax = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        if (n <= Ns[k]) wmax = std::max(wmax, poisson_weight(times[k], n));
      }
      const double eps = opts.prune_eps > 0.0 && wmax > 0.0 ? opts.prune_eps / wmax : 0.0;
      d = conv.step(d, eps);
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (n > Ns[k]) continue;
      const double w = poisson_weight(times[k], n);
      if (w == 0.0) continue;
      Acc& a = acc[k];
      if (a.sum.size() < table->size()) {
        a.sum.resize(table->size(), 0.0);
        a.comp.resize(table->size(), 0.0);
      }
      for (std::size_t i = 0; i < d.ids.size(); ++i) {
        const double v = w * d.probs[i];
        double& s = a.sum[d.ids[i]];
        const double t = s + v;
        a.comp[d.ids[i]] += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
      }
      a.pruned += w * d.pruned_mass;
    }
  }
  std::vector<PoissonizedLaw> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    PoissonizedLaw law;
    law.t = times[k];
    law.truncation = Ns[k];
    law.defect = poisson_tail(times[k], Ns[k]);
    law.law.table = table;
    law.law.step = Ns[k];
    law.law.pruned_mass = acc[k].pruned.value();
    for (std::size_t id = 0; id < acc[k].sum.size(); ++id) {
      const double v = acc[k].sum[id] + acc[k].comp[id];
      if (v > 0.0) {
        law.law.ids.push_back(static_cast<ElementId>(id));
        law.law.probs.push_back(v);
      }
    }
    out.push_back(std::move(law));
  }
  return out;
}

PoissonizedLaw poissonize(const Measure& mu, double t, const PoissonOptions& opts) {
  return std::move(poissonize_many(mu, {t}, opts).front());
}

Derivatives symmetrized_derivatives(const Measure& mu, const PoissonizedLaw& law) {
  if (!mu.is_symmetric()) {
    throw InvalidInput("symmetrized derivatives need a symmetric measure");
  }
  if (law.defect >= 1e-10) {
    throw InvalidInput("poissonized law defect " + detail::num(law.defect) +
                       " is not negligible");
  }
  auto& table = *law.law.table;
  if (&table.group().model() != &mu.group().model()) {
    throw InvalidInput("law and measure live on different groups");
  }
  NeighborCache left(table, mu.elements(), NeighborCache::Side::Left);
  NeighborCache right(table, mu.elements(), NeighborCache::Side::Right);
  std::vector<double> dense(table.size(), 0.0);
  for (std::size_t i = 0; i < law.law.ids.size(); ++i) {
    dense[law.law.ids[i]] = law.law.probs[i];
  }
  const auto at = [&](ElementId id) {
    return static_cast<std::size_t>(id) < dense.size() ? dense[id] : 0.0;
  };
  CompensatedSum dH, dL, dir, direct, boundary;
  const auto& mp = mu.probs();
  for (std::size_t i = 0; i < law.law.ids.size(); ++i) {
    const ElementId x = law.law.ids[i];
    const double px = law.law.probs[i];
    const double lx = table.length(x);
    for (std::size_t j = 0; j < mp.size(); ++j) {
      const ElementId y = left.get(x, j);
      const double py = at(y);
      const double ly = table.length(y);
      if (py > 0.0) {
        dH += 0.5 * mp[j] * (py - px) * (std::log(py) - std::log(px));
        dL += 0.5 * (lx - ly) * mp[j] * (py - px);
        const double r = std::sqrt(py) - std::sqrt(px);
        dir += 0.5 * mp[j] * r * r;
      } else {
        // The mirrored pair starts outside the support: count this one twice.
        dL += (lx - ly) * mp[j] * (-px);
        dir += mp[j] * px;
        boundary += mp[j] * px;
      }
      const ElementId z = right.get(x, j);
      direct += px * mp[j] * (table.length(z) - lx);
    }
  }
  Derivatives out;
  out.dH = dH.value();
  out.dL = dL.value();
  out.dirichlet = dir.value();
  out.dL_direct = direct.value();
  out.boundary_mass = boundary.value();
  return out;
}

}  // namespace walkbounds
