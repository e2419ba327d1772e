#include "walkbounds/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "numfmt.hpp"
#include "walkbounds/error.hpp"
#include "walkbounds/special_functions.hpp"

namespace walkbounds {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Exact: return "exact";
    case Provenance::Estimated: return "estimated";
    case Provenance::External: return "external";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Strict: return "satisfied-strict";
    case Verdict::Equality: return "satisfied-equality";
    case Verdict::Violated: return "violated";
    case Verdict::Skipped: return "skipped";
  }
  return "?";
}

std::string Quantity::tag() const {
  switch (provenance) {
    case Provenance::Exact: return "exact";
    case Provenance::Estimated:
      return "estimated +- " + detail::num(error, 2) +
             (source.empty() ? "" : " (" + source + ")");
    case Provenance::External: return "external [" + source + "]";
  }
  return "?";
}

std::vector<double> series_moment_orders(int N) {
  std::vector<double> out;
  for (int n = 1; n <= N; ++n) out.push_back(1.0 + 1.0 / (2.0 * n - 1.0));
  return out;
}

namespace {

struct Var {
  std::string name;
  const Quantity* q;
  double lo;  // closed domain used when perturbing by the error bar
  double hi;
};

using Sides = std::pair<double, double>;  // lhs, rhs
using RowFn = std::function<Sides(const std::vector<double>&)>;

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BoundRow skipped(std::string name, std::string statement, std::string reason) {
  BoundRow r;
  r.name = std::move(name);
  r.statement = std::move(statement);
  r.lhs = r.rhs = r.slack = kNaN;
  r.verdict = Verdict::Skipped;
  r.reason = std::move(reason);
  return r;
}

BoundRow evaluate(std::string name, std::string statement, const std::vector<Var>& vars,
                  const RowFn& fn, const BoundOptions& opt) {
  BoundRow r;
  r.name = std::move(name);
  r.statement = std::move(statement);
  std::vector<double> x;
  for (const auto& v : vars) {
    x.push_back(v.q->value);
    r.inputs.push_back(v.name);
  }
  const auto [lhs, rhs] = fn(x);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  // Secant propagation: move each input by its error bar inside its domain.
  double var = 0.0;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const double e = vars[i].q->error;
    if (!(e > 0.0)) continue;
    double worst = 0.0;
    for (double dir : {-1.0, 1.0}) {
      auto y = x;
      y[i] = std::clamp(x[i] + dir * e, vars[i].lo, vars[i].hi);
      if (y[i] == x[i]) continue;
      try {
        const auto [l, h] = fn(y);
        const double s = h - l;
        if (std::isfinite(s)) worst = std::max(worst, std::abs(s - r.slack));
      } catch (const DomainError&) {
      }
    }
    var += worst * worst;
  }
  r.sigma = std::sqrt(var);
  r.tolerance = std::max(opt.equality_tol, opt.sigma_factor * r.sigma);
  if (std::abs(r.slack) <= r.tolerance) {
    r.verdict = Verdict::Equality;
  } else if (r.slack > 0.0) {
    r.verdict = Verdict::Strict;
  } else {
    r.verdict = Verdict::Violated;
  }
  return r;
}

const Quantity* moment_of(const BoundInputs& in, double p) {
  auto it = in.moments.find(p);
  return it == in.moments.end() ? nullptr : &it->second;
}

// Appends the row, or a skipped row when an input is missing, the measure
// is asymmetric, rho is out of range or a function leaves its domain.
void add_row(std::vector<BoundRow>& rows, const BoundInputs& in, const BoundOptions& opt,
             const std::string& name, const std::string& stmt, const std::vector<Var>& vars,
             bool needs_symmetry, const RowFn& fn,
             const std::optional<std::string>& extra_skip = std::nullopt) {
  for (const auto& var : vars) {
    if (!var.q) {
      rows.push_back(skipped(name, stmt, "missing input: " + var.name));
      return;
    }
    if (var.name == "rho" && !(var.q->value > 0.0 && var.q->value <= 1.0)) {
      rows.push_back(skipped(name, stmt, "rho outside (0, 1]"));
      return;
    }
  }
  if (needs_symmetry && !in.symmetric) {
    rows.push_back(skipped(name, stmt, "asymmetric measure"));
    return;
  }
  if (extra_skip) {
    rows.push_back(skipped(name, stmt, *extra_skip));
    return;
  }
  try {
    rows.push_back(evaluate(name, stmt, vars, fn, opt));
  } catch (const DomainError& e) {
    rows.push_back(skipped(name, stmt, e.what()));
  }
}

}  // namespace

std::vector<BoundRow> theorem2_check(const BoundInputs& in, const BoundOptions& opt) {
  std::vector<BoundRow> rows;
  const Quantity* M2 = moment_of(in, 2.0);
  const Var h{"h", in.h ? &*in.h : nullptr, 0.0, kInfinity};
  const Var rho{"rho", in.rho ? &*in.rho : nullptr, 1e-300, 1.0};
  const Var ell{"ell", in.ell ? &*in.ell : nullptr, 0.0, kInfinity};
  const Var m2{"M2", M2, 1e-300, kInfinity};

  auto row = [&](const char* name, const char* stmt, std::vector<Var> vars, bool sym,
                 RowFn fn, std::optional<std::string> extra = std::nullopt) {
    add_row(rows, in, opt, name, stmt, vars, sym, fn, extra);
  };

  row("rho_entropy", "F(sqrt(1-rho^2)) <= h", {rho, h}, true, [](const auto& x) {
    return Sides{FG_inv_rho(x[0]), x[1]};
  });
  std::optional<std::string> drift_skip;
  if (in.ell && M2 && in.ell->value / M2->value >= 1.0) {
    drift_skip = "ell/M2 >= 1 (estimation artifact)";
  }
  row("drift_entropy", "F(ell/M2) <= h", {ell, m2, h}, true,
      [](const auto& x) { return Sides{F(x[0] / x[1]), x[2]}; }, drift_skip);
  row("avez", "-2 log(rho) <= h", {rho, h}, true, [](const auto& x) {
    return Sides{-2.0 * std::log(x[0]), x[1]};
  });
  row("ledrappier", "4(1-rho) <= h", {rho, h}, true, [](const auto& x) {
    return Sides{4.0 * (1.0 - x[0]), x[1]};
  });
  row("rho_dominance", "max(-2 log(rho), 4(1-rho)) <= FG_inv(1-rho)", {rho}, false,
      [](const auto& x) {
        return Sides{std::max(-2.0 * std::log(x[0]), 4.0 * (1.0 - x[0])),
                     FG_inv_rho(x[0])};
      });
  return rows;
}

GrowthBounds theorem1_bounds(double v, double M2) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("growth must be >= 0");
  if (!(M2 > 0.0) || !std::isfinite(M2)) throw DomainError("M2 must be > 0");
  GrowthBounds b;
  b.v_tilde = M2 * v;
  const double th = std::tanh(b.v_tilde / 2.0);
  b.ell_max = M2 * th;
  b.h_max = b.v_tilde * th;
  b.rho_min = 1.0 / std::cosh(b.v_tilde / 2.0);
  // sqrt(1 - r^2) = tanh(v~/2) at r = 1/cosh(v~/2).
  const double s = std::sqrt(std::max(0.0, 1.0 - b.rho_min * b.rho_min));
  b.identity_residual = s < 1.0 ? std::abs(F(s) - b.h_max) : 0.0;
  return b;
}

ImpliedBounds implied_lower_bounds(double rho_upper, double v) {
  if (!(rho_upper > 0.0 && rho_upper <= 1.0)) throw DomainError("rho must be in (0, 1]");
  ImpliedBounds b;
  b.h_min = FG_inv_rho(rho_upper);
  b.ell_min = v > 0.0 ? b.h_min / v : kNaN;
  return b;
}

std::vector<BoundRow> auxiliary_checks(const BoundInputs& in, const BoundOptions& opt) {
  std::vector<BoundRow> rows;
  const Quantity* M2 = moment_of(in, 2.0);
  const Var h{"h", in.h ? &*in.h : nullptr, 0.0, kInfinity};
  const Var rho{"rho", in.rho ? &*in.rho : nullptr, 1e-300, 1.0};
  const Var ell{"ell", in.ell ? &*in.ell : nullptr, 0.0, kInfinity};
  const Var v{"v", in.v ? &*in.v : nullptr, 0.0, kInfinity};
  const Var m2{"M2", M2, 1e-300, kInfinity};

  auto row = [&](const std::string& name, const std::string& stmt, std::vector<Var> vars,
                 bool sym, RowFn fn, std::optional<std::string> extra = std::nullopt) {
    add_row(rows, in, opt, name, stmt, vars, sym, fn, extra);
  };

  row("growth_drift", "ell <= M2 tanh(M2 v / 2)", {ell, v, m2}, true, [](const auto& x) {
    return Sides{x[0], x[2] * std::tanh(x[2] * x[1] / 2.0)};
  });
  row("growth_entropy", "h <= M2 v tanh(M2 v / 2)", {h, v, m2}, true, [](const auto& x) {
    const double vt = x[2] * x[1];
    return Sides{x[0], vt * std::tanh(vt / 2.0)};
  });
  row("growth_rho", "1/cosh(M2 v / 2) <= rho", {rho, v, m2}, true, [](const auto& x) {
    return Sides{1.0 / std::cosh(x[2] * x[1] / 2.0), x[0]};
  });
  row("fundamental", "h <= ell v", {h, ell, v}, false, [](const auto& x) {
    return Sides{x[0], x[1] * x[2]};
  });

  std::optional<std::string> drift_skip;
  if (in.ell && M2 && in.ell->value / M2->value >= 1.0) {
    drift_skip = "ell/M2 >= 1 (estimation artifact)";
  }
  row("chebyshev_combined", "A_carne(ell/M2) + 2|log rho| <= h", {ell, m2, rho, h}, true,
      [](const auto& x) {
        return Sides{A_carne(std::min(1.0, x[0] / x[1])) + 2.0 * std::abs(std::log(x[2])),
                     x[3]};
      },
      drift_skip);
  row("ledrappier_combined", "A_ledr(ell/M2) + 4(1-rho) <= h", {ell, m2, rho, h}, true,
      [](const auto& x) { return Sides{A_ledr(x[0] / x[1]) + 4.0 * (1.0 - x[2]), x[3]}; },
      drift_skip);

  // Moment series with M_{1+1/(2n-1)} and its M2 counterpart.
  const int N = std::max(1, in.series_terms);
  const auto orders = series_moment_orders(N);
  std::vector<Var> mvars;
  std::optional<std::string> missing;
  for (double p : orders) {
    const Quantity* q = moment_of(in, p);
    if (!q) {
      missing = "missing moment M_" + detail::num(p, 6);
      break;
    }
    mvars.push_back({"M_" + detail::num(p, 6), q, 1e-300, kInfinity});
  }
  const std::string series_stmt =
      "sum_{n<=" + std::to_string(N) + "} 2/(2n-1) (ell/M_{1+1/(2n-1)})^{2n} <= h";
  const std::string mono_stmt =
      "sum 2/(2n-1) (ell/M2)^{2n} <= sum 2/(2n-1) (ell/M_{1+1/(2n-1)})^{2n}";
  if (missing) {
    rows.push_back(skipped("moment_series", series_stmt, *missing));
    rows.push_back(skipped("moment_series_monotone", mono_stmt, *missing));
  } else {
    auto series = [N](double ell_v, const std::vector<double>& m) {
      double s = 0.0;
      for (int n = 1; n <= N; ++n) {
        s += 2.0 / (2.0 * n - 1.0) * std::pow(ell_v / m[n - 1], 2.0 * n);
      }
      return s;
    };
    std::vector<Var> vars{ell, h};
    vars.insert(vars.end(), mvars.begin(), mvars.end());
    row("moment_series", series_stmt, vars, true, [&](const auto& x) {
      return Sides{series(x[0], {x.begin() + 2, x.end()}), x[1]};
    });
    std::vector<Var> mono{ell, m2};
    mono.insert(mono.end(), mvars.begin(), mvars.end());
    row("moment_series_monotone", mono_stmt, mono, false, [&](const auto& x) {
      return Sides{series(x[0], std::vector<double>(N, x[1])),
                   series(x[0], {x.begin() + 2, x.end()})};
    });
  }

  if (in.support_radius) {
    const Quantity kq = Quantity::exact(*in.support_radius);
    const Var k{"k", &kq, 1e-300, kInfinity};
    row("varopoulos_carne", "ell^2 / (2 k^2) <= h", {ell, k, h}, true, [](const auto& x) {
      return Sides{x[0] * x[0] / (2.0 * x[1] * x[1]), x[2]};
    });
  } else {
    rows.push_back(skipped("varopoulos_carne", "ell^2 / (2 k^2) <= h",
                           "missing input: support radius k"));
  }
  return rows;
}

BoundReport evaluate_bounds(const BoundInputs& in, const BoundOptions& opt) {
  BoundReport rep;
  rep.inputs = in;
  rep.rows = theorem2_check(in, opt);
  auto aux = auxiliary_checks(in, opt);
  rep.rows.insert(rep.rows.end(), aux.begin(), aux.end());
  return rep;
}

const BoundRow* BoundReport::find(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

bool BoundReport::any_violated() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const BoundRow& r) { return r.verdict == Verdict::Violated; });
}

std::string BoundReport::to_markdown() const {
  // A row is as trustworthy as its weakest input.
  auto row_tag = [&](const BoundRow& r) {
    bool est = false, ext = false;
    auto look = [&](const std::optional<Quantity>& q) {
      if (!q) return;
      est |= q->provenance == Provenance::Estimated;
      ext |= q->provenance == Provenance::External;
    };
    for (const auto& name : r.inputs) {
      if (name == "h") look(inputs.h);
      if (name == "rho") look(inputs.rho);
      if (name == "ell") look(inputs.ell);
      if (name == "v") look(inputs.v);
      if (name.rfind("M", 0) == 0) {
        for (const auto& [p, q] : inputs.moments) {
          est |= q.provenance == Provenance::Estimated;
          ext |= q.provenance == Provenance::External;
        }
      }
    }
    if (est) return "est +- " + detail::num(r.sigma, 2);
    if (ext) return std::string("ext");
    return std::string("exact");
  };
  std::ostringstream os;
  os << "| inequality | lhs | rhs | slack | verdict |\n";
  os << "|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.name << ": `" << r.statement << "` | ";
    if (r.verdict == Verdict::Skipped) {
      os << "- | - | - | skipped (" << r.reason << ") |\n";
      continue;
    }
    const std::string tag = " [" + row_tag(r) + "]";
    os << detail::num(r.lhs, 12) << tag << " | " << detail::num(r.rhs, 12) << tag << " | "
       << detail::num(r.slack, 6) << tag << " | " << to_string(r.verdict) << " |\n";
  }
  os << "\nInputs:\n\n";
  auto line = [&](const char* name, const std::optional<Quantity>& q) {
    if (q) os << "- " << name << " = " << detail::num(q->value, 12) << " [" << q->tag() << "]\n";
  };
  line("h", inputs.h);
  line("rho", inputs.rho);
  line("ell", inputs.ell);
  line("v", inputs.v);
  for (const auto& [p, q] : inputs.moments) {
    os << "- M_" << detail::num(p, 6) << " = " << detail::num(q.value, 12) << " [" << q.tag()
       << "]\n";
  }
  if (inputs.support_radius) {
    os << "- k = " << detail::num(*inputs.support_radius) << " [exact]\n";
  }
  return os.str();
}

}  // namespace walkbounds
