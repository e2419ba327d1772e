#include "walkbounds/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "numfmt.hpp"
#include "walkbounds/boundary.hpp"
#include "walkbounds/bounds.hpp"
#include "walkbounds/chebyshev.hpp"
#include "walkbounds/monte_carlo.hpp"
#include "walkbounds/walk.hpp"

namespace walkbounds {

namespace {

constexpr const char* kVersion = "0.1.0";

Json group_json(const GroupSpec& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == GroupKind::Free || s.kind == GroupKind::FreeAbelian) j["rank"] = s.rank;
  if (s.kind == GroupKind::Cyclic) {
    j["order"] = s.order == 0 ? Json("inf") : Json(s.order);
    if (s.full_generating_set) j["full"] = true;
  }
  if (!s.labels.empty()) j["labels"] = s.labels;
  if (!s.weights.empty()) j["weights"] = s.weights;
  if (!s.factors.empty()) {
    j["factors"] = Json::array();
    for (const auto& f : s.factors) j["factors"].push_back(group_json(f));
  }
  if (s.kind == GroupKind::DirectProduct) j["convention"] = to_string(s.convention);
  return j;
}

Json quantity_json(const Quantity& q) {
  return Json{{"value", q.value},
              {"provenance", to_string(q.provenance)},
              {"error", q.error},
              {"source", q.source}};
}

Quantity quantity_from(const Json& j) {
  Quantity q;
  q.value = j.at("value").is_null() ? kNaN : j.at("value").get<double>();
  const auto p = j.at("provenance").get<std::string>();
  q.provenance = p == "exact" ? Provenance::Exact
                 : p == "estimated" ? Provenance::Estimated
                                    : Provenance::External;
  q.error = j.at("error").is_null() ? 0.0 : j.at("error").get<double>();
  q.source = j.at("source").get<std::string>();
  return q;
}

Verdict verdict_from(const std::string& s) {
  if (s == "satisfied-strict") return Verdict::Strict;
  if (s == "satisfied-equality") return Verdict::Equality;
  if (s == "violated") return Verdict::Violated;
  return Verdict::Skipped;
}

Json row_json(const BoundRow& r) {
  return Json{{"name", r.name},         {"statement", r.statement}, {"lhs", r.lhs},
              {"rhs", r.rhs},           {"slack", r.slack},         {"sigma", r.sigma},
              {"tolerance", r.tolerance}, {"verdict", to_string(r.verdict)},
              {"reason", r.reason},     {"inputs", r.inputs}};
}

double num_or_nan(const Json& j) { return j.is_null() ? kNaN : j.get<double>(); }

BoundRow row_from(const Json& j) {
  BoundRow r;
  r.name = j.at("name").get<std::string>();
  r.statement = j.at("statement").get<std::string>();
  r.lhs = num_or_nan(j.at("lhs"));
  r.rhs = num_or_nan(j.at("rhs"));
  r.slack = num_or_nan(j.at("slack"));
  r.sigma = num_or_nan(j.at("sigma"));
  r.tolerance = num_or_nan(j.at("tolerance"));
  r.verdict = verdict_from(j.at("verdict").get<std::string>());
  r.reason = j.at("reason").get<std::string>();
  r.inputs = j.at("inputs").get<std::vector<std::string>>();
  return r;
}

std::string timestamp_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Everything the stages share.
struct Context {
  explicit Context(const RunConfig& c) : cfg(c) {}
  const RunConfig& cfg;
  std::set<std::string> stages;
  std::uint64_t seed = 0;
  std::optional<Group> group;
  std::optional<Measure> mu;
  ConvolutionBudget budget;
  std::size_t census_cap = 0;
  Json report;
  std::map<std::string, std::map<std::string, Quantity>> candidates;
  std::optional<WalkSeries> series;
  std::optional<HittingTable> table;
  std::optional<BoundReport> bounds;
  Json errors = Json::array();

  bool enabled(const std::string& s) const { return stages.count(s) > 0; }
  void offer(const std::string& q, const std::string& source, Quantity value) {
    if (std::isfinite(value.value)) candidates[q][source] = std::move(value);
  }
};

void stage_census(Context& c) {
  if (!c.group->has_unit_weights()) {
    c.report["census"] = Json{{"skipped", "weighted word metric; ball census needs unit weights"}};
    return;
  }
  const auto census = ball_census(*c.group, c.cfg.budgets.ball_radius, c.census_cap);
  const auto g = growth_estimate(census);
  Json j;
  j["radius"] = census.radius;
  j["sphere_sizes"] = census.sphere_sizes;
  j["truncated"] = census.truncated;
  j["v_cesaro"] = g.v_cesaro;
  j["v_ratio"] = g.v_ratio;
  j["error"] = g.error;
  j["depth"] = g.depth;
  j["subexponential"] = g.subexponential;
  c.report["census"] = j;
  if (g.subexponential) {
    c.offer("v", "census", Quantity::estimated(0.0, g.error, "census: subexponential"));
  } else {
    c.offer("v", "census", Quantity::estimated(g.v_ratio, g.error, "census sphere ratios"));
  }
  if (census.truncated) {
    throw BudgetExceeded("census truncated at radius " + std::to_string(g.depth), g.depth);
  }
}

void stage_exact_walk(Context& c) {
  WalkSeries s = asymptotic_estimates(*c.mu, c.cfg.budgets.n_max, c.budget);
  Json j;
  j["n_max"] = c.cfg.budgets.n_max;
  j["support"] = s.rows.back().support;
  auto est = [](const Estimate& e) {
    return Json{{"value", e.value}, {"error", e.error}, {"method", e.method}};
  };
  j["h"] = est(s.h);
  j["ell"] = est(s.ell);
  j["rho"] = est(s.rho);
  j["h_cesaro"] = s.h_cesaro;
  j["ell_cesaro"] = s.ell_cesaro;
  j["rho_root"] = s.rho_root;
  j["checks"] = Json{{"mass_defect", s.checks.mass_defect},
                     {"symmetry_defect", s.checks.symmetry_defect},
                     {"subadditivity_excess", s.checks.subadditivity_excess},
                     {"monotonicity_excess", s.checks.monotonicity_excess},
                     {"exact", s.checks.exact}};
  c.report["exact_walk"] = j;
  c.offer("h", "exact_walk", Quantity::estimated(s.h.value, s.h.error, "exact walk " + s.h.method));
  c.offer("ell", "exact_walk",
          Quantity::estimated(s.ell.value, s.ell.error, "exact walk " + s.ell.method));
  c.offer("rho", "exact_walk",
          Quantity::estimated(s.rho.value, s.rho.error, "exact walk " + s.rho.method));
  c.series = std::move(s);
}

void stage_monte_carlo(Context& c) {
  const auto& B = c.cfg.budgets;
  const auto est = sample_paths(*c.mu, B.mc_steps, B.mc_paths, c.seed);
  const double bias = std::abs(est.drift.mean - est.drift_half.mean);
  const double err = std::hypot(est.drift.std_error, bias);
  c.report["monte_carlo"] = Json{{"paths", est.count},
                                 {"steps", est.n},
                                 {"seed", est.seed},
                                 {"drift", est.drift.mean},
                                 {"drift_std_error", est.drift.std_error},
                                 {"drift_half", est.drift_half.mean},
                                 {"error", err}};
  c.offer("ell", "monte_carlo", Quantity::estimated(est.drift.mean, err, "Monte Carlo drift"));
}

Json table_json(const HittingTable& t) {
  Json j;
  j["method"] = t.method;
  j["orders"] = t.orders;
  j["q"] = t.q;
  j["error"] = t.error;
  j["iterations"] = t.iterations;
  j["residual"] = t.residual;
  return j;
}

Json detector_json(const DetectorResult& d) {
  return Json{{"two_valued", d.two_valued},
              {"alpha", d.alpha},
              {"max_deviation", d.max_deviation},
              {"outlier_fraction", d.outlier_fraction},
              {"samples", d.samples}};
}

void stage_boundary(Context& c) {
  const Measure& mu = *c.mu;
  const auto kind = c.group->spec().kind;
  if (kind != GroupKind::Free && kind != GroupKind::FreeProduct) {
    c.report["boundary"] = Json{{"skipped", "boundary formulas need a free product of cyclic groups"}};
    return;
  }
  if (!mu.is_symmetric()) {
    c.report["boundary"] = Json{{"skipped", "asymmetric measure"}};
    return;
  }
  const auto sr = spectral_radius_free_product(mu);
  if (sr.recurrent) {
    c.report["boundary"] = Json{{"skipped", "recurrent walk; the boundary is trivial"}, {"rho", sr.rho}};
    c.offer("rho", "boundary", Quantity::exact(1.0, "recurrent walk"));
    return;
  }
  std::optional<HittingTable> tree;
  if (c.group->is_tree()) {
    try {
      tree = solve_hitting_tree(mu);
    } catch (const InvalidInput&) {
    }
  }
  HittingTable table = tree ? std::move(*tree) : solve_hitting_free_product(mu);
  const auto bq = boundary_quantities(mu, table);
  Json j;
  j["table"] = table_json(table);
  j["green"] = bq.green;
  j["nu_total"] = bq.nu_total;
  j["h"] = bq.h;
  j["ell"] = bq.ell;
  j["rho"] = sr.rho;
  j["rho_lower_cocycle"] = bq.rho_lower;
  j["cocycle_mass_residual"] = bq.residual;
  j["detector_exact"] = detector_json(equality_detector(cocycle_law(mu, table), 1e-9));

  const auto& B = c.cfg.budgets;
  HittingOptions opt;
  opt.samples = B.hitting_samples;
  opt.horizon = B.horizon;
  opt.seed = stream_seed(c.seed, 101);
  const auto mc = hitting_table_mc(mu, opt);
  j["table_mc"] = table_json(mc);
  double worst_z = 0;
  for (std::size_t f = 0; f < mc.q.size(); ++f) {
    for (std::size_t k = 0; k < mc.q[f].size(); ++k) {
      if (mc.error[f][k] > 0) {
        worst_z = std::max(worst_z, std::abs(mc.q[f][k] - table.q[f][k]) / mc.error[f][k]);
      }
    }
  }
  j["table_mc_max_zscore"] = worst_z;
  const auto samples = sample_cocycle(mu, mc, B.cocycle_samples, stream_seed(c.seed, 202));
  j["detector_mc"] = detector_json(equality_detector(samples, c.cfg.tolerances.detector));
  c.report["boundary"] = j;

  const std::string src = "boundary (" + table.method + ")";
  c.offer("h", "boundary", Quantity::exact(bq.h, src));
  c.offer("ell", "boundary", Quantity::exact(bq.ell, src));
  c.offer("rho", "boundary", Quantity::exact(sr.rho, "boundary (fold of first-passage system)"));
  c.table = std::move(table);
}

void stage_poisson(Context& c) {
  if (c.cfg.poisson_times.empty()) {
    c.report["poisson"] = Json{{"skipped", "no poisson_times"}};
    return;
  }
  const double delta = 1e-4;
  std::vector<double> times;
  for (double t : c.cfg.poisson_times) {
    times.push_back(t - delta);
    times.push_back(t);
    times.push_back(t + delta);
  }
  PoissonOptions opt;
  opt.defect_tol = 1e-13;
  opt.prune_eps = c.cfg.budgets.poisson_prune_eps;
  opt.budget = c.budget;
  const auto laws = poissonize_many(*c.mu, times, opt);
  Json rows = Json::array();
  for (std::size_t i = 0; i < c.cfg.poisson_times.size(); ++i) {
    const auto& lo = laws[3 * i];
    const auto& mid = laws[3 * i + 1];
    const auto& hi = laws[3 * i + 2];
    const auto d = symmetrized_derivatives(*c.mu, mid);
    const auto slo = distribution_stats(lo.law), shi = distribution_stats(hi.law);
    const double fd_h = (shi.entropy - slo.entropy) / (2 * delta);
    const double fd_l = (shi.mean_length - slo.mean_length) / (2 * delta);
    rows.push_back(Json{{"t", mid.t},
                        {"truncation", mid.truncation},
                        {"defect", mid.defect},
                        {"pruned_mass", mid.law.pruned_mass},
                        {"dH", d.dH},
                        {"dL", d.dL},
                        {"dL_direct", d.dL_direct},
                        {"dirichlet", d.dirichlet},
                        {"fd_dH", fd_h},
                        {"fd_dL", fd_l},
                        {"rel_err_dH", std::abs(d.dH - fd_h) / std::abs(fd_h)},
                        {"rel_err_dL", std::abs(d.dL - fd_l) / std::abs(fd_l)}});
  }
  c.report["poisson"] = Json{{"delta", delta}, {"rows", rows}};
}

double best_rho_upper(const Context& c) {
  // Only exact or external values serve as certified upper bounds.
  auto it = c.candidates.find("rho");
  if (it != c.candidates.end()) {
    for (const char* s : {"exact", "boundary"}) {
      auto jt = it->second.find(s);
      if (jt != it->second.end()) return std::min(1.0, jt->second.value + 1e-9);
    }
  }
  auto e = c.cfg.external.find("rho_upper");
  if (e != c.cfg.external.end()) return e->second.value;
  return 1.0;
}

void stage_chebyshev(Context& c) {
  const double rho_up = best_rho_upper(c);
  const auto rep = pointwise_bounds(*c.mu, c.cfg.budgets.chebyshev_n, rho_up);
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    rows.push_back(Json{{"length", r.length}, {"count", r.count}, {"exact_max", r.exact_max},
                        {"loeuillot", r.loeuillot}, {"carne", r.carne}, {"ratio", r.ratio}});
  }
  c.report["chebyshev"] = Json{{"n", rep.n},
                               {"rho_upper", rep.rho_upper},
                               {"k", rep.k},
                               {"elements", rep.elements},
                               {"loeuillot_violations", rep.loeuillot_violations},
                               {"carne_violations", rep.carne_violations},
                               {"rows", rows}};
  if (!rep.holds()) throw Error("pointwise bound violated at n = " + std::to_string(rep.n));
}

void stage_bounds(Context& c) {
  BoundInputs in;
  Json chosen = Json::object();
  for (const char* q : {"h", "ell", "rho", "v"}) {
    auto order = c.cfg.sources.count(q) ? c.cfg.sources.at(q) : default_sources(q);
    std::optional<Quantity> pick;
    std::string from;
    for (const auto& src : order) {
      if (src == "exact" && c.cfg.exact.count(q)) {
        const auto& k = c.cfg.exact.at(q);
        pick = Quantity::exact(k.value, k.citation.empty() ? "closed form" : k.citation);
      } else if (src == "external" && c.cfg.external.count(q)) {
        const auto& k = c.cfg.external.at(q);
        pick = Quantity::external(k.value, k.citation);
      } else if (c.candidates.count(q) && c.candidates.at(q).count(src)) {
        pick = c.candidates.at(q).at(src);
      }
      if (pick) {
        from = src;
        break;
      }
    }
    if (!pick) continue;
    chosen[q] = from;
    if (std::string(q) == "h") in.h = pick;
    if (std::string(q) == "ell") in.ell = pick;
    if (std::string(q) == "rho") in.rho = pick;
    if (std::string(q) == "v") in.v = pick;
  }
  in.series_terms = c.cfg.series_terms;
  if (c.mu) {
    in.moments[2.0] = Quantity::exact(moment(*c.mu, 2.0), "measure");
    for (double p : series_moment_orders(c.cfg.series_terms)) {
      in.moments[p] = Quantity::exact(moment(*c.mu, p), "measure");
    }
    in.support_radius = c.mu->max_length();
    in.symmetric = c.mu->is_symmetric();
  } else if (c.cfg.external.count("M2")) {
    const auto& k = c.cfg.external.at("M2");
    in.moments[2.0] = Quantity::external(k.value, k.citation);
  }
  BoundOptions opt;
  opt.equality_tol = c.cfg.tolerances.equality;
  opt.sigma_factor = c.cfg.tolerances.sigma_factor;
  auto rep = evaluate_bounds(in, opt);

  Json j;
  j["sources"] = chosen;
  Json inputs = Json::object();
  if (in.h) inputs["h"] = quantity_json(*in.h);
  if (in.ell) inputs["ell"] = quantity_json(*in.ell);
  if (in.rho) inputs["rho"] = quantity_json(*in.rho);
  if (in.v) inputs["v"] = quantity_json(*in.v);
  Json moments = Json::array();
  for (const auto& [p, q] : in.moments) {
    Json m = quantity_json(q);
    m["p"] = p;
    moments.push_back(m);
  }
  inputs["moments"] = moments;
  inputs["support_radius"] = in.support_radius ? Json(*in.support_radius) : Json();
  inputs["symmetric"] = in.symmetric;
  inputs["series_terms"] = in.series_terms;
  j["inputs"] = inputs;
  Json rows = Json::array();
  for (const auto& r : rep.rows) rows.push_back(row_json(r));
  j["rows"] = rows;

  // Growth bounds and the lower bounds implied by a rho bracket.
  if (in.v && in.moments.count(2.0) && !in.symmetric) {
    j["growth_bounds_skipped"] = "asymmetric measure";
  } else if (in.v && in.moments.count(2.0)) {
    const auto g = theorem1_bounds(in.v->value, in.moments.at(2.0).value);
    const bool ext = in.v->provenance == Provenance::External ||
                     in.moments.at(2.0).provenance == Provenance::External;
    j["growth_bounds"] = Json{{"v_tilde", g.v_tilde},
                              {"ell_max", g.ell_max},
                              {"h_max", g.h_max},
                              {"rho_min", g.rho_min},
                              {"identity_residual", g.identity_residual},
                              {"provenance", ext ? "external" : to_string(in.v->provenance)},
                              {"source", in.v->source}};
  }
  if (c.cfg.external.count("rho_upper") && in.v) {
    const auto& k = c.cfg.external.at("rho_upper");
    const auto imp = implied_lower_bounds(k.value, in.v->value);
    j["implied_bounds"] = Json{{"rho_upper", k.value},
                               {"citation", k.citation},
                               {"h_min", imp.h_min},
                               {"ell_min", imp.ell_min}};
  }
  if (c.cfg.external.count("rho_lower")) {
    const auto& k = c.cfg.external.at("rho_lower");
    j["rho_lower"] = Json{{"value", k.value}, {"citation", k.citation}};
  }
  c.report["bounds"] = j;
  c.bounds = std::move(rep);
}

void stage_properties(Context& c) {
  Json props = Json::object();
  std::vector<std::string> failed;
  auto record = [&](const std::string& name, bool applicable, bool pass, double value,
                    double limit) {
    if (!applicable) {
      props[name] = Json{{"status", "not-applicable"}};
      return;
    }
    props[name] = Json{{"status", pass ? "pass" : "fail"}, {"value", value}, {"limit", limit}};
    if (!pass) failed.push_back(name);
  };
  const bool walk = c.series.has_value();
  const double slack = walk && !c.series->checks.exact ? 1e-6 : 1e-10;
  if (walk) {
    const auto& k = c.series->checks;
    record("mass_conservation", true, k.mass_defect <= 1e-12, k.mass_defect, 1e-12);
    record("entropy_subadditivity", true, k.subadditivity_excess <= slack,
           k.subadditivity_excess, slack);
    record("increment_monotonicity", true, k.monotonicity_excess <= slack, k.monotonicity_excess,
           slack);
    record("symmetry_propagation", c.mu->is_symmetric(), k.symmetry_defect <= 1e-14,
           k.symmetry_defect, 1e-14);
  } else {
    for (const char* n : {"mass_conservation", "entropy_subadditivity", "increment_monotonicity",
                          "symmetry_propagation"}) {
      record(n, false, true, 0, 0);
    }
  }
  // Word metric on random products of generators.
  if (c.group) {
    std::mt19937_64 rng(stream_seed(c.seed, 303));
    const auto& gens = c.group->generators();
    auto random_word = [&](int len) {
      Element x = c.group->identity();
      for (int i = 0; i < len; ++i) c.group->compose_inplace(x, gens[rng() % gens.size()].element);
      return x;
    };
    double worst = 0, inv = 0;
    for (int i = 0; i < 500; ++i) {
      const Element x = random_word(1 + static_cast<int>(rng() % 12));
      const Element y = random_word(1 + static_cast<int>(rng() % 12));
      const double lx = c.group->length(x), ly = c.group->length(y);
      worst = std::max(worst, c.group->length(c.group->compose(x, y)) - lx - ly);
      inv = std::max(inv, std::abs(c.group->length(c.group->inverse(x)) - lx));
    }
    record("word_metric_subadditivity", true, worst <= 1e-12 && inv <= 1e-12,
           std::max(worst, inv), 1e-12);
    if (c.table) {
      double defect = 0;
      for (int i = 0; i < 200; ++i) {
        const Element g1 = random_word(1 + static_cast<int>(rng() % 3));
        const Element g2 = random_word(1 + static_cast<int>(rng() % 3));
        // A long prefix keeps the ray beyond the reach of g1 g2.
        const Element prefix = random_word(40);
        if (c.group->length(prefix) < 12) continue;
        const double scale = cocycle(*c.table, *c.group, c.group->compose(g1, g2), prefix);
        defect = std::max(defect, cocycle_multiplicativity_defect(*c.table, *c.group, g1, g2,
                                                                  prefix) / scale);
      }
      record("cocycle_multiplicativity", true, defect <= 1e-12, defect, 1e-12);
    } else {
      record("cocycle_multiplicativity", false, true, 0, 0);
    }
  }
  c.report["properties"] = props;
  if (!failed.empty()) {
    std::string msg = "property check failed:";
    for (const auto& f : failed) msg += " " + f;
    throw Error(msg);
  }
}

std::string fmt(double x, int digits = 12) {
  return std::isfinite(x) ? detail::num(x, digits) : std::string("nan");
}

}  // namespace

RunResult run_pipeline(const RunConfig& cfg, const RunOverrides& ov) {
  Context c(cfg);
  c.stages = ov.stages ? *ov.stages : cfg.stages;
  c.seed = ov.seed ? *ov.seed : cfg.seed.value_or(0);
  const std::uint64_t mem = ov.memory_bytes ? *ov.memory_bytes : cfg.budgets.memory_bytes;
  // Roughly 100 bytes per interned element across table, law and caches.
  const std::size_t cap = std::max<std::size_t>(1000, mem / 100);
  c.budget.max_elements = std::min(cfg.budgets.max_elements, cap);
  c.budget.max_support = c.budget.max_elements / 2;
  c.budget.prune_eps = cfg.budgets.prune_eps;
  c.census_cap = std::min(cfg.budgets.max_elements, std::max<std::size_t>(1000, mem / 64));

  Json report;
  report["header"] = Json{{"tool", "walkbounds"},
                          {"version", kVersion},
                          {"timestamp", ov.timestamp ? timestamp_now() : ""}};
  Json cj;
  cj["name"] = cfg.name;
  cj["description"] = cfg.description;
  if (cfg.group) cj["group"] = group_json(*cfg.group);
  if (cfg.measure) {
    Json m;
    m["uniform"] = cfg.measure->uniform;
    Json sup = Json::object();
    for (const auto& [w, p] : cfg.measure->support) sup[w] = p;
    m["support"] = sup;
    cj["measure"] = m;
  }
  cj["stages"] = Json(std::vector<std::string>(c.stages.begin(), c.stages.end()));
  cj["seed"] = c.seed;
  cj["memory_bytes"] = mem;
  Json ext = Json::object();
  for (const auto& [k, v] : cfg.external) ext[k] = Json{{"value", v.value}, {"citation", v.citation}};
  cj["external"] = ext;
  Json exact = Json::object();
  for (const auto& [k, v] : cfg.exact) exact[k] = Json{{"value", v.value}, {"note", v.citation}};
  cj["exact"] = exact;
  report["config"] = cj;
  c.report = std::move(report);

  RunResult out;
  const auto diags = validate_config(cfg);
  Json dj = Json::array();
  bool fatal = false;
  for (const auto& d : diags) {
    dj.push_back(Json{{"severity", d.severity}, {"field", d.field}, {"message", d.message}});
    fatal |= d.severity == "error";
  }
  c.report["diagnostics"] = dj;
  if (fatal) {
    c.report["errors"] = Json::array({Json{{"stage", "validate"}, {"message", "config is invalid"}}});
    c.report["exit_code"] = kExitConfig;
    out.report = std::move(c.report);
    out.exit_code = kExitConfig;
    out.bounds_md = render_bounds_markdown(out.report);
    out.series_csv = WalkSeries{}.to_csv();
    return out;
  }

  if (cfg.group) c.group.emplace(*cfg.group);
  if (cfg.group && cfg.measure) {
    c.mu.emplace(cfg.measure->uniform
                     ? uniform_on_generators(*c.group)
                     : build_measure(*c.group, cfg.measure->support, cfg.measure->mass_tol));
  }

  const std::vector<std::pair<std::string, std::function<void(Context&)>>> order{
      {"census", stage_census},     {"exact_walk", stage_exact_walk},
      {"monte_carlo", stage_monte_carlo}, {"boundary", stage_boundary},
      {"poisson", stage_poisson},   {"chebyshev", stage_chebyshev},
      {"bounds", stage_bounds},     {"properties", stage_properties}};
  for (const auto& [name, fn] : order) {
    if (!c.enabled(name)) continue;
    try {
      fn(c);
    } catch (const BudgetExceeded& e) {
      c.errors.push_back(Json{{"stage", name}, {"message", e.what()}, {"reached", e.reached()}});
    } catch (const std::exception& e) {
      c.errors.push_back(Json{{"stage", name}, {"message", e.what()}});
    }
  }
  c.report["errors"] = c.errors;
  int code = kExitOk;
  if (c.bounds && c.bounds->any_violated()) code = kExitViolated;
  if (!c.errors.empty()) code = kExitStageError;
  c.report["exit_code"] = code;

  out.series_csv = c.series ? c.series->to_csv() : WalkSeries{}.to_csv();
  out.report = std::move(c.report);
  out.bounds_md = render_bounds_markdown(out.report);
  out.exit_code = code;
  return out;
}

std::string render_bounds_markdown(const Json& report) {
  std::ostringstream os;
  const auto& cfg = report.at("config");
  os << "# " << cfg.value("name", std::string()) << "\n\n";
  if (!cfg.value("description", std::string()).empty()) {
    os << cfg.at("description").get<std::string>() << "\n\n";
  }
  if (report.contains("bounds")) {
    const auto& b = report.at("bounds");
    BoundReport rep;
    for (const auto& r : b.at("rows")) rep.rows.push_back(row_from(r));
    const auto& in = b.at("inputs");
    if (in.contains("h")) rep.inputs.h = quantity_from(in.at("h"));
    if (in.contains("ell")) rep.inputs.ell = quantity_from(in.at("ell"));
    if (in.contains("rho")) rep.inputs.rho = quantity_from(in.at("rho"));
    if (in.contains("v")) rep.inputs.v = quantity_from(in.at("v"));
    for (const auto& m : in.at("moments")) rep.inputs.moments[m.at("p").get<double>()] = quantity_from(m);
    if (!in.at("support_radius").is_null()) {
      rep.inputs.support_radius = in.at("support_radius").get<double>();
    }
    rep.inputs.symmetric = in.at("symmetric").get<bool>();
    os << "## Inequalities\n\n" << rep.to_markdown();
    if (b.contains("growth_bounds")) {
      const auto& g = b.at("growth_bounds");
      const std::string prov = g.at("provenance").get<std::string>();
      const std::string tag = prov == "external" ? " [external: " + g.at("source").get<std::string>() + "]"
                              : prov == "estimated" ? " [estimated, from v]"
                                                    : " [exact]";
      os << "\n## Growth bounds\n\n"
         << "| bound | value |\n|---|---|\n"
         << "| ell <= M2 tanh(M2 v / 2) | " << fmt(g.at("ell_max").get<double>()) << tag << " |\n"
         << "| h <= M2 v tanh(M2 v / 2) | " << fmt(g.at("h_max").get<double>()) << tag << " |\n"
         << "| rho >= 1/cosh(M2 v / 2) | " << fmt(g.at("rho_min").get<double>()) << tag << " |\n";
    }
    if (b.contains("implied_bounds")) {
      const auto& g = b.at("implied_bounds");
      const std::string tag = " [external: " + g.at("citation").get<std::string>() + "]";
      os << "\n## Lower bounds from rho <= " << fmt(g.at("rho_upper").get<double>()) << tag << "\n\n"
         << "| bound | value |\n|---|---|\n"
         << "| h >= FG_inv(1 - rho) | " << fmt(g.at("h_min").get<double>()) << tag << " |\n"
         << "| ell >= h / v | " << fmt(g.at("ell_min").get<double>()) << tag << " |\n";
    }
  }
  if (report.contains("boundary") && report.at("boundary").contains("detector_exact")) {
    const auto& b = report.at("boundary");
    auto det = [&](const char* key, const char* tag) {
      const auto& d = b.at(key);
      os << "| " << key << " | " << (d.at("two_valued").get<bool>() ? "yes" : "no") << " | "
         << fmt(d.at("alpha").get<double>()) << " [" << tag << "] | "
         << fmt(d.at("outlier_fraction").get<double>(), 6) << " [" << tag << "] |\n";
    };
    os << "\n## Two-valued cocycle test\n\n| input | two-valued | alpha | outlier fraction |\n"
       << "|---|---|---|---|\n";
    det("detector_exact", "exact");
    det("detector_mc", "estimated");
  }
  const auto& errors = report.at("errors");
  if (!errors.empty()) {
    os << "\n## Errors\n\n";
    for (const auto& e : errors) {
      os << "- " << e.at("stage").get<std::string>() << ": " << e.at("message").get<std::string>()
         << "\n";
    }
  }
  return os.str();
}

void write_bundle(const RunResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw Error("cannot write " + name + " in " + dir);
    f << text;
  };
  write("report.json", result.report.dump(2) + "\n");
  write("series.csv", result.series_csv);
  write("bounds.md", result.bounds_md);
}

int rerender_bundle(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "report.json";
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path.string());
  const Json report = Json::parse(f);
  std::ofstream out(std::filesystem::path(dir) / "bounds.md", std::ios::binary);
  out << render_bounds_markdown(report);
  return report.at("exit_code").get<int>();
}

}  // namespace walkbounds
