// One PASS/FAIL line per acceptance criterion.
//   acceptance [--only N,M] [--expect-fail N,M]
// The exit status is 0 when the failing criteria are exactly the expected
// ones, so known-unattainable criteria stay visible without breaking ctest.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "walkbounds/boundary.hpp"
#include "walkbounds/bounds.hpp"
#include "walkbounds/chebyshev.hpp"
#include "walkbounds/pipeline.hpp"
#include "walkbounds/special_functions.hpp"
#include "walkbounds/walk.hpp"

using namespace walkbounds;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  void fail(const std::string& what) {
    ok_ = false;
    add(what);
  }
  void add(const std::string& what) { os_ << (os_.tellp() > 0 ? "; " : "") << what; }
  void check(bool cond, const std::string& what) {
    if (cond) {
      add(what);
    } else {
      fail("NOT " + what);
    }
  }
  Outcome done() const { return {ok_, os_.str()}; }

 private:
  bool ok_ = true;
  std::ostringstream os_;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string fixed(double x, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

double peak_rss_bytes() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return ru.ru_maxrss * 1024.0;
}

const double kLog3 = std::log(3.0);

BoundInputs free_group_inputs() {
  BoundInputs in;
  in.h = Quantity::exact(0.5 * kLog3, "closed form");
  in.rho = Quantity::exact(std::sqrt(3.0) / 2, "closed form");
  in.ell = Quantity::exact(0.5, "closed form");
  in.v = Quantity::exact(kLog3, "closed form");
  in.moments[2.0] = Quantity::exact(1.0);
  for (double p : series_moment_orders(20)) in.moments[p] = Quantity::exact(1.0);
  in.support_radius = 1.0;
  return in;
}

Outcome criterion1() {
  Detail d;
  const auto rep = evaluate_bounds(free_group_inputs());
  for (const char* name : {"rho_entropy", "drift_entropy", "growth_drift", "growth_entropy",
                           "growth_rho", "fundamental"}) {
    const BoundRow* r = rep.find(name);
    const bool ok = r && r->verdict == Verdict::Equality && std::abs(r->slack) <= 1e-9;
    d.check(ok, std::string(name) + " equality |slack| " + (r ? sci(std::abs(r->slack)) : "?"));
  }
  return d.done();
}

Outcome criterion2() {
  Detail d;
  const Measure mu = uniform_on_generators(Group(GroupSpec::free(2)));
  const auto s = asymptotic_estimates(mu, 12);
  auto window = [&](const char* what, double x, double lo, double hi) {
    d.check(x >= lo && x <= hi, std::string(what) + " = " + fixed(x, 6) + " in [" + fixed(lo, 3) +
                                    ", " + fixed(hi, 3) + "]");
  };
  window("ell_est", s.ell.value, 0.499, 0.501);
  window("rho_est", s.rho.value, 0.865, 0.867);
  window("h_est", s.h.value, 0.539, 0.560);
  // the radial law gives the same increments without the group machinery
  const auto radial = oracle::free_radial(2, 12);
  const double h12 = oracle::radial_entropy(2, radial[12]) - oracle::radial_entropy(2, radial[11]);
  d.check(std::abs(h12 - s.rows[12].h_inc) < 1e-9, "h_inc(12) matches radial oracle " + fixed(h12, 6));
  const double mem = peak_rss_bytes();
  d.check(mem < 2e9, "peak memory " + sci(mem / 1e6) + " MB");
  return d.done();
}

Outcome criterion3() {
  Detail d;
  const double v = 1.9430254;
  const auto g = theorem1_bounds(v, 1.0);
  d.check(fixed(g.ell_max, 9) == "0.749368278", "ell <= " + fixed(g.ell_max, 9));
  d.check(fixed(g.h_max, 9) == "1.456041598", "h <= " + fixed(g.h_max, 9));
  d.check(fixed(g.rho_min, 8) == "0.66215344", "rho >= " + fixed(g.rho_min, 8));
  const auto imp = implied_lower_bounds(0.662816, v);
  d.check(fixed(imp.h_min, 9) == "1.452903618", "h >= " + fixed(imp.h_min, 9));
  d.check(fixed(imp.ell_min, 9) == "0.747753281", "ell >= " + fixed(imp.ell_min, 9));
  return d.done();
}

Outcome criterion4() {
  Detail d;
  const auto c = fg_inv_coefficients(20);
  // c_1 = 4, then (2n-1) c_n = (n-2) c_{n-1} + 2
  double prev = 0.0, worst_coef = 0.0;
  bool positive = true;
  for (int n = 1; n <= 20; ++n) {
    const double cn = n == 1 ? 4.0 : ((n - 2) * prev + 2.0) / (2 * n - 1);
    worst_coef = std::max(worst_coef, std::abs(cn - c[n - 1]) / cn);
    positive &= c[n - 1] > 0;
    prev = cn;
  }
  d.check(positive, "c_1..c_20 > 0");
  d.check(std::abs(c[1] - 2.0 / 3) < 1e-15 && std::abs(c[2] - 8.0 / 15) < 1e-15 &&
              std::abs(c[3] - 46.0 / 105) < 1e-15,
          "c_2, c_3, c_4 = 2/3, 8/15, 46/105");
  d.check(worst_coef < 1e-14, "coefficients match recurrence (rel " + sci(worst_coef) + ")");
  double worst = 0.0, at = 0.0;
  for (int i = 0; i <= 500; ++i) {
    const double x = 0.5 * i / 500;
    const double err = std::abs(FG_inv_series(x, 20) - FG_inv_closed(x));
    if (err > worst) {
      worst = err;
      at = x;
    }
  }
  d.check(worst <= 1e-10, "20-term series within 1e-10 on [0, 0.5] (max err " + sci(worst) +
                              " at x = " + fixed(at, 3) + ")");
  return d.done();
}

Outcome criterion5() {
  Detail d;
  double worst = 0.0;
  for (int n = 0; n <= 30; ++n) {
    for (int i = 0; i <= 100; ++i) {
      worst = std::max(worst, decomposition_residual(n, -1.0 + 2.0 * i / 100));
    }
  }
  d.check(worst <= 1e-12, "decomposition residual " + sci(worst));

  bool dominated = true, tight = true;
  for (int n = 1; n <= 60; ++n) {
    for (int k = 0; k <= n; ++k) {
      // P(S_n >= k) summed from the binomial law
      double tail = 0.0;
      for (int j = 0; j <= n; ++j) {
        if (2 * j - n >= k) tail += oracle::binomial(n, j) * std::pow(0.5, n);
      }
      const double b = chernov_tail_bound(n, k);
      if (tail > b * (1 + 1e-12)) dominated = false;
      if (k == n && std::abs(tail - b) > 1e-12 * b) tight = false;
    }
  }
  d.check(dominated, "Chernov dominates binomial tails, 0 <= k <= n <= 60");
  d.check(tight, "equality at k = n");

  const Measure mu = uniform_on_generators(Group(GroupSpec::free(2)));
  const auto radial = oracle::free_radial(2, 10);
  std::size_t violations = 0;
  double oracle_gap = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const auto rep = pointwise_bounds(mu, n, std::sqrt(3.0) / 2);
    violations += rep.loeuillot_violations + rep.carne_violations;
    for (const auto& r : rep.rows) {
      const int k = static_cast<int>(r.length);
      const double exact = radial[n][k] / oracle::free_sphere(2, k);
      oracle_gap = std::max(oracle_gap, std::abs(exact - r.exact_max) / exact);
    }
  }
  d.check(violations == 0, "Loeuillot and Carne dominate mu^n(g), F2, n <= 10");
  d.check(oracle_gap < 1e-12, "mu^n(g) matches radial oracle (rel " + sci(oracle_gap) + ")");
  return d.done();
}

Outcome criterion6() {
  Detail d;
  const Group f2(GroupSpec::free(2));
  const Measure mu = uniform_on_generators(f2);
  const auto t = solve_hitting_tree(mu);
  d.check(std::abs(t.syllable(0, 1) - 1.0 / 3) <= 1e-12, "tree q = " + fixed(t.syllable(0, 1), 15));
  double worst = 0.0;
  for (int k = 2; k <= 5; ++k) {
    worst = std::max(worst, std::abs(boundary_entropy_free(k) - (1.0 - 1.0 / k) * std::log(2.0 * k - 1)));
  }
  d.check(worst <= 1e-12, "boundary_entropy_free(2..5) err " + sci(worst));
  const auto det = equality_detector(cocycle_law(mu, t));
  d.check(det.two_valued && std::abs(det.alpha - kLog3) <= 1e-12,
          "detector two-valued, alpha - log 3 = " + sci(det.alpha - kLog3));
  HittingOptions opt;
  opt.samples = 100000;
  opt.seed = 20240611;
  const auto est = hitting_mc(mu, f2.parse("a"), opt);
  d.check(std::abs(est.estimate - 1.0 / 3) <= 3 * est.sigma,
          "MC q = " + fixed(est.estimate, 5) + " +- " + sci(est.sigma));
  return d.done();
}

Outcome criterion7() {
  Detail d;
  auto cfg = load_config(std::string(WALKBOUNDS_CONFIG_DIR) + "/modular_p13.yaml");
  RunOverrides ov;
  ov.stages = std::set<std::string>{"monte_carlo", "boundary", "bounds"};
  ov.timestamp = false;
  const auto res = run_pipeline(cfg, ov);
  const auto& rep = res.report;
  d.check(rep.at("errors").empty(), "no stage errors");
  for (const auto& r : rep.at("bounds").at("rows")) {
    const std::string name = r.at("name");
    if (name != "rho_entropy" && name != "drift_entropy") continue;
    const double slack = r.at("slack"), sigma = r.at("sigma");
    d.check(r.at("verdict") == "satisfied-strict" && slack > 3 * sigma,
            name + " strict, slack " + sci(slack) + " > 3 x " + sci(sigma));
  }
  const auto& mc = rep.at("boundary").at("detector_mc");
  d.check(mc.at("two_valued") == false,
          "MC detector two_valued = false (outliers " + sci(mc.at("outlier_fraction")) + ")");
  const double ell = rep.at("monte_carlo").at("drift"), err = rep.at("monte_carlo").at("error");
  d.check(std::abs(ell - 2.0 / 15) <= 3 * err, "MC ell = " + fixed(ell, 4) + " vs 2/15");
  return d.done();
}

Outcome criterion8() {
  Detail d;
  const Measure mu = uniform_on_generators(Group(GroupSpec::free(2)));
  PoissonOptions opt;
  opt.defect_tol = 1e-13;
  opt.prune_eps = 1e-14;
  const double delta = 1e-4;
  for (double t : {1.0, 2.0}) {
    const auto laws = poissonize_many(mu, {t - delta, t, t + delta}, opt);
    const auto der = symmetrized_derivatives(mu, laws[1]);
    const auto lo = distribution_stats(laws[0].law), hi = distribution_stats(laws[2].law);
    const double fh = (hi.entropy - lo.entropy) / (2 * delta);
    const double fl = (hi.mean_length - lo.mean_length) / (2 * delta);
    const double eh = std::abs(der.dH - fh) / std::abs(fh), el = std::abs(der.dL - fl) / std::abs(fl);
    const std::string at = "t = " + fixed(t, 0) + ": ";
    d.check(eh <= 1e-4, at + "dH rel " + sci(eh));
    d.check(el <= 1e-4, at + "dL rel " + sci(el));
    d.check(der.dirichlet >= 1 - std::sqrt(3.0) / 2, at + "dirichlet " + fixed(der.dirichlet, 4));
  }
  return d.done();
}

Outcome criterion9() {
  Detail d;
  std::set<std::filesystem::path> paths;
  for (const auto& e : std::filesystem::directory_iterator(WALKBOUNDS_CONFIG_DIR)) {
    if (e.path().extension() == ".yaml") paths.insert(e.path());
  }
  for (const auto& path : paths) {
    const auto cfg = load_config(path.string());
    RunOverrides ov;
    ov.timestamp = false;
    const auto res = run_pipeline(cfg, ov);
    const std::string name = path.stem().string();
    std::size_t checked = 0;
    std::string failed;
    if (res.report.contains("properties")) {
      for (const auto& [prop, p] : res.report.at("properties").items()) {
        if (p.at("status") == "fail") failed += " " + prop;
        checked += p.at("status") == "pass";
      }
    }
    for (const auto& err : res.report.at("errors")) {
      failed += " " + err.at("stage").get<std::string>() + "-error";
    }
    d.check(failed.empty(), name + " (" + std::to_string(checked) + " checks)" +
                                (failed.empty() ? "" : ":" + failed));
  }
  return d.done();
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string x;
  while (std::getline(ss, x, ',')) {
    if (!x.empty()) out.insert(std::stoi(x));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expect_fail;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") only = parse_list(argv[i + 1]);
    if (flag == "--expect-fail") expect_fail = parse_list(argv[i + 1]);
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"free-group equality chain", criterion1},
      {"free-group estimation at n = 12", criterion2},
      {"surface-group numbers", criterion3},
      {"Taylor recurrence", criterion4},
      {"Chebyshev suite", criterion5},
      {"boundary suite", criterion6},
      {"modular strictness", criterion7},
      {"derivative identities", criterion8},
      {"property suites on bundled configs", criterion9}};
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) failed.insert(id);
    std::cout << (out.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << " ("
              << fixed(secs, 2) << " s): " << out.detail << std::endl;
  }
  std::set<int> expected;
  for (int id : expect_fail) {
    if (only.empty() || only.count(id)) expected.insert(id);
  }
  if (failed != expected) {
    std::cout << "failing criteria differ from the expected set" << std::endl;
    return 1;
  }
  return 0;
}
