#include <doctest.h>

#include <cmath>

#include "walkbounds/bounds.hpp"
#include "walkbounds/error.hpp"

using namespace walkbounds;

namespace {

BoundInputs free_group_inputs() {
  BoundInputs in;
  in.h = Quantity::exact(0.5 * std::log(3.0));
  in.rho = Quantity::exact(std::sqrt(3.0) / 2);
  in.ell = Quantity::exact(0.5);
  in.v = Quantity::exact(std::log(3.0));
  for (double p : series_moment_orders(20)) in.moments[p] = Quantity::exact(1.0);
  in.moments[2.0] = Quantity::exact(1.0);
  in.support_radius = 1.0;
  return in;
}

Verdict verdict_of(const BoundReport& rep, const std::string& name) {
  const BoundRow* r = rep.find(name);
  REQUIRE(r != nullptr);
  return r->verdict;
}

}  // namespace

TEST_CASE("free group: equality rows") {
  const auto rep = evaluate_bounds(free_group_inputs());
  for (const char* name : {"rho_entropy", "drift_entropy", "growth_drift", "growth_entropy",
                           "growth_rho", "fundamental"}) {
    CAPTURE(name);
    const BoundRow* r = rep.find(name);
    REQUIRE(r != nullptr);
    CHECK(r->verdict == Verdict::Equality);
    CHECK(std::abs(r->slack) <= 1e-9);
  }
  CHECK(verdict_of(rep, "avez") == Verdict::Strict);
  CHECK(verdict_of(rep, "ledrappier") == Verdict::Strict);
  CHECK(verdict_of(rep, "rho_dominance") == Verdict::Strict);
  // A(1/2) + 2|log(sqrt3/2)| = log(3)/2.
  CHECK(verdict_of(rep, "chebyshev_combined") == Verdict::Equality);
  CHECK(verdict_of(rep, "varopoulos_carne") == Verdict::Strict);
  CHECK_FALSE(rep.any_violated());
  // Unit moments turn the series into the Taylor series of F(ell) truncated at 20.
  const BoundRow* ms = rep.find("moment_series");
  REQUIRE(ms);
  double s = 0;
  for (int n = 1; n <= 20; ++n) s += 2.0 / (2 * n - 1) * std::pow(0.5, 2 * n);
  CHECK(ms->lhs == doctest::Approx(s).epsilon(1e-14));
  CHECK(ms->lhs <= std::log(3.0) * 0.5);
  CHECK(verdict_of(rep, "moment_series_monotone") == Verdict::Equality);
}

TEST_CASE("simple walk on Z: zero rows") {
  BoundInputs in;
  in.h = Quantity::exact(0.0);
  in.rho = Quantity::exact(1.0);
  in.ell = Quantity::exact(0.0);
  in.v = Quantity::exact(0.0);
  in.moments[2.0] = Quantity::exact(1.0);
  const auto rep = evaluate_bounds(in);
  for (const char* name : {"rho_entropy", "drift_entropy", "avez", "ledrappier", "fundamental",
                           "growth_rho", "growth_entropy"}) {
    CAPTURE(name);
    CHECK(verdict_of(rep, name) == Verdict::Equality);
  }
  CHECK(verdict_of(rep, "moment_series") == Verdict::Skipped);
}

TEST_CASE("weighted free group is strict") {
  // Generators a, b with weights 1 and 1/2 under the uniform measure.
  BoundInputs in;
  in.h = Quantity::exact(0.5 * std::log(3.0));
  in.ell = Quantity::exact(0.375);
  in.moments[2.0] = Quantity::exact(std::sqrt(0.625));
  in.rho = Quantity::exact(std::sqrt(3.0) / 2);
  const auto rows = theorem2_check(in);
  const BoundRow& drift = rows[1];
  REQUIRE(drift.name == "drift_entropy");
  CHECK(drift.verdict == Verdict::Strict);
  const double x = 0.375 / std::sqrt(0.625);
  CHECK(drift.lhs == doctest::Approx(x * std::log((1 + x) / (1 - x))).epsilon(1e-14));
}

TEST_CASE("growth bounds") {
  const auto f2 = theorem1_bounds(std::log(3.0), 1.0);
  CHECK(f2.ell_max == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f2.h_max == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-14));
  CHECK(f2.rho_min == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-14));
  CHECK(f2.identity_residual < 1e-12);

  const auto s = theorem1_bounds(1.9430254, 1.0);
  CHECK(std::abs(s.ell_max - 0.749368278) < 5e-10);
  CHECK(std::abs(s.h_max - 1.456041598) < 5e-10);
  CHECK(std::abs(s.rho_min - 0.66215344) < 5e-9);
  CHECK(s.identity_residual < 1e-12);

  const auto zero = theorem1_bounds(0.0, 1.0);
  CHECK(zero.ell_max == 0.0);
  CHECK(zero.h_max == 0.0);
  CHECK(zero.rho_min == 1.0);
  CHECK_THROWS_AS(theorem1_bounds(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(theorem1_bounds(1.0, 0.0), DomainError);

  const auto imp = implied_lower_bounds(0.662816, 1.9430254);
  CHECK(std::abs(imp.h_min - 1.452903618) < 5e-10);
  CHECK(std::abs(imp.ell_min - 0.747753281) < 5e-10);
  CHECK_THROWS_AS(implied_lower_bounds(0.0, 1.0), DomainError);
}

TEST_CASE("skip reasons") {
  BoundInputs in = free_group_inputs();
  in.symmetric = false;
  auto rep = evaluate_bounds(in);
  CHECK(verdict_of(rep, "rho_entropy") == Verdict::Skipped);
  CHECK(rep.find("rho_entropy")->reason == "asymmetric measure");
  CHECK(verdict_of(rep, "fundamental") == Verdict::Equality);
  CHECK(verdict_of(rep, "rho_dominance") == Verdict::Strict);

  in = free_group_inputs();
  in.ell = Quantity::estimated(1.2, 0.1, "increment");
  rep = evaluate_bounds(in);
  CHECK(verdict_of(rep, "drift_entropy") == Verdict::Skipped);
  CHECK(verdict_of(rep, "chebyshev_combined") == Verdict::Skipped);

  in = free_group_inputs();
  in.moments.erase(in.moments.find(series_moment_orders(20)[3]));
  rep = evaluate_bounds(in);
  CHECK(verdict_of(rep, "moment_series") == Verdict::Skipped);

  in = free_group_inputs();
  in.rho.reset();
  rep = evaluate_bounds(in);
  CHECK(rep.find("avez")->reason == "missing input: rho");

  in = free_group_inputs();
  in.rho = Quantity::exact(1.5);
  rep = evaluate_bounds(in);
  CHECK(rep.find("avez")->reason == "rho outside (0, 1]");
}

TEST_CASE("error propagation") {
  BoundInputs in = free_group_inputs();
  in.h = Quantity::estimated(0.5 * std::log(3.0) + 0.01, 0.005, "increment");
  auto rep = evaluate_bounds(in);
  const BoundRow* r = rep.find("rho_entropy");
  CHECK(r->sigma == doctest::Approx(0.005).epsilon(1e-9));
  CHECK(r->verdict == Verdict::Equality);  // slack 0.01 within 3 sigma

  in.h = Quantity::estimated(0.5 * std::log(3.0) + 0.01, 0.001, "increment");
  rep = evaluate_bounds(in);
  CHECK(rep.find("rho_entropy")->verdict == Verdict::Strict);

  in.h = Quantity::estimated(0.5 * std::log(3.0) - 0.01, 0.001, "increment");
  rep = evaluate_bounds(in);
  CHECK(rep.find("rho_entropy")->verdict == Verdict::Violated);
  CHECK(rep.any_violated());

  // rho near 1 is clamped to its domain when perturbed.
  in = free_group_inputs();
  in.rho = Quantity::estimated(0.9999, 0.01, "ratio");
  rep = evaluate_bounds(in);
  CHECK(std::isfinite(rep.find("avez")->sigma));
  CHECK(rep.find("avez")->sigma > 0);
}

TEST_CASE("markdown carries provenance") {
  BoundInputs in = free_group_inputs();
  in.ell = Quantity::estimated(0.5, 1e-3, "increment");
  in.v = Quantity::external(std::log(3.0), "closed form");
  const auto md = evaluate_bounds(in).to_markdown();
  CHECK(md.find("| inequality | lhs | rhs | slack | verdict |") != std::string::npos);
  CHECK(md.find("[est +- ") != std::string::npos);
  CHECK(md.find("external [closed form]") != std::string::npos);
  CHECK(md.find("[exact]") != std::string::npos);
}
