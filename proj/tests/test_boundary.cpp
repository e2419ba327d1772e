#include <doctest.h>

#include <cmath>

#include "walkbounds/boundary.hpp"
#include "walkbounds/error.hpp"

using namespace walkbounds;

namespace {

Group modular() {
  return Group(GroupSpec::free_product({GroupSpec::cyclic(2, "a"), GroupSpec::cyclic(3, "b")}));
}

Measure modular_measure(double p) {
  return build_measure(modular(), {{"a", p}, {"b", (1 - p) / 2}, {"B", (1 - p) / 2}});
}

// Independent high-precision solutions of the first-passage system and
// its fold (40 digits, computed separately).
constexpr double kModQa = 2.0 / 3, kModQb = 0.75;
constexpr double kModH = 0.04620981203732968729;
constexpr double kModRho = 0.98848221266130503190;
constexpr double kModRhoLower = 0.98847884772279102470;
constexpr double kWeightedQa = 0.38934178682016568582;
constexpr double kWeightedQb = 0.28166562269831019123;
constexpr double kWeightedRho = 0.87037748502139025745;

}  // namespace

TEST_CASE("tree fixed point on free groups") {
  for (int d = 2; d <= 6; ++d) {
    const Group g(GroupSpec::free(d));
    const auto t = solve_hitting_tree(uniform_on_generators(g));
    CHECK(t.method == "tree-exact");
    CHECK(t.iterations < 200);
    for (std::size_t f = 0; f < t.q.size(); ++f) {
      CHECK(std::abs(t.q[f][1] - 1.0 / (2 * d - 1)) < 1e-12);
      CHECK(std::abs(t.q[f][0] - 1.0 / (2 * d - 1)) < 1e-12);
    }
    const Element w = g.parse("aab^-1");
    CHECK(t(w) == doctest::Approx(std::pow(1.0 / (2 * d - 1), 3)).epsilon(1e-12));
  }
}

TEST_CASE("tree solver rejects what it cannot do") {
  CHECK_THROWS_AS(solve_hitting_tree(uniform_on_generators(Group(GroupSpec::free(1)))),
                  InvalidInput);
  CHECK_THROWS_AS(solve_hitting_tree(modular_measure(1.0 / 3)), InvalidInput);
  const Group d_inf(
      GroupSpec::free_product({GroupSpec::cyclic(2, "a"), GroupSpec::cyclic(2, "b")}));
  CHECK_THROWS_AS(solve_hitting_tree(uniform_on_generators(d_inf)), InvalidInput);
  CHECK(spectral_radius_free_product(uniform_on_generators(d_inf)).recurrent);
  CHECK_THROWS_AS(solve_hitting_tree(uniform_on_generators(Group(GroupSpec::free_abelian(2)))),
                  InvalidInput);
  const Group f2(GroupSpec::free(2));
  const Measure far = build_measure(f2, {{"a^2", 0.25}, {"a^-2", 0.25}, {"b", 0.25}, {"B", 0.25}});
  CHECK_THROWS_AS(solve_hitting_tree(far), InvalidInput);
  const Measure skew = build_measure(f2, {{"a", 0.4}, {"A", 0.1}, {"b", 0.25}, {"B", 0.25}});
  CHECK_THROWS_AS(solve_hitting_tree(skew), InvalidInput);
}

TEST_CASE("boundary entropy of free groups") {
  for (int d = 2; d <= 5; ++d) {
    CAPTURE(d);
    CHECK(std::abs(boundary_entropy_free(d) - (1 - 1.0 / d) * std::log(2.0 * d - 1)) < 1e-12);
  }
  const Group f2(GroupSpec::free(2));
  const Measure mu = uniform_on_generators(f2);
  const auto b = boundary_quantities(mu, solve_hitting_tree(mu));
  CHECK(b.ell == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.rho_lower == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
  CHECK(b.nu_total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.green == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(b.residual < 1e-12);
  // nu of rays starting with a: 1/4.
  double nu_a = 0;
  for (const auto& s : b.first) {
    if (s.factor == 0 && s.exponent > 0) nu_a += s.nu;
  }
  CHECK(nu_a == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("weighted lengths change the drift only") {
  GroupSpec spec = GroupSpec::free(2);
  spec.weights = {{"b", 0.5}};
  const Group g(spec);
  const Measure mu = uniform_on_generators(g);
  const auto b = boundary_quantities(mu, solve_hitting_tree(mu));
  CHECK(b.ell == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(b.h == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("non-uniform measure on F2") {
  const Group f2(GroupSpec::free(2));
  const Measure mu = build_measure(f2, {{"a", 0.3}, {"A", 0.3}, {"b", 0.2}, {"B", 0.2}});
  const auto t = solve_hitting_tree(mu);
  CHECK(t.q[0][1] == doctest::Approx(kWeightedQa).epsilon(1e-12));
  CHECK(t.q[1][1] == doctest::Approx(kWeightedQb).epsilon(1e-12));
  const auto sr = spectral_radius_free_product(mu);
  CHECK(sr.rho == doctest::Approx(kWeightedRho).epsilon(1e-10));
  const auto b = boundary_quantities(mu, t);
  CHECK(b.rho_lower <= sr.rho + 1e-12);
  CHECK(b.residual < 1e-12);
  CHECK_FALSE(equality_detector(cocycle_law(mu, t), 1e-9).two_valued);
}

TEST_CASE("spectral radius from the fold") {
  const Group f2(GroupSpec::free(2));
  const auto sr = spectral_radius_free_product(uniform_on_generators(f2));
  CHECK_FALSE(sr.recurrent);
  CHECK(sr.rho == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-10));
  const Group f3(GroupSpec::free(3));
  CHECK(spectral_radius_free_product(uniform_on_generators(f3)).rho ==
        doctest::Approx(std::sqrt(5.0) / 3).epsilon(1e-10));
  CHECK(spectral_radius_free_product(modular_measure(1.0 / 3)).rho ==
        doctest::Approx(kModRho).epsilon(1e-10));
  // Beyond R the iteration diverges.
  CHECK_THROWS_AS(solve_hitting_free_product(uniform_on_generators(f2), 1.2), DomainError);
  const auto at = solve_hitting_free_product(uniform_on_generators(f2), 1.1);
  const double z = 1.1;
  CHECK(at.q[0][1] == doctest::Approx((1 - std::sqrt(1 - 0.75 * z * z)) / (1.5 * z)));
}

TEST_CASE("modular group") {
  const Measure mu = modular_measure(1.0 / 3);
  const auto t = solve_hitting_free_product(mu);
  CHECK(t.q[0][1] == doctest::Approx(kModQa).epsilon(1e-13));
  CHECK(t.q[1][1] == doctest::Approx(kModQb).epsilon(1e-13));
  CHECK(t.q[1][2] == doctest::Approx(kModQb).epsilon(1e-13));
  const auto b = boundary_quantities(mu, t);
  CHECK(b.h == doctest::Approx(kModH).epsilon(1e-12));
  CHECK(b.ell == doctest::Approx(2.0 / 15).epsilon(1e-12));
  CHECK(b.rho_lower == doctest::Approx(kModRhoLower).epsilon(1e-12));
  CHECK(b.rho_lower < kModRho);
  REQUIRE(b.first.size() == 3);
  CHECK(b.first[0].nu == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(b.first[1].nu == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(b.first[2].nu == doctest::Approx(0.3).epsilon(1e-12));
  const auto det = equality_detector(cocycle_law(mu, t), 1e-9);
  CHECK_FALSE(det.two_valued);
  CHECK(det.outlier_fraction > 0.1);
}

TEST_CASE("cocycle identities") {
  const Group g = modular();
  const Measure mu = modular_measure(1.0 / 3);
  const auto t = solve_hitting_free_product(mu);
  const Element prefix = g.parse("ababBabaBab");
  for (const char* s1 : {"a", "b", "B", "ab", "Ba"}) {
    for (const char* s2 : {"a", "b", "aB"}) {
      CHECK(cocycle_multiplicativity_defect(t, g, g.parse(s1), g.parse(s2), prefix) < 1e-14);
    }
  }
  // Different factors: c_0(a, xi) = q(a).
  CHECK(rn_cocycle(t, g, g.parse("a"), g.parse("b")) == doctest::Approx(kModQa));
  CHECK(rn_cocycle(t, g, g.parse("a"), g.parse("a")) == doctest::Approx(1.5));
  CHECK(rn_cocycle(t, g, g.parse("b"), g.parse("b")) == doctest::Approx(1.0));
  CHECK(rn_cocycle(t, g, g.parse("b"), g.parse("B")) == doctest::Approx(4.0 / 3));
  CHECK_THROWS_AS(rn_cocycle(t, g, g.parse("ab"), g.parse("a")), InvalidInput);
}

TEST_CASE("equality detector on exact F2 cocycle") {
  const Group f2(GroupSpec::free(2));
  const Measure mu = uniform_on_generators(f2);
  const auto t = solve_hitting_tree(mu);
  const auto det = equality_detector(cocycle_law(mu, t), 1e-9);
  CHECK(det.two_valued);
  CHECK(std::abs(det.alpha - std::log(3.0)) < 1e-12);
  // Sampled rays give the same verdict.
  const auto mc = equality_detector(sample_cocycle(mu, t, 2000, 7), 1e-9);
  CHECK(mc.two_valued);
  CHECK(std::abs(mc.alpha - std::log(3.0)) < 1e-12);
  CHECK_FALSE(equality_detector({}, 1e-9).two_valued);
  std::vector<CocycleSample> zeros(200, CocycleSample{0.0, 1.0, 0.0});
  const auto flat = equality_detector(zeros, 1e-9);
  CHECK(flat.two_valued);
  CHECK(flat.alpha == 0.0);
  // d_0 = (1 - c)/(1 + c) has constant modulus (2d - 2)/(2d).
  for (const auto& s : cocycle_law(mu, t)) {
    const double c = std::exp(s.log_c);
    CHECK(std::abs((1 - c) / (1 + c)) == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(std::abs(cutpoint_check(t, f2, f2.parse("a"), f2.parse("b"))) < 1e-12);
  CHECK(cutpoint_check(t, f2, f2.identity(), f2.parse("b")) == 0.0);
  CHECK_THROWS_AS(cutpoint_check(t, f2, f2.parse("a"), f2.parse("A")), InvalidInput);
}

TEST_CASE("Monte Carlo hitting on F2") {
  const Group f2(GroupSpec::free(2));
  const Measure mu = uniform_on_generators(f2);
  HittingOptions opt;
  opt.samples = 100000;
  opt.seed = 20240611;
  opt.escape_margin = 40;
  const auto est = hitting_mc(mu, f2.parse("a"), opt);
  CHECK(std::abs(est.estimate - 1.0 / 3) <= 3 * est.sigma);
  CHECK(est.wilson_lo <= 1.0 / 3);
  CHECK(est.wilson_hi >= 1.0 / 3);
  CHECK(est.censored == 0);
  CHECK(est.hits + est.escaped == est.samples);
  // Fixed seed reproduces the estimate.
  CHECK(hitting_mc(mu, f2.parse("a"), opt).hits == est.hits);
  CHECK(hitting_mc(mu, f2.identity(), opt).estimate == 1.0);
}

TEST_CASE("Monte Carlo table and cut points on the modular group") {
  const Measure mu = modular_measure(1.0 / 3);
  const auto exact = solve_hitting_free_product(mu);
  HittingOptions opt;
  opt.samples = 20000;
  opt.seed = 11;
  const auto mc = hitting_table_mc(mu, opt);
  CHECK(mc.method == "monte-carlo");
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t k = 1; k < mc.q[f].size(); ++k) {
      CHECK(std::abs(mc.q[f][k] - exact.q[f][k]) <= 4 * mc.error[f][k]);
    }
  }
  const Group g = modular();
  const auto cp = cutpoint_check_mc(mu, exact, g.parse("a"), g.parse("b"), opt);
  CHECK(std::abs(cp.zscore) < 4);
  CHECK(cp.product == doctest::Approx(0.5));
  CHECK_THROWS_AS(cutpoint_check_mc(mu, exact, g.parse("b"), g.parse("b"), opt), InvalidInput);

  const auto samples = sample_cocycle(mu, mc, 3000, 5);
  CHECK_FALSE(equality_detector(samples, 1e-9).two_valued);
}
