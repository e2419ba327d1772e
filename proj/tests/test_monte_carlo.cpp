#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "walkbounds/error.hpp"
#include "walkbounds/monte_carlo.hpp"

using namespace walkbounds;

TEST_CASE("stream seeds are distinct and reproducible") {
  CHECK(stream_seed(1, 0) == stream_seed(1, 0));
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0) != stream_seed(2, 0));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(rng);
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("alias sampler matches the measure") {
  const Group f2(GroupSpec::free(2));
  const Measure mu = build_measure(f2, {{"a", 0.4}, {"A", 0.4}, {"b", 0.1}, {"B", 0.1}});
  const StepSampler pick(mu);
  std::mt19937_64 rng(5);
  std::vector<double> counts(mu.size());
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[pick(rng)] += 1;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const double p = mu.probs()[j];
    CHECK(std::abs(counts[j] / n - p) < 4 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("drift and entropy samples on F2") {
  const Group f2(GroupSpec::free(2));
  const Measure mu = uniform_on_generators(f2);
  const int n = 40;
  const auto radial = oracle::free_radial(2, n);
  double mean = 0;
  for (std::size_t r = 0; r < radial[n].size(); ++r) mean += r * radial[n][r];
  const auto law = nstep(mu, 8);
  SampleOptions opt;
  opt.entropy_law = &law;
  opt.keep_trajectories = 2;
  const auto est = sample_paths(mu, n, 20000, 99, opt);
  CHECK(std::abs(est.drift.mean - mean / n) < 4 * est.drift.std_error);
  REQUIRE(est.entropy);
  CHECK(est.entropy_misses == 0);
  // E[-log mu^{*8}(X_8)] / 8 is H(mu^{*8}) / 8.
  const double h8 = oracle::radial_entropy(2, oracle::free_radial(2, 8)[8]) / 8;
  CHECK(std::abs(est.entropy->mean - h8) < 4 * est.entropy->std_error);
  REQUIRE(est.trajectories.size() == 2);
  CHECK(est.trajectories[0].size() == static_cast<std::size_t>(n + 1));
  CHECK(sample_paths(mu, n, 50, 99).drift.mean == sample_paths(mu, n, 50, 99).drift.mean);
  CHECK_THROWS_AS(sample_paths(mu, 0, 10, 1), InvalidInput);
}
