#include "walkbounds/monte_carlo.hpp"

#include <cmath>

#include "walkbounds/error.hpp"
#include "walkbounds/summation.hpp"

namespace walkbounds {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

StepSampler::StepSampler(const Measure& mu) {
  const std::size_t n = mu.size();
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = mu.probs()[i] * n;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back(), l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) prob_[i] = 1.0;
  for (auto i : small) prob_[i] = 1.0;
}

std::size_t StepSampler::operator()(std::mt19937_64& rng) const {
  const double u = uniform01(rng) * prob_.size();
  const auto i = static_cast<std::size_t>(u);
  return (u - i) < prob_[i] ? i : alias_[i];
}

SampleStats summarize(const std::vector<double>& xs) {
  SampleStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  CompensatedSum sum;
  for (double x : xs) sum += x;
  s.mean = sum.value() / xs.size();
  if (xs.size() > 1) {
    CompensatedSum sq;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.std_error = std::sqrt(sq.value() / (xs.size() - 1) / xs.size());
  }
  return s;
}

PathEstimates sample_paths(const Measure& mu, int n, std::size_t count, std::uint64_t seed,
                           const SampleOptions& opts) {
  if (n < 1) throw InvalidInput("path length must be >= 1");
  if (count < 1) throw InvalidInput("sample count must be >= 1");
  const int k = opts.entropy_law ? opts.entropy_law->step : 0;
  if (opts.entropy_law && (k < 1 || k > n)) {
    throw InvalidInput("entropy law step must lie in [1, n]");
  }
  const Group& g = mu.group();
  const StepSampler pick(mu);
  PathEstimates out;
  out.n = n;
  out.count = count;
  out.seed = seed;
  out.entropy_step = k;
  std::vector<double> drift, half, ent;
  drift.reserve(count);
  const int mid = n / 2;
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(stream_seed(seed, i));
    Element x = g.identity();
    const bool keep = i < opts.keep_trajectories;
    std::vector<Element> path;
    if (keep) path.push_back(x);
    for (int step = 1; step <= n; ++step) {
      g.compose_inplace(x, mu.elements()[pick(rng)]);
      if (keep) path.push_back(x);
      if (step == mid) half.push_back(g.length(x) / mid);
      if (step == k) {
        const double p = opts.entropy_law->prob(x);
        if (p > 0.0) {
          ent.push_back(-std::log(p) / k);
        } else {
          ++out.entropy_misses;
        }
      }
    }
    drift.push_back(g.length(x) / n);
    if (keep) out.trajectories.push_back(std::move(path));
  }
  out.drift = summarize(drift);
  out.drift_half = summarize(half);
  if (opts.entropy_law) out.entropy = summarize(ent);
  return out;
}

}  // namespace walkbounds
