#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "walkbounds/walk.hpp"

namespace walkbounds {

/// Seed of stream `index`: splitmix64 applied to seed + index * golden.
/// Every path (or hitting trial) draws from its own mt19937_64 stream.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Walker's alias table over the support of a measure.
class StepSampler {
 public:
  explicit StepSampler(const Measure& mu);
  std::size_t operator()(std::mt19937_64& rng) const;

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

SampleStats summarize(const std::vector<double>& xs);

struct SampleOptions {
  /// When set, -log mu^{*k}(X_k)/k is averaged against this exact law
  /// (k = law->step, k <= n).
  const Distribution* entropy_law = nullptr;
  std::size_t keep_trajectories = 0;  // number of paths to record in full
};

struct PathEstimates {
  int n = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  SampleStats drift;       // |X_n| / n
  SampleStats drift_half;  // |X_{n/2}| / (n/2), same paths; n >= 2
  std::optional<SampleStats> entropy;
  int entropy_step = 0;
  std::size_t entropy_misses = 0;  // X_k outside the supplied law
  std::vector<std::vector<Element>> trajectories;
};

PathEstimates sample_paths(const Measure& mu, int n, std::size_t count, std::uint64_t seed,
                           const SampleOptions& opts = {});

}  // namespace walkbounds
