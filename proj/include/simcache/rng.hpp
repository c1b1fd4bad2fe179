#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

// Distribution helpers on top of mt19937_64. The standard library's
// distributions are implementation-defined, so sampling goes through these
// to keep generated streams identical across toolchains.
namespace simcache::rng {

using Engine = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Exponential with the given rate; rate = 0 yields +infinity.
inline double exponential(Engine& eng, double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log1p(-uniform01(eng)) / rate;
}

/// Cumulative weights for inverse-CDF sampling. Weights must be nonnegative
/// with a positive sum.
inline std::vector<double> cumulative(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("negative weight");
    acc += weights[i];
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw std::invalid_argument("weights sum to zero");
  return cdf;
}

/// Index draw by binary search on a cumulative weight table.
inline std::size_t discrete(Engine& eng, const std::vector<double>& cdf) {
  const double u = uniform01(eng) * cdf.back();
  std::size_t lo = 0, hi = cdf.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cdf[mid] > u) hi = mid; else lo = mid + 1;
  }
  return lo;
}

/// Number of Poisson(rate) events in [0, duration), by summing gaps.
inline long poisson_count(Engine& eng, double rate, double duration) {
  if (rate <= 0.0 || duration <= 0.0) return 0;
  long count = 0;
  double t = exponential(eng, rate);
  while (t < duration) {
    ++count;
    t += exponential(eng, rate);
  }
  return count;
}

}  // namespace simcache::rng
