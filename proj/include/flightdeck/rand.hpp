#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "flightdeck/hash.hpp"

namespace flightdeck {

/// Seeded random stream. All sampling goes through explicit formulas on top
/// of mt19937_64 so that draws are reproducible independent of any standard
/// library distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    assert(n > 0);
    // Rejection sampling to avoid modulo bias.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  int64_t range(int64_t lo, int64_t hi) {  // inclusive
    return lo + int64_t(below(uint64_t(hi - lo + 1)));
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  // Exponential with the given rate (events per unit time).
  double exponential(double rate) {
    double u = uniform01();
    return -std::log1p(-u) / rate;
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Lognormal parameterized by its arithmetic mean and log-space sigma.
  double lognormal_mean(double mean, double sigma) {
    double mu = std::log(mean) - 0.5 * sigma * sigma;
    return std::exp(mu + sigma * normal());
  }

 private:
  std::mt19937_64 gen_;
};

/// Zipf(s) sampler over ranks 1..n via the precomputed CDF: popularity of the
/// k-th key is proportional to k^-s. s = 0 degenerates to uniform.
class ZipfSampler {
 public:
  ZipfSampler(uint64_t n, double s) : cdf_(n) {
    double acc = 0.0;
    for (uint64_t k = 1; k <= n; ++k) {
      acc += 1.0 / std::pow(double(k), s);
      cdf_[k - 1] = acc;
    }
    for (auto& v : cdf_) v /= acc;
  }

  // Returns a 0-based index in [0, n); index 0 is the most popular key.
  uint64_t sample(Rng& rng) const {
    double u = rng.uniform01();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return cdf_.size() - 1;
    return uint64_t(it - cdf_.begin());
  }

  uint64_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

}  // namespace flightdeck
