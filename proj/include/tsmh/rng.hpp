#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

#include "tsmh/logmath.hpp"

namespace tsmh {

/// Seeded generator with distribution helpers implemented here rather than via
/// <random> distributions, whose output is implementation-defined. Traces stay
/// bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in the open interval (0, 1).
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r < limit) return static_cast<std::size_t>(r % bound);
    }
  }

  /// Sample an index with probability proportional to exp(log_weights[i]).
  std::size_t categorical_log(std::span<const double> log_weights) {
    const double total = log_sum_exp(log_weights);
    if (total == kNegInf) throw std::invalid_argument("Rng::categorical_log: all weights are zero");
    double u = uniform();
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
      if (log_weights[i] == kNegInf) continue;
      last_positive = i;
      const double p = std::exp(log_weights[i] - total);
      if (u < p) return i;
      u -= p;
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tsmh
