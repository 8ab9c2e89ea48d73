#pragma once

// Seeded random streams and the variate generators used by the samplers.
//
// Every simulation unit (one null replicate, one data set, one scenario
// draw) gets its own engine seeded with derive_stream(seed, tags...), a
// SplitMix64-style hash of the run seed and the unit's coordinates. Results
// therefore never depend on how work is split across threads.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. Variates are generated here rather than with <random>
// distributions, whose algorithms are implementation-defined.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "pitos/special_functions.hpp"

namespace pitos {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a hash, used to turn names into stream tags.
constexpr std::uint64_t tag(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// stream = H(seed, k1, k2, ...), folding each coordinate through mix64.
template <class... Keys>
constexpr std::uint64_t derive_stream(std::uint64_t seed, Keys... keys) noexcept {
  std::uint64_t h = mix64(seed);
  ((h = mix64(h ^ static_cast<std::uint64_t>(keys))), ...);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t stream) : engine_(stream) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53; }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in {0, ..., count - 1}.
  std::uint64_t index(std::uint64_t count) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(count)) % count;
  }

  double normal() { return normal_quantile(uniform()); }

  double laplace() {
    const double u = uniform();
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
  }

  /// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
  double log_gamma_variate(double shape) {
    if (shape < 1.0) {
      // G(shape) = G(shape + 1) * U^(1/shape).
      return log_gamma_variate(shape + 1.0) + std::log(uniform()) / shape;
    }
    // Marsaglia-Tsang.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d * v);
    }
  }

  /// Gamma with density x^(shape-1) exp(-x/scale) / (scale^shape Gamma(shape)).
  double gamma(double shape, double scale) { return scale * std::exp(log_gamma_variate(shape)); }

  /// Beta(a, b) via the ratio of gamma draws, formed in log space.
  double beta(double a, double b) {
    const double la = log_gamma_variate(a);
    const double lb = log_gamma_variate(b);
    return 1.0 / (1.0 + std::exp(lb - la));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pitos
