#pragma once

// Halton points and the default PITOS pair sequence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pitos/special_functions.hpp"

namespace pitos {

/// Radical inverse of `index` in `base`: the index-th element of the
/// one-dimensional Halton sequence. Digits are accumulated as an integer
/// numerator over base^k, so the result is the correctly rounded fraction.
inline double halton(std::uint64_t index, std::uint64_t base) {
  if (index < 1) throw std::domain_error("halton index must be >= 1");
  if (base < 2) throw std::domain_error("halton base must be >= 2");
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  while (index > 0) {
    denominator *= base;
    numerator = numerator * base + index % base;
    index /= base;
  }
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

/// One (i, j) index pair, 1-based.
struct IndexPair {
  std::uint32_t i = 1;
  std::uint32_t j = 1;

  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

/// Ordered list of pairs that drives a PITOS evaluation for samples of size n.
struct PairSequence {
  std::size_t n = 0;
  std::vector<IndexPair> pairs;
  /// False when the sequence did not come from the default generator; the
  /// 1.15 correction was calibrated only for the default.
  bool is_default = true;

  [[nodiscard]] std::size_t m() const noexcept { return pairs.size(); }

  friend bool operator==(const PairSequence&, const PairSequence&) = default;
};

/// Quantile function mapping Halton coordinates onto [0, 1].
using WarpQuantile = std::function<double(double)>;

/// m = ceil(10 n ln n) + n.
inline std::size_t default_pair_count(std::size_t n) {
  if (n < 1) throw std::domain_error("pair sequences need n >= 1");
  const double nd = static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(10.0 * nd * std::log(nd))) + n;
}

namespace detail {

inline std::uint32_t discretize_index(double warped, std::size_t n) {
  const double scaled = std::ceil(static_cast<double>(n) * warped);
  if (!(scaled >= 1.0)) return 1;
  if (scaled > static_cast<double>(n)) return static_cast<std::uint32_t>(n);
  return static_cast<std::uint32_t>(scaled);
}

}  // namespace detail

/// Pair sequence from warped 2-D Halton points (bases 2 and 3) followed by the
/// n diagonal pairs (1,1), ..., (n,n).
inline PairSequence generate_pairs(std::size_t n, const WarpQuantile& warp) {
  const std::size_t m = default_pair_count(n);
  PairSequence seq;
  seq.n = n;
  seq.is_default = false;
  seq.pairs.reserve(m);
  for (std::size_t k = 1; k + n <= m; ++k) {
    const double u = halton(k, 2);
    const double v = halton(k, 3);
    seq.pairs.push_back({detail::discretize_index(warp(u), n), detail::discretize_index(warp(v), n)});
  }
  for (std::size_t r = 1; r <= n; ++r) {
    const auto idx = static_cast<std::uint32_t>(r);
    seq.pairs.push_back({idx, idx});
  }
  return seq;
}

/// Default sequence: Halton coordinates warped through the Beta(0.7, 0.7)
/// quantile, which puts extra mass near the edges of the index square.
///
/// ceil(n F^-1(v)) is the smallest i >= 1 with F(i / n) >= v, so the indices
/// come from a table of F on the grid i / n instead of one inversion per
/// coordinate.
inline PairSequence generate_pairs(std::size_t n) {
  constexpr BetaParams warp{0.7, 0.7};
  const std::size_t m = default_pair_count(n);
  std::vector<double> grid_cdf(n);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 1; i < n; ++i) grid_cdf[i - 1] = beta_cdf(static_cast<double>(i) / nd, warp);
  grid_cdf[n - 1] = 1.0;
  // first[b]: lower_bound of b / n, so v in bucket b searches a short run.
  std::vector<std::uint32_t> first(n + 1);
  for (std::size_t b = 0; b <= n; ++b) {
    const double edge = static_cast<double>(b) / nd;
    first[b] = static_cast<std::uint32_t>(std::lower_bound(grid_cdf.begin(), grid_cdf.end(), edge) -
                                          grid_cdf.begin());
  }
  const auto index_of = [&](double v) {
    const auto b = std::min(static_cast<std::size_t>(v * nd), n - 1);
    // v * n may round across a bucket edge; widen the range by one bucket each side.
    const auto lo = grid_cdf.begin() + first[b == 0 ? 0 : b - 1];
    const auto hi = grid_cdf.begin() + std::min<std::size_t>(first[std::min(b + 2, n)] + 1, n);
    const auto it = std::lower_bound(lo, hi, v);
    return static_cast<std::uint32_t>(it - grid_cdf.begin()) + 1;
  };

  PairSequence seq;
  seq.n = n;
  seq.is_default = true;
  seq.pairs.reserve(m);
  for (std::size_t k = 1; k + n <= m; ++k) {
    seq.pairs.push_back({index_of(halton(k, 2)), index_of(halton(k, 3))});
  }
  for (std::size_t r = 1; r <= n; ++r) {
    const auto idx = static_cast<std::uint32_t>(r);
    seq.pairs.push_back({idx, idx});
  }
  return seq;
}

/// Pairs drawn from uniform random points instead of Halton points. Used
/// only as a harness experiment; `uniform01` supplies draws in (0, 1).
template <class UniformSource>
PairSequence generate_random_pairs(std::size_t n, UniformSource&& uniform01) {
  constexpr BetaParams warp{0.7, 0.7};
  const std::size_t m = default_pair_count(n);
  PairSequence seq;
  seq.n = n;
  seq.is_default = false;
  seq.pairs.reserve(m);
  for (std::size_t k = 1; k + n <= m; ++k) {
    const double u = uniform01();
    const double v = uniform01();
    seq.pairs.push_back({detail::discretize_index(beta_inv_cdf(u, warp), n),
                         detail::discretize_index(beta_inv_cdf(v, warp), n)});
  }
  for (std::size_t r = 1; r <= n; ++r) {
    const auto idx = static_cast<std::uint32_t>(r);
    seq.pairs.push_back({idx, idx});
  }
  return seq;
}

}  // namespace pitos
