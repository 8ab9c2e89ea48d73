#pragma once

// The PITOS goodness-of-fit test for a Uniform(0,1) null.
//
// For each pair (i, j) of a PairSequence the j-th order statistic is pushed
// through its CDF conditional on the i-th (or its marginal CDF when i == j),
// giving u_ij ~ Uniform(0,1) under the null. Each u_ij becomes a two-sided
// p-value 2 min(u, 1 - u); the p-values are merged with the Cauchy
// combination and the result is scaled by 1.15 and capped at 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pitos/quasirandom.hpp"
#include "pitos/special_functions.hpp"

namespace pitos {

/// A validated sample on [0, 1] together with its order statistics.
class OrderedSample {
 public:
  OrderedSample() = default;

  /// Throws std::invalid_argument on NaN or values outside [0, 1].
  explicit OrderedSample(std::vector<double> values) : raw_(std::move(values)) {
    for (std::size_t k = 0; k < raw_.size(); ++k) {
      const double v = raw_[k];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("sample value " + std::to_string(k + 1) + " (" + std::to_string(v) +
                                    ") is outside [0, 1]; map the data through the null CDF first");
      }
    }
    sorted_ = raw_;
    std::sort(sorted_.begin(), sorted_.end());
  }

  explicit OrderedSample(std::span<const double> values)
      : OrderedSample(std::vector<double>(values.begin(), values.end())) {}

  [[nodiscard]] const std::vector<double>& raw() const noexcept { return raw_; }
  [[nodiscard]] const std::vector<double>& sorted() const noexcept { return sorted_; }
  [[nodiscard]] std::size_t size() const noexcept { return raw_.size(); }
  [[nodiscard]] bool empty() const noexcept { return raw_.empty(); }

  /// 1-based order statistic X_(k).
  [[nodiscard]] double order_stat(std::size_t k) const { return sorted_.at(k - 1); }

 private:
  std::vector<double> raw_;
  std::vector<double> sorted_;
};

/// p-value attached to one entry of a pair sequence.
struct PairPValue {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double p = 1.0;
};

/// Outcome of one goodness-of-fit test.
struct TestVerdict {
  std::string test_name;
  /// Combined Cauchy statistic for PITOS; the raw statistic otherwise.
  double statistic = 0.0;
  /// The p-value used for rejection decisions (p* for PITOS).
  double p_value = 1.0;
  std::size_t n = 0;
  /// PITOS only: number of pairs and the p-value before the 1.15 correction.
  std::size_t m = 0;
  std::optional<double> p_uncorrected;
  std::optional<std::vector<PairPValue>> detail;
};

namespace detail {

inline void require_indices(std::size_t n, std::size_t i, std::size_t j) {
  if (n < 1 || i < 1 || j < 1 || i > n || j > n) {
    throw std::domain_error("order-statistic indices out of range: n=" + std::to_string(n) +
                            " i=" + std::to_string(i) + " j=" + std::to_string(j));
  }
}

// Shapes of the (conditional) beta law for the pair (i, j).
inline BetaParams pair_shapes(std::size_t n, std::size_t i, std::size_t j) {
  const auto nd = static_cast<double>(n);
  const auto id = static_cast<double>(i);
  const auto jd = static_cast<double>(j);
  if (i == j) return {jd, nd - jd + 1.0};
  if (i < j) return {jd - id, nd - jd + 1.0};
  return {jd, id - jd};
}

// Both tails of the conditional law of X_(j) at y given X_(i) = x.
inline TailPair conditional_os_tails(std::size_t i, std::size_t j, double x, double y, BetaParams shapes,
                                     double log_beta_ab) {
  double arg;
  double comp;
  if (i == j) {
    arg = y;
    comp = 1.0 - y;
  } else if (i < j) {
    // Conditioning on X_(i) = 1 forces X_(j) to 1 as well.
    if (x >= 1.0) return {1.0, 0.0};
    const double denom = 1.0 - x;
    arg = std::clamp((y - x) / denom, 0.0, 1.0);
    comp = std::clamp((1.0 - y) / denom, 0.0, 1.0);
  } else {
    // Conditioning on X_(i) = 0 forces X_(j) to 0; treated as u = 1.
    if (x <= 0.0) return {1.0, 0.0};
    arg = std::clamp(y / x, 0.0, 1.0);
    comp = std::clamp((x - y) / x, 0.0, 1.0);
  }
  return detail::beta_tails(arg, comp, shapes.a, shapes.b, log_beta_ab);
}

}  // namespace detail

/// CDF of X_(j) given X_(i) = x (marginal CDF of X_(j) when i == j) for n
/// i.i.d. Uniform(0,1) draws, evaluated at y.
inline double conditional_os_cdf(std::size_t n, std::size_t i, std::size_t j, double x, double y) {
  detail::require_indices(n, i, j);
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw std::domain_error("conditional_os_cdf arguments must lie in [0, 1]");
  }
  return detail::conditional_os_tails(i, j, x, y, detail::pair_shapes(n, i, j),
                                      std::numeric_limits<double>::quiet_NaN())
      .lower;
}

/// Lower clamp for per-pair p-values before the Cauchy quantile.
inline constexpr double kPairPValueFloor = 1e-15;
/// Multiplicative correction applied to the combined p-value.
inline constexpr double kPitosCorrection = 1.15;

struct PitosOptions {
  /// Evaluate each distinct (i, j) once and weight it by its multiplicity.
  bool cache_pairs = true;
  /// Keep the per-pair p-values (m entries) in the verdict.
  bool keep_detail = false;
};

/// A pair sequence prepared for repeated evaluation at a fixed n.
///
/// Summation order is fixed: with caching on, distinct pairs are summed in
/// (i, j) order, each term multiplied by its multiplicity;
/// with caching off, terms are summed in sequence order. Either way repeated
/// evaluations of the same sample are bitwise identical.
class PitosTest {
 public:
  explicit PitosTest(PairSequence pairs, PitosOptions options = {})
      : pairs_(std::move(pairs)), options_(options) {
    if (pairs_.n < 1) throw std::invalid_argument("pair sequence has n = 0");
    if (pairs_.pairs.empty()) throw std::invalid_argument("pair sequence is empty");
    // Counting sort by i, then by (j, position) within each row.
    const std::size_t n = pairs_.n;
    const std::size_t m = pairs_.pairs.size();
    std::vector<std::size_t> row_start(n + 2, 0);
    for (const IndexPair& pair : pairs_.pairs) {
      detail::require_indices(n, pair.i, pair.j);
      ++row_start[pair.i + 1];
    }
    for (std::size_t i = 1; i <= n + 1; ++i) row_start[i] += row_start[i - 1];
    std::vector<std::pair<std::uint32_t, std::uint32_t>> by_row(m);
    {
      std::vector<std::size_t> fill(row_start.begin(), row_start.end() - 1);
      for (std::size_t k = 0; k < m; ++k) {
        const IndexPair& pair = pairs_.pairs[k];
        by_row[fill[pair.i]++] = {pair.j, static_cast<std::uint32_t>(k)};
      }
    }
    slot_of_pair_.resize(m);
    entries_.reserve(m);
    for (std::size_t i = 1; i <= n; ++i) {
      const auto row_begin = by_row.begin() + static_cast<std::ptrdiff_t>(row_start[i]);
      const auto row_end = by_row.begin() + static_cast<std::ptrdiff_t>(row_start[i + 1]);
      std::sort(row_begin, row_end);
      for (auto it = row_begin; it != row_end; ++it) {
        if (it == row_begin || it->first != (it - 1)->first) {
          const auto ii = static_cast<std::uint32_t>(i);
          const BetaParams shapes = detail::pair_shapes(n, ii, it->first);
          entries_.push_back({ii, it->first, shapes, log_beta(shapes.a, shapes.b), 0.0});
        }
        entries_.back().count += 1.0;
        slot_of_pair_[it->second] = static_cast<std::uint32_t>(entries_.size() - 1);
      }
    }
  }

  /// Convenience: default pair sequence for samples of size n.
  explicit PitosTest(std::size_t n, PitosOptions options = {}) : PitosTest(generate_pairs(n), options) {}

  [[nodiscard]] std::size_t n() const noexcept { return pairs_.n; }
  [[nodiscard]] std::size_t m() const noexcept { return pairs_.pairs.size(); }
  [[nodiscard]] std::size_t distinct_pairs() const noexcept { return entries_.size(); }
  [[nodiscard]] const PairSequence& pairs() const noexcept { return pairs_; }
  [[nodiscard]] const PitosOptions& options() const noexcept { return options_; }

  [[nodiscard]] TestVerdict evaluate(const OrderedSample& sample) const {
    if (sample.size() != pairs_.n) {
      throw std::invalid_argument("sample size " + std::to_string(sample.size()) +
                                  " does not match pair sequence n = " + std::to_string(pairs_.n));
    }
    const std::vector<double>& xs = sample.sorted();

    std::vector<double> entry_p;
    if (options_.cache_pairs || options_.keep_detail) entry_p.resize(entries_.size());

    double sum = 0.0;
    if (options_.cache_pairs) {
      for (std::size_t e = 0; e < entries_.size(); ++e) {
        const double p = pair_p_value(entries_[e], xs);
        entry_p[e] = p;
        sum += entries_[e].count * cauchy_upper_quantile(clamp_p(p));
      }
    } else {
      if (options_.keep_detail) {
        for (std::size_t e = 0; e < entries_.size(); ++e) entry_p[e] = pair_p_value(entries_[e], xs);
      }
      for (std::size_t k = 0; k < pairs_.pairs.size(); ++k) {
        const Entry& entry = entries_[slot_of_pair_[k]];
        const double p = options_.keep_detail ? entry_p[slot_of_pair_[k]] : pair_p_value(entry, xs);
        sum += cauchy_upper_quantile(clamp_p(p));
      }
    }

    const double statistic = sum / static_cast<double>(pairs_.pairs.size());
    const double p = cauchy_sf(statistic);

    TestVerdict verdict;
    verdict.test_name = "PITOS";
    verdict.statistic = statistic;
    verdict.p_uncorrected = p;
    verdict.p_value = std::min(1.0, kPitosCorrection * p);
    verdict.n = pairs_.n;
    verdict.m = pairs_.pairs.size();
    if (options_.keep_detail) {
      std::vector<PairPValue> detail;
      detail.reserve(pairs_.pairs.size());
      for (std::size_t k = 0; k < pairs_.pairs.size(); ++k) {
        detail.push_back({pairs_.pairs[k].i, pairs_.pairs[k].j, entry_p[slot_of_pair_[k]]});
      }
      verdict.detail = std::move(detail);
    }
    return verdict;
  }

  /// u_ij for one pair of this sequence's n on a given sample.
  [[nodiscard]] double pair_u(const OrderedSample& sample, std::uint32_t i, std::uint32_t j) const {
    detail::require_indices(pairs_.n, i, j);
    const BetaParams shapes = detail::pair_shapes(pairs_.n, i, j);
    return detail::conditional_os_tails(i, j, sample.order_stat(i), sample.order_stat(j), shapes,
                                        log_beta(shapes.a, shapes.b))
        .lower;
  }

 private:
  struct Entry {
    std::uint32_t i;
    std::uint32_t j;
    BetaParams shapes;
    double log_beta;
    double count;
  };

  static double clamp_p(double p) { return std::clamp(p, kPairPValueFloor, 1.0 - kPairPValueFloor); }

  static double pair_p_value(const Entry& entry, const std::vector<double>& xs) {
    const TailPair tails =
        detail::conditional_os_tails(entry.i, entry.j, xs[entry.i - 1], xs[entry.j - 1], entry.shapes,
                                     entry.log_beta);
    return std::min(1.0, 2.0 * std::min(tails.lower, tails.upper));
  }

  PairSequence pairs_;
  PitosOptions options_;
  std::vector<Entry> entries_;
  std::vector<std::uint32_t> slot_of_pair_;
};

/// One-shot PITOS evaluation of `sample` over `pairs`.
inline TestVerdict pitos_p_value(const OrderedSample& sample, const PairSequence& pairs,
                                 PitosOptions options = {}) {
  if (pairs.n != sample.size()) {
    throw std::invalid_argument("pair sequence n does not match the sample size");
  }
  return PitosTest(pairs, options).evaluate(sample);
}

/// PITOS with the default pair sequence for the sample's size.
inline TestVerdict pitos_p_value(const OrderedSample& sample, PitosOptions options = {}) {
  return pitos_p_value(sample, generate_pairs(sample.size()), options);
}

}  // namespace pitos
