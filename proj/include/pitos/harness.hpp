#pragma once

// Monte Carlo harness: power estimates, power curves, scenario rank studies
// and null p-value calibration.
//
// Streams:
//   data set r of a power run       H(seed, tag(dist.name), n, r)
//   scenario draw d                 H(seed, tag(scenario), d, tag("draw"))
//   data set r of scenario draw d   H(seed, tag(scenario), d, r)
//   calibration replicate r         H(seed, tag("calibrate"), n, r)
//   empirical null replicate b      H(null_seed, tag("null"), tag(test), n, b)
// Every test in a replicate sees the same data set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pitos/classic_tests.hpp"
#include "pitos/distributions.hpp"
#include "pitos/parallel.hpp"
#include "pitos/pitos.hpp"
#include "pitos/quasirandom.hpp"
#include "pitos/random.hpp"

namespace pitos {

inline const std::vector<std::string>& default_test_roster() {
  static const std::vector<std::string> roster = {"pitos", "ad", "nb", "ks", "cvm"};
  return roster;
}

struct HarnessConfig {
  /// B for the classical tests' empirical nulls.
  std::size_t null_replicates = 20'000;
  /// Seed for the empirical nulls; the run seed when unset.
  std::optional<std::uint64_t> null_seed;
  unsigned threads = 1;
  NullCache cache;
  /// Experiment: uniform random pairs instead of warped Halton pairs.
  bool random_pairs = false;
};

/// Called before each test evaluation with the replicate's data. May run on
/// worker threads.
using ReplicateObserver =
    std::function<void(std::size_t replicate, std::size_t test_index, const OrderedSample& sample)>;

/// The tests of a roster, prepared for samples of one size.
class TestBattery {
 public:
  /// `alternative` supplies the density for "lrt"; it is required only then.
  TestBattery(std::span<const std::string> tests, std::size_t n, std::uint64_t seed, const HarnessConfig& config,
              const DistributionSpec* alternative = nullptr)
      : n_(n) {
    if (tests.empty()) throw std::invalid_argument("test roster is empty");
    const std::uint64_t null_seed = config.null_seed.value_or(seed);
    for (const std::string& raw : tests) {
      Slot slot;
      slot.id = canonical_test_name(raw);
      slot.label = test_label(slot.id);
      if (slot.id == "pitos") {
        if (config.random_pairs) {
          Rng rng(derive_stream(seed, tag("pairs"), n));
          slot.pitos.emplace(generate_random_pairs(n, [&rng] { return rng.uniform(); }));
        } else {
          slot.pitos.emplace(n);
        }
      } else if (slot.id == "lrt") {
        if (alternative == nullptr || !alternative->has_density()) {
          throw std::invalid_argument("lrt needs an alternative with a density");
        }
        slot.statistic = [log_density = alternative->log_density](const OrderedSample& s) {
          return lrt_statistic(s, log_density);
        };
        // Keyed by the alternative, so never shared through the disk cache.
        slot.null = build_empirical_null("lrt", slot.statistic, n, config.null_replicates, null_seed,
                                         config.threads);
      } else {
        slot.statistic = classic_statistic(slot.id);
        slot.null = config.cache.enabled()
                        ? config.cache.load_or_build(slot.id, n, config.null_replicates, null_seed, config.threads)
                        : build_empirical_null(slot.id, n, config.null_replicates, null_seed, config.threads);
      }
      slots_.push_back(std::move(slot));
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return slots_.size(); }
  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] const std::string& id(std::size_t k) const { return slots_.at(k).id; }
  [[nodiscard]] const std::string& label(std::size_t k) const { return slots_.at(k).label; }

  [[nodiscard]] TestVerdict evaluate(std::size_t k, const OrderedSample& sample) const {
    const Slot& slot = slots_.at(k);
    if (slot.pitos) return slot.pitos->evaluate(sample);
    TestVerdict v;
    v.test_name = slot.label;
    v.statistic = slot.statistic(sample);
    v.p_value = empirical_p_value(*slot.null, v.statistic);
    v.n = sample.size();
    return v;
  }

 private:
  struct Slot {
    std::string id;
    std::string label;
    std::optional<PitosTest> pitos;
    Statistic statistic;
    std::optional<EmpiricalNull> null;
  };

  std::size_t n_;
  std::vector<Slot> slots_;
};

struct PowerReport {
  std::string distribution;
  std::vector<std::pair<std::string, double>> parameters;
  std::string test;
  std::size_t n = 0;
  double alpha = 0.05;
  double rejection_rate = 0.0;
  std::size_t rejections = 0;
  std::size_t replicates = 0;
  /// Replicates whose evaluation threw; counted as non-rejections.
  std::size_t failures = 0;
  double mc_std_err = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

struct Outcome {
  double p = 1.0;
  double p_uncorrected = 1.0;
  bool failed = false;
};

// outcomes[r * tests + k] for replicate r and test k.
template <class StreamOf>
std::vector<Outcome> run_replicates(const DistributionSpec& dist, const TestBattery& battery, std::size_t replicates,
                                    StreamOf&& stream_of, unsigned threads, const ReplicateObserver& observer) {
  const std::size_t tests = battery.size();
  std::vector<Outcome> outcomes(replicates * tests);
  parallel_for(replicates, threads, [&](std::size_t r) {
    Rng rng(stream_of(r));
    const OrderedSample sample(dist.sample(rng, battery.n()));
    for (std::size_t k = 0; k < tests; ++k) {
      if (observer) observer(r, k, sample);
      Outcome& out = outcomes[r * tests + k];
      try {
        const TestVerdict v = battery.evaluate(k, sample);
        out.p = v.p_value;
        out.p_uncorrected = v.p_uncorrected.value_or(v.p_value);
      } catch (const std::exception&) {
        out.failed = true;
      }
    }
  });
  return outcomes;
}

inline void check_failures(std::size_t failures, std::size_t replicates, const std::string& what) {
  if (failures == 0) return;
  if (static_cast<double>(failures) > 0.001 * static_cast<double>(replicates)) {
    throw std::runtime_error(what + ": " + std::to_string(failures) + " of " + std::to_string(replicates) +
                             " replicates failed");
  }
  std::clog << "warning: " << what << ": " << failures << " of " << replicates
            << " replicates failed and were counted as non-rejections\n";
}

inline std::vector<PowerReport> summarize_power(const DistributionSpec& dist, const TestBattery& battery,
                                                const std::vector<Outcome>& outcomes, std::size_t replicates,
                                                double alpha, std::uint64_t seed) {
  std::vector<PowerReport> reports;
  for (std::size_t k = 0; k < battery.size(); ++k) {
    PowerReport rep;
    rep.distribution = dist.name;
    rep.parameters = dist.parameters;
    rep.test = battery.label(k);
    rep.n = battery.n();
    rep.alpha = alpha;
    rep.replicates = replicates;
    rep.seed = seed;
    for (std::size_t r = 0; r < replicates; ++r) {
      const Outcome& o = outcomes[r * battery.size() + k];
      if (o.failed) {
        ++rep.failures;
      } else if (o.p <= alpha) {
        ++rep.rejections;
      }
    }
    check_failures(rep.failures, replicates, rep.test + " on " + dist.name);
    rep.rejection_rate = static_cast<double>(rep.rejections) / static_cast<double>(replicates);
    rep.mc_std_err = std::sqrt(rep.rejection_rate * (1.0 - rep.rejection_rate) / static_cast<double>(replicates));
    reports.push_back(std::move(rep));
  }
  return reports;
}

inline void check_power_args(double alpha, std::size_t replicates) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
}

}  // namespace detail

/// Power of each test in `tests` on the same simulated data sets.
inline std::vector<PowerReport> estimate_power(const DistributionSpec& dist, std::span<const std::string> tests,
                                               std::size_t n, double alpha, std::size_t replicates,
                                               std::uint64_t seed, const HarnessConfig& config = {},
                                               const ReplicateObserver& observer = {}) {
  detail::check_power_args(alpha, replicates);
  const TestBattery battery(tests, n, seed, config, &dist);
  const std::uint64_t dist_tag = tag(dist.name);
  const auto outcomes = detail::run_replicates(
      dist, battery, replicates, [&](std::size_t r) { return derive_stream(seed, dist_tag, n, r); }, config.threads,
      observer);
  return detail::summarize_power(dist, battery, outcomes, replicates, alpha, seed);
}

inline PowerReport estimate_power(const DistributionSpec& dist, const std::string& test, std::size_t n,
                                  double alpha, std::size_t replicates, std::uint64_t seed,
                                  const HarnessConfig& config = {}) {
  const std::string roster[] = {test};
  return estimate_power(dist, roster, n, alpha, replicates, seed, config).front();
}

/// estimate_power for each n in the grid, in grid order.
inline std::vector<PowerReport> power_curve(const DistributionSpec& dist, std::span<const std::string> tests,
                                            std::span<const std::size_t> n_grid, double alpha,
                                            std::size_t replicates, std::uint64_t seed,
                                            const HarnessConfig& config = {}) {
  std::vector<PowerReport> all;
  for (std::size_t n : n_grid) {
    auto reports = estimate_power(dist, tests, n, alpha, replicates, seed, config);
    all.insert(all.end(), reports.begin(), reports.end());
  }
  return all;
}

struct RankSummary {
  std::string scenario;
  std::vector<std::string> tests;
  /// rank_frequency[t][r]: share of distributions where test t took rank r + 1.
  std::vector<std::vector<double>> rank_frequency;
  std::vector<double> average_power;
  std::vector<double> mean_rank;
  /// Per drawn distribution: its spec name, parameters and per-test power.
  std::vector<DistributionSpec> distributions;
  std::vector<std::vector<double>> power;
};

/// Ranks of `values` in decreasing order (1 = largest), ties averaged.
inline std::vector<double> average_ranks_descending(std::span<const double> values) {
  const std::size_t k = values.size();
  std::vector<std::size_t> order(k);
  for (std::size_t t = 0; t < k; ++t) order[t] = t;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
  std::vector<double> ranks(k);
  std::size_t start = 0;
  while (start < k) {
    std::size_t end = start + 1;
    while (end < k && values[order[end]] == values[order[start]]) ++end;
    const double avg = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t q = start; q < end; ++q) ranks[order[q]] = avg;
    start = end;
  }
  return ranks;
}

/// Draws `num_distributions` laws from a scenario and ranks the tests by power on each.
inline RankSummary scenario_study(Scenario scenario, std::size_t num_distributions,
                                  std::size_t replicates_per_distribution, std::size_t n, double alpha,
                                  std::uint64_t seed, const HarnessConfig& config = {},
                                  std::span<const std::string> tests = default_test_roster()) {
  detail::check_power_args(alpha, replicates_per_distribution);
  if (num_distributions < 1) throw std::invalid_argument("num_distributions must be >= 1");
  const TestBattery battery(tests, n, seed, config);
  const std::size_t k = battery.size();
  const std::uint64_t scenario_tag = tag(scenario_name(scenario));

  RankSummary summary;
  summary.scenario = std::string(scenario_name(scenario));
  for (std::size_t t = 0; t < k; ++t) summary.tests.push_back(battery.label(t));
  summary.rank_frequency.assign(k, std::vector<double>(k, 0.0));
  summary.average_power.assign(k, 0.0);
  summary.mean_rank.assign(k, 0.0);

  for (std::size_t d = 0; d < num_distributions; ++d) {
    Rng draw_rng(derive_stream(seed, scenario_tag, d, tag("draw")));
    DistributionSpec dist = draw_scenario_distribution(scenario, draw_rng);
    const auto outcomes = detail::run_replicates(
        dist, battery, replicates_per_distribution,
        [&](std::size_t r) { return derive_stream(seed, scenario_tag, d, r); }, config.threads, {});
    const auto reports = detail::summarize_power(dist, battery, outcomes, replicates_per_distribution, alpha, seed);
    std::vector<double> power(k);
    for (std::size_t t = 0; t < k; ++t) power[t] = reports[t].rejection_rate;

    const std::vector<double> ranks = average_ranks_descending(power);
    for (std::size_t t = 0; t < k; ++t) {
      // A tie spanning ranks lo..hi shares this distribution's mass evenly.
      std::size_t tied = 0;
      for (std::size_t s = 0; s < k; ++s) tied += (power[s] == power[t]) ? 1 : 0;
      const double lo = ranks[t] - 0.5 * static_cast<double>(tied - 1);
      for (std::size_t q = 0; q < tied; ++q) {
        summary.rank_frequency[t][static_cast<std::size_t>(lo) - 1 + q] += 1.0 / static_cast<double>(tied);
      }
      summary.average_power[t] += power[t];
      summary.mean_rank[t] += ranks[t];
    }
    summary.distributions.push_back(std::move(dist));
    summary.power.push_back(std::move(power));
  }

  const double count = static_cast<double>(num_distributions);
  for (std::size_t t = 0; t < k; ++t) {
    for (double& f : summary.rank_frequency[t]) f /= count;
    summary.average_power[t] /= count;
    summary.mean_rank[t] /= count;
  }
  return summary;
}

struct CalibrationPoint {
  double threshold = 0.0;
  /// Share of null p-values <= threshold (p* for PITOS).
  double cdf = 0.0;
  /// PITOS only: the same for the uncorrected p.
  std::optional<double> cdf_uncorrected;
};

/// Empirical CDF of null p-values on a grid of thresholds.
inline std::vector<CalibrationPoint> null_pvalue_cdf(const std::string& test, std::size_t n, std::size_t replicates,
                                                     std::uint64_t seed, std::span<const double> grid,
                                                     const HarnessConfig& config = {}) {
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  for (double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("calibration thresholds must lie in [0, 1]");
  }
  const std::string roster[] = {test};
  const TestBattery battery(roster, n, seed, config);
  const DistributionSpec uniform = make_uniform();
  const auto outcomes = detail::run_replicates(
      uniform, battery, replicates, [&](std::size_t r) { return derive_stream(seed, tag("calibrate"), n, r); },
      config.threads, {});

  std::vector<double> p;
  std::vector<double> p_unc;
  std::size_t failures = 0;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++failures;
      continue;
    }
    p.push_back(o.p);
    p_unc.push_back(o.p_uncorrected);
  }
  detail::check_failures(failures, replicates, battery.label(0) + " calibration");
  std::sort(p.begin(), p.end());
  std::sort(p_unc.begin(), p_unc.end());
  const bool is_pitos = battery.id(0) == "pitos";
  const auto share_at_most = [&](const std::vector<double>& sorted, double t) {
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    return static_cast<double>(count) / static_cast<double>(replicates);
  };

  std::vector<CalibrationPoint> points;
  for (double t : grid) {
    CalibrationPoint pt;
    pt.threshold = t;
    pt.cdf = share_at_most(p, t);
    if (is_pitos) pt.cdf_uncorrected = share_at_most(p_unc, t);
    points.push_back(pt);
  }
  return points;
}

}  // namespace pitos
