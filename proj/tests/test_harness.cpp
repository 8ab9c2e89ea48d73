#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>

#include "pitos/harness.hpp"

namespace {

pitos::HarnessConfig small_config(unsigned threads = 1) {
  pitos::HarnessConfig c;
  c.null_replicates = 2000;
  c.threads = threads;
  return c;
}

}  // namespace

TEST(Power, TypeOneErrorOnUniform) {
  const auto uniform = pitos::make_uniform();
  const auto reports =
      pitos::estimate_power(uniform, pitos::default_test_roster(), 30, 0.05, 2000, 11, small_config());
  ASSERT_EQ(reports.size(), 5u);
  for (const auto& r : reports) {
    const double se = std::sqrt(0.05 * 0.95 / 2000);
    if (r.test == "PITOS") {
      // The corrected p is conservative.
      EXPECT_LE(r.rejection_rate, 0.05 + 4 * se) << r.test;
    } else {
      EXPECT_NEAR(r.rejection_rate, 0.05, 4 * se) << r.test;
    }
    EXPECT_EQ(r.failures, 0u);
    EXPECT_EQ(r.replicates, 2000u);
    EXPECT_EQ(r.distribution, "uniform");
  }
}

TEST(Power, LikelihoodRatioAgainstUniformNeverRejects) {
  const auto uniform = pitos::make_uniform();
  const auto r = pitos::estimate_power(uniform, "lrt", 20, 0.05, 500, 3, small_config());
  EXPECT_EQ(r.test, "LRT");
  EXPECT_EQ(r.rejections, 0u);
}

TEST(Power, DetectsAnObviousAlternative) {
  const auto d = pitos::zoo_lookup("beta(0.6,0.6)");
  const std::string tests[] = {"pitos", "ad", "lrt"};
  for (const auto& r : pitos::estimate_power(d, tests, 200, 0.05, 200, 5, small_config())) {
    EXPECT_GT(r.rejection_rate, 0.5) << r.test;
  }
}

TEST(Power, ThreadCountDoesNotChangeResults) {
  const auto d = pitos::zoo_lookup("beta(1.2,0.8)");
  const auto one = pitos::estimate_power(d, pitos::default_test_roster(), 40, 0.05, 300, 8, small_config(1));
  const auto three = pitos::estimate_power(d, pitos::default_test_roster(), 40, 0.05, 300, 8, small_config(3));
  ASSERT_EQ(one.size(), three.size());
  for (std::size_t k = 0; k < one.size(); ++k) {
    EXPECT_EQ(one[k].rejections, three[k].rejections) << one[k].test;
    EXPECT_EQ(one[k].rejection_rate, three[k].rejection_rate);
  }
}

TEST(Power, EveryTestSeesTheSameData) {
  const auto d = pitos::zoo_lookup("phi-laplace");
  std::mutex m;
  std::vector<std::vector<double>> seen(100 * 5);
  pitos::estimate_power(d, pitos::default_test_roster(), 15, 0.05, 100, 2, small_config(2),
                        [&](std::size_t r, std::size_t k, const pitos::OrderedSample& s) {
                          std::lock_guard lock(m);
                          seen[r * 5 + k] = s.sorted();
                        });
  for (std::size_t r = 0; r < 100; ++r) {
    for (std::size_t k = 1; k < 5; ++k) EXPECT_EQ(seen[r * 5], seen[r * 5 + k]) << r;
    if (r > 0) EXPECT_NE(seen[r * 5], seen[(r - 1) * 5]);
  }
}

TEST(Power, ArgumentChecks) {
  const auto u = pitos::make_uniform();
  EXPECT_THROW(pitos::estimate_power(u, "ad", 10, 0.0, 10, 1, small_config()), std::invalid_argument);
  EXPECT_THROW(pitos::estimate_power(u, "ad", 10, 0.05, 0, 1, small_config()), std::invalid_argument);
  EXPECT_THROW(pitos::estimate_power(u, "nope", 10, 0.05, 10, 1, small_config()), std::invalid_argument);
  const auto du = pitos::make_discrete_uniform_99();
  EXPECT_THROW(pitos::estimate_power(du, "lrt", 10, 0.05, 10, 1, small_config()), std::invalid_argument);
}

TEST(Power, CurveFollowsGridOrder) {
  const auto d = pitos::zoo_lookup("beta(1.6,1.6)");
  const std::string tests[] = {"ks", "cvm"};
  const std::size_t grid[] = {50, 10, 30};
  const auto curve = pitos::power_curve(d, tests, grid, 0.05, 50, 1, small_config());
  ASSERT_EQ(curve.size(), 6u);
  EXPECT_EQ(curve[0].n, 50u);
  EXPECT_EQ(curve[2].n, 10u);
  EXPECT_EQ(curve[5].n, 30u);
  EXPECT_EQ(curve[5].test, "CvM");
}

TEST(FailurePolicy, ThresholdIsOnePerThousand) {
  EXPECT_NO_THROW(pitos::detail::check_failures(0, 10, "x"));
  EXPECT_NO_THROW(pitos::detail::check_failures(2, 2000, "x"));
  EXPECT_THROW(pitos::detail::check_failures(3, 2000, "x"), std::runtime_error);
  EXPECT_THROW(pitos::detail::check_failures(1, 500, "x"), std::runtime_error);
}

TEST(FailurePolicy, FailedReplicatesCountAsNonRejections) {
  // The null build makes 2000 * 10 density calls first; then one replicate throws.
  const auto base = pitos::make_uniform();
  std::atomic<int> calls{0};
  pitos::DistributionSpec d = base;
  d.name = "flaky";
  d.log_density = [&calls](double) {
    if (calls.fetch_add(1) == 2000 * 10 + 5) throw std::runtime_error("boom");
    return 0.0;
  };
  pitos::HarnessConfig c = small_config();
  const auto r = pitos::estimate_power(d, "lrt", 10, 0.05, 2000, 4, c);
  EXPECT_EQ(r.failures, 1u);
  EXPECT_EQ(r.rejections, 0u);
}

TEST(Ranks, AverageRanksDescending) {
  const double v[] = {0.2, 0.9, 0.2, 0.5};
  EXPECT_EQ(pitos::average_ranks_descending(v), (std::vector<double>{3.5, 1.0, 3.5, 2.0}));
  const double all_equal[] = {0.1, 0.1, 0.1};
  EXPECT_EQ(pitos::average_ranks_descending(all_equal), (std::vector<double>{2.0, 2.0, 2.0}));
}

TEST(Ranks, StudyFrequenciesAreDistributions) {
  const auto s = pitos::scenario_study(pitos::Scenario::RandomGap, 6, 60, 40, 0.05, 9, small_config());
  ASSERT_EQ(s.tests.size(), 5u);
  EXPECT_EQ(s.scenario, "random-gap");
  EXPECT_EQ(s.distributions.size(), 6u);
  double mean_rank_total = 0.0;
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_NEAR(std::accumulate(s.rank_frequency[t].begin(), s.rank_frequency[t].end(), 0.0), 1.0, 1e-12);
    mean_rank_total += s.mean_rank[t];
    double weighted = 0.0;
    for (std::size_t r = 0; r < 5; ++r) weighted += (r + 1) * s.rank_frequency[t][r];
    EXPECT_NEAR(weighted, s.mean_rank[t], 1e-12);
  }
  // Ranks 1..5 always sum to 15.
  EXPECT_NEAR(mean_rank_total, 15.0, 1e-12);
  for (std::size_t r = 0; r < 5; ++r) {
    double column = 0.0;
    for (std::size_t t = 0; t < 5; ++t) column += s.rank_frequency[t][r];
    EXPECT_NEAR(column, 1.0, 1e-12);
  }
}

TEST(Ranks, StudyIsReproducible) {
  const auto a = pitos::scenario_study(pitos::Scenario::Outliers, 3, 40, 30, 0.05, 2, small_config(1));
  const auto b = pitos::scenario_study(pitos::Scenario::Outliers, 3, 40, 30, 0.05, 2, small_config(2));
  EXPECT_EQ(a.power, b.power);
  EXPECT_EQ(a.rank_frequency, b.rank_frequency);
  for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(a.distributions[d].name, b.distributions[d].name);
}

TEST(Calibration, MonotoneAndBounded) {
  const double grid[] = {0.01, 0.05, 0.1, 0.5, 1.0};
  const auto pts = pitos::null_pvalue_cdf("pitos", 30, 1000, 4, grid, small_config());
  ASSERT_EQ(pts.size(), 5u);
  double prev = 0.0;
  for (const auto& p : pts) {
    ASSERT_TRUE(p.cdf_uncorrected.has_value());
    EXPECT_GE(p.cdf, prev);
    EXPECT_LE(p.cdf, *p.cdf_uncorrected);
    prev = p.cdf;
  }
  EXPECT_EQ(pts.back().cdf, 1.0);
  const auto ad = pitos::null_pvalue_cdf("ad", 30, 1000, 4, grid, small_config());
  EXPECT_FALSE(ad.front().cdf_uncorrected.has_value());
  EXPECT_NEAR(ad[1].cdf, 0.05, 4 * std::sqrt(0.05 * 0.95 / 1000));
  const double bad[] = {1.5};
  EXPECT_THROW(pitos::null_pvalue_cdf("ad", 30, 10, 4, bad, small_config()), std::invalid_argument);
}

TEST(Battery, RandomPairsKeepTheCount) {
  pitos::HarnessConfig c = small_config();
  c.random_pairs = true;
  const std::string tests[] = {"pitos"};
  const pitos::TestBattery battery(tests, 50, 3, c);
  const auto v = battery.evaluate(0, pitos::OrderedSample(std::vector<double>(50, 0.5)));
  EXPECT_EQ(v.m, pitos::default_pair_count(50));
}
