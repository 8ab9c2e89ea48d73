#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <map>
#include <numbers>

#include "pitos/classic_tests.hpp"
#include "pitos/distributions.hpp"

namespace {

// Integrates the density over [0, 1], split at the listed breakpoints.
double total_mass(const pitos::DistributionSpec& d, std::vector<double> breaks) {
  breaks.insert(breaks.begin(), 0.0);
  breaks.push_back(1.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (breaks[k + 1] <= breaks[k]) continue;
    total += ts.integrate([&](double x) { return d.density(x); }, breaks[k], breaks[k + 1]);
  }
  return total;
}

// KS distance between n draws and the distribution's CDF.
double sample_cdf_distance(const pitos::DistributionSpec& d, std::size_t n, std::uint64_t seed) {
  pitos::Rng rng(seed);
  std::vector<double> u(n);
  for (double& v : u) v = d.cdf(d.sample(rng));
  return pitos::ks_statistic(pitos::OrderedSample(u));
}

}  // namespace

TEST(Zoo, Uniform) {
  const auto d = pitos::zoo_lookup("uniform");
  EXPECT_EQ(d.density(0.3), 1.0);
  EXPECT_EQ(d.cdf(0.3), 0.3);
}

TEST(Zoo, PhiLaplaceDensityAtHalf) {
  const auto d = pitos::zoo_lookup("phi-laplace");
  EXPECT_NEAR(d.density(0.5), std::sqrt(2 * std::numbers::pi) / 2, 1e-12);
  EXPECT_NEAR(d.density(0.5), 1.253314137315500251207882642405522626503, 1e-12);
  EXPECT_NEAR(d.cdf(0.5), 0.5, 1e-15);
}

TEST(Zoo, DiscreteUniformAtoms) {
  const auto d = pitos::zoo_lookup("discrete-uniform-99");
  EXPECT_TRUE(d.discrete);
  pitos::Rng rng(9);
  std::map<int, int> counts;
  const int draws = 99000;
  for (int k = 0; k < draws; ++k) {
    const double v = d.sample(rng);
    const int atom = static_cast<int>(std::lround(v * 100));
    ASSERT_EQ(v, atom / 100.0);
    ASSERT_GE(atom, 1);
    ASSERT_LE(atom, 99);
    ++counts[atom];
  }
  EXPECT_EQ(counts.size(), 99u);
  for (const auto& [atom, c] : counts) EXPECT_NEAR(c, 1000, 5 * std::sqrt(1000.0)) << atom;
  EXPECT_DOUBLE_EQ(d.cdf(0.29), 29.0 / 99.0);
  EXPECT_DOUBLE_EQ(d.cdf_left(0.29), 28.0 / 99.0);
  EXPECT_EQ(d.cdf(0.005), 0.0);
  EXPECT_EQ(d.cdf(0.995), 1.0);
}

TEST(Zoo, NamesRoundTrip) {
  for (const char* name : {"beta(1.2,0.8)", "beta(0.6,0.6)", "beta(1.6,1.6)", "bump(0.5,0.001,0.08)",
                           "gap(0.5,0.05)", "outliers(0.05,0.005)"}) {
    EXPECT_EQ(pitos::zoo_lookup(name).name, name);
  }
  EXPECT_THROW(pitos::zoo_lookup("normal"), std::invalid_argument);
  EXPECT_THROW(pitos::zoo_lookup("beta(1)"), std::invalid_argument);
  EXPECT_THROW(pitos::zoo_lookup("beta(1,x)"), std::invalid_argument);
  EXPECT_THROW(pitos::zoo_lookup("beta(-1,2)"), std::invalid_argument);
  EXPECT_THROW(pitos::zoo_lookup("gap(0.05,0.1)"), std::invalid_argument);
}

TEST(Zoo, DensitiesIntegrateToOne) {
  struct Case {
    const char* name;
    std::vector<double> breaks;
  };
  const Case cases[] = {
      {"uniform", {}},
      {"beta(1.2,0.8)", {}},
      {"beta(0.6,0.6)", {0.5}},
      {"beta(1.6,1.6)", {}},
      {"bump(0.5,0.001,0.08)", {0.499, 0.501}},
      {"bump(0.2,0.05,0.3)", {0.15, 0.25}},
      {"gap(0.5,0.05)", {0.45, 0.55}},
      {"gap(0.3,0.1)", {0.2, 0.4}},
      {"outliers(0.05,0.005)", {0.005}},
  };
  for (const auto& c : cases) {
    const auto d = pitos::zoo_lookup(c.name);
    EXPECT_NEAR(total_mass(d, c.breaks), 1.0, 1e-6) << c.name;
  }
}

TEST(Zoo, PhiLaplaceIntegratesToOne) {
  // The density grows like exp(z^2 / 2) at the edges, so integrate over z = Phi^-1(x).
  const auto d = pitos::zoo_lookup("phi-laplace");
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto in_z = [&](double z) {
    const double x = boost::math::cdf(boost::math::normal_distribution<double>(), z);
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return d.density(x) * boost::math::pdf(boost::math::normal_distribution<double>(), z);
  };
  // Past |z| = 6 the upper side runs out of doubles near x = 1, so the
  // Laplace tails e^-6 / 2 are added back analytically.
  const double total = ts.integrate(in_z, -6.0, 0.0) + ts.integrate(in_z, 0.0, 6.0) + std::exp(-6.0);
  EXPECT_NEAR(total, 1.0, 1e-8);
}

TEST(Zoo, SamplerMatchesCdf) {
  for (const char* name : {"uniform", "beta(1.2,0.8)", "beta(0.6,0.6)", "beta(1.6,1.6)", "phi-laplace",
                           "bump(0.5,0.001,0.08)", "gap(0.5,0.05)", "outliers(0.05,0.005)", "beta(0.05,0.3)"}) {
    const auto d = pitos::zoo_lookup(name);
    EXPECT_LT(sample_cdf_distance(d, 100000, 123), 0.01) << name;
  }
}

TEST(Zoo, SamplesStayInUnitInterval) {
  pitos::Rng rng(4);
  for (const char* name : {"beta(0.01,0.02)", "beta(300,0.5)", "phi-laplace", "bump(0.0015,0.001,0.1)",
                           "outliers(0.1,0.00001)"}) {
    const auto d = pitos::zoo_lookup(name);
    for (int k = 0; k < 20000; ++k) {
      const double v = d.sample(rng);
      ASSERT_GE(v, 0.0) << name;
      ASSERT_LE(v, 1.0) << name;
    }
  }
}

TEST(Zoo, MixtureDensities) {
  const auto outliers = pitos::make_outliers(0.05, 0.005);
  EXPECT_NEAR(outliers.density(0.001), 10.95, 1e-12);
  EXPECT_NEAR(outliers.density(0.5), 0.95, 1e-12);
  const auto gap = pitos::make_gap(0.5, 0.1);
  // Weights (0.4/0.8, 0.4/0.8) over U(0,0.4) and U(0.6,1).
  EXPECT_NEAR(gap.cdf(0.4), 0.5, 1e-15);
  EXPECT_NEAR(gap.cdf(0.6), 0.5, 1e-15);
  EXPECT_NEAR(gap.density(0.2), 1.25, 1e-15);
  EXPECT_EQ(gap.density(0.5), 0.0);
  const auto bump = pitos::make_bump(0.5, 0.001, 0.08);
  EXPECT_NEAR(bump.density(0.5), 0.92 + 0.08 / 0.002, 1e-9);
  EXPECT_NEAR(bump.density(0.2), 0.92, 1e-15);
}

TEST(Rng, GammaMeanUsesScale) {
  pitos::Rng rng(2024);
  double sum = 0.0;
  const int draws = 1000000;
  for (int k = 0; k < draws; ++k) sum += rng.gamma(3.0, 0.5);
  EXPECT_NEAR(sum / draws, 1.5, 0.01);
}

TEST(Rng, SmallShapeGammaStaysPositive) {
  pitos::Rng rng(6);
  for (int k = 0; k < 10000; ++k) {
    const double b = rng.beta(0.02, 0.03);
    ASSERT_GE(b, 0.0);
    ASSERT_LE(b, 1.0);
  }
}

TEST(Rng, StreamsAreReproducible) {
  pitos::Rng a(pitos::derive_stream(1, 2, 3));
  pitos::Rng b(pitos::derive_stream(1, 2, 3));
  pitos::Rng c(pitos::derive_stream(1, 2, 4));
  const double va = a.uniform();
  EXPECT_EQ(va, b.uniform());
  EXPECT_NE(va, c.uniform());
}

TEST(Scenarios, NamesParse) {
  for (pitos::Scenario s : pitos::kAllScenarios) {
    EXPECT_EQ(pitos::parse_scenario(pitos::scenario_name(s)), s);
  }
  EXPECT_FALSE(pitos::parse_scenario("bogus").has_value());
}

TEST(Scenarios, RejectionConditionsHold) {
  using S = pitos::Scenario;
  for (std::uint64_t d = 0; d < 2000; ++d) {
    for (S s : {S::SymmetricHeavyTailed, S::SymmetricLightTailed, S::AsymmetricHeavyTailed,
                S::AsymmetricLightTailed}) {
      pitos::Rng rng(pitos::derive_stream(3, d, static_cast<int>(s)));
      const auto spec = pitos::draw_scenario_distribution(s, rng);
      const double mu = *spec.parameter("mu");
      const double sigma = *spec.parameter("sigma");
      const double smaller = std::min(mu * sigma, (1 - mu) * sigma);
      const bool heavy = s == S::SymmetricHeavyTailed || s == S::AsymmetricHeavyTailed;
      if (heavy) {
        EXPECT_LE(smaller, 1.0);
      } else {
        EXPECT_GT(smaller, 1.0);
      }
      if (s == S::SymmetricHeavyTailed || s == S::SymmetricLightTailed) EXPECT_EQ(mu, 0.5);
    }
  }
}

TEST(Scenarios, ParameterRanges) {
  using S = pitos::Scenario;
  double nu_a = 0.0;
  const int draws = 2000;
  for (int d = 0; d < draws; ++d) {
    pitos::Rng rng(pitos::derive_stream(8, d));
    const auto out = pitos::draw_scenario_distribution(S::Outliers, rng);
    EXPECT_GT(*out.parameter("mass"), 0.0);
    EXPECT_LT(*out.parameter("mass"), 0.1);
    EXPECT_GT(*out.parameter("b"), 0.0);
    EXPECT_LT(*out.parameter("b"), 0.01);
    const auto bump = pitos::draw_scenario_distribution(S::RandomBump, rng);
    EXPECT_GT(*bump.parameter("center"), 0.001 - 1e-15);
    EXPECT_LT(*bump.parameter("center"), 0.999 + 1e-15);
    EXPECT_EQ(*bump.parameter("width"), 0.001);
    EXPECT_LT(*bump.parameter("mass"), 0.1);
    const auto gap = pitos::draw_scenario_distribution(S::RandomGap, rng);
    EXPECT_GT(*gap.parameter("center"), 0.1);
    EXPECT_LT(*gap.parameter("center"), 0.9);
    EXPECT_GE(*gap.parameter("halfwidth"), 0.025);
    EXPECT_LE(*gap.parameter("halfwidth"), 0.1);
    const auto nu = pitos::draw_scenario_distribution(S::NearlyUniform, rng);
    nu_a += *nu.parameter("a");
  }
  // mu ~ Beta(50,50), sigma ~ Gamma(100, 1/50): shapes near 1.
  EXPECT_NEAR(nu_a / draws, 1.0, 0.02);
}

TEST(Scenarios, SeededDrawIsReproducible) {
  const pitos::ScenarioSampler sampler{pitos::Scenario::RandomGap, 42};
  EXPECT_EQ(pitos::draw_scenario_distribution(sampler).name, pitos::draw_scenario_distribution(sampler).name);
}

TEST(NormalHelpers, PhiRoundTrip) {
  for (double x : {-5.0, -1.0, 0.0, 0.5, 3.0}) EXPECT_NEAR(pitos::Phi_inv(pitos::Phi(x)), x, 1e-12);
}
