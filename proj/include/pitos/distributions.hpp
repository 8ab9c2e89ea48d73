#pragma once

// Distribution zoo on [0, 1] and the randomized scenario samplers.
//
// Names accepted by zoo_lookup:
//   uniform
//   beta(a,b)
//   phi-laplace                 Phi(Y) with Y ~ Laplace(0, 1)
//   discrete-uniform-99         uniform on {0.01, 0.02, ..., 0.99}
//   bump(center,width,mass)     mass U(center - width, center + width) + (1 - mass) U(0, 1)
//   gap(center,halfwidth)       U(0, 1) conditioned to avoid (center - halfwidth, center + halfwidth)
//   outliers(mass,b)            mass U(0, b) + (1 - mass) U(0, 1)
//
// `width` in bump() is a half-width, so the scenario bumps are bump(m,0.001,pi).

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pitos/random.hpp"
#include "pitos/special_functions.hpp"

namespace pitos {

/// Standard normal CDF.
inline double Phi(double x) { return normal_cdf(x); }
/// Standard normal quantile.
inline double Phi_inv(double p) { return normal_quantile(p); }

struct DistributionSpec {
  std::string name;
  /// Realized parameters, in a fixed order (scenario draws record mu, sigma, ...).
  std::vector<std::pair<std::string, double>> parameters;
  std::function<double(Rng&)> sampler;
  /// Log density on [0, 1]; empty for discrete laws.
  std::function<double(double)> log_density;
  /// P(X <= x).
  std::function<double(double)> cdf;
  /// P(X < x); same as cdf for continuous laws.
  std::function<double(double)> cdf_left;
  bool discrete = false;

  [[nodiscard]] double sample(Rng& rng) const { return sampler(rng); }

  [[nodiscard]] std::vector<double> sample(Rng& rng, std::size_t n) const {
    std::vector<double> out(n);
    for (double& v : out) v = sampler(rng);
    return out;
  }

  [[nodiscard]] bool has_density() const { return static_cast<bool>(log_density); }

  [[nodiscard]] double density(double x) const {
    if (!log_density) throw std::logic_error(name + " has no density");
    return std::exp(log_density(x));
  }

  [[nodiscard]] std::optional<double> parameter(std::string_view key) const {
    for (const auto& [k, v] : parameters) {
      if (k == key) return v;
    }
    return std::nullopt;
  }
};

/// Shortest decimal that round-trips, used in canonical names.
inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf.data(), end);
}

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline void require_param(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

inline std::string call_name(std::string_view head, std::initializer_list<double> args) {
  std::string out(head);
  out += '(';
  bool first = true;
  for (double v : args) {
    if (!first) out += ',';
    out += format_number(v);
    first = false;
  }
  out += ')';
  return out;
}

}  // namespace detail

inline DistributionSpec make_uniform() {
  DistributionSpec d;
  d.name = "uniform";
  d.sampler = [](Rng& rng) { return rng.uniform(); };
  d.log_density = [](double x) { return (x >= 0.0 && x <= 1.0) ? 0.0 : detail::kNegInf; };
  d.cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  d.cdf_left = d.cdf;
  return d;
}

inline DistributionSpec make_beta(double a, double b) {
  detail::require_param(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b),
                        "beta shapes must be positive and finite");
  DistributionSpec d;
  d.name = detail::call_name("beta", {a, b});
  d.parameters = {{"a", a}, {"b", b}};
  const BetaParams params{a, b};
  const double lb = log_beta(a, b);
  d.sampler = [a, b](Rng& rng) { return rng.beta(a, b); };
  d.log_density = [a, b, lb](double x) {
    if (!(x >= 0.0 && x <= 1.0)) return detail::kNegInf;
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lb;
  };
  d.cdf = [params](double x) { return beta_cdf(std::clamp(x, 0.0, 1.0), params); };
  d.cdf_left = d.cdf;
  return d;
}

/// Law of Phi(Y), Y ~ Laplace(0, 1).
inline DistributionSpec make_phi_laplace() {
  DistributionSpec d;
  d.name = "phi-laplace";
  d.sampler = [](Rng& rng) { return Phi(rng.laplace()); };
  d.log_density = [](double x) {
    if (!(x > 0.0 && x < 1.0)) return detail::kNegInf;
    const double z = Phi_inv(x);
    // log f_Laplace(z) - log phi(z)
    return -std::numbers::ln2 - std::abs(z) + 0.5 * z * z + detail::kLnSqrt2Pi;
  };
  d.cdf = [](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double z = Phi_inv(x);
    return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
  };
  d.cdf_left = d.cdf;
  return d;
}

/// Uniform on the 99 atoms k / 100, k = 1..99.
inline DistributionSpec make_discrete_uniform_99() {
  DistributionSpec d;
  d.name = "discrete-uniform-99";
  d.discrete = true;
  d.sampler = [](Rng& rng) { return static_cast<double>(1 + rng.index(99)) / 100.0; };
  // Atoms are compared as the doubles the sampler produces.
  const auto count_atoms = [](double x, bool inclusive) {
    int lo = 0;
    int hi = 99;
    while (lo < hi) {  // number of atoms below (or at) x
      const int mid = (lo + hi + 1) / 2;
      const double atom = static_cast<double>(mid) / 100.0;
      if (inclusive ? atom <= x : atom < x) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    return static_cast<double>(lo) / 99.0;
  };
  d.cdf = [count_atoms](double x) { return count_atoms(x, true); };
  d.cdf_left = [count_atoms](double x) { return count_atoms(x, false); };
  return d;
}

/// mass * U(center - width, center + width) + (1 - mass) * U(0, 1).
inline DistributionSpec make_bump(double center, double width, double mass) {
  // Rounding slack so that scenario draws at the edge of the range stay valid.
  detail::require_param(width > 0.0 && center - width >= -1e-12 && center + width <= 1.0 + 1e-12,
                        "bump interval must lie inside [0, 1] with positive width");
  detail::require_param(mass >= 0.0 && mass <= 1.0, "bump mass must lie in [0, 1]");
  DistributionSpec d;
  d.name = detail::call_name("bump", {center, width, mass});
  d.parameters = {{"center", center}, {"width", width}, {"mass", mass}};
  const double lo = std::max(0.0, center - width);
  const double hi = std::min(1.0, center + width);
  d.sampler = [=](Rng& rng) {
    const double pick = rng.uniform();
    const double u = rng.uniform();
    return pick < mass ? lo + (hi - lo) * u : u;
  };
  d.log_density = [=](double x) {
    if (!(x >= 0.0 && x <= 1.0)) return detail::kNegInf;
    const double inside = (x > lo && x < hi) ? mass / (hi - lo) : 0.0;
    return std::log((1.0 - mass) + inside);
  };
  d.cdf = [=](double x) {
    const double xc = std::clamp(x, 0.0, 1.0);
    return (1.0 - mass) * xc + mass * std::clamp((xc - lo) / (hi - lo), 0.0, 1.0);
  };
  d.cdf_left = d.cdf;
  return d;
}

/// Uniform on [0, 1] with (center - halfwidth, center + halfwidth) removed.
inline DistributionSpec make_gap(double center, double halfwidth) {
  detail::require_param(halfwidth > 0.0 && center - halfwidth >= 0.0 && center + halfwidth <= 1.0 &&
                            halfwidth < 0.5,
                        "gap interval must lie inside [0, 1] with positive half-width");
  DistributionSpec d;
  d.name = detail::call_name("gap", {center, halfwidth});
  d.parameters = {{"center", center}, {"halfwidth", halfwidth}};
  const double lo = center - halfwidth;
  const double hi = center + halfwidth;
  const double keep = 1.0 - 2.0 * halfwidth;
  // Piece weights lo / keep and (1 - hi) / keep; sampled by inversion.
  d.sampler = [=](Rng& rng) {
    const double t = keep * rng.uniform();
    return t < lo ? t : t + (hi - lo);
  };
  d.log_density = [=](double x) {
    if (!(x >= 0.0 && x <= 1.0) || (x > lo && x < hi)) return detail::kNegInf;
    return -std::log(keep);
  };
  d.cdf = [=](double x) {
    const double xc = std::clamp(x, 0.0, 1.0);
    if (xc <= lo) return xc / keep;
    if (xc < hi) return lo / keep;
    return std::min(1.0, (xc - (hi - lo)) / keep);
  };
  d.cdf_left = d.cdf;
  return d;
}

/// mass * U(0, b) + (1 - mass) * U(0, 1).
inline DistributionSpec make_outliers(double mass, double b) {
  detail::require_param(b > 0.0 && b <= 1.0, "outlier range b must lie in (0, 1]");
  detail::require_param(mass >= 0.0 && mass <= 1.0, "outlier mass must lie in [0, 1]");
  DistributionSpec d;
  d.name = detail::call_name("outliers", {mass, b});
  d.parameters = {{"mass", mass}, {"b", b}};
  d.sampler = [=](Rng& rng) {
    const double pick = rng.uniform();
    const double u = rng.uniform();
    return pick < mass ? b * u : u;
  };
  d.log_density = [=](double x) {
    if (!(x >= 0.0 && x <= 1.0)) return detail::kNegInf;
    return std::log((1.0 - mass) + (x < b ? mass / b : 0.0));
  };
  d.cdf = [=](double x) {
    const double xc = std::clamp(x, 0.0, 1.0);
    return (1.0 - mass) * xc + mass * std::min(1.0, xc / b);
  };
  d.cdf_left = d.cdf;
  return d;
}

namespace detail {

inline double parse_real(std::string_view text, std::string_view context) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad number '" + std::string(text) + "' in " + std::string(context));
  }
  return v;
}

}  // namespace detail

/// Builds a zoo member from its textual name, e.g. "beta(1.2,0.8)".
inline DistributionSpec zoo_lookup(std::string_view name) {
  std::string_view head = name;
  std::vector<double> args;
  const auto open = name.find('(');
  if (open != std::string_view::npos) {
    if (name.back() != ')') throw std::invalid_argument("unknown distribution '" + std::string(name) + "'");
    head = name.substr(0, open);
    std::string_view inner = name.substr(open + 1, name.size() - open - 2);
    while (true) {
      const auto comma = inner.find(',');
      args.push_back(detail::parse_real(inner.substr(0, comma), name));
      if (comma == std::string_view::npos) break;
      inner.remove_prefix(comma + 1);
    }
  }
  const auto arity = [&](std::size_t k) {
    if (args.size() != k) {
      throw std::invalid_argument("distribution '" + std::string(head) + "' takes " + std::to_string(k) +
                                  " parameter(s)");
    }
  };
  if (head == "uniform") {
    arity(0);
    return make_uniform();
  }
  if (head == "beta") {
    arity(2);
    return make_beta(args[0], args[1]);
  }
  if (head == "phi-laplace") {
    arity(0);
    return make_phi_laplace();
  }
  if (head == "discrete-uniform-99") {
    arity(0);
    return make_discrete_uniform_99();
  }
  if (head == "bump") {
    arity(3);
    return make_bump(args[0], args[1], args[2]);
  }
  if (head == "gap") {
    arity(2);
    return make_gap(args[0], args[1]);
  }
  if (head == "outliers") {
    arity(2);
    return make_outliers(args[0], args[1]);
  }
  throw std::invalid_argument("unknown distribution '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Scenarios

enum class Scenario {
  SymmetricHeavyTailed,
  SymmetricLightTailed,
  AsymmetricHeavyTailed,
  AsymmetricLightTailed,
  Outliers,
  NearlyUniform,
  RandomBump,
  RandomGap,
};

inline constexpr std::array<Scenario, 8> kAllScenarios = {
    Scenario::SymmetricHeavyTailed, Scenario::SymmetricLightTailed, Scenario::AsymmetricHeavyTailed,
    Scenario::AsymmetricLightTailed, Scenario::Outliers,            Scenario::NearlyUniform,
    Scenario::RandomBump,           Scenario::RandomGap,
};

inline std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::SymmetricHeavyTailed: return "symmetric-heavy-tailed";
    case Scenario::SymmetricLightTailed: return "symmetric-light-tailed";
    case Scenario::AsymmetricHeavyTailed: return "asymmetric-heavy-tailed";
    case Scenario::AsymmetricLightTailed: return "asymmetric-light-tailed";
    case Scenario::Outliers: return "outliers";
    case Scenario::NearlyUniform: return "nearly-uniform";
    case Scenario::RandomBump: return "random-bump";
    case Scenario::RandomGap: return "random-gap";
  }
  return "unknown";
}

inline std::optional<Scenario> parse_scenario(std::string_view name) {
  for (Scenario s : kAllScenarios) {
    if (scenario_name(s) == name) return s;
  }
  return std::nullopt;
}

struct ScenarioSampler {
  Scenario scenario;
  std::uint64_t seed = 0;
};

/// Cap on rejection-loop iterations for the beta scenarios.
inline constexpr std::size_t kScenarioRejectionCap = 1'000'000;

namespace detail {

inline DistributionSpec scenario_beta(Rng& rng, bool symmetric, double gamma_shape, bool heavy,
                                      Scenario scenario) {
  for (std::size_t attempt = 0; attempt < kScenarioRejectionCap; ++attempt) {
    const double mu = symmetric ? 0.5 : rng.beta(2.0, 2.0);
    const double sigma = rng.gamma(gamma_shape, 0.5);
    const double a = mu * sigma;
    const double b = (1.0 - mu) * sigma;
    const double smaller = std::min(a, b);
    if (!(a > 0.0 && b > 0.0)) continue;
    if (heavy ? smaller <= 1.0 : smaller > 1.0) {
      DistributionSpec d = make_beta(a, b);
      d.parameters = {{"mu", mu}, {"sigma", sigma}, {"a", a}, {"b", b}};
      return d;
    }
  }
  throw std::runtime_error("scenario " + std::string(scenario_name(scenario)) +
                           ": rejection sampling exceeded the iteration cap");
}

}  // namespace detail

/// Draws one distribution from a scenario using the given stream.
inline DistributionSpec draw_scenario_distribution(Scenario scenario, Rng& rng) {
  switch (scenario) {
    case Scenario::SymmetricHeavyTailed: return detail::scenario_beta(rng, true, 3.0, true, scenario);
    case Scenario::SymmetricLightTailed: return detail::scenario_beta(rng, true, 5.0, false, scenario);
    case Scenario::AsymmetricHeavyTailed: return detail::scenario_beta(rng, false, 3.0, true, scenario);
    case Scenario::AsymmetricLightTailed: return detail::scenario_beta(rng, false, 5.0, false, scenario);
    case Scenario::Outliers: {
      const double mass = rng.uniform(0.0, 0.1);
      const double b = rng.uniform(0.0, 0.01);
      return make_outliers(mass, b);
    }
    case Scenario::NearlyUniform: {
      const double mu = rng.beta(50.0, 50.0);
      const double sigma = rng.gamma(100.0, 1.0 / 50.0);
      DistributionSpec d = make_beta(mu * sigma, (1.0 - mu) * sigma);
      d.parameters = {{"mu", mu}, {"sigma", sigma}, {"a", mu * sigma}, {"b", (1.0 - mu) * sigma}};
      return d;
    }
    case Scenario::RandomBump: {
      const double m = rng.uniform(0.001, 0.999);
      const double mass = rng.uniform(0.0, 0.1);
      return make_bump(m, 0.001, mass);
    }
    case Scenario::RandomGap: {
      const double m = rng.uniform(0.1, 0.9);
      const double w = rng.uniform(0.025, 0.1);
      return make_gap(m, w);
    }
  }
  throw std::invalid_argument("unknown scenario");
}

inline DistributionSpec draw_scenario_distribution(const ScenarioSampler& sampler) {
  Rng rng(derive_stream(sampler.seed, tag(scenario_name(sampler.scenario))));
  return draw_scenario_distribution(sampler.scenario, rng);
}

}  // namespace pitos
