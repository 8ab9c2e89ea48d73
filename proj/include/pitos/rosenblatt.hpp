#pragma once

// Generalized Rosenblatt transform.
//
// Component k is h_k = u_k F_k(y_k | y_1..y_{k-1}) + (1 - u_k) F_k^-(y_k | ...),
// where F^- is the left limit. For continuous laws F = F^- and u has no effect.
// With u i.i.d. Uniform(0,1) the outputs are i.i.d. Uniform(0,1).

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pitos/distributions.hpp"
#include "pitos/random.hpp"

namespace pitos {

/// Conditional CDF of one component given the preceding ones.
struct ConditionalLaw {
  std::function<double(double, std::span<const double>)> cdf;
  /// Left limit; may be left empty for continuous laws.
  std::function<double(double, std::span<const double>)> cdf_left;
};

/// Law of an independent component with the given marginal.
inline ConditionalLaw independent_law(const DistributionSpec& spec) {
  if (!spec.cdf) throw std::invalid_argument(spec.name + " has no CDF");
  ConditionalLaw law;
  law.cdf = [cdf = spec.cdf](double y, std::span<const double>) { return cdf(y); };
  if (spec.cdf_left) {
    law.cdf_left = [left = spec.cdf_left](double y, std::span<const double>) { return left(y); };
  }
  return law;
}

inline std::vector<double> rosenblatt_transform(std::span<const double> y, std::span<const ConditionalLaw> laws,
                                                std::span<const double> u) {
  if (y.size() != laws.size() || y.size() != u.size()) {
    throw std::invalid_argument("rosenblatt_transform: y, laws and u must have equal lengths");
  }
  std::vector<double> out(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(u[k] > 0.0 && u[k] < 1.0)) {
      throw std::invalid_argument("rosenblatt_transform: u[" + std::to_string(k) + "] outside (0, 1)");
    }
    const auto prefix = y.first(k);
    const double upper = laws[k].cdf(y[k], prefix);
    const double lower = laws[k].cdf_left ? laws[k].cdf_left(y[k], prefix) : upper;
    if (!(upper >= 0.0 && upper <= 1.0 && lower >= 0.0 && lower <= 1.0)) {
      throw std::logic_error("rosenblatt_transform: law " + std::to_string(k) + " returned a value outside [0, 1]");
    }
    if (lower > upper) {
      throw std::logic_error("rosenblatt_transform: law " + std::to_string(k) + " has F- > F");
    }
    out[k] = lower + u[k] * (upper - lower);
  }
  return out;
}

/// Randomized PIT of i.i.d. data under `spec`, drawing u from `rng`. The
/// draws happen even for continuous laws so the stream position is fixed.
inline std::vector<double> probability_integral_transform(std::span<const double> y, const DistributionSpec& spec,
                                                          Rng& rng) {
  const ConditionalLaw law = independent_law(spec);
  std::vector<ConditionalLaw> laws(y.size(), law);
  std::vector<double> u(y.size());
  for (double& v : u) v = rng.uniform();
  return rosenblatt_transform(y, laws, u);
}

}  // namespace pitos
