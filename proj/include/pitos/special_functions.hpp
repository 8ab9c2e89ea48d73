#pragma once

// Special functions used throughout the library: regularized incomplete beta
// and its inverse, Cauchy(0,1) CDF/quantile, standard normal CDF/quantile and
// log-space beta/gamma helpers.
//
// The incomplete beta is a continued fraction: the centred form from TOMS 708
// when both shapes are at least one, and the Lentz form with the usual
// symmetry switch otherwise. Near the mean of a law with two large shapes a
// uniform asymptotic expansion takes over, so the cost of one evaluation
// stays bounded as the shapes grow. Every routine is pure.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pitos {

/// Shape parameters of a Beta(a, b) law.
struct BetaParams {
  double a = 1.0;
  double b = 1.0;

  [[nodiscard]] bool valid() const noexcept {
    return std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0;
  }
};

/// Lower and upper tail of a distribution evaluated at one point. Keeping
/// both avoids forming 1 - cdf when the upper tail is tiny.
struct TailPair {
  double lower = 0.0;
  double upper = 1.0;
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTiny = 1e-300;
inline constexpr double kLnSqrt2Pi = 0.91893853320467274178032973640562;

inline void require_shapes(double a, double b) {
  if (!BetaParams{a, b}.valid()) {
    throw std::domain_error("beta shapes must be finite and positive (a=" + std::to_string(a) +
                            ", b=" + std::to_string(b) + ")");
  }
}

// x - log(1 + x), accurate for small |x|.
inline double rlog1(double x) {
  if (std::abs(x) < 0.01) {
    // Alternating series x^2/2 - x^3/3 + x^4/4 - ...
    double term = x * x;
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double contrib = term / k;
      sum += (k % 2 == 0) ? contrib : -contrib;
      if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
      term *= x;
    }
    return sum;
  }
  return x - std::log1p(x);
}

// Stirling remainder lgamma(x) - ((x - 1/2) ln x - x + ln sqrt(2 pi)), x >= 10.
inline double stirling_remainder(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12 +
              r2 * (-1.0 / 360 +
                    r2 * (1.0 / 1260 +
                          r2 * (-1.0 / 1680 +
                                r2 * (1.0 / 1188 + r2 * (-691.0 / 360360 + r2 * (1.0 / 156)))))));
}

// del(a) + del(b) - del(a + b) for a, b >= 10.
inline double beta_stirling_correction(double a, double b) {
  return stirling_remainder(a) + stirling_remainder(b) - stirling_remainder(a + b);
}

// exp(x^2) * erfc(x) for x >= 0.
inline double erfcx(double x) {
  if (x < 5.0) return std::exp(x * x) * std::erfc(x);
  // Laplace continued fraction, evaluated backwards.
  double frac = x;
  for (int k = 60; k >= 1; --k) frac = x + (0.5 * k) / frac;
  return 1.0 / (std::sqrt(std::numbers::pi) * frac);
}

// log(x^a y^b / B(a, b)), y = 1 - x supplied by the caller.
inline double log_beta_front(double x, double y, double a, double b, double log_beta_ab);

}  // namespace detail

inline double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma requires a positive argument");
  return std::lgamma(x);
}

/// log B(a, b), computed without the large cancellations that plain
/// lgamma sums suffer from when a shape is large.
inline double log_beta(double a, double b) {
  detail::require_shapes(a, b);
  if (a > b) std::swap(a, b);
  if (a >= 10.0) {
    // Both large: Stirling form.
    return detail::kLnSqrt2Pi - 0.5 * std::log(b) + (a - 0.5) * std::log(a / (a + b)) -
           b * std::log1p(a / b) + detail::beta_stirling_correction(a, b);
  }
  if (b >= 10.0) {
    // lgamma(b) - lgamma(a + b) expanded around b.
    const double ratio = a - (b - 0.5) * std::log1p(a / b) - a * std::log(a + b) +
                         detail::stirling_remainder(b) - detail::stirling_remainder(a + b);
    return std::lgamma(a) + ratio;
  }
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// lambda = a - (a + b) x = (a + b) y - b, formed from whichever of x and y
// is smaller (and so carries full precision) with a single rounding.
inline double centered_lambda(double x, double y, double a, double b) {
  return (x <= y) ? std::fma(-(a + b), x, a) : std::fma(a + b, y, -b);
}

inline double log_beta_front(double x, double y, double a, double b, double log_beta_ab) {
  if (std::min(a, b) >= 10.0) {
    const double lambda = centered_lambda(x, y, a, b);
    const double e = -(a * rlog1(-lambda / a) + b * rlog1(lambda / b));
    return e + 0.5 * std::log(a * (b / (a + b))) - kLnSqrt2Pi - beta_stirling_correction(a, b);
  }
  if (!std::isfinite(log_beta_ab)) log_beta_ab = log_beta(a, b);
  // The smaller of x and y carries full precision; derive the other log from it.
  const double log_x = (x <= y) ? std::log(x) : std::log1p(-y);
  const double log_y = (x <= y) ? std::log1p(-x) : std::log(y);
  return a * log_x + b * log_y - log_beta_ab;
}

// Continued fraction for I_x(a, b) / front (modified Lentz), y = 1 - x.
// Converges quickly for x < (a + 1) / (a + b + 2).
inline double beta_continued_fraction(double x, double y, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  // 1 - qab x / qap nearly cancels around the mean of a large-shape law.
  double d = ((x <= y) ? std::fma(-qab, x, qap) : std::fma(qab, y, 1.0 - b)) / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction failed to converge");
}

// Continued fraction in the centred form of TOMS 708 (BFRAC). Returns
// I_x(a, b) / front for lambda = (a + b) y - b >= 0. Unlike the Lentz form
// it does not cancel near the mean when one shape is huge. Needs a, b >= 1.
inline double beta_centered_fraction(double x, double y, double a, double b, double lambda) {
  const double c = lambda + 1.0;
  const double c0 = b / a;
  const double c1 = 1.0 / a + 1.0;
  const double yp1 = y + 1.0;
  double n = 0.0;
  double p = 1.0;
  double s = a + 1.0;
  double an = 0.0;
  double bn = 1.0;
  double anp1 = 1.0;
  double bnp1 = c / c1;
  double r = c1 / c;
  for (int iter = 0; iter < 100000; ++iter) {
    n += 1.0;
    double t = n / a;
    const double w = n * (b - n) * x;
    double e = a / s;
    const double alpha = p * (p + c0) * e * e * (w * x);
    e = (t + 1.0) / (c1 + t + t);
    const double beta = n + w / s + e * (c + n * yp1);
    p = t + 1.0;
    s += 2.0;

    t = alpha * an + beta * anp1;
    an = anp1;
    anp1 = t;
    t = alpha * bn + beta * bnp1;
    bn = bnp1;
    bnp1 = t;

    const double r0 = r;
    r = anp1 / bnp1;
    if (std::abs(r - r0) <= kEps * r) return r;
    an /= bnp1;
    bn /= bnp1;
    anp1 = r;
    bnp1 = 1.0;
  }
  throw std::runtime_error("incomplete beta continued fraction failed to converge");
}

// Uniform asymptotic expansion of I_x(a, b) for large a and b, with
// lambda = (a + b) y - b >= 0 (x at or below the mean). Follows the
// expansion used by TOMS 708 (BASYM).
inline double beta_asymptotic(double a, double b, double lambda) {
  constexpr int kTerms = 20;
  constexpr double e0 = 1.12837916709551257390;  // 2 / sqrt(pi)
  constexpr double e1 = 0.35355339059327376220;  // 2^(-3/2)

  double a0[kTerms + 1], b0[kTerms + 1], c[kTerms + 1], d[kTerms + 1];

  const double f = a * rlog1(-lambda / a) + b * rlog1(lambda / b);
  const double t = std::exp(-f);
  if (t == 0.0) return 0.0;
  const double z0 = std::sqrt(f);
  const double z = 0.5 * (z0 / e1);
  const double z2 = f + f;

  double h, r0, r1, w0;
  if (a < b) {
    h = a / b;
    r0 = 1.0 / (h + 1.0);
    r1 = (b - a) / b;
    w0 = 1.0 / std::sqrt(a * (h + 1.0));
  } else {
    h = b / a;
    r0 = 1.0 / (h + 1.0);
    r1 = (b - a) / a;
    w0 = 1.0 / std::sqrt(b * (h + 1.0));
  }

  a0[0] = r1 * (2.0 / 3.0);
  c[0] = -0.5 * a0[0];
  d[0] = -c[0];
  double j0 = 0.5 / e0 * erfcx(z0);
  double j1 = e1;
  double sum = j0 + d[0] * w0 * j1;

  double s = 1.0;
  const double h2 = h * h;
  double hn = 1.0;
  double w = w0;
  double znm1 = z;
  double zn = z2;
  for (int n = 2; n <= kTerms; n += 2) {
    hn *= h2;
    a0[n - 1] = 2.0 * r0 * (h * hn + 1.0) / (n + 2.0);
    const int np1 = n + 1;
    s += hn;
    a0[np1 - 1] = 2.0 * r1 * s / (n + 3.0);

    for (int i = n; i <= np1; ++i) {
      const double r = -0.5 * (i + 1.0);
      b0[0] = r * a0[0];
      for (int m = 2; m <= i; ++m) {
        double bsum = 0.0;
        for (int j = 1; j <= m - 1; ++j) {
          const int mmj = m - j;
          bsum += (j * r - mmj) * a0[j - 1] * b0[mmj - 1];
        }
        b0[m - 1] = r * a0[m - 1] + bsum / m;
      }
      c[i - 1] = b0[i - 1] / (i + 1.0);
      double dsum = 0.0;
      for (int j = 1; j <= i - 1; ++j) dsum += d[i - j - 1] * c[j - 1];
      d[i - 1] = -(dsum + c[i - 1]);
    }

    j0 = e1 * znm1 + (n - 1.0) * j0;
    j1 = e1 * zn + n * j1;
    znm1 *= z2;
    zn *= z2;
    w *= w0;
    const double t0 = d[n - 1] * w * j0;
    w *= w0;
    const double t1 = d[np1 - 1] * w * j1;
    sum += t0 + t1;
    if (std::abs(t0) + std::abs(t1) <= 1e-16 * sum) break;
  }
  return e0 * t * std::exp(-beta_stirling_correction(a, b)) * sum;
}

// Both tails of Beta(a, b) at x, with y = 1 - x supplied by the caller.
// log_beta_ab may be NaN, in which case it is computed on demand.
inline TailPair beta_tails(double x, double y, double a, double b,
                           double log_beta_ab = std::numeric_limits<double>::quiet_NaN()) {
  if (x <= 0.0) return {0.0, 1.0};
  if (y <= 0.0) return {1.0, 0.0};

  const double small = std::min(a, b);
  if (small > 100.0) {
    const double lambda = centered_lambda(x, y, a, b);
    if (std::abs(lambda) <= 0.03 * small) {
      if (lambda >= 0.0) {
        const double w = beta_asymptotic(a, b, lambda);
        return {w, 1.0 - w};
      }
      const double w1 = beta_asymptotic(b, a, -lambda);
      return {1.0 - w1, w1};
    }
  }

  if (small >= 1.0) {
    const double lambda = centered_lambda(x, y, a, b);
    if (lambda >= 0.0) {
      const double front = std::exp(log_beta_front(x, y, a, b, log_beta_ab));
      const double lower = std::clamp(front * beta_centered_fraction(x, y, a, b, lambda), 0.0, 1.0);
      return {lower, 1.0 - lower};
    }
    const double front = std::exp(log_beta_front(y, x, b, a, log_beta_ab));
    const double upper = std::clamp(front * beta_centered_fraction(y, x, b, a, -lambda), 0.0, 1.0);
    return {1.0 - upper, upper};
  }

  if (x > (a + 1.0) / (a + b + 2.0)) {
    const double front = std::exp(log_beta_front(y, x, b, a, log_beta_ab));
    const double upper = std::clamp(front * beta_continued_fraction(y, x, b, a) / b, 0.0, 1.0);
    return {1.0 - upper, upper};
  }
  const double front = std::exp(log_beta_front(x, y, a, b, log_beta_ab));
  const double lower = std::clamp(front * beta_continued_fraction(x, y, a, b) / a, 0.0, 1.0);
  return {lower, 1.0 - lower};
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b), i.e. the Beta(a, b) CDF at x.
inline double beta_cdf(double x, BetaParams params) {
  detail::require_shapes(params.a, params.b);
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("beta_cdf argument outside [0, 1]: " + std::to_string(x));
  }
  return detail::beta_tails(x, 1.0 - x, params.a, params.b).lower;
}

/// Both tails of the Beta(a, b) law at x; x and its complement are given
/// separately so callers can supply an exactly computed complement.
inline TailPair beta_tails(double x, double complement, BetaParams params) {
  detail::require_shapes(params.a, params.b);
  if (!(x >= 0.0 && x <= 1.0 && complement >= 0.0 && complement <= 1.0)) {
    throw std::domain_error("beta_tails arguments outside [0, 1]");
  }
  return detail::beta_tails(x, complement, params.a, params.b);
}

/// Beta(a, b) density. Infinite at an endpoint where the matching shape is
/// below one.
inline double beta_pdf(double x, BetaParams params) {
  detail::require_shapes(params.a, params.b);
  if (!(x >= 0.0 && x <= 1.0)) return 0.0;
  const double a = params.a;
  const double b = params.b;
  if (x == 0.0) return a < 1.0 ? std::numeric_limits<double>::infinity() : (a == 1.0 ? b : 0.0);
  if (x == 1.0) return b < 1.0 ? std::numeric_limits<double>::infinity() : (b == 1.0 ? a : 0.0);
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

/// Inverse of beta_cdf: bracketed Halley iteration with bisection fallback.
inline double beta_inv_cdf(double u, BetaParams params) {
  detail::require_shapes(params.a, params.b);
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("beta_inv_cdf probability outside [0, 1]: " + std::to_string(u));
  }
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;

  const double a = params.a;
  const double b = params.b;
  const double lb = log_beta(a, b);

  // Starting point (Numerical Recipes' invbetai heuristics).
  double x;
  if (a >= 1.0 && b >= 1.0) {
    const double pp = (u < 0.5) ? u : 1.0 - u;
    const double t = std::sqrt(-2.0 * std::log(pp));
    double z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
    if (u < 0.5) z = -z;
    const double al = (z * z - 3.0) / 6.0;
    const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
    const double w = (z * std::sqrt(al + h) / h) -
                     (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
    x = a / (a + b * std::exp(2.0 * w));
  } else {
    const double lna = std::log(a / (a + b));
    const double lnb = std::log(b / (a + b));
    const double t = std::exp(a * lna) / a;
    const double v = std::exp(b * lnb) / b;
    const double w = t + v;
    x = (u < t / w) ? std::pow(a * w * u, 1.0 / a) : 1.0 - std::pow(b * w * (1.0 - u), 1.0 / b);
  }

  double lo = 0.0;
  double hi = 1.0;
  if (!(x > lo && x < hi)) x = 0.5;
  for (int iter = 0; iter < 200; ++iter) {
    const TailPair tails = detail::beta_tails(x, 1.0 - x, a, b, lb);
    const double err = (u <= 0.5) ? tails.lower - u : (1.0 - u) - tails.upper;
    if (err == 0.0) return x;
    if (err < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 2.0 * detail::kEps * std::max(x, detail::kTiny)) break;

    const double log_density = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lb;
    const double density = std::exp(log_density);
    double next;
    if (density > 0.0 && std::isfinite(density)) {
      const double newton = err / density;
      const double curvature = (a - 1.0) / x - (b - 1.0) / (1.0 - x);
      const double halley = newton / (1.0 - 0.5 * std::min(1.0, newton * curvature));
      next = x - halley;
    } else {
      next = 0.5 * (lo + hi);
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * detail::kEps * x) {
      x = next;
      break;
    }
    x = next;
  }

  // Polish: walk to the neighbouring double with the smallest CDF residual.
  const auto residual = [&](double y) { return std::abs(detail::beta_tails(y, 1.0 - y, a, b, lb).lower - u); };
  double best = residual(x);
  for (double dir : {1.0, -1.0}) {
    const double target = dir > 0.0 ? 1.0 : 0.0;
    for (int step = 0; step < 64 && x != target; ++step) {
      const double y = std::nextafter(x, target);
      const double r = residual(y);
      if (!(r < best)) break;
      best = r;
      x = y;
    }
  }
  return x;
}

/// Cauchy(0, 1) CDF; well defined at +/- infinity.
inline double cauchy_cdf(double t) {
  if (std::isnan(t)) throw std::domain_error("cauchy_cdf of NaN");
  if (t < -1.0) return std::atan(-1.0 / t) / std::numbers::pi;
  if (t > 1.0) return 1.0 - std::atan(1.0 / t) / std::numbers::pi;
  return 0.5 + std::atan(t) / std::numbers::pi;
}

/// 1 - cauchy_cdf(t), accurate in the upper tail.
inline double cauchy_sf(double t) { return cauchy_cdf(-t); }

/// Cauchy(0, 1) quantile for q strictly inside (0, 1).
inline double cauchy_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::domain_error("cauchy_quantile requires 0 < q < 1, got " + std::to_string(q));
  }
  if (q < 0.25) return -1.0 / std::tan(std::numbers::pi * q);
  if (q > 0.75) return 1.0 / std::tan(std::numbers::pi * (1.0 - q));
  return std::tan(std::numbers::pi * (q - 0.5));
}

/// cauchy_quantile(1 - p) evaluated from p directly, so small p keep their
/// precision.
inline double cauchy_upper_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("cauchy_upper_quantile requires 0 < p < 1, got " + std::to_string(p));
  }
  if (p <= 0.25) return 1.0 / std::tan(std::numbers::pi * p);
  if (p >= 0.75) return -1.0 / std::tan(std::numbers::pi * (1.0 - p));
  return std::tan(std::numbers::pi * (0.5 - p));
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal density.
inline double normal_pdf(double x) { return std::exp(-0.5 * x * x - detail::kLnSqrt2Pi); }

/// Standard normal quantile: Acklam's rational approximation polished by one
/// Halley step against the erfc-based CDF.
inline double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("normal_quantile probability outside [0, 1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Refine against whichever tail is small to keep relative accuracy.
  for (int step = 0; step < 2; ++step) {
    const double e = (x < 0.0) ? 0.5 * std::erfc(-x / std::numbers::sqrt2) - p
                               : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace pitos
