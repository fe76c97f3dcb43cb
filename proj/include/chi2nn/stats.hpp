#pragma once

// Chi-square distribution utilities: the regularized lower incomplete gamma
// function and the quantile used by the training stop rule.

#include <cmath>
#include <limits>
#include <string>

#include "chi2nn/errors.hpp"

namespace chi2nn::stats {

namespace detail {

inline constexpr int kMaxIterations = 10000;
inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTiny = std::numeric_limits<double>::min() / kEps;

// log of x^a e^-x / Gamma(a)
inline double log_prefactor(double a, double x) {
  return a * std::log(x) - x - std::lgamma(a);
}

// Series for P(a,x); converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

// Modified Lentz continued fraction for Q(a,x); used for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor(a, x)) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma function P(a, x).
inline double regularized_gamma_lower(double a, double x) {
  if (!std::isfinite(a) || !std::isfinite(x) || a <= 0.0 || x < 0.0)
    throw DomainError("regularized_gamma_lower: requires finite a > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

/// Chi-square CDF with `df` degrees of freedom, evaluated at t.
inline double chi2_cdf(double t, int df) {
  if (df < 1) throw DomainError("chi2_cdf: df must be >= 1");
  if (t <= 0.0) return 0.0;
  return regularized_gamma_lower(0.5 * df, 0.5 * t);
}

/// Upper-tail critical value: t with CDF(t; df) = 1 - alpha.
///
/// Bisection on the CDF over [0, df + 20*sqrt(2 df) + 50]; the bracket is
/// widened if alpha is so small that the upper end is not yet past it.
inline double chi2_quantile(int df, double alpha) {
  if (df < 1) throw DomainError("chi2_quantile: df must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("chi2_quantile: alpha must lie in (0,1), got " +
                      std::to_string(alpha));
  const double target = 1.0 - alpha;
  double lo = 0.0;
  double hi = df + 20.0 * std::sqrt(2.0 * df) + 50.0;
  while (chi2_cdf(hi, df) < target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double cdf = chi2_cdf(mid, df);
    if (cdf < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// The stop threshold epsilon together with the inputs that produced it.
struct ChiSquareCritical {
  int df = 1;
  double alpha = 0.05;
  double value = 0.0;

  static ChiSquareCritical make(int df, double alpha) {
    return {df, alpha, chi2_quantile(df, alpha)};
  }
};

}  // namespace chi2nn::stats
