#pragma once

// Special functions used by the band construction: the exponential mean
// E(s) = (exp(s) - 1) / s, the regularized incomplete beta function and
// beta quantiles.

#include <cmath>
#include <limits>
#include <sstream>

#include "lcband/errors.hpp"

namespace lcband {

struct BetaParams {
  double a;
  double b;
};

namespace detail {

inline double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

inline void check_params(const BetaParams& p) {
  if (!(p.a > 0.0) || !(p.b > 0.0) || !std::isfinite(p.a) || !std::isfinite(p.b)) {
    std::ostringstream os;
    os << "beta shape parameters must be positive, got a=" << p.a << " b=" << p.b;
    throw DomainError(os.str());
  }
}

// Continued fraction for I_x(a,b), modified Lentz iteration.
inline double beta_cont_frac(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 100000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw ConvergenceError("incomplete beta continued fraction did not converge");
}

// Lower-tail standard normal quantile (Acklam's rational approximation,
// relative error about 1e-9). Only used to seed the beta quantile search.
inline double normal_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) return -normal_quantile(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// E(s) = integral_0^1 exp(s t) dt.
inline double exp_mean(double s) {
  if (std::fabs(s) > 1e-4) {
    if (s > 700.0) return std::exp(s - std::log(s));  // expm1 overflows; -1 is negligible
    return std::expm1(s) / s;
  }
  return 1.0 + s * (1.0 / 2.0 + s * (1.0 / 6.0 + s * (1.0 / 24.0 + s / 120.0)));
}

/// E'(s) = (s e^s - e^s + 1) / s^2, with E'(0) = 1/2.
inline double exp_mean_deriv(double s) {
  if (std::fabs(s) < 0.5) {
    // E'(s) = sum_{k>=1} k s^(k-1) / (k+1)!
    double term = 0.5;  // k = 1
    double sum = term;
    for (int k = 2; k < 30; ++k) {
      term *= s * k / ((k - 1.0) * (k + 1.0));
      sum += term;
      if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
  }
  if (s > 700.0) return std::exp(s - std::log(s)) * (1.0 - 1.0 / s);
  return (std::exp(s) * (s - 1.0) + 1.0) / (s * s);
}

/// Regularized incomplete beta function I_x(a, b), i.e. the Beta(a, b) cdf.
inline double reg_inc_beta(double x, BetaParams p) {
  detail::check_params(p);
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << "reg_inc_beta: x must lie in [0,1], got " << x;
    throw DomainError(os.str());
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      p.a * std::log(x) + p.b * std::log1p(-x) - detail::log_beta(p.a, p.b);
  const double front = std::exp(log_front);
  if (x < (p.a + 1.0) / (p.a + p.b + 2.0)) {
    return front * detail::beta_cont_frac(x, p.a, p.b) / p.a;
  }
  return 1.0 - front * detail::beta_cont_frac(1.0 - x, p.b, p.a) / p.b;
}

/// Beta(a, b) density.
inline double beta_pdf(double x, BetaParams p) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((p.a - 1.0) * std::log(x) + (p.b - 1.0) * std::log1p(-x) -
                  detail::log_beta(p.a, p.b));
}

/// Beta(a, b) quantile: Newton steps from a normal-approximation seed,
/// safeguarded by a bisection bracket.
inline double qbeta(double prob, BetaParams p) {
  detail::check_params(p);
  if (!(prob > 0.0 && prob < 1.0)) {
    std::ostringstream os;
    os << "qbeta: probability must lie in (0,1), got " << prob;
    throw DomainError(os.str());
  }
  constexpr double kTargetTol = 1e-14;
  constexpr double kAcceptTol = 1e-10;
  constexpr int kMaxIter = 400;

  const double sum = p.a + p.b;
  const double mean = p.a / sum;
  const double sd = std::sqrt(p.a * p.b / (sum * sum * (sum + 1.0)));
  double x = mean + detail::normal_quantile(prob) * sd;
  if (!(x > 0.0 && x < 1.0)) x = mean;

  double lo = 0.0;
  double hi = 1.0;
  double best_x = x;
  double best_err = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const double f = reg_inc_beta(x, p) - prob;
    if (std::fabs(f) < best_err) {
      best_err = std::fabs(f);
      best_x = x;
    }
    if (std::fabs(f) <= kTargetTol) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    // Root bracketed to a few ulps: the cdf may jump by more than the
    // tolerance between neighbouring doubles (tiny shape parameters).
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return best_x;
    const double dens = beta_pdf(x, p);
    double next = 0.5 * (lo + hi);
    if (dens > 0.0 && std::isfinite(dens)) {
      const double newton = x - f / dens;
      if (newton > lo && newton < hi) next = newton;
    }
    if (next == x) break;
    x = next;
  }
  if (best_err <= kAcceptTol) return best_x;
  std::ostringstream os;
  os << "qbeta failed to converge for p=" << prob << " a=" << p.a << " b=" << p.b;
  throw ConvergenceError(os.str());
}

}  // namespace lcband
