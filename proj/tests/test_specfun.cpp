#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lcband/oracles.hpp"
#include "lcband/specfun.hpp"

using namespace lcband;

TEST(ExpMean, KnownValues) {
  EXPECT_DOUBLE_EQ(exp_mean(0.0), 1.0);
  EXPECT_NEAR(exp_mean(1.0), std::exp(1.0) - 1.0, 1e-14);
  EXPECT_NEAR(exp_mean(std::log(2.0)), 1.0 / std::log(2.0), 1e-14);
}

TEST(ExpMean, ContinuousAcrossSeriesSwitch) {
  for (double s : {1e-4, -1e-4}) {
    const double lo = exp_mean(std::nextafter(s, 0.0));
    const double hi = exp_mean(s * (1.0 + 1e-12));
    EXPECT_NEAR(lo, hi, 1e-14);
  }
  EXPECT_NEAR(exp_mean(1e-10), 1.0 + 0.5e-10, 1e-16);
}

TEST(ExpMeanDeriv, KnownValues) {
  EXPECT_DOUBLE_EQ(exp_mean_deriv(0.0), 0.5);
  EXPECT_NEAR(exp_mean_deriv(1.0), 1.0, 1e-14);
  const double h = 1e-6;
  const double fd = (exp_mean(-1.0 + h) - exp_mean(-1.0 - h)) / (2.0 * h);
  EXPECT_NEAR(exp_mean_deriv(-1.0), fd, 1e-9);
  EXPECT_NEAR(exp_mean_deriv(-1.0), 0.264241117657115, 1e-12);
}

TEST(ExpMeanDeriv, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int k = 0; k < 500; ++k) {
    const double s = u(rng);
    const double h = 1e-6 * std::max(1.0, std::fabs(s));
    const double fd = (exp_mean(s + h) - exp_mean(s - h)) / (2.0 * h);
    EXPECT_NEAR(exp_mean_deriv(s), fd, 1e-6 * std::max(1.0, std::fabs(fd))) << "s=" << s;
  }
}

TEST(ExpMean, PositiveAndStrictlyMidpointConvex) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int k = 0; k < 2000; ++k) {
    const double a = u(rng), b = u(rng);
    if (std::fabs(a - b) < 1e-3) continue;
    EXPECT_GT(exp_mean(a), 0.0);
    EXPECT_LT(exp_mean(0.5 * (a + b)), 0.5 * (exp_mean(a) + exp_mean(b))) << a << " " << b;
  }
}

// exp(t) E(s - t) is the mean of exp over a chord from t to s.
static double chord(double s, double t) { return std::exp(t) * exp_mean(s - t); }

TEST(ExpMean, ChordIncreasingInBothEnds) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> d(1e-3, 5.0);
  for (int k = 0; k < 2000; ++k) {
    const double s = u(rng), t = u(rng), delta = d(rng);
    EXPECT_GE(chord(s, t + delta), chord(s, t) * (1.0 - 1e-14));
    EXPECT_GE(chord(s + delta, t), chord(s, t) * (1.0 - 1e-14));
  }
}

TEST(ExpMean, ChordLowerBoundAfterRaisingUpperEnd) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> c(1e-3, 8.0);
  for (int k = 0; k < 2000; ++k) {
    double s = u(rng), t = u(rng);
    if (s > t) std::swap(s, t);
    const double C = c(rng);
    EXPECT_GE(chord(s, t + C), (1.0 + C / 2.0) * chord(s, t) * (1.0 - 1e-13)) << s << " " << t << " " << C;
  }
}

TEST(RegIncBeta, KnownValues) {
  EXPECT_NEAR(reg_inc_beta(0.5, {1.0, 1.0}), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(reg_inc_beta(1.0, {2.5, 7.0}), 1.0);
  EXPECT_DOUBLE_EQ(reg_inc_beta(0.0, {2.5, 7.0}), 0.0);
  EXPECT_NEAR(reg_inc_beta(0.3, {2.0, 3.0}), 0.3483, 1e-12);
  const double oracle = oracle::integrate([](double t) { return 12.0 * t * (1 - t) * (1 - t); }, 0.0, 0.3, 1e-14);
  EXPECT_NEAR(reg_inc_beta(0.3, {2.0, 3.0}), oracle, 1e-10);
}

TEST(RegIncBeta, RejectsBadArguments) {
  EXPECT_THROW(reg_inc_beta(1.5, {1.0, 1.0}), DomainError);
  EXPECT_THROW(reg_inc_beta(-0.1, {1.0, 1.0}), DomainError);
  EXPECT_THROW(reg_inc_beta(0.5, {0.0, 1.0}), DomainError);
  EXPECT_THROW(reg_inc_beta(0.5, {1.0, -2.0}), DomainError);
}

TEST(Qbeta, KnownValues) {
  EXPECT_NEAR(qbeta(0.5, {1.0, 1.0}), 0.5, 1e-14);
  EXPECT_NEAR(qbeta(0.5, {2.0, 2.0}), 0.5, 1e-14);
  const double p = 0.1 / 24.0;
  const double ref = oracle::bisect_quantile([](double x) { return oracle::beta_cdf_quadrature(x, 8.0, 93.0); }, p);
  EXPECT_NEAR(qbeta(p, {8.0, 93.0}), ref, 1e-10);
}

TEST(Qbeta, RejectsBadArguments) {
  EXPECT_THROW(qbeta(0.0, {1.0, 1.0}), DomainError);
  EXPECT_THROW(qbeta(1.0, {1.0, 1.0}), DomainError);
  EXPECT_THROW(qbeta(0.5, {-1.0, 1.0}), DomainError);
}

TEST(Qbeta, InvertsRegIncBeta) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = 0.5 + 200.0 * u(rng);
    const double b = 0.5 + 2000.0 * u(rng);
    const double p = 1e-4 + (1.0 - 2e-4) * u(rng);
    EXPECT_NEAR(reg_inc_beta(qbeta(p, {a, b}), {a, b}), p, 1e-8) << a << " " << b << " " << p;
  }
}

TEST(Qbeta, TinyShapeParameter) {
  // Mass piles up next to 1; the quantile is resolved to double spacing.
  const double q = qbeta(0.780694, {14.9265, 0.0734862});
  EXPECT_GT(q, 0.999);
  EXPECT_LE(q, 1.0);
}

TEST(Oracles, BetaFunctionsAgreeWithQuadrature) {
  const auto r = oracle::check_beta_functions(40, 21);
  EXPECT_TRUE(r.passed()) << oracle::summarize(r);
}

TEST(Oracles, QuantileDeviationBound) {
  const auto r = oracle::check_quantile_deviation(1000, 23);
  EXPECT_TRUE(r.passed()) << oracle::summarize(r);
}
