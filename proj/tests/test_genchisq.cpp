#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "divtest/genchisq.hpp"

using namespace divtest;

namespace {

// One degree of freedom: Q(c) = 2 Phi(-sqrt c) = erfc(sqrt(c/2)).
double chisq1_tail(double c) { return std::erfc(std::sqrt(c / 2.0)); }

double bisect_chisq1(double eps) {
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chisq1_tail(mid) > eps ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Weights (w, w, v, v): sum of exponentials with means 2w and 2v.
double two_exponential_tail(double w, double v, double c) {
  return (w * std::exp(-c / (2 * w)) - v * std::exp(-c / (2 * v))) / (w - v);
}

}  // namespace

TEST(ChisqTail, ClosedForms) {
  EXPECT_DOUBLE_EQ(chisq_tail(2, 0.0), 1.0);
  for (double c : {0.1, 1.0, 3.0, 10.0, 40.0}) {
    EXPECT_NEAR(chisq_tail(2, c), std::exp(-c / 2), 1e-14);
    EXPECT_NEAR(chisq_tail(1, c), chisq1_tail(c), 1e-13);
  }
  EXPECT_NEAR(chisq_tail(1, 3.8415), 0.05, 1e-4);
  EXPECT_THROW(chisq_tail(1, -1.0), std::invalid_argument);
  EXPECT_THROW(chisq_tail(0, 1.0), std::invalid_argument);
}

TEST(ChisqInvTail, MatchesBisectionOracle) {
  EXPECT_NEAR(chisq_inv_tail(1, 0.05), 3.8415, 1e-4);
  for (double eps : {0.5, 0.2, 0.05, 1e-3, 1e-8})
    EXPECT_NEAR(chisq_inv_tail(1, eps), bisect_chisq1(eps), 1e-9 * bisect_chisq1(eps));
  for (double eps : {0.3, 0.01}) EXPECT_NEAR(chisq_inv_tail(2, eps), -2 * std::log(eps), 1e-9);
  for (int m = 1; m <= 8; ++m)
    for (double eps : {0.9, 0.2, 1e-4}) EXPECT_NEAR(chisq_tail(m, chisq_inv_tail(m, eps)), eps, 1e-12);
  EXPECT_THROW(chisq_inv_tail(1, 0.0), std::invalid_argument);
  EXPECT_THROW(chisq_inv_tail(1, 1.0), std::invalid_argument);
}

TEST(GenChiSq, Moments) {
  const GenChiSq g({2.0, 1.0, 0.5});
  EXPECT_EQ(g.dof(), 3);
  EXPECT_DOUBLE_EQ(g.mean(), 3.5);
  EXPECT_DOUBLE_EQ(g.variance(), 2 * (4.0 + 1.0 + 0.25));
  EXPECT_EQ(g.common_weight(), 0.0);
  EXPECT_EQ(GenChiSq({0.25, 0.25}).common_weight(), 0.25);
  EXPECT_THROW(GenChiSq({}), std::invalid_argument);
  EXPECT_THROW(GenChiSq({1.0, 0.0}), std::invalid_argument);
}

TEST(GenChiSq, EqualWeightsReduceToScaledChisq) {
  for (double eta : {0.125, 0.5, 1.0})
    for (int m = 1; m <= 6; ++m)
      for (double c : {0.01, 0.3, 1.0, 2.5, 7.0}) {
        const std::vector<double> w(m, eta);
        EXPECT_NEAR(genchisq_tail(GenChiSq(w), c), chisq_tail(m, c / eta), 1e-12);
        EXPECT_NEAR(imhof_tail(w, c), chisq_tail(m, c / eta), 1e-8) << eta << " " << m << " " << c;
      }
}

TEST(Imhof, MatchesTwoExponentialClosedForm) {
  for (double c : {0.05, 0.5, 2.0, 6.0, 15.0, 40.0})
    EXPECT_NEAR(imhof_tail(std::vector<double>{3.0, 3.0, 1.0, 1.0}, c), two_exponential_tail(3.0, 1.0, c),
                1e-9)
        << c;
}

TEST(Imhof, EdgeCases) {
  const std::vector<double> w = {2.0, 1.0};
  EXPECT_NEAR(imhof_tail(w, 0.0), 1.0, 1e-12);
  EXPECT_LT(imhof_tail(w, 200.0), 1e-9);
  double prev = 1.0;
  for (double c = 0.1; c < 20.0; c += 0.7) {
    const double q = imhof_tail(w, c);
    EXPECT_LE(q, prev + 1e-10);
    prev = q;
  }
}

TEST(Imhof, AgreesWithIndependentSampler) {
  const std::vector<double> w = {2.0, 1.0};
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  const int n = 200000;
  std::vector<double> draws(n);
  for (double& x : draws) {
    const double a = z(rng), b = z(rng);
    x = 2.0 * a * a + b * b;
  }
  for (double c : {0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0}) {
    double hits = 0;
    for (double x : draws) hits += x >= c;
    const double p = hits / n;
    const double q = imhof_tail(w, c);
    const double se = std::sqrt(q * (1 - q) / n);
    EXPECT_LE(std::abs(p - q), 3 * se + 1e-4) << c;
  }
}

TEST(GenChiSq, InverseTailRoundTrip) {
  const GenChiSq g({1.5, 0.4, 0.1});
  for (double eps : {0.5, 0.2, 0.05, 0.01}) {
    const double c = genchisq_inv_tail(g, eps);
    EXPECT_NEAR(genchisq_tail(g, c), eps, 1e-8);
  }
}

TEST(GenChiSq, SamplerMean) {
  const GenChiSq g({2.0, 0.5});
  RngStream s(3, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += genchisq_sample(g, s);
  EXPECT_NEAR(sum / n, g.mean(), 4 * std::sqrt(g.variance() / n));
}
