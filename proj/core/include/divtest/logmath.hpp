#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace divtest {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ln(e^a + e^b)
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// Pairwise reduction keeps the result independent of how callers chunk input.
inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return kNegInf;
  if (xs.size() == 1) return xs[0];
  const std::size_t half = xs.size() / 2;
  return log_add_exp(log_sum_exp(xs.first(half)), log_sum_exp(xs.subspan(half)));
}

// ln(1 - e^a) for a <= 0.
inline double log1m_exp(double a) {
  if (a == kNegInf) return 0.0;
  return a > -0.693147 ? std::log(-std::expm1(a)) : std::log1p(-std::exp(a));
}

}  // namespace divtest
