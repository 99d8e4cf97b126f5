#pragma once

#include <span>
#include <vector>

#include "divtest/rng.hpp"

namespace divtest {

// Upper tail Q_{chi^2_m}(c) = Gamma(m/2, c/2) / Gamma(m/2).
double chisq_tail(int m, double c);

// c with chisq_tail(m, c) = eps, by bracketing bisection.
double chisq_inv_tail(int m, double eps);

// Law of sum_i w_i * Z_i^2 with Z_i i.i.d. standard normal and w_i > 0.
class GenChiSq {
 public:
  explicit GenChiSq(std::vector<double> weights);

  std::span<const double> weights() const { return weights_; }
  int dof() const { return static_cast<int>(weights_.size()); }
  double mean() const;
  double variance() const;
  // Common value when all weights coincide (within 1e-6 relative), else 0.
  double common_weight() const;

 private:
  std::vector<double> weights_;
};

// P(X >= c). Equal weights reduce to chisq_tail(m, c / eta); everything else
// goes through imhof_tail.
double genchisq_tail(const GenChiSq& g, double c);

// Characteristic-function inversion
//   Q(c) = 1/2 + (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du,
//   theta(u) = (1/2) sum atan(w_i u) - c u / 2,
//   rho(u) = prod (1 + w_i^2 u^2)^{1/4},
// integrated panel by panel with adaptive Gauss-Kronrod until a bound on
// the remaining tail drops below abs_tol.
double imhof_tail(std::span<const double> weights, double c, double abs_tol = 1e-9);

// Quantile of the generalized law by bisection on genchisq_tail.
double genchisq_inv_tail(const GenChiSq& g, double eps);

double genchisq_sample(const GenChiSq& g, RngStream& stream);

}  // namespace divtest
