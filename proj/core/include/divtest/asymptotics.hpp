#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>

#include "divtest/divergence.hpp"
#include "divtest/simplex.hpp"

namespace divtest {

// -ln sum_z sqrt(P1(z) P2(z)); +inf for disjoint supports.
double bhattacharyya(const Distribution& p1, const Distribution& p2);

// Normalized pointwise geometric mean sqrt(P1 P2) / sum sqrt(P1 P2), the
// minimizer of KL(P||P1) + KL(P||P2). Throws on disjoint supports.
Distribution p_star(const Distribution& p1, const Distribution& p2);

// sum_i P_i (ln(P_i/Q_i) - KL(P||Q))^2. Requires P << Q.
double kl_variance(const Distribution& p, const Distribution& q);

// Second-order expansion of -ln beta_n for invariant-divergence tests at
// type-I level eps:
//   -ln beta_n ~ 2 n D_B - sqrt(n (V1 + V2)) sqrt(Qinv_{k-1}(eps))
// with V_j = V_KL(P* || P_j).
struct Prediction {
  int k = 0;
  double eps = 0.0;
  double bhattacharyya = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double quantile = 0.0;            // chisq_inv_tail(k-1, eps)
  double first_order = 0.0;         // 2 D_B
  double second_order_coeff = 0.0;  // sqrt(V1 + V2) sqrt(quantile)
  bool degenerate = false;          // P1 == P2

  double predicted_neg_log_beta(double n) const {
    return n * first_order - std::sqrt(n) * second_order_coeff;
  }
};

Prediction prediction(const Distribution& p1, const Distribution& p2, double eps);
double predict_neg_log_beta(const Distribution& p1, const Distribution& p2, double eps, int n);

// (2 eta / n) Qinv_{k-1}(eps)
double threshold_asymptotic(double eta, int k, double eps, int n);

// Minimizer of c'x + d'y over x' Sigma x + y' Sigma y <= r, Sigma = Sigma_P,
// where c_i = ln(P_i/P1_i) - ln(P_k/P1_k) and d likewise with P2.
struct KktSolution {
  Eigen::VectorXd x_star;
  Eigen::VectorXd y_star;
  Eigen::VectorXd c;
  Eigen::VectorXd d;
  double mu0 = 0.0;
  double ell_star = 0.0;  // -sqrt(r) sqrt(V_KL(P||P1) + V_KL(P||P2))
  double quadratic_value() const;  // c'x* + d'y*
};

KktSolution kkt_minimizer(const Distribution& p, const Distribution& p1, const Distribution& p2,
                          double r);

struct EllStarOptions {
  int restarts = 20;
  std::uint64_t seed = 20240601;
  double stationarity = 1e-10;
  int max_iterations = 20'000;
};

// Independent check on kkt_minimizer: projected gradient descent with
// Euclidean projection onto the ellipsoid, from random feasible starts, plus
// a boundary scan when k = 2. Returns the best objective value found.
double ell_star_numeric(const Distribution& p, const Distribution& p1, const Distribution& p2,
                        double r, const EllStarOptions& opts = {});

// sum_i (T_i - P_i) ln(P_i/P1_i) + sum_i (R_i - P_i) ln(P_i/P2_i)
double ell_linear(const Distribution& p, std::span<const double> t, std::span<const double> r,
                  const Distribution& p1, const Distribution& p2);

// Generalized likelihood-ratio statistic -2 ln Lambda = 4 n D_JS(T_X || T_Y).
double glrt_statistic(const TypeDistribution& tx, const TypeDistribution& ty);

// -2 ln of the likelihood ratio against the class {(P, P)}: 2n times
// inf_P [KL(T_X||P) + KL(T_Y||P)], evaluated at the midpoint P = (T_X+T_Y)/2.
double robust_gof_statistic(const TypeDistribution& tx, const TypeDistribution& ty);

// Same quantity with the infimum found by exponentiated-gradient descent on
// the simplex, stopped at Frank-Wolfe gap <= gap_tol.
double robust_gof_statistic_numeric(const TypeDistribution& tx, const TypeDistribution& ty,
                                    double gap_tol = 1e-10);

// (T-c)' Sigma_c (T-c) + (R-c)' Sigma_c (R-c) on the first k-1 coordinates.
double pair_quadratic_form(const Distribution& center, std::span<const double> t,
                           std::span<const double> r);

// Rounds (P + (1 - a) x*, P + (1 - a) y*) to types with denominator n:
// coordinate i < k is floored where (Sigma x*)_i > 0 and ceiled otherwise,
// and the last count restores the total. The shrink factor is
// a = min(1/2, 4 lambda_max(Sigma_P) (k-1) / (n^2 r_tilde)).
struct TypePairRounding {
  TypeDistribution tx;
  TypeDistribution ty;
  double alpha_bar = 0.0;
  double quadratic_form = 0.0;  // pair_quadratic_form(P, tx, ty)
  bool inside = false;          // quadratic_form <= r_tilde
  double scaled_ell_gap = 0.0;  // |n l_P(Gamma) - n l_P(tx, ty)|
};

TypePairRounding round_to_type_pair(const Distribution& p, const Distribution& p1,
                                    const Distribution& p2, int n, double r_tilde);

// Throws std::domain_error if rounding leaves the orthant or the pair falls
// outside the ellipsoid of radius r_tilde.
std::pair<TypeDistribution, TypeDistribution> nearest_type_pair(const Distribution& p,
                                                                const Distribution& p1,
                                                                const Distribution& p2, int n,
                                                                double r_tilde);

// n^{3/2} (q - r/(2 eta)) with q the pair quadratic form about the midpoint of
// (T, R): the smallest M' for which r' = r/(2 eta) + M'/n^{3/2} covers the pair.
double ball_cover_margin(double eta, const Distribution& t, const Distribution& r_dist,
                         double r, int n);

// n^{3/2} (r/(2 eta) - q) with q about `center`: the smallest M3 for which
// r~ = r/(2 eta) - M3/n^{3/2} excludes a pair with D(T||R) >= r.
double ball_exclusion_margin(double eta, const Distribution& center, std::span<const double> t,
                             std::span<const double> r_dist, double r, int n);

}  // namespace divtest
