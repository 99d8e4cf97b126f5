#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "divtest/simplex.hpp"

namespace divtest {

enum class DivergenceKind { KL, JS, Renyi, FDiv, ChiSq, SqL2 };

// Convex generator f of an f-divergence D_f(S||R) = sum_i R_i f(S_i / R_i),
// with f(1) = 0 and f''(1) > 0.
struct FGenerator {
  std::string name;
  std::function<double(double)> f;
  // Optional closed-form second derivative; differentiated numerically if absent.
  std::function<double(double)> f2;
  // lim_{t->inf} f(t)/t, charged per unit of S-mass on cells where R is zero.
  double recession = std::numeric_limits<double>::infinity();

  double second_derivative(double t) const;
};

// Named generators: "hellinger" (squared Hellinger), "kl", "reverse-kl", "pearson".
FGenerator named_generator(std::string_view name);

class DivergenceSpec {
 public:
  static DivergenceSpec kl() { return DivergenceSpec(DivergenceKind::KL); }
  static DivergenceSpec js() { return DivergenceSpec(DivergenceKind::JS); }
  static DivergenceSpec chi2() { return DivergenceSpec(DivergenceKind::ChiSq); }
  static DivergenceSpec sql2() { return DivergenceSpec(DivergenceKind::SqL2); }
  static DivergenceSpec renyi(double alpha);
  static DivergenceSpec fdiv(FGenerator generator);

  // Grammar: "kl", "js", "renyi:<alpha>", "chi2", "sql2", "fdiv:<generator>".
  static DivergenceSpec parse(std::string_view text);

  DivergenceKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  const FGenerator& generator() const { return *generator_; }

  // Round-trips through parse().
  std::string name() const;

  // True when D(S||R) = D(R||S) for all arguments.
  bool symmetric() const {
    return kind_ == DivergenceKind::JS || kind_ == DivergenceKind::SqL2;
  }

 private:
  explicit DivergenceSpec(DivergenceKind kind) : kind_(kind) {}

  DivergenceKind kind_;
  double alpha_ = 0.0;
  std::shared_ptr<const FGenerator> generator_;
};

// D(S||R) with boundary conventions 0 ln(0/q) = 0 and p ln(p/0) = +inf.
// +inf is a legitimate value.
double evaluate(const DivergenceSpec& d, std::span<const double> s, std::span<const double> r);

// Statistic values this close are one atom: mathematically equal values
// reached by different summation orders differ by a few ulps.
inline constexpr double kStatTieTolerance = 1e-12;

// The test rejects H0 iff stat >= r, read up to the tie tolerance.
inline bool rejects(double stat, double r) { return !(stat < r - kStatTieTolerance); }
inline double evaluate(const DivergenceSpec& d, const Distribution& s, const Distribution& r) {
  return evaluate(d, s.probs(), r.probs());
}

// Sigma_P on the first k-1 coordinates: 1/P_i + 1/P_k on the diagonal,
// 1/P_k elsewhere. P must be interior.
Eigen::MatrixXd sigma_matrix(const Distribution& p);

// Reduced-coordinate quadratic form (t-c)' Sigma_c (t-c) over the first k-1
// coordinates.
double sigma_quadratic_form(const Distribution& center, std::span<const double> t);

// Local matrix A_{D,P}: half the Hessian of S -> D(S||P) at S = P in the
// coordinates S_1..S_{k-1}, with S_k absorbing each perturbation. Central
// differences with one Richardson step; step <= 0 picks 1e-2 * min(P).
Eigen::MatrixXd local_matrix(const DivergenceSpec& d, const Distribution& p, double step = 0.0);

// eta with A = eta * Sigma_P, if the Frobenius residual is within tol
// relative to ||A||_F both at P and at the uniform distribution, and the two
// fitted values agree within tol relative.
std::optional<double> invariance_constant(const DivergenceSpec& d, const Distribution& p,
                                          double tol = 1e-5);

struct LocalQuadratic {
  Eigen::MatrixXd a;
  Eigen::MatrixXd sigma;
  Eigen::VectorXd eigenvalues;  // of Sigma^{-1/2} A Sigma^{-1/2}, descending
};

LocalQuadratic local_quadratic(const DivergenceSpec& d, const Distribution& p);

// Eigenvalues of Sigma^{-1/2} A Sigma^{-1/2}, sorted descending. Throws
// std::domain_error if one is not positive.
Eigen::VectorXd local_eigenvalues(const DivergenceSpec& d, const Distribution& p);

}  // namespace divtest
