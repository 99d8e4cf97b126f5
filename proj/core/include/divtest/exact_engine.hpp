#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "divtest/divergence.hpp"
#include "divtest/simplex.hpp"

namespace divtest {

struct EngineOptions {
  // Upper bound on the number of ordered type pairs enumerated.
  std::uint64_t pair_budget = 100'000'000;
  // 0 = one per hardware thread. Results do not depend on this.
  unsigned workers = 0;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact finite-n law of D(T_X || T_Y) with X^n ~ Px, Y^n ~ Py independent.
struct StatDistribution {
  std::vector<double> values;     // ascending, distinct; +inf may be last
  std::vector<double> log_probs;  // natural log
  int n = 0;
  std::size_t k = 0;
  std::string divergence;
  std::vector<double> px;
  std::vector<double> py;

  // ln P(stat >= r) and ln P(stat < r), with ties read as in rejects().
  double log_tail(double r) const;
  double log_below(double r) const;
  double log_total_mass() const;
  // ln P(stat >= values[i]) for every i.
  std::vector<double> log_tails() const;

  // Columns value,probability.
  void write_csv(std::ostream& out) const;
};

StatDistribution statistic_law(const DivergenceSpec& d, const Distribution& px,
                               const Distribution& py, int n, const EngineOptions& opts = {});

// Law under the null, X^n and Y^n both i.i.d. P.
StatDistribution statistic_distribution(const DivergenceSpec& d, const Distribution& p, int n,
                                        const EngineOptions& opts = {});

// ln alpha_n: mass of the rejection region {stat >= r} under P x P.
double exact_type1(const DivergenceSpec& d, double r, const Distribution& p, int n,
                   const EngineOptions& opts = {});

// ln beta_n: mass of the acceptance region {stat < r} under P1 x P2.
double exact_type2(const DivergenceSpec& d, double r, const Distribution& p1,
                   const Distribution& p2, int n, const EngineOptions& opts = {});

struct ErrorReport {
  double log_alpha = 0.0;
  double log_beta = 0.0;
  double threshold = 0.0;
  int n = 0;
};

ErrorReport exact_errors(const DivergenceSpec& d, double r, const Distribution& p0,
                         const Distribution& p1, const Distribution& p2, int n,
                         const EngineOptions& opts = {});

// Smallest achievable value v with P(stat >= v) <= eps.
double calibrate(const StatDistribution& law, double eps);
double calibrate_exact(const DivergenceSpec& d, const Distribution& p, int n, double eps,
                       const EngineOptions& opts = {});

// sup over achievable c of |P((n/2) stat >= c) - Q_{lambda}(c)|, with lambda
// the local eigenvalues of D at the null distribution.
double lemma1_sup_gap(const StatDistribution& law, const std::vector<double>& weights);
double lemma1_sup_gap_exact(const DivergenceSpec& d, const Distribution& p, int n,
                            const EngineOptions& opts = {});

}  // namespace divtest
