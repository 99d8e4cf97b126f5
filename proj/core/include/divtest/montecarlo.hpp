#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "divtest/divergence.hpp"
#include "divtest/simplex.hpp"

namespace divtest {

enum class ErrorType { Type1, Type2 };

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;  // sqrt(estimate (1 - estimate) / trials)
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

struct McOptions {
  unsigned workers = 0;
  // Trials per RNG stream. Part of the reproducibility contract: changing it
  // changes the draws, changing `workers` does not.
  std::uint64_t block_size = 1024;
};

struct BlockCount {
  std::uint64_t block = 0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
};

// Draws `trials` independent pairs (X^n ~ P1, Y^n ~ P2) and counts
// rejections (Type1, requires P1 == P2) or acceptances (Type2) of the test
// D(T_X || T_Y) < r.
McEstimate mc_error(const DivergenceSpec& d, double r, const Distribution& p1,
                    const Distribution& p2, int n, std::uint64_t trials, std::uint64_t seed,
                    ErrorType which, const McOptions& opts = {},
                    std::vector<BlockCount>* blocks = nullptr);

// Columns block,trials,hits.
void write_block_csv(std::ostream& out, const std::vector<BlockCount>& blocks);

// Simulated statistic values in block order.
std::vector<double> simulate_statistic(const DivergenceSpec& d, const Distribution& px,
                                       const Distribution& py, int n, std::uint64_t trials,
                                       std::uint64_t seed, const McOptions& opts = {});

// Smallest simulated value v whose empirical tail P(stat >= v) is <= eps.
// Requires trials * eps >= 50.
double mc_calibrate(const DivergenceSpec& d, const Distribution& p, int n, double eps,
                    std::uint64_t trials, std::uint64_t seed, const McOptions& opts = {});
double empirical_calibrate(std::vector<double> sample, double eps);

// Kolmogorov-Smirnov distance between the ECDF of (n/2) * stat under P x P
// and the generalized chi-square CDF with the local eigenvalues of D at P.
double statistic_ecdf_gap(const DivergenceSpec& d, const Distribution& p, int n,
                          std::uint64_t trials, std::uint64_t seed, const McOptions& opts = {});

}  // namespace divtest
