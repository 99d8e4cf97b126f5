#include "divtest/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "divtest/genchisq.hpp"
#include "divtest/parallel.hpp"

namespace divtest {

namespace {

std::uint64_t block_count(std::uint64_t trials, std::uint64_t block_size) {
  return (trials + block_size - 1) / block_size;
}

// Runs visit(stat) for every trial of block b, in draw order.
template <typename Visit>
void run_block(const DivergenceSpec& d, const InverseCdfSampler& sx, const InverseCdfSampler& sy,
               int n, std::size_t k, std::uint64_t seed, std::uint64_t block,
               std::uint64_t count, Visit&& visit) {
  RngStream stream(seed, block);
  std::vector<int> cx(k), cy(k);
  std::vector<double> fx(k), fy(k);
  const double inv_n = 1.0 / n;
  for (std::uint64_t t = 0; t < count; ++t) {
    std::fill(cx.begin(), cx.end(), 0);
    std::fill(cy.begin(), cy.end(), 0);
    sx.draw_counts(n, stream, cx);
    sy.draw_counts(n, stream, cy);
    for (std::size_t i = 0; i < k; ++i) {
      fx[i] = cx[i] * inv_n;
      fy[i] = cy[i] * inv_n;
    }
    visit(evaluate(d, fx, fy));
  }
}

void check_args(const Distribution& px, const Distribution& py, int n, std::uint64_t trials,
                const McOptions& opts) {
  if (px.k() != py.k()) throw std::invalid_argument("distributions differ in alphabet size");
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (opts.block_size < 1) throw std::invalid_argument("block size must be >= 1");
}

}  // namespace

McEstimate mc_error(const DivergenceSpec& d, double r, const Distribution& p1,
                    const Distribution& p2, int n, std::uint64_t trials, std::uint64_t seed,
                    ErrorType which, const McOptions& opts, std::vector<BlockCount>* blocks) {
  check_args(p1, p2, n, trials, opts);
  if (which == ErrorType::Type1 && !(p1 == p2)) {
    throw std::invalid_argument("type-I simulation needs P1 == P2");
  }
  const InverseCdfSampler sx(p1), sy(p2);
  const std::uint64_t nblocks = block_count(trials, opts.block_size);
  std::vector<BlockCount> counts(nblocks);
  parallel_for_chunks(nblocks, opts.workers, [&](std::size_t b) {
    const std::uint64_t count = std::min(opts.block_size, trials - b * opts.block_size);
    std::uint64_t hits = 0;
    run_block(d, sx, sy, n, p1.k(), seed, b, count, [&](double stat) {
      const bool reject = rejects(stat, r);
      hits += (which == ErrorType::Type1) == reject;
    });
    counts[b] = {b, count, hits};
  });

  std::uint64_t hits = 0;
  for (const BlockCount& c : counts) hits += c.hits;
  McEstimate est;
  est.trials = trials;
  est.seed = seed;
  est.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(trials));
  if (blocks) *blocks = std::move(counts);
  return est;
}

void write_block_csv(std::ostream& out, const std::vector<BlockCount>& blocks) {
  out << "block,trials,hits\n";
  for (const BlockCount& b : blocks) out << b.block << ',' << b.trials << ',' << b.hits << '\n';
}

std::vector<double> simulate_statistic(const DivergenceSpec& d, const Distribution& px,
                                       const Distribution& py, int n, std::uint64_t trials,
                                       std::uint64_t seed, const McOptions& opts) {
  check_args(px, py, n, trials, opts);
  const InverseCdfSampler sx(px), sy(py);
  std::vector<double> out(trials);
  const std::uint64_t nblocks = block_count(trials, opts.block_size);
  parallel_for_chunks(nblocks, opts.workers, [&](std::size_t b) {
    const std::uint64_t first = b * opts.block_size;
    const std::uint64_t count = std::min(opts.block_size, trials - first);
    std::uint64_t slot = first;
    run_block(d, sx, sy, n, px.k(), seed, b, count, [&](double stat) { out[slot++] = stat; });
  });
  return out;
}

double empirical_calibrate(std::vector<double> sample, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0, 1)");
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  const double total = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size();) {
    // sample[i] opens a run of ties; everything from i on is >= it.
    if (static_cast<double>(sample.size() - i) <= eps * total) return sample[i];
    const double v = sample[i];
    while (i < sample.size() && sample[i] == v) ++i;
  }
  const double top = sample.back();
  if (std::isinf(top)) throw std::domain_error("simulated mass at +inf exceeds eps");
  return std::nextafter(top, std::numeric_limits<double>::infinity());
}

double mc_calibrate(const DivergenceSpec& d, const Distribution& p, int n, double eps,
                    std::uint64_t trials, std::uint64_t seed, const McOptions& opts) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0, 1)");
  if (static_cast<double>(trials) * eps < 50.0) {
    throw std::invalid_argument("mc_calibrate needs trials * eps >= 50 to resolve the tail");
  }
  return empirical_calibrate(simulate_statistic(d, p, p, n, trials, seed, opts), eps);
}

double statistic_ecdf_gap(const DivergenceSpec& d, const Distribution& p, int n,
                          std::uint64_t trials, std::uint64_t seed, const McOptions& opts) {
  if (trials < 10'000) throw std::invalid_argument("statistic_ecdf_gap needs >= 1e4 trials");
  const Eigen::VectorXd lambda = local_eigenvalues(d, p);
  const GenChiSq limit(std::vector<double>(lambda.data(), lambda.data() + lambda.size()));

  std::vector<double> sample = simulate_statistic(d, p, p, n, trials, seed, opts);
  std::sort(sample.begin(), sample.end());
  const double total = static_cast<double>(sample.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < sample.size();) {
    const double v = sample[i];
    std::size_t j = i;
    while (j < sample.size() && sample[j] == v) ++j;
    const double cdf = std::isinf(v) ? 1.0 : 1.0 - genchisq_tail(limit, 0.5 * n * v);
    const double below = static_cast<double>(i) / total;
    const double upto = static_cast<double>(j) / total;
    gap = std::max({gap, std::abs(below - cdf), std::abs(upto - cdf)});
    i = j;
  }
  return gap;
}

}  // namespace divtest
