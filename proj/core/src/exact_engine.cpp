#include "divtest/exact_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "divtest/genchisq.hpp"
#include "divtest/logmath.hpp"
#include "divtest/parallel.hpp"

namespace divtest {

namespace {

// Slack on tail-vs-eps comparisons, so a tail that equals eps in exact
// arithmetic is not rejected over one ulp of log-sum-exp rounding.
constexpr double kLogTailSlack = 1e-12;
constexpr std::size_t kTypesPerChunk = 16;

struct Atom {
  double value;
  double log_prob;
};

bool same_value(double head, double v) { return v == head || v - head <= kStatTieTolerance; }

// Input sorted by value; collapses runs that sit within tolerance of the run head.
std::vector<Atom> cluster_sorted(const std::vector<Atom>& atoms) {
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!out.empty() && same_value(out.back().value, a.value)) {
      out.back().log_prob = log_add_exp(out.back().log_prob, a.log_prob);
    } else {
      out.push_back(a);
    }
  }
  return out;
}

std::vector<Atom> merge_clusters(const std::vector<Atom>& a, const std::vector<Atom>& b) {
  std::vector<Atom> both;
  both.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both),
             [](const Atom& x, const Atom& y) { return x.value < y.value; });
  return cluster_sorted(both);
}

std::vector<Atom> merge_tree(std::vector<std::vector<Atom>>& parts, std::size_t lo,
                             std::size_t hi) {
  if (hi - lo == 1) return std::move(parts[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  return merge_clusters(merge_tree(parts, lo, mid), merge_tree(parts, mid, hi));
}

std::vector<double> log_of(const Distribution& p) {
  std::vector<double> out(p.k());
  std::transform(p.probs().begin(), p.probs().end(), out.begin(),
                 [](double x) { return std::log(x); });
  return out;
}

void check_same_alphabet(const Distribution& a, const Distribution& b) {
  if (a.k() != b.k()) throw std::invalid_argument("distributions differ in alphabet size");
}

}  // namespace

double StatDistribution::log_tail(double r) const {
  const auto it = std::lower_bound(values.begin(), values.end(), r - kStatTieTolerance);
  const std::size_t first = static_cast<std::size_t>(it - values.begin());
  return log_sum_exp(std::span<const double>(log_probs).subspan(first));
}

double StatDistribution::log_below(double r) const {
  const auto it = std::lower_bound(values.begin(), values.end(), r - kStatTieTolerance);
  const std::size_t count = static_cast<std::size_t>(it - values.begin());
  return log_sum_exp(std::span<const double>(log_probs).first(count));
}

double StatDistribution::log_total_mass() const { return log_sum_exp(log_probs); }

std::vector<double> StatDistribution::log_tails() const {
  std::vector<double> tails(values.size());
  double acc = kNegInf;
  for (std::size_t i = values.size(); i-- > 0;) {
    acc = log_add_exp(acc, log_probs[i]);
    tails[i] = acc;
  }
  return tails;
}

void StatDistribution::write_csv(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "value,probability\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << values[i] << ',' << std::exp(log_probs[i]) << '\n';
  }
  out.precision(old);
}

StatDistribution statistic_law(const DivergenceSpec& d, const Distribution& px,
                               const Distribution& py, int n, const EngineOptions& opts) {
  check_same_alphabet(px, py);
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  const int k = static_cast<int>(px.k());

  std::uint64_t types = 0;
  try {
    types = type_count(n, k);
  } catch (const std::overflow_error&) {
    throw BudgetExceeded("type count overflows; n=" + std::to_string(n));
  }
  if (types > opts.pair_budget / types) {
    throw BudgetExceeded("enumeration needs " + std::to_string(types) + "^2 type pairs, budget is " +
                         std::to_string(opts.pair_budget));
  }

  const std::vector<TypeDistribution> all = enumerate_types(n, k);
  const std::vector<double> log_px = log_of(px);
  const std::vector<double> log_py = log_of(py);
  std::vector<double> freqs(all.size() * k);
  std::vector<double> lp_x(all.size());
  std::vector<double> lp_y(all.size());
  for (std::size_t t = 0; t < all.size(); ++t) {
    const std::vector<double> f = all[t].frequencies();
    std::copy(f.begin(), f.end(), freqs.begin() + t * k);
    lp_x[t] = log_type_class_prob(all[t].counts(), log_px);
    lp_y[t] = log_type_class_prob(all[t].counts(), log_py);
  }
  auto freq = [&](std::size_t t) { return std::span<const double>(freqs).subspan(t * k, k); };

  const std::size_t chunks = (all.size() + kTypesPerChunk - 1) / kTypesPerChunk;
  std::vector<std::vector<Atom>> parts(chunks);
  parallel_for_chunks(chunks, opts.workers, [&](std::size_t chunk) {
    std::vector<Atom> atoms;
    const std::size_t end = std::min(all.size(), (chunk + 1) * kTypesPerChunk);
    for (std::size_t i = chunk * kTypesPerChunk; i < end; ++i) {
      if (lp_x[i] == kNegInf) continue;
      for (std::size_t j = 0; j < all.size(); ++j) {
        if (lp_y[j] == kNegInf) continue;
        atoms.push_back({evaluate(d, freq(i), freq(j)), lp_x[i] + lp_y[j]});
      }
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
      return a.value < b.value || (a.value == b.value && a.log_prob < b.log_prob);
    });
    parts[chunk] = cluster_sorted(atoms);
  });

  const std::vector<Atom> merged = merge_tree(parts, 0, parts.size());
  StatDistribution law;
  law.n = n;
  law.k = px.k();
  law.divergence = d.name();
  law.px = px.vec();
  law.py = py.vec();
  law.values.reserve(merged.size());
  law.log_probs.reserve(merged.size());
  for (const Atom& a : merged) {
    law.values.push_back(a.value);
    law.log_probs.push_back(a.log_prob);
  }
  return law;
}

StatDistribution statistic_distribution(const DivergenceSpec& d, const Distribution& p, int n,
                                        const EngineOptions& opts) {
  return statistic_law(d, p, p, n, opts);
}

double exact_type1(const DivergenceSpec& d, double r, const Distribution& p, int n,
                   const EngineOptions& opts) {
  return statistic_distribution(d, p, n, opts).log_tail(r);
}

double exact_type2(const DivergenceSpec& d, double r, const Distribution& p1,
                   const Distribution& p2, int n, const EngineOptions& opts) {
  return statistic_law(d, p1, p2, n, opts).log_below(r);
}

ErrorReport exact_errors(const DivergenceSpec& d, double r, const Distribution& p0,
                         const Distribution& p1, const Distribution& p2, int n,
                         const EngineOptions& opts) {
  ErrorReport report;
  report.threshold = r;
  report.n = n;
  report.log_alpha = exact_type1(d, r, p0, n, opts);
  report.log_beta = exact_type2(d, r, p1, p2, n, opts);
  return report;
}

double calibrate(const StatDistribution& law, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0, 1)");
  const std::vector<double> tails = law.log_tails();
  const double log_eps = std::log(eps);
  for (std::size_t i = 0; i < law.values.size(); ++i) {
    if (tails[i] <= log_eps + kLogTailSlack) return law.values[i];
  }
  // Even the top atom carries more than eps: the infimum sits just above it.
  const double top = law.values.back();
  if (std::isinf(top)) {
    throw std::domain_error("P(stat = +inf) exceeds eps; no finite threshold achieves it");
  }
  return std::nextafter(top, std::numeric_limits<double>::infinity());
}

double calibrate_exact(const DivergenceSpec& d, const Distribution& p, int n, double eps,
                       const EngineOptions& opts) {
  return calibrate(statistic_distribution(d, p, n, opts), eps);
}

double lemma1_sup_gap(const StatDistribution& law, const std::vector<double>& weights) {
  const GenChiSq limit(weights);
  const std::vector<double> tails = law.log_tails();
  const double half_n = 0.5 * law.n;
  double gap = 0.0;
  for (std::size_t i = 0; i < law.values.size(); ++i) {
    const double v = law.values[i];
    const double q = std::isinf(v) ? 0.0 : genchisq_tail(limit, half_n * v);
    gap = std::max(gap, std::abs(std::exp(tails[i]) - q));
  }
  return gap;
}

double lemma1_sup_gap_exact(const DivergenceSpec& d, const Distribution& p, int n,
                            const EngineOptions& opts) {
  const Eigen::VectorXd lambda = local_eigenvalues(d, p);
  const std::vector<double> weights(lambda.data(), lambda.data() + lambda.size());
  return lemma1_sup_gap(statistic_distribution(d, p, n, opts), weights);
}

}  // namespace divtest
