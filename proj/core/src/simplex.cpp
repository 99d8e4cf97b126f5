#include "divtest/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace divtest {

namespace {

constexpr double kSumTolerance = 1e-12;

}  // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw std::invalid_argument("distribution needs an alphabet of size >= 2");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw std::invalid_argument("distribution entries must lie in [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw std::invalid_argument("distribution entries must sum to 1 (got " +
                                std::to_string(sum) + ")");
  }
  interior_ = std::all_of(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; });
}

double Distribution::min() const { return *std::min_element(probs_.begin(), probs_.end()); }

Distribution make_distribution(std::span<const double> weights) {
  if (weights.size() < 2) {
    throw std::invalid_argument("distribution needs an alphabet of size >= 2");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("weights must be finite and nonnegative");
    }
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("weights are all zero");

  std::vector<double> probs(weights.size());
  std::transform(weights.begin(), weights.end(), probs.begin(),
                 [total](double w) { return w / total; });
  // Push the rounding residue onto the largest entry so the sum is 1 to ulp level.
  const double residue = 1.0 - std::accumulate(probs.begin(), probs.end(), 0.0);
  *std::max_element(probs.begin(), probs.end()) += residue;
  return Distribution(std::move(probs));
}

Distribution uniform_distribution(std::size_t k) {
  return make_distribution(std::vector<double>(k, 1.0));
}

TypeDistribution::TypeDistribution(std::vector<int> counts) : counts_(std::move(counts)) {
  if (counts_.size() < 2) throw std::invalid_argument("type needs k >= 2");
  for (int c : counts_) {
    if (c < 0) throw std::invalid_argument("type counts must be nonnegative");
    n_ += c;
  }
  if (n_ < 1) throw std::invalid_argument("type needs n >= 1");
}

std::vector<double> TypeDistribution::frequencies() const {
  std::vector<double> f(counts_.size());
  const double n = n_;
  std::transform(counts_.begin(), counts_.end(), f.begin(),
                 [n](int c) { return c / n; });
  return f;
}

TypeDistribution type_of_sample(std::span<const int> sample, int k) {
  if (k < 2) throw std::invalid_argument("alphabet size must be >= 2");
  if (sample.empty()) throw std::invalid_argument("sample is empty");
  std::vector<int> counts(k, 0);
  for (int s : sample) {
    if (s < 0 || s >= k) {
      throw std::out_of_range("symbol " + std::to_string(s) + " outside 0.." +
                              std::to_string(k - 1));
    }
    ++counts[s];
  }
  return TypeDistribution(std::move(counts));
}

std::uint64_t type_count(int n, int k) {
  if (n < 0 || k < 1) throw std::invalid_argument("type_count: bad arguments");
  // C(n+k-1, r) with r = min(k-1, n), multiplicatively with exact division.
  const std::uint64_t total = static_cast<std::uint64_t>(n) + k - 1;
  const std::uint64_t r = std::min<std::uint64_t>(k - 1, n);
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    // c * a / i is an integer and gcd(c/g, i/g) = 1, so (i/g) divides a.
    const std::uint64_t a = total - r + i;
    const std::uint64_t g = std::gcd(c, i);
    if (__builtin_mul_overflow(c / g, a / (i / g), &c)) {
      throw std::overflow_error("type count overflows 64 bits");
    }
  }
  return c;
}

TypeEnumerator::TypeEnumerator(int n, int k) : n_(n), counts_(k, 0) {
  if (n < 1 || k < 2) throw std::invalid_argument("enumerate_types needs n >= 1, k >= 2");
  counts_[0] = n_;
}

void TypeEnumerator::advance() {
  if (done_) return;
  const int k = static_cast<int>(counts_.size());
  int i = k - 2;
  while (i >= 0 && counts_[i] == 0) --i;
  if (i < 0) {
    done_ = true;
    return;
  }
  int tail = 1;
  for (int j = i + 1; j < k; ++j) {
    tail += counts_[j];
    counts_[j] = 0;
  }
  --counts_[i];
  counts_[i + 1] = tail;
}

std::vector<TypeDistribution> enumerate_types(int n, int k) {
  std::vector<TypeDistribution> out;
  out.reserve(type_count(n, k));
  for (TypeEnumerator e(n, k); !e.done(); e.advance()) out.emplace_back(e.current());
  return out;
}

double log_type_class_prob(std::span<const int> counts, std::span<const double> log_p) {
  int n = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const int c = counts[i];
    if (c == 0) continue;
    if (log_p[i] == -std::numeric_limits<double>::infinity()) {
      return -std::numeric_limits<double>::infinity();
    }
    n += c;
    acc += c * log_p[i] - std::lgamma(c + 1.0);
  }
  return acc + std::lgamma(n + 1.0);
}

double log_type_class_prob(const TypeDistribution& t, const Distribution& p) {
  if (t.k() != p.k()) throw std::invalid_argument("type and distribution differ in k");
  std::vector<double> log_p(p.k());
  std::transform(p.probs().begin(), p.probs().end(), log_p.begin(),
                 [](double x) { return std::log(x); });
  return log_type_class_prob(t.counts(), log_p);
}

InverseCdfSampler::InverseCdfSampler(const Distribution& p) : cdf_(p.k()) {
  std::partial_sum(p.probs().begin(), p.probs().end(), cdf_.begin());
  cdf_.back() = 1.0;
}

int InverseCdfSampler::draw(RngStream& stream) const {
  const double u = stream.uniform();
  // First index whose cumulative mass exceeds u; zero-mass symbols are skipped.
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(it - cdf_.begin());
}

void InverseCdfSampler::draw_counts(int n, RngStream& stream, std::span<int> counts) const {
  for (int i = 0; i < n; ++i) ++counts[draw(stream)];
}

std::vector<int> sample_iid(const Distribution& p, int n, RngStream& stream) {
  if (n < 1) throw std::invalid_argument("sample_iid needs n >= 1");
  const InverseCdfSampler sampler(p);
  std::vector<int> out(n);
  for (int& x : out) x = sampler.draw(stream);
  return out;
}

}  // namespace divtest
