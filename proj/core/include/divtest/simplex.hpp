#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "divtest/rng.hpp"

namespace divtest {

// Probability vector on a k-letter alphabet, k >= 2.
//
// Entries sum to one within 1e-12. interior() is true iff every entry is
// strictly positive.
class Distribution {
 public:
  // Validates an already-normalized vector.
  explicit Distribution(std::vector<double> probs);

  std::size_t k() const { return probs_.size(); }
  bool interior() const { return interior_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  const std::vector<double>& vec() const { return probs_; }
  double min() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
  bool interior_ = false;
};

// Normalizes nonnegative finite weights.
Distribution make_distribution(std::span<const double> weights);
inline Distribution make_distribution(std::initializer_list<double> weights) {
  return make_distribution(std::span<const double>(weights.begin(), weights.size()));
}

Distribution uniform_distribution(std::size_t k);

// Empirical type: integer counts with denominator n.
class TypeDistribution {
 public:
  TypeDistribution(std::vector<int> counts);

  std::size_t k() const { return counts_.size(); }
  int n() const { return n_; }
  int operator[](std::size_t i) const { return counts_[i]; }
  std::span<const int> counts() const { return counts_; }

  // counts / n
  std::vector<double> frequencies() const;
  Distribution to_distribution() const { return Distribution(frequencies()); }

  friend bool operator==(const TypeDistribution&, const TypeDistribution&) = default;

 private:
  std::vector<int> counts_;
  int n_ = 0;
};

TypeDistribution type_of_sample(std::span<const int> sample, int k);

// Number of compositions of n into k nonnegative parts, C(n+k-1, k-1).
// Throws std::overflow_error when the count does not fit in 64 bits.
std::uint64_t type_count(int n, int k);

// Streams all compositions of n into k parts, starting at (n,0,...,0) and
// ending at (0,...,0,n); consecutive count vectors decrease lexicographically.
class TypeEnumerator {
 public:
  TypeEnumerator(int n, int k);

  const std::vector<int>& current() const { return counts_; }
  bool done() const { return done_; }
  void advance();

 private:
  int n_;
  std::vector<int> counts_;
  bool done_ = false;
};

// All types of (n, k) in enumeration order.
std::vector<TypeDistribution> enumerate_types(int n, int k);

// ln P^n(type class of T): log multinomial coefficient plus sum of
// counts_i * ln P_i. Returns -inf when T puts mass where P has none.
double log_type_class_prob(const TypeDistribution& t, const Distribution& p);
double log_type_class_prob(std::span<const int> counts, std::span<const double> log_p);

// n i.i.d. draws by inverse CDF.
std::vector<int> sample_iid(const Distribution& p, int n, RngStream& stream);

// Cumulative table used for inverse-CDF sampling; last entry is forced to 1.
class InverseCdfSampler {
 public:
  explicit InverseCdfSampler(const Distribution& p);
  int draw(RngStream& stream) const;
  // Adds n draws to counts (size k).
  void draw_counts(int n, RngStream& stream, std::span<int> counts) const;

 private:
  std::vector<double> cdf_;
};

}  // namespace divtest
