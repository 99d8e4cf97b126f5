#include "divtest/genchisq.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <vector>
#include <stdexcept>

namespace divtest {

namespace {

constexpr int kMaxPanels = 5'000'000;

// Bisection for a nonincreasing tail function on [0, inf).
template <typename Tail>
double invert_tail(Tail tail, double eps, double scale) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("tail level must lie in (0, 1)");
  double lo = 0.0;
  double hi = std::max(scale, 1.0);
  while (tail(hi) > eps) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail(mid) > eps ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Wynn's epsilon algorithm: limit estimate of the partial sums s.
double wynn_epsilon(const std::vector<double>& s) {
  const std::size_t n = s.size();
  std::vector<double> prev(n + 1, 0.0);  // column k-1
  std::vector<double> cur(s.begin(), s.end());  // column k
  double best = s.back();
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<double> next(n - k);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      const double diff = cur[i + 1] - cur[i];
      if (diff == 0.0) return cur[i + 1];
      next[i] = prev[i + 1] + 1.0 / diff;
    }
    prev = std::move(cur);
    cur = std::move(next);
    if (k % 2 == 0) best = cur.back();
  }
  return best;
}

}  // namespace

double chisq_tail(int m, double c) {
  if (m < 1) throw std::invalid_argument("chi-square needs m >= 1");
  if (c < 0.0 || std::isnan(c)) throw std::invalid_argument("chi-square tail needs c >= 0");
  if (c == 0.0) return 1.0;
  if (std::isinf(c)) return 0.0;
  return boost::math::gamma_q(0.5 * m, 0.5 * c);
}

double chisq_inv_tail(int m, double eps) {
  if (m < 1) throw std::invalid_argument("chi-square needs m >= 1");
  return invert_tail([m](double c) { return chisq_tail(m, c); }, eps, m);
}

GenChiSq::GenChiSq(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("generalized chi-square needs m >= 1");
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("generalized chi-square weights must be positive");
    }
  }
}

double GenChiSq::mean() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

double GenChiSq::variance() const {
  double v = 0.0;
  for (double w : weights_) v += 2.0 * w * w;
  return v;
}

double GenChiSq::common_weight() const {
  const auto [lo, hi] = std::minmax_element(weights_.begin(), weights_.end());
  if (*hi - *lo <= 1e-6 * *hi) return mean() / dof();
  return 0.0;
}

double imhof_tail(std::span<const double> weights, double c, double abs_tol) {
  if (weights.empty()) throw std::invalid_argument("imhof_tail needs at least one weight");
  if (c <= 0.0) return 1.0;

  const double m = static_cast<double>(weights.size());
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double wmax = *std::max_element(weights.begin(), weights.end());
  double log_wprod = 0.0;
  for (double w : weights) log_wprod += std::log(w);
  const double s = 0.5 * c;

  auto theta = [&](double u) {
    double t = -s * u;
    for (double w : weights) t += 0.5 * std::atan(w * u);
    return t;
  };
  auto envelope = [&](double u) {
    double log_rho = 0.0;
    for (double w : weights) log_rho += 0.25 * std::log1p(w * w * u * u);
    return std::exp(-log_rho) / u;
  };
  auto integrand = [&](double u) {
    if (u == 0.0) return 0.5 * (wsum - c);
    return std::sin(theta(u)) * envelope(u);
  };
  // |theta'(u)| >= s/2 from here on, since the drift term only decays.
  auto phase_settled = [&](double u) {
    double drift = 0.0;
    for (double w : weights) drift += 0.5 * w / (1.0 + w * w * u * u);
    return drift <= 0.5 * s;
  };
  auto remainder_bound = [&](double u) {
    // Non-oscillatory bound: int_u^inf du / (u prod (w_i u)^{1/2}).
    const double crude = std::exp(-0.5 * log_wprod - 0.5 * m * std::log(u)) / (0.5 * m);
    if (!phase_settled(u)) return crude;
    // One integration by parts against the settled phase.
    return std::min(crude, 4.0 * envelope(u) / s);
  };
  auto gk = [&](double a, double b) {
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, a, b, 12, 1e-11,
                                                                        &err);
  };

  const double target = abs_tol * std::numbers::pi;
  const double lobe = std::numbers::pi / s;

  // Non-oscillatory stretch up to where the phase is monotone.
  double width = std::min(lobe, 1.0 / wmax);
  double a = 0.0;
  double head = 0.0;
  int panels = 0;
  while (!phase_settled(a) && panels < kMaxPanels) {
    head += gk(a, a + width);
    a += width;
    width = std::min(lobe, 2.0 * width);
    ++panels;
  }
  if (remainder_bound(a) < target) return std::clamp(0.5 + head / std::numbers::pi, 0.0, 1.0);

  // Past this point theta decreases strictly, so splitting at theta = j pi
  // gives lobes of alternating sign whose partial sums Wynn's epsilon
  // algorithm accelerates.
  auto next_zero = [&](double from, double level) {
    double lo = from;
    double hi = from + 2.0 * lobe;
    while (theta(hi) > level) hi += 2.0 * lobe;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (theta(mid) > level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  double level = std::floor(theta(a) / std::numbers::pi) * std::numbers::pi;
  double b = next_zero(a, level);
  head += gk(a, b);
  a = b;

  constexpr int kMaxLobes = 200;
  std::vector<double> partial;
  double tail = 0.0;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int j = 0; j < kMaxLobes; ++j) {
    level -= std::numbers::pi;
    b = next_zero(a, level);
    tail += gk(a, b);
    a = b;
    partial.push_back(tail);
    if (remainder_bound(a) < target) return std::clamp(0.5 + (head + tail) / std::numbers::pi, 0.0, 1.0);
    if (partial.size() >= 6) {
      const std::size_t window = std::min<std::size_t>(partial.size(), 24);
      const double est = wynn_epsilon({partial.end() - window, partial.end()});
      if (std::abs(est - previous) < 0.01 * target) {
        return std::clamp(0.5 + (head + est) / std::numbers::pi, 0.0, 1.0);
      }
      previous = est;
    }
  }

  // Acceleration stalled: plain summation until the rigorous bound holds.
  double integral = head + tail;
  for (; panels < kMaxPanels && remainder_bound(a) >= target; ++panels) {
    integral += gk(a, a + lobe);
    a += lobe;
  }
  return std::clamp(0.5 + integral / std::numbers::pi, 0.0, 1.0);
}

double genchisq_tail(const GenChiSq& g, double c) {
  if (c <= 0.0) return 1.0;
  if (const double eta = g.common_weight(); eta > 0.0) return chisq_tail(g.dof(), c / eta);
  return imhof_tail(g.weights(), c);
}

double genchisq_inv_tail(const GenChiSq& g, double eps) {
  return invert_tail([&g](double c) { return genchisq_tail(g, c); }, eps, g.mean());
}

double genchisq_sample(const GenChiSq& g, RngStream& stream) {
  double x = 0.0;
  for (double w : g.weights()) {
    const double z = stream.normal();
    x += w * z * z;
  }
  return x;
}

}  // namespace divtest
