#include "divtest/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "divtest/genchisq.hpp"
#include "divtest/logmath.hpp"

namespace divtest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_k(const Distribution& a, const Distribution& b) {
  if (a.k() != b.k()) throw std::invalid_argument("alphabet sizes differ");
}

// sum_i s_i ln(s_i / q_i) over s_i > 0; q_i > 0 wherever s_i > 0.
double kl_terms(std::span<const double> s, std::span<const double> q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    acc += s[i] * std::log(s[i] / q[i]);
  }
  return acc;
}

// c_i = ln(P_i/Q_i) - ln(P_k/Q_k), i < k.
Eigen::VectorXd log_ratio_contrast(const Distribution& p, const Distribution& q) {
  if (!q.interior()) throw std::domain_error("reference distribution must be interior");
  const std::size_t m = p.k() - 1;
  const double last = std::log(p[m] / q[m]);
  Eigen::VectorXd c(m);
  for (std::size_t i = 0; i < m; ++i) c(i) = std::log(p[i] / q[i]) - last;
  return c;
}

// Euclidean projection onto {(x, y) : x'Sx + y'Sy <= r}, S = V diag(lam) V'.
class EllipsoidProjector {
 public:
  EllipsoidProjector(const Eigen::MatrixXd& sigma, double r) : r_(r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    v_ = es.eigenvectors();
    lam_ = es.eigenvalues();
  }

  double form(const Eigen::VectorXd& w) const {
    const Eigen::Index m = lam_.size();
    const Eigen::VectorXd a = v_.transpose() * w.head(m);
    const Eigen::VectorXd b = v_.transpose() * w.tail(m);
    return (lam_.array() * (a.array().square() + b.array().square())).sum();
  }

  Eigen::VectorXd project(const Eigen::VectorXd& z) const {
    if (form(z) <= r_) return z;
    const Eigen::Index m = lam_.size();
    const Eigen::VectorXd a = v_.transpose() * z.head(m);
    const Eigen::VectorXd b = v_.transpose() * z.tail(m);
    auto q = [&](double mu) {
      const Eigen::ArrayXd s = 1.0 / (1.0 + mu * lam_.array());
      return (lam_.array() * s.square() * (a.array().square() + b.array().square())).sum();
    };
    double lo = 0.0;
    double hi = 1.0;
    while (q(hi) > r_) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (q(mid) > r_ ? lo : hi) = mid;
    }
    const Eigen::ArrayXd s = 1.0 / (1.0 + hi * lam_.array());
    Eigen::VectorXd w(2 * m);
    w.head(m) = v_ * (s * a.array()).matrix();
    w.tail(m) = v_ * (s * b.array()).matrix();
    return w;
  }

 private:
  double r_;
  Eigen::MatrixXd v_;
  Eigen::VectorXd lam_;
};

double boundary_scan_k2(double sigma, double c, double d, double r) {
  const double a = std::sqrt(r / sigma);
  auto f = [&](double t) { return a * (c * std::cos(t) + d * std::sin(t)); };
  constexpr int kGrid = 4096;
  const double step = 2.0 * M_PI / kGrid;
  int best = 0;
  for (int i = 1; i < kGrid; ++i)
    if (f(i * step) < f(best * step)) best = i;
  double lo = (best - 1) * step;
  double hi = (best + 1) * step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  while (hi - lo > 1e-12) {
    if (f(x1) < f(x2)) {
      hi = x2;
      x2 = x1;
      x1 = hi - g * (hi - lo);
    } else {
      lo = x1;
      x1 = x2;
      x2 = lo + g * (hi - lo);
    }
  }
  return f(0.5 * (lo + hi));
}

}  // namespace

double bhattacharyya(const Distribution& p1, const Distribution& p2) {
  require_same_k(p1, p2);
  double s = 0.0;
  for (std::size_t i = 0; i < p1.k(); ++i) s += std::sqrt(p1[i] * p2[i]);
  return s > 0.0 ? -std::log(s) : kInf;
}

Distribution p_star(const Distribution& p1, const Distribution& p2) {
  require_same_k(p1, p2);
  std::vector<double> g(p1.k());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::sqrt(p1[i] * p2[i]);
  if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; }))
    throw std::domain_error("disjoint supports have no geometric mean");
  return make_distribution(g);
}

double kl_variance(const Distribution& p, const Distribution& q) {
  require_same_k(p, q);
  const double mean = kl_terms(p.probs(), q.probs());
  if (!std::isfinite(mean)) throw std::domain_error("P is not absolutely continuous wrt Q");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.k(); ++i) {
    if (p[i] <= 0.0) continue;
    const double dev = std::log(p[i] / q[i]) - mean;
    acc += p[i] * dev * dev;
  }
  return acc;
}

Prediction prediction(const Distribution& p1, const Distribution& p2, double eps) {
  require_same_k(p1, p2);
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  Prediction out;
  out.k = static_cast<int>(p1.k());
  out.eps = eps;
  out.degenerate = p1 == p2;
  const Distribution ps = p_star(p1, p2);
  out.bhattacharyya = bhattacharyya(p1, p2);
  out.v1 = kl_variance(ps, p1);
  out.v2 = kl_variance(ps, p2);
  out.quantile = chisq_inv_tail(out.k - 1, eps);
  out.first_order = 2.0 * out.bhattacharyya;
  out.second_order_coeff = std::sqrt(out.v1 + out.v2) * std::sqrt(out.quantile);
  return out;
}

double predict_neg_log_beta(const Distribution& p1, const Distribution& p2, double eps, int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  return prediction(p1, p2, eps).predicted_neg_log_beta(n);
}

double threshold_asymptotic(double eta, int k, double eps, int n) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (k < 2 || n < 1) throw std::invalid_argument("need k >= 2 and n >= 1");
  return 2.0 * eta / n * chisq_inv_tail(k - 1, eps);
}

double KktSolution::quadratic_value() const { return c.dot(x_star) + d.dot(y_star); }

KktSolution kkt_minimizer(const Distribution& p, const Distribution& p1, const Distribution& p2,
                          double r) {
  require_same_k(p, p1);
  require_same_k(p, p2);
  if (!(r >= 0.0)) throw std::invalid_argument("r must be nonnegative");
  const Eigen::MatrixXd sigma = sigma_matrix(p);
  KktSolution out;
  out.c = log_ratio_contrast(p, p1);
  out.d = log_ratio_contrast(p, p2);
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  const Eigen::VectorXd sc = llt.solve(out.c);
  const Eigen::VectorXd sd = llt.solve(out.d);
  const double norm = std::sqrt(out.c.dot(sc) + out.d.dot(sd));
  const Eigen::Index m = out.c.size();
  if (r == 0.0 || norm == 0.0) {
    out.x_star = Eigen::VectorXd::Zero(m);
    out.y_star = Eigen::VectorXd::Zero(m);
    out.mu0 = r == 0.0 ? kInf : 0.0;
    out.ell_star = 0.0;
    return out;
  }
  const double sr = std::sqrt(r);
  out.x_star = -sr * sc / norm;
  out.y_star = -sr * sd / norm;
  out.mu0 = norm / (2.0 * sr);
  out.ell_star = -sr * std::sqrt(kl_variance(p, p1) + kl_variance(p, p2));
  return out;
}

double ell_star_numeric(const Distribution& p, const Distribution& p1, const Distribution& p2,
                        double r, const EllStarOptions& opts) {
  require_same_k(p, p1);
  require_same_k(p, p2);
  if (!(r > 0.0)) return 0.0;
  const Eigen::MatrixXd sigma = sigma_matrix(p);
  const Eigen::VectorXd c = log_ratio_contrast(p, p1);
  const Eigen::VectorXd d = log_ratio_contrast(p, p2);
  const Eigen::Index m = c.size();
  Eigen::VectorXd g(2 * m);
  g << c, d;
  const double gnorm = g.norm();
  if (gnorm == 0.0) return 0.0;

  const EllipsoidProjector proj(sigma, r);
  const double h = std::sqrt(r) / gnorm;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;

  double best = kInf;
  for (int start = 0; start <= opts.restarts; ++start) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * m);
    if (start > 0) {
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
      w *= std::sqrt(r * unif(rng) / proj.form(w));
    }
    double f = g.dot(w);
    double s = h;
    for (int it = 0; it < opts.max_iterations; ++it) {
      if ((w - proj.project(w - h * g)).norm() <= opts.stationarity * std::sqrt(r)) break;
      const Eigen::VectorXd next = proj.project(w - s * g);
      const double fn = g.dot(next);
      if (fn < f && fn <= f - 1e-4 * (next - w).squaredNorm() / s) {
        w = next;
        f = fn;
        s *= 2.0;
      } else {
        s *= 0.5;
        if (s < 1e-30 * h) break;
      }
    }
    best = std::min(best, f);
  }
  if (m == 1) best = std::min(best, boundary_scan_k2(sigma(0, 0), c(0), d(0), r));
  return best;
}

double ell_linear(const Distribution& p, std::span<const double> t, std::span<const double> r,
                  const Distribution& p1, const Distribution& p2) {
  require_same_k(p, p1);
  require_same_k(p, p2);
  if (t.size() != p.k() || r.size() != p.k()) throw std::invalid_argument("length mismatch");
  if (!p.interior() || !p1.interior() || !p2.interior())
    throw std::domain_error("linear term needs interior distributions");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.k(); ++i) {
    acc += (t[i] - p[i]) * std::log(p[i] / p1[i]);
    acc += (r[i] - p[i]) * std::log(p[i] / p2[i]);
  }
  return acc;
}

double glrt_statistic(const TypeDistribution& tx, const TypeDistribution& ty) {
  if (tx.k() != ty.k()) throw std::invalid_argument("alphabet sizes differ");
  if (tx.n() != ty.n()) throw std::invalid_argument("sample sizes differ");
  const std::vector<double> fx = tx.frequencies();
  const std::vector<double> fy = ty.frequencies();
  return 4.0 * tx.n() * evaluate(DivergenceSpec::js(), fx, fy);
}

double robust_gof_statistic(const TypeDistribution& tx, const TypeDistribution& ty) {
  if (tx.k() != ty.k()) throw std::invalid_argument("alphabet sizes differ");
  if (tx.n() != ty.n()) throw std::invalid_argument("sample sizes differ");
  const std::vector<double> fx = tx.frequencies();
  const std::vector<double> fy = ty.frequencies();
  std::vector<double> mid(fx.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (fx[i] + fy[i]);
  return 2.0 * tx.n() * (kl_terms(fx, mid) + kl_terms(fy, mid));
}

double robust_gof_statistic_numeric(const TypeDistribution& tx, const TypeDistribution& ty,
                                    double gap_tol) {
  if (tx.k() != ty.k()) throw std::invalid_argument("alphabet sizes differ");
  if (tx.n() != ty.n()) throw std::invalid_argument("sample sizes differ");
  const std::vector<double> fx = tx.frequencies();
  const std::vector<double> fy = ty.frequencies();
  const std::size_t k = fx.size();
  std::vector<double> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = fx[i] + fy[i];

  std::vector<double> logp(k, -std::log(static_cast<double>(k)));
  std::vector<double> p(k, 1.0 / static_cast<double>(k));
  auto objective = [&](const std::vector<double>& q) { return kl_terms(fx, q) + kl_terms(fy, q); };
  // Optimality gap: max_i s_i/p_i - 2 over the support of s, zero exactly at the minimizer.
  auto gap = [&](const std::vector<double>& q) {
    double top = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      if (s[i] > 0.0) top = std::max(top, s[i] / q[i]);
    return top - 2.0;
  };
  double f = objective(p);
  double g = gap(p);
  double step = 1.0;
  std::vector<double> trial_log(k);
  std::vector<double> trial(k);
  for (int it = 0; it < 1'000'000 && g > gap_tol; ++it) {
    for (std::size_t i = 0; i < k; ++i) trial_log[i] = logp[i] + step * s[i] / p[i];
    const double z = log_sum_exp(trial_log);
    for (std::size_t i = 0; i < k; ++i) {
      trial_log[i] -= z;
      trial[i] = std::exp(trial_log[i]);
    }
    const double ft = objective(trial);
    const double gt = gap(trial);
    // Near the minimizer f is flat to rounding, so ties are broken by the gap.
    if (ft < f || (ft <= f + 1e-14 * std::abs(f) && gt < g)) {
      logp.swap(trial_log);
      p.swap(trial);
      f = ft;
      g = gt;
      step *= 1.5;
    } else {
      step *= 0.5;
      if (step < 1e-300) break;
    }
  }
  return 2.0 * tx.n() * f;
}

double pair_quadratic_form(const Distribution& center, std::span<const double> t,
                           std::span<const double> r) {
  return sigma_quadratic_form(center, t) + sigma_quadratic_form(center, r);
}

TypePairRounding round_to_type_pair(const Distribution& p, const Distribution& p1,
                                    const Distribution& p2, int n, double r_tilde) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (!(r_tilde > 0.0)) throw std::invalid_argument("radius must be positive");
  const KktSolution kkt = kkt_minimizer(p, p1, p2, r_tilde);
  const Eigen::MatrixXd sigma = sigma_matrix(p);
  const std::size_t m = p.k() - 1;
  const double lambda_max = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sigma).eigenvalues().maxCoeff();
  const double alpha_bar = std::min(
      0.5, 4.0 * lambda_max * static_cast<double>(m) / (static_cast<double>(n) * n * r_tilde));

  auto round_one = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd dir = sigma * x;
    std::vector<int> counts(p.k());
    long long used = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double target = n * (p[i] + (1.0 - alpha_bar) * x(i));
      const double v = dir(i) > 0.0 ? std::floor(target) : std::ceil(target);
      if (v < 0.0 || v > n) throw std::domain_error("rounding left the simplex");
      counts[i] = static_cast<int>(v);
      used += counts[i];
    }
    if (used > n) throw std::domain_error("rounding left the simplex");
    counts[m] = n - static_cast<int>(used);
    return TypeDistribution(std::move(counts));
  };

  TypePairRounding out{round_one(kkt.x_star), round_one(kkt.y_star)};
  out.alpha_bar = alpha_bar;
  const std::vector<double> fx = out.tx.frequencies();
  const std::vector<double> fy = out.ty.frequencies();
  out.quadratic_form = pair_quadratic_form(p, fx, fy);
  out.inside = out.quadratic_form <= r_tilde;
  out.scaled_ell_gap = n * std::abs(kkt.ell_star - ell_linear(p, fx, fy, p1, p2));
  return out;
}

std::pair<TypeDistribution, TypeDistribution> nearest_type_pair(const Distribution& p,
                                                                const Distribution& p1,
                                                                const Distribution& p2, int n,
                                                                double r_tilde) {
  TypePairRounding res = round_to_type_pair(p, p1, p2, n, r_tilde);
  if (!res.inside) throw std::domain_error("rounded pair lies outside the ellipsoid");
  return {std::move(res.tx), std::move(res.ty)};
}

double ball_cover_margin(double eta, const Distribution& t, const Distribution& r_dist, double r,
                         int n) {
  require_same_k(t, r_dist);
  std::vector<double> mid(t.k());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (t[i] + r_dist[i]);
  const Distribution center(std::move(mid));
  const double q = pair_quadratic_form(center, t.probs(), r_dist.probs());
  return std::pow(static_cast<double>(n), 1.5) * (q - r / (2.0 * eta));
}

double ball_exclusion_margin(double eta, const Distribution& center, std::span<const double> t,
                             std::span<const double> r_dist, double r, int n) {
  const double q = pair_quadratic_form(center, t, r_dist);
  return std::pow(static_cast<double>(n), 1.5) * (r / (2.0 * eta) - q);
}

}  // namespace divtest
