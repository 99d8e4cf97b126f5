#include "divtest/divergence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace divtest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kl_sum(std::span<const double> s, std::span<const double> r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0.0) continue;
    if (r[i] == 0.0) return kInf;
    acc += s[i] * std::log(s[i] / r[i]);
  }
  return acc;
}

double js_sum(std::span<const double> s, std::span<const double> r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double m = 0.5 * (s[i] + r[i]);
    if (s[i] > 0.0) acc += s[i] * std::log(s[i] / m);
    if (r[i] > 0.0) acc += r[i] * std::log(r[i] / m);
  }
  return 0.5 * acc;
}

double renyi_sum(double alpha, std::span<const double> s, std::span<const double> r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0.0) continue;
    if (r[i] == 0.0) {
      if (alpha > 1.0) return kInf;
      continue;
    }
    acc += std::pow(s[i], alpha) * std::pow(r[i], 1.0 - alpha);
  }
  if (acc == 0.0) return kInf;  // disjoint supports
  return std::log(acc) / (alpha - 1.0);
}

double chi2_sum(std::span<const double> s, std::span<const double> r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double diff = s[i] - r[i];
    if (r[i] == 0.0) {
      if (s[i] > 0.0) return kInf;
      continue;
    }
    acc += diff * diff / r[i];
  }
  return acc;
}

double sql2_sum(std::span<const double> s, std::span<const double> r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double diff = s[i] - r[i];
    acc += diff * diff;
  }
  return acc;
}

double fdiv_sum(const FGenerator& g, std::span<const double> s, std::span<const double> r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (r[i] == 0.0) {
      if (s[i] > 0.0) acc += s[i] * g.recession;
      continue;
    }
    acc += r[i] * g.f(s[i] / r[i]);
  }
  return acc;
}

// Adds eps * e_i to the reduced coordinates: coordinate i gains eps and the
// last coordinate pays for it.
void perturb(std::vector<double>& v, std::size_t i, double eps) {
  v[i] += eps;
  v.back() -= eps;
}

Eigen::MatrixXd half_hessian(const DivergenceSpec& d, const Distribution& p, double h) {
  const std::size_t m = p.k() - 1;
  const std::vector<double>& base = p.vec();
  auto eval = [&](std::size_t i, double ei, std::size_t j, double ej) {
    std::vector<double> s = base;
    perturb(s, i, ei);
    perturb(s, j, ej);
    for (double x : s) {
      if (!(x > 0.0)) throw std::domain_error("finite-difference step leaves the simplex interior");
    }
    return evaluate(d, s, base);
  };
  const double d0 = evaluate(d, base, base);
  Eigen::MatrixXd a(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const double dp = eval(i, h, i, 0.0);
    const double dm = eval(i, -h, i, 0.0);
    a(i, i) = (dp - 2.0 * d0 + dm) / (2.0 * h * h);
    for (std::size_t j = 0; j < i; ++j) {
      const double dpp = eval(i, h, j, h);
      const double dpm = eval(i, h, j, -h);
      const double dmp = eval(i, -h, j, h);
      const double dmm = eval(i, -h, j, -h);
      a(i, j) = a(j, i) = (dpp - dpm - dmp + dmm) / (8.0 * h * h);
    }
  }
  return a;
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

double FGenerator::second_derivative(double t) const {
  if (f2) return f2(t);
  const double h = 1e-4 * std::max(1.0, std::abs(t));
  const double h2 = 0.5 * h;
  const double coarse = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
  const double fine = (f(t + h2) - 2.0 * f(t) + f(t - h2)) / (h2 * h2);
  return (4.0 * fine - coarse) / 3.0;
}

FGenerator named_generator(std::string_view name) {
  if (name == "hellinger") {
    return {"hellinger", [](double t) { return (std::sqrt(t) - 1.0) * (std::sqrt(t) - 1.0); },
            [](double t) { return 0.5 / (t * std::sqrt(t)); }, 1.0};
  }
  if (name == "kl") {
    return {"kl", [](double t) { return t > 0.0 ? t * std::log(t) : 0.0; },
            [](double t) { return 1.0 / t; }, kInf};
  }
  if (name == "reverse-kl") {
    return {"reverse-kl", [](double t) { return t > 0.0 ? -std::log(t) : kInf; },
            [](double t) { return 1.0 / (t * t); }, 0.0};
  }
  if (name == "pearson") {
    return {"pearson", [](double t) { return (t - 1.0) * (t - 1.0); },
            [](double) { return 2.0; }, kInf};
  }
  throw std::invalid_argument("unknown f-divergence generator '" + std::string(name) + "'");
}

DivergenceSpec DivergenceSpec::renyi(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    throw std::invalid_argument("Renyi order must be positive, finite and != 1");
  }
  DivergenceSpec d(DivergenceKind::Renyi);
  d.alpha_ = alpha;
  return d;
}

DivergenceSpec DivergenceSpec::fdiv(FGenerator generator) {
  if (!generator.f) throw std::invalid_argument("f-divergence needs a generator");
  if (std::abs(generator.f(1.0)) > 1e-12) {
    throw std::invalid_argument("f-divergence generator must satisfy f(1) = 0");
  }
  if (!(generator.second_derivative(1.0) > 0.0)) {
    throw std::invalid_argument("f-divergence generator must be strictly convex at 1");
  }
  DivergenceSpec d(DivergenceKind::FDiv);
  d.generator_ = std::make_shared<const FGenerator>(std::move(generator));
  return d;
}

DivergenceSpec DivergenceSpec::parse(std::string_view text) {
  if (text == "kl") return kl();
  if (text == "js") return js();
  if (text == "chi2") return chi2();
  if (text == "sql2") return sql2();
  if (text.starts_with("renyi:")) {
    const std::string arg(text.substr(6));
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != arg.size()) {
      throw std::invalid_argument("bad Renyi order in '" + std::string(text) + "'");
    }
    return renyi(alpha);
  }
  if (text.starts_with("fdiv:")) return fdiv(named_generator(text.substr(5)));
  throw std::invalid_argument("unknown divergence '" + std::string(text) + "'");
}

std::string DivergenceSpec::name() const {
  switch (kind_) {
    case DivergenceKind::KL: return "kl";
    case DivergenceKind::JS: return "js";
    case DivergenceKind::ChiSq: return "chi2";
    case DivergenceKind::SqL2: return "sql2";
    case DivergenceKind::Renyi: {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, alpha_);
      return "renyi:" + std::string(buf, end);
    }
    case DivergenceKind::FDiv: return "fdiv:" + generator_->name;
  }
  return "?";
}

double evaluate(const DivergenceSpec& d, std::span<const double> s, std::span<const double> r) {
  if (s.size() != r.size()) throw std::invalid_argument("divergence arguments differ in length");
  double v = 0.0;
  switch (d.kind()) {
    case DivergenceKind::KL: v = kl_sum(s, r); break;
    case DivergenceKind::JS: v = js_sum(s, r); break;
    case DivergenceKind::Renyi: v = renyi_sum(d.alpha(), s, r); break;
    case DivergenceKind::FDiv: v = fdiv_sum(d.generator(), s, r); break;
    case DivergenceKind::ChiSq: v = chi2_sum(s, r); break;
    case DivergenceKind::SqL2: v = sql2_sum(s, r); break;
  }
  // Rounding can leave a tiny negative value at S = R.
  return v < 0.0 ? 0.0 : v;
}

Eigen::MatrixXd sigma_matrix(const Distribution& p) {
  if (!p.interior()) throw std::domain_error("Sigma_P needs an interior distribution");
  const std::size_t m = p.k() - 1;
  const double last = 1.0 / p[m];
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(m, m, last);
  for (std::size_t i = 0; i < m; ++i) sigma(i, i) += 1.0 / p[i];
  return sigma;
}

double sigma_quadratic_form(const Distribution& center, std::span<const double> t) {
  if (t.size() != center.k()) throw std::invalid_argument("length mismatch");
  const std::size_t m = center.k() - 1;
  Eigen::VectorXd x(m);
  for (std::size_t i = 0; i < m; ++i) x(i) = t[i] - center[i];
  return x.dot(sigma_matrix(center) * x);
}

Eigen::MatrixXd local_matrix(const DivergenceSpec& d, const Distribution& p, double step) {
  if (!p.interior()) throw std::domain_error("local matrix needs an interior distribution");
  const double h = step > 0.0 ? step : 1e-2 * p.min();
  const Eigen::MatrixXd coarse = half_hessian(d, p, h);
  const Eigen::MatrixXd fine = half_hessian(d, p, 0.5 * h);
  const Eigen::MatrixXd a = (4.0 * fine - coarse) / 3.0;
  return 0.5 * (a + a.transpose());
}

std::optional<double> invariance_constant(const DivergenceSpec& d, const Distribution& p,
                                          double tol) {
  // Best-fit eta with its relative Frobenius residual.
  auto fit = [&](const Distribution& at) {
    const Eigen::MatrixXd a = local_matrix(d, at);
    const Eigen::MatrixXd sigma = sigma_matrix(at);
    const double m = static_cast<double>(at.k() - 1);
    const double eta = (sigma.ldlt().solve(a)).trace() / m;
    return std::pair{eta, (a - eta * sigma).norm() / a.norm()};
  };
  const auto [eta, residual] = fit(p);
  if (!(residual <= tol)) return std::nullopt;
  // A 1x1 A is always proportional to Sigma, so proportionality alone says
  // nothing at k = 2; eta must also agree with its value at the uniform point.
  const auto [eta_u, residual_u] = fit(uniform_distribution(p.k()));
  if (!(residual_u <= tol) || !(std::abs(eta - eta_u) <= tol * std::abs(eta_u))) return std::nullopt;
  return eta;
}

LocalQuadratic local_quadratic(const DivergenceSpec& d, const Distribution& p) {
  LocalQuadratic out;
  out.a = local_matrix(d, p);
  out.sigma = sigma_matrix(p);
  const Eigen::MatrixXd s = inverse_sqrt(out.sigma);
  Eigen::MatrixXd whitened = s * out.a * s;
  whitened = 0.5 * (whitened + whitened.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(whitened, Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues().reverse();
  if (!(out.eigenvalues.minCoeff() > 0.0)) {
    throw std::domain_error("local matrix is not positive definite (check the step size)");
  }
  return out;
}

Eigen::VectorXd local_eigenvalues(const DivergenceSpec& d, const Distribution& p) {
  return local_quadratic(d, p).eigenvalues;
}

}  // namespace divtest
