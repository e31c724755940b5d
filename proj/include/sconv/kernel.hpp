#pragma once

// Spatial kernels xi_alpha (supported outside the unit ball) and phi_alpha
// (inside it), Gauss-Jacobi rules for the u^{-alpha} endpoint weight, and a
// direct quadrature of the one-dimensional transform
//   2 * int_1^inf (y^2 - 1)^{-alpha} cos(s y) dy,    1/2 < alpha < 1,
// used as ground truth for the closed-form multipliers.

#include <sconv/errors.hpp>
#include <sconv/specfun.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

namespace sconv::kernel {

/// The pair (alpha, n) shared by kernel, multiplier and region predicates.
struct KernelParams {
  double alpha;
  int n;

  KernelParams(double alpha_, int n_) : alpha(alpha_), n(n_) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      std::ostringstream os;
      os << "alpha = " << alpha << " must be positive and finite";
      throw DomainError(os.str());
    }
    if (n < 1 || n > 3) {
      std::ostringstream os;
      os << "dimension n = " << n << " outside supported range 1..3";
      throw DomainError(os.str());
    }
  }
};

/// Throws PoleError when the closed-form multiplier is undefined:
/// alpha a positive integer (Gamma(1-alpha)) or n/2 - alpha an integer (cot).
inline void check_formula_guard(const KernelParams& p) {
  if (specfun::detail::is_integer(p.alpha)) {
    std::ostringstream os;
    os << "alpha = " << p.alpha << " is a positive integer: Gamma(1 - alpha) has a pole";
    throw PoleError(os.str());
  }
  if (specfun::detail::is_integer(p.n / 2.0 - p.alpha)) {
    std::ostringstream os;
    os << "n/2 - alpha = " << p.n / 2.0 - p.alpha << " is an integer: cot(pi (n/2 - alpha)) has a pole";
    throw PoleError(os.str());
  }
}

struct QuadratureConfig {
  int jacobi_order = 24;
  int panel_count = 2;
  double truncation_radius = 16.0;
  double tail_tol = 1e-10;
  int max_tail_terms = 320;

  void validate() const {
    if (jacobi_order < 1) throw DomainError("quadrature.jacobi_order must be >= 1");
    if (panel_count < 1) throw DomainError("quadrature.panel_count must be >= 1");
    if (!(truncation_radius > 2.0)) throw DomainError("quadrature.truncation_radius must be > 2");
    if (!(tail_tol > 0.0 && tail_tol <= 1e-2)) throw DomainError("quadrature.tail_tol must lie in (0, 1e-2]");
    if (max_tail_terms < 16 || max_tail_terms > 380) throw DomainError("quadrature.max_tail_terms must lie in [16, 380]");
  }
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Value with an estimated absolute error.
struct QuadratureEstimate {
  double value = 0.0;
  double error = 0.0;
  int tail_terms = 0;
};

/// Gaussian rule on [0, 1] for the weight u^{-alpha}, 0 <= alpha < 1
/// (Golub-Welsch on the shifted Jacobi recurrence with a = 0, b = -alpha).
/// Exact for u^{-alpha} p(u) with deg p <= 2 order - 1.
inline QuadratureRule gauss_jacobi_rule(double alpha, int order) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("gauss_jacobi_rule: alpha must lie in [0, 1)");
  if (order < 1) throw DomainError("gauss_jacobi_rule: order must be >= 1");
  const double b = -alpha;  // exponent at x = -1, which maps to u = 0
  const auto n = static_cast<Eigen::Index>(order);
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 1));
  diag(0) = b / (b + 2.0);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + b;
    diag(k) = b * b / (s * (s + 2.0));
    sub(k - 1) = std::sqrt(4.0 * kk * kk * (kk + b) * (kk + b) / (s * s * (s + 1.0) * (s - 1.0)));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw ConvergenceError("gauss_jacobi_rule: eigen-solve failed");

  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  const double mass = 1.0 / (1.0 - alpha);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    const auto idx = static_cast<std::size_t>(i);
    rule.nodes[idx] = 0.5 * (1.0 + solver.eigenvalues()(i));
    rule.weights[idx] = mass * v0 * v0;
    total += rule.weights[idx];
    if (!(rule.nodes[idx] > 0.0 && rule.nodes[idx] < 1.0) || !(rule.weights[idx] > 0.0)) {
      throw ConvergenceError("gauss_jacobi_rule: node or weight out of range");
    }
  }
  if (std::abs(total - mass) > 1e-12 * mass) throw ConvergenceError("gauss_jacobi_rule: weights do not sum to the moment");
  return rule;
}

/// Gauss-Legendre on [0, 1].
inline QuadratureRule gauss_legendre_rule(int order) { return gauss_jacobi_rule(0.0, order); }

namespace detail {

inline void check_radius(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("kernel radius must be finite and >= 0");
  if (r == 1.0) throw SingularPointError("kernel is singular on the unit sphere |y| = 1");
}

}  // namespace detail

/// (r^2 - 1)^{-alpha} for r > 1, zero for r < 1.
inline double xi_alpha(const KernelParams& p, double r) {
  detail::check_radius(r);
  if (r < 1.0) return 0.0;
  return std::pow((r - 1.0) * (r + 1.0), -p.alpha);
}

/// (1 - r^2)^{-alpha} for r < 1, zero for r > 1.
inline double phi_alpha(const KernelParams& p, double r) {
  detail::check_radius(r);
  if (r > 1.0) return 0.0;
  return std::pow((1.0 - r) * (1.0 + r), -p.alpha);
}

/// d/dr xi_alpha for r > 1.
inline double xi_alpha_derivative(double alpha, double r) {
  return -2.0 * alpha * r * std::pow((r - 1.0) * (r + 1.0), -alpha - 1.0);
}

/// int_R^inf (y^2 - 1)^{-alpha} dy for alpha > 1/2, R >= 2, via the binomial
/// expansion y^{-2 alpha} sum_k (alpha)_k / k! y^{-2k}.
inline double xi_tail_integral(double alpha, double radius) {
  if (!(alpha > 0.5)) throw DomainError("xi_tail_integral: alpha must exceed 1/2");
  if (!(radius >= 2.0)) throw DomainError("xi_tail_integral: radius must be >= 2");
  const double inv_r2 = 1.0 / (radius * radius);
  double coeff = 1.0;  // (alpha)_k / k!
  double power = std::pow(radius, 1.0 - 2.0 * alpha);
  double sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double term = coeff * power / (2.0 * alpha + 2.0 * k - 1.0);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) return sum;
    coeff *= (alpha + k) / (k + 1.0);
    power *= inv_r2;
  }
  throw ConvergenceError("xi_tail_integral: expansion did not converge");
}

/// Lebesgue measure of {y in R : xi_{1/2}(y) > lambda}: 2 (sqrt(1 + lambda^{-2}) - 1).
inline double superlevel_measure_half(double lambda) {
  if (!(lambda > 0.0)) throw DomainError("superlevel_measure_half: lambda must be positive");
  const double x = 1.0 / (lambda * lambda);
  return 2.0 * x / (std::sqrt(1.0 + x) + 1.0);
}

/// sup over the grid of lambda^2 |{xi_{1/2} > lambda}| in one dimension.
/// Bounded by 1 since sqrt(1 + x) <= 1 + x/2.
inline double weak_l2_bound(std::span<const double> lambda_grid) {
  if (lambda_grid.empty()) throw DomainError("weak_l2_bound: empty lambda grid");
  double sup = 0.0;
  for (double lambda : lambda_grid) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("weak_l2_bound: lambda must be positive");
    const double x = 1.0 / (lambda * lambda);
    sup = std::max(sup, 2.0 / (std::sqrt(1.0 + x) + 1.0));
  }
  return sup;
}

namespace detail {

/// Cohen-Rodriguez Villegas-Zagier acceleration of sum_k (-1)^k a_k over the
/// first `count` terms.
inline double cvz_sum(std::span<const double> a, int count) {
  const double n = count;
  double d = std::pow(3.0 + std::sqrt(8.0), n);
  d = 0.5 * (d + 1.0 / d);
  double b = -1.0;
  double c = -d;
  double s = 0.0;
  for (int k = 0; k < count; ++k) {
    c = b - c;
    s += c * a[static_cast<std::size_t>(k)];
    b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0));
  }
  return s / d;
}

}  // namespace detail

/// 2 int_1^inf (y^2 - 1)^{-alpha} cos(s y) dy for n = 1, 1/2 < alpha < 1, s > 0.
///
/// Gauss-Jacobi on [1, 1 + delta] with delta = min(1, pi/s) carries the
/// (y-1)^{-alpha} endpoint; composite 16-point Gauss-Legendre panels run up
/// to the first zero of cos(s y) beyond truncation_radius; the tail is summed
/// per half period and accelerated until increments drop below tail_tol.
inline QuadratureEstimate xi_hat_quadrature(const KernelParams& p, double s, const QuadratureConfig& cfg) {
  cfg.validate();
  if (p.n != 1) throw DomainError("xi_hat_quadrature: only n = 1 has a classical integral");
  if (!(p.alpha > 0.5 && p.alpha < 1.0)) throw DomainError("xi_hat_quadrature: alpha must lie in (1/2, 1)");
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("xi_hat_quadrature: s must be positive");
  const double alpha = p.alpha;
  const double half_period = std::numbers::pi / s;

  // singular cell, u = y - 1 in [0, delta]
  const double delta = std::min(1.0, half_period);
  const auto singular = [&](const QuadratureRule& rule) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double u = delta * rule.nodes[i];
      acc += rule.weights[i] * std::pow(2.0 + u, -alpha) * std::cos(s * (1.0 + u));
    }
    return acc * std::pow(delta, 1.0 - alpha);
  };
  const double near = singular(gauss_jacobi_rule(alpha, cfg.jacobi_order));
  const double near_check = singular(gauss_jacobi_rule(alpha, 2 * cfg.jacobi_order));

  const auto gl = gauss_legendre_rule(16);
  const auto integrand = [alpha, s](double y) { return std::pow((y - 1.0) * (y + 1.0), -alpha) * std::cos(s * y); };
  const auto panel = [&](double lo, double hi) {
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) acc += gl.weights[i] * integrand(lo + (hi - lo) * gl.nodes[i]);
    return acc * (hi - lo);
  };

  // regular part up to the first zero of cos(s y) past the truncation radius
  const double first_zero_index = std::ceil(cfg.truncation_radius / half_period - 0.5);
  const double tail_start = (first_zero_index + 0.5) * half_period;
  const auto mid = [&](int panels_per_unit) {
    const double width = std::min(1.0, half_period) / panels_per_unit;
    const double lo = 1.0 + delta;
    const auto count = static_cast<long>(std::ceil((tail_start - lo) / width));
    const double w = (tail_start - lo) / static_cast<double>(count);
    double acc = 0.0;
    for (long k = 0; k < count; ++k) acc += panel(lo + w * k, lo + w * (k + 1));
    return acc;
  };
  const double middle = mid(cfg.panel_count);
  const double middle_check = cfg.panel_count > 1 ? mid(cfg.panel_count / 2) : mid(cfg.panel_count);

  // tail: half-period humps, stored as a_k = (-1)^k hump_k
  std::vector<double> humps;
  humps.reserve(static_cast<std::size_t>(cfg.max_tail_terms));
  double previous = 0.0;
  double tail = 0.0;
  double tail_error = 0.0;
  bool converged = false;
  int used = 0;
  for (int count = 8; count <= cfg.max_tail_terms; count += 8) {
    while (static_cast<int>(humps.size()) < count) {
      const double k = static_cast<double>(humps.size());
      const double lo = tail_start + k * half_period;
      const double value = panel(lo, lo + half_period);
      humps.push_back((static_cast<long>(k) % 2 == 0) ? value : -value);
    }
    tail = detail::cvz_sum(humps, count);
    if (count > 8 && std::abs(tail - previous) < cfg.tail_tol) {
      tail_error = std::abs(tail - previous);
      converged = true;
      used = count;
      break;
    }
    previous = tail;
  }
  if (!converged) throw ConvergenceError("xi_hat_quadrature: tail acceleration did not reach tail_tol");

  const double magnitude = std::abs(near) + std::abs(middle) + std::abs(tail);
  QuadratureEstimate out;
  out.value = 2.0 * (near + middle + tail);
  out.error = 2.0 * (std::abs(near - near_check) + std::abs(middle - middle_check) + tail_error) + 1e-14 * magnitude;
  out.tail_terms = used;
  return out;
}

}  // namespace sconv::kernel
