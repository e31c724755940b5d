#pragma once

// Verification workflows shared by the command-line tool and the acceptance
// runner: the special-function self-check suite and the comparison of the
// closed-form multipliers against the one-dimensional quadrature oracle.

#include <sconv/errors.hpp>
#include <sconv/kernel.hpp>
#include <sconv/multiplier.hpp>
#include <sconv/specfun.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sconv::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Bessel suite.

struct BesselSuiteConfig {
  std::vector<double> envelope_orders{-0.5, 0.0, 0.5, 1.0, 2.0};
  std::vector<double> recurrence_orders{-0.5, 0.25, 1.0, 2.5};
  double t_max = 1000.0;
  std::size_t samples = 20000;
  double closed_form_tol = 1e-10;
  double recurrence_tol = 1e-8;
  double stability_tol = 0.01;
  double gamma_tol = 1e-12;

  /// Constructs every BesselOrder up front so range errors surface before work starts.
  void validate() const {
    for (double a : envelope_orders) (void)specfun::BesselOrder(a);
    for (double a : recurrence_orders) {
      (void)specfun::BesselOrder(a - 1.0);
      (void)specfun::BesselOrder(a + 1.0);
    }
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("t_max must be positive and finite");
    if (samples < 100) throw DomainError("samples must be >= 100");
    for (double tol : {closed_form_tol, recurrence_tol, stability_tol, gamma_tol}) {
      if (!(tol > 0.0)) throw DomainError("tolerances must be positive");
    }
  }
};

struct EnvelopeRow {
  double order = 0.0;
  double constant = 0.0;
  double constant_doubled = 0.0;  // at twice the grid density
  double t_max = 0.0;
  std::size_t samples = 0;
};

struct BesselSuiteReport {
  std::vector<CheckResult> checks;
  std::vector<EnvelopeRow> envelopes;
  double seconds = 0.0;

  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
};

/// max over t in [0.01, 100] of |J_{+-1/2}(t) - closed form| / sqrt(2/(pi t)),
/// i.e. the error relative to the local amplitude (the values themselves vanish at zeros).
inline double half_order_closed_form_error(std::size_t samples = 4000) {
  double worst = 0.0;
  for (double t : specfun::log_grid(0.01, 100.0, samples)) {
    const double amp = std::sqrt(2.0 / (std::numbers::pi * t));
    worst = std::max(worst, std::abs(specfun::bessel_j(0.5, t) - amp * std::sin(t)) / amp);
    worst = std::max(worst, std::abs(specfun::bessel_j(-0.5, t) - amp * std::cos(t)) / amp);
  }
  return worst;
}

/// max over t in [0.1, 100] of the normalized residual of J_{a-1} + J_{a+1} = (2a/t) J_a.
inline double recurrence_residual(double a, std::size_t samples = 4000) {
  double worst = 0.0;
  for (double t : specfun::log_grid(0.1, 100.0, samples)) {
    const double lo = specfun::bessel_j(a - 1.0, t);
    const double hi = specfun::bessel_j(a + 1.0, t);
    const double mid = 2.0 * a / t * specfun::bessel_j(a, t);
    const double scale = std::abs(lo) + std::abs(hi) + std::abs(mid);
    if (scale > 0.0) worst = std::max(worst, std::abs(lo + hi - mid) / scale);
  }
  return worst;
}

/// max relative deviation of Gamma(x) Gamma(1-x) sin(pi x) / pi from 1 on (-4.5, 4.5).
inline double gamma_reflection_error() {
  double worst = 0.0;
  for (int i = 0; i < 900; ++i) {
    const double x = -4.5 + 0.01 * i + 0.003;
    if (specfun::detail::is_integer(x)) continue;
    const double v = specfun::gamma(x) * specfun::gamma(1.0 - x) * specfun::detail::sin_pi(x) / std::numbers::pi;
    worst = std::max(worst, std::abs(v - 1.0));
  }
  return worst;
}

inline BesselSuiteReport run_bessel_suite(const BesselSuiteConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  BesselSuiteReport out;
  const auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
  };

  const double cf = half_order_closed_form_error();
  out.checks.push_back({"closed_form_half_orders", cf <= cfg.closed_form_tol, cf, cfg.closed_form_tol,
                        "J_{+-1/2} vs sqrt(2/(pi t)) sin/cos on [0.01, 100]: " + fmt(cf)});

  for (double a : cfg.recurrence_orders) {
    const double r = recurrence_residual(a);
    std::ostringstream name;
    name << "recurrence_a=" << a;
    out.checks.push_back({name.str(), r <= cfg.recurrence_tol, r, cfg.recurrence_tol, "normalized residual " + fmt(r)});
  }

  const double gr = gamma_reflection_error();
  out.checks.push_back({"gamma_reflection", gr <= cfg.gamma_tol, gr, cfg.gamma_tol, "max deviation " + fmt(gr)});

  for (double a : cfg.envelope_orders) {
    const specfun::BesselOrder order(a);
    const auto base = specfun::envelope_constant(order, cfg.t_max, cfg.samples);
    const auto fine = specfun::envelope_constant(order, cfg.t_max, 2 * cfg.samples);
    out.envelopes.push_back({a, base.constant, fine.constant, cfg.t_max, cfg.samples});
    const double change = std::abs(fine.constant - base.constant) / fine.constant;
    std::ostringstream name;
    name << "envelope_a=" << a;
    const bool ok = std::isfinite(base.constant) && std::isfinite(fine.constant) && change < cfg.stability_tol;
    out.checks.push_back({name.str(), ok, change, cfg.stability_tol,
                          "C = " + fmt(base.constant) + ", relative change on doubling " + fmt(change)});
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms against the oracle.

using MultiplierFn = std::function<double(const kernel::KernelParams&, double)>;

struct FourierRow {
  double alpha = 0.0;
  double s = 0.0;
  double oracle = 0.0;
  double oracle_error = 0.0;
  double m_paper = 0.0;
  double m_reference = 0.0;
  double ratio_paper = 0.0;      // oracle / m_paper
  double ratio_reference = 0.0;  // oracle / m_reference
};

struct FormVerdict {
  std::string form;
  /// Ratio constant in s, for every alpha, to the tolerance.
  bool constant = false;
  /// largest over alpha of (max - min) / |mean| of the ratio across s
  double spread = 0.0;
  /// Mean ratio over all rows; the calibration constant c with c m = oracle.
  double calibration = 0.0;
  /// (max - min) / |mean| over all rows, alpha included.
  double global_spread = 0.0;
};

struct FourierCheckReport {
  std::vector<FourierRow> rows;
  FormVerdict paper;
  FormVerdict reference;
  double tolerance = 0.0;

  [[nodiscard]] bool passed() const { return paper.constant || reference.constant; }

  /// Form written to the calibration file: reference when it passes, else paper if it does.
  [[nodiscard]] std::optional<FormVerdict> selected() const {
    if (reference.constant) return reference;
    if (paper.constant) return paper;
    return std::nullopt;
  }
};

struct FourierCheckConfig {
  std::vector<double> alphas{0.6, 0.75, 0.9};
  std::vector<double> s_values{0.5, 1.0, 2.0, 5.0};
  double tolerance = 1e-3;
  kernel::QuadratureConfig quadrature{};
  /// Test hook replacing m_paper.
  MultiplierFn paper_override;

  void validate() const {
    if (alphas.empty() || s_values.empty()) throw DomainError("alpha and s grids must be nonempty");
    for (double a : alphas) {
      if (!(a > 0.5 && a < 1.0)) throw DomainError("oracle alphas must lie in (1/2, 1)");
    }
    for (double s : s_values) {
      if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("oracle frequencies must be positive");
    }
    if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
    quadrature.validate();
  }
};

namespace detail {

inline double relative_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (mean == 0.0 || !std::isfinite(mean)) return std::numeric_limits<double>::infinity();
  return (*hi - *lo) / std::abs(mean);
}

inline FormVerdict judge(const std::string& name, const std::vector<FourierRow>& rows, std::size_t per_alpha, bool paper,
                         double tol) {
  FormVerdict v{name};
  std::vector<double> all;
  for (std::size_t start = 0; start < rows.size(); start += per_alpha) {
    std::vector<double> block;
    for (std::size_t i = start; i < start + per_alpha; ++i) {
      block.push_back(paper ? rows[i].ratio_paper : rows[i].ratio_reference);
    }
    v.spread = std::max(v.spread, relative_spread(block));
    all.insert(all.end(), block.begin(), block.end());
  }
  double mean = 0.0;
  for (double x : all) mean += x;
  v.calibration = mean / static_cast<double>(all.size());
  v.global_spread = relative_spread(all);
  v.constant = v.spread <= tol;
  return v;
}

}  // namespace detail

inline FourierCheckReport run_fourier_check(const FourierCheckConfig& cfg) {
  cfg.validate();
  FourierCheckReport out;
  out.tolerance = cfg.tolerance;
  const MultiplierFn paper = cfg.paper_override ? cfg.paper_override : MultiplierFn(multiplier::m_paper);
  for (double a : cfg.alphas) {
    const kernel::KernelParams p(a, 1);
    for (double s : cfg.s_values) {
      FourierRow r;
      r.alpha = a;
      r.s = s;
      const auto est = kernel::xi_hat_quadrature(p, s, cfg.quadrature);
      r.oracle = est.value;
      r.oracle_error = est.error;
      r.m_paper = paper(p, s);
      r.m_reference = multiplier::m_reference(p, s);
      r.ratio_paper = r.oracle / r.m_paper;
      r.ratio_reference = r.oracle / r.m_reference;
      out.rows.push_back(r);
    }
  }
  const std::size_t per_alpha = cfg.s_values.size();
  out.paper = detail::judge("paper", out.rows, per_alpha, true, cfg.tolerance);
  out.reference = detail::judge("reference", out.rows, per_alpha, false, cfg.tolerance);
  return out;
}

}  // namespace sconv::checks
