#pragma once

// Closed-form radial multipliers of S_alpha, decay-slope fitting, and the
// (p, q) admissibility predicates.
//
// Both closed forms are evaluated through t^{-a} J_a(t) so the s -> 0 limit
// stays finite when it exists:
//   (s/2)^mu J_mu(s)  = 2^{-mu} s^{2 mu} scaled(mu, s)
//   (s/2)^mu J_-mu(s) = 2^{-mu} scaled(-mu, s)

#include <sconv/errors.hpp>
#include <sconv/kernel.hpp>
#include <sconv/specfun.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sconv::multiplier {

using kernel::KernelParams;

struct MultiplierSample {
  double s = 0.0;
  double value = 0.0;
};

/// Which closed form to evaluate.
enum class Form { paper, reference };

inline std::string_view to_string(Form f) { return f == Form::paper ? "paper" : "reference"; }

inline Form parse_form(std::string_view name) {
  if (name == "paper") return Form::paper;
  if (name == "reference") return Form::reference;
  throw DomainError("unknown multiplier form '" + std::string(name) + "' (expected paper or reference)");
}

namespace detail {

inline double check_frequency(double s) {
  if (std::isnan(s) || std::isinf(s)) throw DomainError("multiplier frequency must be finite");
  return std::abs(s);
}

/// (s/2)^mu (ca J_mu(s) - cb J_-mu(s)) = 2^{-mu} [ca s^{2 mu} scaled(mu, s) - cb scaled(-mu, s)].
/// mu is never zero here: both callers exclude it through their pole guards.
inline double bessel_pair(double mu, double ca, double cb, double s, const char* who) {
  if (s == 0.0) {
    if (mu < 0.0) {
      std::ostringstream os;
      os << who << ": diverges at s = 0 for order " << mu << " < 0";
      throw NumericalError(os.str());
    }
    return -std::pow(2.0, -mu) * cb * specfun::scaled_bessel_at_zero(specfun::BesselOrder(-mu));
  }
  const specfun::BesselOrder plus(mu);
  const specfun::BesselOrder minus(-mu);
  const double a = std::pow(s, 2.0 * mu) * specfun::scaled_bessel(plus, s);
  const double b = specfun::scaled_bessel(minus, s);
  const double v = std::pow(2.0, -mu) * (ca * a - cb * b);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << who << ": non-finite value at s = " << s;
    throw NumericalError(os.str());
  }
  return v;
}

}  // namespace detail

/// sqrt(pi) Gamma(1-alpha) (s/2)^{alpha-n/2} cot(pi(n/2-alpha)) (J_{alpha-n/2}(s) - J_{n/2-alpha}(s)).
inline double m_paper(const KernelParams& p, double s) {
  kernel::check_formula_guard(p);
  s = detail::check_frequency(s);
  const double mu = p.alpha - p.n / 2.0;
  const double x = p.n / 2.0 - p.alpha;
  const double cot = specfun::detail::cos_pi(x) / specfun::detail::sin_pi(x);
  const double pref = std::sqrt(std::numbers::pi) * specfun::gamma(1.0 - p.alpha) * cot;
  return pref * detail::bessel_pair(mu, 1.0, 1.0, s, "m_paper");
}

/// m_paper with (|s|/2)^{mu} read as |s| / 2^{mu}; only for exercising the
/// ratio-constancy detector.
inline double m_paper_misparsed(const KernelParams& p, double s) {
  s = detail::check_frequency(s);
  const double mu = p.alpha - p.n / 2.0;
  if (s == 0.0) return 0.0;
  return m_paper(p, s) * std::pow(s, 1.0 - mu);
}

/// n = 1 only: -sqrt(pi) Gamma(1-alpha) (s/2)^nu Y_nu(s) with nu = alpha - 1/2,
/// Y_nu = (J_nu cos(nu pi) - J_-nu) / sin(nu pi).
inline double m_reference(const KernelParams& p, double s) {
  if (p.n != 1) throw DomainError("m_reference is defined for n = 1 only");
  s = detail::check_frequency(s);
  const double nu = p.alpha - 0.5;
  if (specfun::detail::is_integer(p.alpha)) {
    throw PoleError("m_reference: Gamma(1 - alpha) has a pole at integer alpha");
  }
  if (specfun::detail::is_integer(nu)) {
    throw PoleError("m_reference: sin(nu pi) = 0 for nu = alpha - 1/2 an integer");
  }
  const double pref = -std::sqrt(std::numbers::pi) * specfun::gamma(1.0 - p.alpha) / specfun::detail::sin_pi(nu);
  return pref * detail::bessel_pair(nu, specfun::detail::cos_pi(nu), 1.0, s, "m_reference");
}

inline double evaluate(Form form, const KernelParams& p, double s) {
  return form == Form::paper ? m_paper(p, s) : m_reference(p, s);
}

/// Exponent a in |m(s)| <= c |s|^{-a} as stated for the closed form.
inline double decay_exponent_predicted(const KernelParams& p) { return 2.0 * p.alpha - p.n - 0.5; }

/// Large-s rate of the Bessel pair: (s/2)^mu J_{+-mu}(s) ~ s^{mu - 1/2}, so
/// |m(s)| ~ s^{alpha - (n+1)/2}. Returned as a decay exponent (positive = decay).
inline double decay_exponent_asymptotic(const KernelParams& p) { return (p.n + 1) / 2.0 - p.alpha; }

/// Samples of `m` on a log grid of [s_lo, s_hi].
template <typename F>
std::vector<MultiplierSample> sample(F&& m, double s_lo, double s_hi, std::size_t count) {
  std::vector<MultiplierSample> out;
  out.reserve(count);
  for (double s : specfun::log_grid(s_lo, s_hi, count)) out.push_back({s, m(s)});
  return out;
}

/// Indices of local maxima of |value|; interior points only.
inline std::vector<std::size_t> peak_indices(const std::vector<MultiplierSample>& samples) {
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const double v = std::abs(samples[i].value);
    if (v > std::abs(samples[i - 1].value) && v >= std::abs(samples[i + 1].value)) peaks.push_back(i);
  }
  return peaks;
}

struct SlopeFit {
  specfun::DecayFit fit;
  std::size_t points_used = 0;
  bool peak_sampled = false;  // false when fewer than 3 peaks: all samples used
};

/// Least-squares line through (log s, log |m|) at the oscillation peaks.
inline SlopeFit decay_slope_fit(const std::vector<MultiplierSample>& samples) {
  if (samples.size() < 20) throw InsufficientDataError("decay_slope_fit: need at least 20 samples");
  double s_lo = std::numeric_limits<double>::infinity();
  double s_hi = 0.0;
  double v_max = 0.0;
  for (const auto& x : samples) {
    if (!(x.s > 0.0) || !std::isfinite(x.s) || !std::isfinite(x.value)) {
      throw InsufficientDataError("decay_slope_fit: samples need finite s > 0 and finite values");
    }
    s_lo = std::min(s_lo, x.s);
    s_hi = std::max(s_hi, x.s);
    v_max = std::max(v_max, std::abs(x.value));
  }
  if (s_hi < 100.0 * s_lo * (1.0 - 1e-12)) throw InsufficientDataError("decay_slope_fit: samples must span two decades");
  if (v_max < 1e-14) throw DegenerateFitError("decay_slope_fit: all samples below 1e-14");

  SlopeFit out;
  std::vector<std::size_t> use = peak_indices(samples);
  out.peak_sampled = use.size() >= 3;
  if (!out.peak_sampled) {
    use.resize(samples.size());
    for (std::size_t i = 0; i < use.size(); ++i) use[i] = i;
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i : use) {
    const double v = std::abs(samples[i].value);
    if (v == 0.0) continue;
    xs.push_back(std::log(samples[i].s));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 2) throw DegenerateFitError("decay_slope_fit: fewer than two nonzero points");
  const double count = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw DegenerateFitError("decay_slope_fit: all fit points share one frequency");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    rss += r * r;
  }
  out.fit = {slope, std::exp(intercept), std::sqrt(rss / count), s_lo, s_hi};
  out.points_used = xs.size();
  return out;
}

// ---------------------------------------------------------------------------
// Region predicates.

/// Equalities and inequality boundaries are compared with this slack.
inline constexpr double kRegionTol = 1e-12;

struct RegionQuery {
  double p;
  double q;
  KernelParams params;

  RegionQuery(double p_, double q_, KernelParams params_) : p(p_), q(q_), params(params_) {
    if (!(p >= 1.0) || !(q >= 1.0)) {
      std::ostringstream os;
      os << "exponents (p, q) = (" << p << ", " << q << ") must both be >= 1";
      throw DomainError(os.str());
    }
  }

  /// 1/p - 1/q.
  [[nodiscard]] double gap() const { return 1.0 / p - 1.0 / q; }
};

/// 1 < p <= 2 <= q < inf.
inline bool in_strip(const RegionQuery& r) {
  return r.p > 1.0 && r.p <= 2.0 && r.q >= 2.0 && std::isfinite(r.q);
}

inline bool hl_admissible(double a, const RegionQuery& r) {
  if (!(a > 0.0) || !(a < r.params.n)) {
    std::ostringstream os;
    os << "hl_admissible: a = " << a << " outside (0, " << r.params.n << ")";
    throw DomainError(os.str());
  }
  return in_strip(r) && std::abs(r.gap() - a / r.params.n) <= kRegionTol;
}

inline bool region_main(const RegionQuery& r) {
  const double a = r.params.alpha;
  const int n = r.params.n;
  if (!(a > n / 2.0 + 0.25) || !(a <= (n + 1) / 2.0)) {
    std::ostringstream os;
    os << "region_main: alpha = " << a << " outside (" << n / 2.0 + 0.25 << ", " << (n + 1) / 2.0 << "]";
    throw DomainError(os.str());
  }
  return in_strip(r) && r.gap() <= (2.0 * a - n - 0.5) / n + kRegionTol;
}

inline bool region_strichartz(const RegionQuery& r) {
  const double a = r.params.alpha;
  const int n = r.params.n;
  if (!(a > 0.0) || !(a <= (n + 1) / 2.0)) {
    std::ostringstream os;
    os << "region_strichartz: alpha = " << a << " outside (0, " << (n + 1) / 2.0 << "]";
    throw DomainError(os.str());
  }
  return in_strip(r) && r.gap() <= (n + 1 - 2.0 * a) / (2.0 * n) + kRegionTol;
}

enum class OneDimBranch {
  endpoint,  // p = 2/(2-alpha), q = 2/alpha
  lower,     // 2/(2-alpha) <= p <= 2, 1/q = alpha - 1/p
  dual,      // 1/(3/2-alpha) <= p <= 2/(2-alpha), 1/q = alpha - 1/p'
};

inline std::string_view to_string(OneDimBranch b) {
  switch (b) {
    case OneDimBranch::endpoint:
      return "endpoint";
    case OneDimBranch::lower:
      return "lower";
    case OneDimBranch::dual:
      return "dual";
  }
  return "?";
}

/// First one-dimensional branch that (p, q) satisfies, if any.
/// Membership in one branch; at alpha = 1 the point (2, 2) sits on two.
inline bool on_one_dim_branch(const RegionQuery& r, OneDimBranch b) {
  const double a = r.params.alpha;
  if (r.params.n != 1) throw DomainError("region_one_dim: requires n = 1");
  if (!(a >= 0.0) || !(a <= 1.0)) {
    std::ostringstream os;
    os << "region_one_dim: alpha = " << a << " outside [0, 1]";
    throw DomainError(os.str());
  }
  const double ip = 1.0 / r.p;
  const double iq = 1.0 / r.q;
  const auto near = [](double x, double y) { return std::abs(x - y) <= kRegionTol; };
  const auto between = [](double lo, double x, double hi) {
    return x >= lo - kRegionTol * lo && x <= hi + kRegionTol * hi;
  };
  const double p_mid = 2.0 / (2.0 - a);
  switch (b) {
    case OneDimBranch::endpoint:
      return near(ip, (2.0 - a) / 2.0) && near(iq, a / 2.0);
    case OneDimBranch::lower:
      return a >= 0.5 && between(p_mid, r.p, 2.0) && near(iq, a - ip);
    case OneDimBranch::dual:
      return a >= 0.5 && between(1.0 / (1.5 - a), r.p, p_mid) && near(iq, a - (1.0 - ip));
  }
  return false;
}

/// First branch that holds, in the order endpoint, lower, dual.
inline std::optional<OneDimBranch> one_dim_branch(const RegionQuery& r) {
  for (auto b : {OneDimBranch::endpoint, OneDimBranch::lower, OneDimBranch::dual}) {
    if (on_one_dim_branch(r, b)) return b;
  }
  return std::nullopt;
}

inline bool region_one_dim(const RegionQuery& r) { return one_dim_branch(r).has_value(); }

/// Deficit n (1/p - 1/q) a point needs from a power-decay bound.
inline double a_needed(const RegionQuery& r) { return r.params.n * r.gap(); }

}  // namespace sconv::multiplier
