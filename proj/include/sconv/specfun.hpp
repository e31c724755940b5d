#pragma once

// Real Gamma and Bessel J of arbitrary real order, plus the empirical
// envelope fit for |t^{-a} J_a(t)| <= C_a (1+t)^{-a-1/2}.
//
// J_a(t) is evaluated in one of three regimes:
//   * ascending series (long double) for t <= 12, or whenever t^2/4 <= a + 1
//     so the series has no growing terms;
//   * Hankel large-argument expansion for t >= 25, accepted only when its
//     smallest term drops below 1e-17 and no term exceeds 10 (it diverges, or
//     cancels badly, for large |a| at moderate t);
//   * Miller backward recurrence otherwise, normalized with the Neumann sum
//     (t/2)^mu = sum_k (mu + 2k) Gamma(mu + k) / k! J_{mu+2k}(t).
// Negative non-integer orders use the series directly in the first regime
// and downward recurrence from the fractional ladder in the last.

#include <sconv/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace sconv::specfun {

inline constexpr double kMaxOrder = 50.0;

/// Real order a of J_a; |a| <= kMaxOrder.
class BesselOrder {
 public:
  explicit BesselOrder(double a) : a_(a) {
    if (!std::isfinite(a) || std::abs(a) > kMaxOrder) {
      std::ostringstream os;
      os << "Bessel order " << a << " outside supported range |a| <= " << kMaxOrder;
      throw RangeError(os.str());
    }
  }
  [[nodiscard]] double value() const noexcept { return a_; }

 private:
  double a_;
};

/// Power-law fit |f(t)| ~ constant * t^exponent over t_low..t_high.
struct DecayFit {
  double exponent = 0.0;
  double constant = 0.0;
  double residual = 0.0;
  double t_low = 0.0;
  double t_high = 0.0;
};

namespace detail {

template <typename T>
T sin_pi(T x) {
  T r = x - 2 * std::round(x / 2);  // r in [-1, 1]
  if (r > T(0.5)) {
    r = 1 - r;
  } else if (r < T(-0.5)) {
    r = -1 - r;
  }
  return std::sin(std::numbers::pi_v<T> * r);
}

template <typename T>
T cos_pi(T x) {
  T r = std::abs(x - 2 * std::round(x / 2));  // r in [0, 1]
  return std::sin(std::numbers::pi_v<T> * (T(0.5) - r));
}

inline bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x); }

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && is_integer(x); }

/// 1/Gamma(x) in long double; zero at the poles.
inline long double rgamma_ld(long double x) {
  if (x <= 0 && x == std::floor(x)) return 0.0L;
  if (x > 0) return 1.0L / std::tgamma(x);
  // 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
  return std::tgamma(1.0L - x) * sin_pi(x) / std::numbers::pi_v<long double>;
}

/// sum_k (-1)^k (t^2/4)^k / (k! Gamma(k + a + 1)); a must not be a negative integer.
inline long double scaled_series(double a, double t) {
  const long double z = static_cast<long double>(t) * t / 4;
  long double term = rgamma_ld(static_cast<long double>(a) + 1);
  long double sum = term;
  long double peak = std::abs(term);
  for (int k = 1; k < 2000; ++k) {
    term *= -z / (static_cast<long double>(k) * (k + a));
    sum += term;
    peak = std::max(peak, std::abs(term));
    const bool past_peak = k + a > 0 && k * (k + a) > z;
    if (term == 0.0L || (past_peak && std::abs(term) <= 1e-21L * peak)) return sum;
  }
  throw ConvergenceError("Bessel ascending series did not converge");
}

inline bool series_regime(double a, double t) { return t <= 12.0 || (a > 0 && t * t / 4 <= a + 1); }

struct HankelValue {
  double value = 0.0;
  bool accurate = false;
};

inline HankelValue hankel(double nu, double t) {
  const double mu = 4 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double b = 1.0;
  double prev = 1.0;
  double smallest = 1.0;
  double largest = 1.0;
  bool accurate = false;
  for (int k = 1; k <= 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    b *= (mu - odd * odd) / (8.0 * k * t);
    const double mag = std::abs(b);
    if (odd * odd > mu && mag > prev) break;  // past the optimal truncation point
    const int phase = (k / 2) % 2 == 0 ? 1 : -1;
    if (k % 2 == 1) {
      q += phase * b;
    } else {
      p += phase * b;
    }
    smallest = std::min(smallest, mag);
    largest = std::max(largest, mag);
    prev = mag;
    if (b == 0.0 || (k >= 10 && mag < 1e-17)) {
      accurate = true;
      break;
    }
  }
  // a large hump before convergence means cancellation in p and q
  accurate = (accurate || smallest < 1e-17) && largest <= 10.0;
  const double phi = nu / 2 + 0.25;
  const double cphi = cos_pi(phi);
  const double sphi = sin_pi(phi);
  const double ct = std::cos(t);
  const double st = std::sin(t);
  const double cw = ct * cphi + st * sphi;  // cos(t - phi pi)
  const double sw = st * cphi - ct * sphi;  // sin(t - phi pi)
  return {std::sqrt(2.0 / (std::numbers::pi * t)) * (p * cw - q * sw), accurate};
}

/// J_nu(t) by Miller's backward recurrence; t > 0, nu not a negative integer.
inline double miller(double nu, double t) {
  const double floor_nu = std::floor(nu);
  const long double mu = nu - floor_nu;
  const long shift = static_cast<long>(floor_nu);
  const long top = std::max<long>(shift, 1);
  const long start = std::max<long>(top, static_cast<long>(std::ceil(t))) +
                     static_cast<long>(std::ceil(8.0 * std::cbrt(t))) + 30;

  std::vector<long double> f(static_cast<std::size_t>(start) + 2, 0.0L);
  f[start] = 1e-300L;
  for (long k = start; k >= 1; --k) {
    f[k - 1] = 2 * (mu + k) / t * f[k] - (k + 1 <= start ? f[k + 1] : 0.0L);
  }
  // Neumann normalization.
  long double g = std::tgamma(mu + 1);  // Gamma(mu + i) / i! at i = 1
  long double norm = std::tgamma(mu + 1) * f[0];
  for (long i = 1; 2 * i <= start; ++i) {
    norm += (mu + 2 * i) * g * f[2 * i];
    g *= (mu + i) / (i + 1);
  }
  const long double scale = std::pow(static_cast<long double>(t) / 2, mu) / norm;
  if (shift >= 0) return static_cast<double>(scale * f[shift]);

  long double upper = scale * f[1];
  long double current = scale * f[0];
  for (long k = 0; k > shift; --k) {
    const long double lower = 2 * (mu + k) / t * current - upper;
    upper = current;
    current = lower;
  }
  return static_cast<double>(current);
}

inline void check_argument(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    std::ostringstream os;
    os << "Bessel argument t = " << t << " must be positive and finite";
    throw DomainError(os.str());
  }
}

}  // namespace detail

/// Gamma(x) for real x off the non-positive integers.
inline double gamma(double x) {
  if (std::isnan(x)) throw DomainError("gamma of NaN");
  if (detail::is_nonpositive_integer(x)) {
    std::ostringstream os;
    os << "gamma has a pole at x = " << x;
    throw PoleError(os.str());
  }
  if (x > 0.0) return std::tgamma(x);
  return std::numbers::pi / (detail::sin_pi(x) * std::tgamma(1.0 - x));
}

/// J_a(t) for t > 0.
inline double bessel_j(BesselOrder order, double t) {
  detail::check_argument(t);
  const double a = order.value();
  if (a < 0 && detail::is_integer(a)) {
    const double m = -a;
    const double v = bessel_j(BesselOrder(m), t);
    return std::fmod(m, 2.0) == 0.0 ? v : -v;
  }
  if (detail::series_regime(a, t)) {
    return static_cast<double>(std::pow(static_cast<long double>(t) / 2, a) * detail::scaled_series(a, t));
  }
  if (t >= 25.0) {
    const auto h = detail::hankel(a, t);
    if (h.accurate) return h.value;
  }
  return detail::miller(a, t);
}

inline double bessel_j(double a, double t) { return bessel_j(BesselOrder(a), t); }

/// t^{-a} J_a(t) for t > 0, computed from the series directly at small t.
inline double scaled_bessel(BesselOrder order, double t) {
  detail::check_argument(t);
  const double a = order.value();
  if (detail::series_regime(a, t) && !(a < 0 && detail::is_integer(a))) {
    return static_cast<double>(std::pow(2.0L, -static_cast<long double>(a)) * detail::scaled_series(a, t));
  }
  return static_cast<double>(std::pow(static_cast<long double>(t), -static_cast<long double>(a)) *
                             bessel_j(order, t));
}

inline double scaled_bessel(double a, double t) { return scaled_bessel(BesselOrder(a), t); }

/// Limit of t^{-a} J_a(t) as t -> 0+: 1 / (2^a Gamma(a+1)); zero for negative integer a.
inline double scaled_bessel_at_zero(BesselOrder order) {
  const long double a = order.value();
  return static_cast<double>(std::pow(2.0L, -a) * detail::rgamma_ld(a + 1));
}

/// Log-spaced grid of `samples` points on [lo, hi], lo > 0.
inline std::vector<double> log_grid(double lo, double hi, std::size_t samples) {
  std::vector<double> t(samples);
  const double llo = std::log(lo);
  const double step = samples > 1 ? (std::log(hi) - llo) / static_cast<double>(samples - 1) : 0.0;
  for (std::size_t i = 0; i < samples; ++i) t[i] = std::exp(llo + step * static_cast<double>(i));
  if (samples > 1) t.back() = hi;
  return t;
}

/// Empirical C_a: the supremum over a log grid on (0, t_max] of
/// |t^{-a} J_a(t)| (1+t)^{a+1/2}. `residual` is the change in the supremum
/// when every other grid point is dropped, a proxy for grid resolution.
inline DecayFit envelope_constant(BesselOrder order, double t_max, std::size_t samples) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("envelope_constant: t_max must be positive");
  if (samples < 100) throw DomainError("envelope_constant: need at least 100 samples");
  const double a = order.value();
  const double t_lo = std::min(1e-6, 1e-3 * t_max);
  const auto grid = log_grid(t_lo, t_max, samples);

  double sup_all = std::abs(scaled_bessel_at_zero(order));
  double sup_half = sup_all;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double v = std::abs(scaled_bessel(order, t)) * std::pow(1.0 + t, a + 0.5);
    if (!std::isfinite(v)) throw NumericalError("envelope_constant: non-finite envelope sample");
    sup_all = std::max(sup_all, v);
    if (i % 2 == 0) sup_half = std::max(sup_half, v);
  }
  return {-(a + 0.5), sup_all, sup_all - sup_half, t_lo, t_max};
}

}  // namespace sconv::specfun
