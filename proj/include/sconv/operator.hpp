#pragma once

// S_alpha on grid functions.
//
// Transform convention: F(xi) = int f(x) e^{-i x.xi} dx, inverse (2 pi)^{-n} int F e^{i x.xi} dxi.
// On the grid, with xi_k = pi k / L and x_j = -L + j h,
//   F_k = h^n (-1)^{k_1 + ... + k_n} FFT(f)_k,
//   f_j = (2L)^{-n} BFFT((-1)^{k_1 + ... + k_n} F)_j   (unnormalized backward FFT),
// so h^n sum |f|^2 = (2L)^{-n} sum |F|^2.
//
// The spectral path multiplies by m(|xi_k|), which is convolution with the
// periodized kernel. The direct path (n = 1) integrates the same periodic
// convolution in space: f is taken as its 2L-periodic cubic interpolant, the
// integral over 1 <= |y| <= R is done cell by cell, and the part beyond R is
// integrated by parts twice against the antiderivatives of f - mean(f).

#include <sconv/errors.hpp>
#include <sconv/grid.hpp>
#include <sconv/kernel.hpp>
#include <sconv/multiplier.hpp>

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace sconv::op {

using grid::ComplexGridFunction;
using grid::GridFunction;
using grid::GridSpec;
using kernel::KernelParams;
using kernel::QuadratureConfig;

namespace detail {

/// FFTW planning is not thread-safe; execution is.
inline std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

/// Unnormalized in-place complex FFT over all axes.
inline void fft_in_place(const GridSpec& g, std::vector<std::complex<double>>& data, int sign) {
  int dims[3] = {static_cast<int>(g.points), static_cast<int>(g.points), static_cast<int>(g.points)};
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft(g.n, dims, ptr, ptr, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw NumericalError("FFTW could not create a plan");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(plan);
}

/// (-1)^{sum of axis indices} of a flat index.
inline double checkerboard(const GridSpec& g, std::size_t flat) {
  std::size_t parity = 0;
  for (int d = 0; d < g.n; ++d) {
    parity += flat % g.points;
    flat /= g.points;
  }
  return parity % 2 == 0 ? 1.0 : -1.0;
}

/// |xi_k| for flat FFT-order index k.
inline double radial_frequency(const GridSpec& g, std::size_t flat) {
  double r2 = 0.0;
  for (int d = 0; d < g.n; ++d) {
    const double w = g.wavenumber(flat % g.points);
    r2 += w * w;
    flat /= g.points;
  }
  return std::sqrt(r2);
}

/// True when some axis index sits at the Nyquist slot N/2.
inline bool on_nyquist_shell(const GridSpec& g, std::size_t flat) {
  for (int d = 0; d < g.n; ++d) {
    if (flat % g.points == g.points / 2) return true;
    flat /= g.points;
  }
  return false;
}

}  // namespace detail

/// Continuum-normalized transform samples in FFT order.
inline ComplexGridFunction dft_forward(const GridFunction& f) {
  const GridSpec& g = f.spec();
  std::vector<std::complex<double>> data(f.samples().begin(), f.samples().end());
  detail::fft_in_place(g, data, FFTW_FORWARD);
  const double hn = std::pow(g.spacing(), g.n);
  for (std::size_t k = 0; k < data.size(); ++k) data[k] *= hn * detail::checkerboard(g, k);
  return {g, std::move(data)};
}

inline ComplexGridFunction dft_inverse(const ComplexGridFunction& F) {
  const GridSpec& g = F.spec();
  std::vector<std::complex<double>> data = F.samples();
  for (std::size_t k = 0; k < data.size(); ++k) data[k] *= detail::checkerboard(g, k);
  detail::fft_in_place(g, data, FFTW_BACKWARD);
  const double scale = std::pow(2.0 * g.half_width, -g.n);
  for (auto& v : data) v *= scale;
  return {g, std::move(data)};
}

struct SpectralOptions {
  /// Global constant applied to the multiplier.
  double calibration = 1.0;
  /// Test hook: replaces m(|xi|) when set.
  std::function<double(double)> multiplier_override;
};

/// Multiplier samples m(|xi_k|) * calibration in FFT order.
inline std::vector<double> multiplier_table(const GridSpec& g, const KernelParams& p, multiplier::Form which,
                                            const SpectralOptions& opts = {}) {
  g.validate();
  if (!opts.multiplier_override) {
    if (which == multiplier::Form::reference && p.n != 1) throw DomainError("reference multiplier requires n = 1");
    kernel::check_formula_guard(p);
  }
  if (!std::isfinite(opts.calibration)) throw DomainError("calibration constant must be finite");
  std::vector<double> m(g.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double s = detail::radial_frequency(g, k);
    const double v = opts.multiplier_override ? opts.multiplier_override(s) : multiplier::evaluate(which, p, s);
    m[k] = opts.calibration * v;
  }
  return m;
}

struct SpectralResult {
  GridFunction output;
  /// |m F| on the Nyquist shell exceeds 1e-6 of its maximum.
  bool alias_warning = false;
  /// Largest discarded imaginary part.
  double max_imag = 0.0;
  /// max_k |m(|xi_k|)| including calibration.
  double max_multiplier = 0.0;
};

/// Applies a precomputed multiplier table.
inline SpectralResult apply_multiplier(const GridFunction& f, const std::vector<double>& table) {
  const GridSpec& g = f.spec();
  if (table.size() != f.size()) throw DomainError("multiplier table does not match the grid");
  ComplexGridFunction F = dft_forward(f);
  std::vector<std::complex<double>> prod = F.samples();
  double peak = 0.0;
  double shell = 0.0;
  double max_m = 0.0;
  for (std::size_t k = 0; k < prod.size(); ++k) {
    prod[k] *= table[k];
    const double a = std::abs(prod[k]);
    peak = std::max(peak, a);
    if (detail::on_nyquist_shell(g, k)) shell = std::max(shell, a);
    max_m = std::max(max_m, std::abs(table[k]));
  }
  const ComplexGridFunction out = dft_inverse(ComplexGridFunction(g, std::move(prod)));

  SpectralResult r{GridFunction(g), shell > 1e-6 * peak, 0.0, max_m};
  std::vector<double> re(out.size());
  for (std::size_t j = 0; j < re.size(); ++j) {
    re[j] = out[j].real();
    r.max_imag = std::max(r.max_imag, std::abs(out[j].imag()));
  }
  if (r.max_imag > 1e-10 * f.max_abs()) {
    std::ostringstream os;
    os << "spectral output has imaginary residue " << r.max_imag << " > 1e-10 max|f|";
    throw NumericalError(os.str());
  }
  r.output = GridFunction(g, std::move(re));
  return r;
}

inline SpectralResult apply_salpha_spectral(const GridFunction& f, const KernelParams& p, multiplier::Form which,
                                            const SpectralOptions& opts = {}) {
  if (f.spec().n != p.n) throw DomainError("grid dimension and kernel dimension differ");
  return apply_multiplier(f, multiplier_table(f.spec(), p, which, opts));
}

/// Kernel mass beyond the half-width: int_{|y| > L} |y|^{-2 alpha} dy, which
/// bounds the periodization error of the spectral path; infinite for 2 alpha <= n.
inline double wraparound_bound(const GridSpec& g, const KernelParams& p) {
  if (2.0 * p.alpha <= p.n) return std::numeric_limits<double>::infinity();
  const double sphere = 2.0 * std::pow(std::numbers::pi, p.n / 2.0) / std::tgamma(p.n / 2.0);
  return sphere * std::pow(g.half_width, p.n - 2.0 * p.alpha) / (2.0 * p.alpha - p.n);
}

// ---------------------------------------------------------------------------
// Direct periodic convolution, n = 1.

/// Settings for convolve_direct: truncation_radius is the starting cut-off,
/// doubled until the tail remainder estimate drops below tail_tol.
inline QuadratureConfig direct_defaults() {
  QuadratureConfig c;
  c.jacobi_order = 16;
  c.panel_count = 1;
  c.truncation_radius = 256.0;
  c.tail_tol = 1e-7;
  return c;
}

struct DirectResult {
  GridFunction output;
  double truncation_radius = 0.0;
  double tail_error_estimate = 0.0;
};

namespace detail {

/// Cubic Lagrange weights on stencil offsets -1, 0, 1, 2 at local coordinate t.
inline std::array<double, 4> cubic_weights(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

/// Periodic (zero-mean) antiderivative of zero-mean samples, trapezoid rule.
inline std::vector<double> periodic_antiderivative(const std::vector<double>& g, double h) {
  std::vector<double> G(g.size(), 0.0);
  for (std::size_t j = 1; j < g.size(); ++j) G[j] = G[j - 1] + 0.5 * h * (g[j - 1] + g[j]);
  double mean = 0.0;
  for (double v : G) mean += v;
  mean /= static_cast<double>(G.size());
  for (double& v : G) v -= mean;
  return G;
}

struct WeightedNode {
  double t;  // local coordinate in units of h from the cell's left knot (y side)
  double w;
};

}  // namespace detail

inline DirectResult convolve_direct(const GridFunction& f, const KernelParams& p, const QuadratureConfig& cfg,
                                    unsigned workers = 1) {
  cfg.validate();
  const GridSpec& g = f.spec();
  if (g.n != 1 || p.n != 1) throw DomainError("direct oracle is n=1 only");
  if (!(p.alpha > 0.5 && p.alpha < 1.0)) throw DomainError("direct oracle requires 1/2 < alpha < 1");
  const std::size_t N = g.points;
  const auto Nl = static_cast<long>(N);
  const double h = g.spacing();
  const double alpha = p.alpha;
  const std::vector<double>& fv = f.samples();
  const double fmax = f.max_abs();

  DirectResult result{GridFunction(g), cfg.truncation_radius, 0.0};
  if (fmax == 0.0) return result;
  const double edge = std::max({std::abs(fv[0]), std::abs(fv[1]), std::abs(fv[N - 2]), std::abs(fv[N - 1])});
  if (edge > 1e-10 * fmax) {
    std::ostringstream os;
    os << "input is not negligible at the cube boundary (|f| = " << edge << " relative to max " << fmax << ")";
    throw BoundaryError(os.str());
  }

  // tail data
  double mean = 0.0;
  for (double v : fv) mean += v;
  mean /= static_cast<double>(N);
  std::vector<double> centered(fv);
  for (double& v : centered) v -= mean;
  const std::vector<double> G1 = detail::periodic_antiderivative(centered, h);
  const std::vector<double> G2 = detail::periodic_antiderivative(G1, h);
  double g3_max = 0.0;
  for (double v : detail::periodic_antiderivative(G2, h)) g3_max = std::max(g3_max, std::abs(v));

  const auto xi = [alpha](double y) { return std::pow((y - 1.0) * (y + 1.0), -alpha); };
  const auto xi_d2 = [alpha](double y) {
    const double u = (y - 1.0) * (y + 1.0);
    return 2.0 * alpha * std::pow(u, -alpha - 2.0) * ((2.0 * alpha + 1.0) * y * y + 1.0);
  };
  long cells = static_cast<long>(std::ceil(std::max(cfg.truncation_radius, 4.0) / h));
  double remainder = 0.0;
  for (;;) {
    const double R = static_cast<double>(cells) * h;
    remainder = 4.0 * std::abs(xi_d2(R)) * g3_max;  // 2 |xi''(R)| max|G3| per side
    if (remainder <= cfg.tail_tol) break;
    if (R > 1e5) throw ConvergenceError("direct oracle: tail remainder stays above tail_tol up to |y| = 1e5");
    cells *= 2;
  }
  const double R = static_cast<double>(cells) * h;
  result.truncation_radius = R;
  result.tail_error_estimate = remainder;
  const double tail_mean = mean * kernel::xi_tail_integral(alpha, R);
  const double tail_g1 = xi(R);
  const double tail_g2 = kernel::xi_alpha_derivative(alpha, R);

  // cells k cover y in [k h, (k+1) h]; the first three past y = 1 use
  // Gauss-Jacobi differences in u = y - 1, the rest Gauss-Legendre panels
  const long k0 = static_cast<long>(std::floor(1.0 / h));
  const long k_regular = k0 + 3;
  if (k_regular >= cells) throw DomainError("direct oracle: truncation radius too small for the grid");

  const auto jac = kernel::gauss_jacobi_rule(alpha, cfg.jacobi_order);
  std::vector<std::vector<detail::WeightedNode>> singular(3);
  for (long c = 0; c < 3; ++c) {
    const long k = k0 + c;
    const double lo = std::max(static_cast<double>(k) * h, 1.0) - 1.0;
    const double hi = static_cast<double>(k + 1) * h - 1.0;
    auto& nodes = singular[static_cast<std::size_t>(c)];
    for (const auto& [end, sign] : {std::pair{hi, 1.0}, std::pair{lo, -1.0}}) {
      if (end <= 0.0) continue;
      const double scale = std::pow(end, 1.0 - alpha);
      for (std::size_t i = 0; i < jac.nodes.size(); ++i) {
        const double u = end * jac.nodes[i];
        const double y = 1.0 + u;
        nodes.push_back({(y - static_cast<double>(k) * h) / h, sign * scale * jac.weights[i] * std::pow(2.0 + u, -alpha)});
      }
    }
  }

  const auto gl = kernel::gauss_legendre_rule(8);
  const auto panels = static_cast<std::size_t>(cfg.panel_count);
  std::vector<double> tau;
  std::vector<double> tau_w;
  for (std::size_t q = 0; q < panels; ++q) {
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      tau.push_back((static_cast<double>(q) + gl.nodes[i]) / static_cast<double>(panels));
      tau_w.push_back(gl.weights[i] / static_cast<double>(panels));
    }
  }
  const std::size_t G = tau.size();
  std::vector<double> ktab(static_cast<std::size_t>(cells - k_regular) * G);
  for (long k = k_regular; k < cells; ++k) {
    for (std::size_t i = 0; i < G; ++i) {
      ktab[static_cast<std::size_t>(k - k_regular) * G + i] = h * tau_w[i] * xi(h * (static_cast<double>(k) + tau[i]));
    }
  }

  const auto at = [&](long j) { return fv[static_cast<std::size_t>(((j % Nl) + Nl) % Nl)]; };
  // cubic through knots j-1..j+2 at local coordinate t from knot j
  const auto interp = [&](long j, double t) {
    const auto w = detail::cubic_weights(t);
    return w[0] * at(j - 1) + w[1] * at(j) + w[2] * at(j + 1) + w[3] * at(j + 2);
  };

  // active knot cells and their values at the regular nodes, both orientations
  const double thresh = 1e-16 * fmax;
  std::vector<long> active;
  for (long j = 0; j < Nl; ++j) {
    const double s = std::max({std::abs(at(j - 1)), std::abs(at(j)), std::abs(at(j + 1)), std::abs(at(j + 2))});
    if (s > thresh) active.push_back(j);
  }
  std::vector<double> v_left(active.size() * G);   // z = x - y: t_cell = 1 - tau
  std::vector<double> v_right(active.size() * G);  // z = x + y: t_cell = tau
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t i = 0; i < G; ++i) {
      v_left[a * G + i] = interp(active[a], 1.0 - tau[i]);
      v_right[a * G + i] = interp(active[a], tau[i]);
    }
  }

  std::vector<double> out(N, 0.0);
  const auto point = [&](long i) {
    double acc = 0.0;
    for (long c = 0; c < 3; ++c) {
      const long k = k0 + c;
      for (const auto& node : singular[static_cast<std::size_t>(c)]) {
        acc += node.w * (interp(i - k - 1, 1.0 - node.t) + interp(i + k, node.t));
      }
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
      const long j = active[a];
      // z = x_i - y lands in knot cell j for k = i - 1 - j (mod N)
      for (long k = (((i - 1 - j) % Nl) + Nl) % Nl; k < cells; k += Nl) {
        if (k < k_regular) continue;
        const double* kt = &ktab[static_cast<std::size_t>(k - k_regular) * G];
        const double* v = &v_left[a * G];
        for (std::size_t q = 0; q < G; ++q) acc += kt[q] * v[q];
      }
      // z = x_i + y lands in knot cell j for k = j - i (mod N)
      for (long k = (((j - i) % Nl) + Nl) % Nl; k < cells; k += Nl) {
        if (k < k_regular) continue;
        const double* kt = &ktab[static_cast<std::size_t>(k - k_regular) * G];
        const double* v = &v_right[a * G];
        for (std::size_t q = 0; q < G; ++q) acc += kt[q] * v[q];
      }
    }
    // beyond R: mean part exactly, then two integrations by parts
    const auto idx = [&](long j) { return static_cast<std::size_t>(((j % Nl) + Nl) % Nl); };
    const std::size_t lo = idx(i - cells);
    const std::size_t hi = idx(i + cells);
    acc += 2.0 * tail_mean;
    acc += tail_g1 * (G1[lo] - G1[hi]);
    acc += tail_g2 * (G2[lo] + G2[hi]);
    out[static_cast<std::size_t>(i)] = acc;
  };

  const unsigned threads = std::max(1u, workers);
  if (threads == 1) {
    for (long i = 0; i < Nl; ++i) point(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (long i = t; i < Nl; i += threads) point(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  result.output = GridFunction(g, std::move(out));
  return result;
}

// ---------------------------------------------------------------------------
// Test functions.

enum class TestKind { gaussian, sphere_bump, modulated_bump, dilate };

inline std::string_view to_string(TestKind k) {
  switch (k) {
    case TestKind::gaussian:
      return "gaussian";
    case TestKind::sphere_bump:
      return "sphere_bump";
    case TestKind::modulated_bump:
      return "modulated_bump";
    case TestKind::dilate:
      return "dilate";
  }
  return "?";
}

inline TestKind parse_test_kind(std::string_view s) {
  if (s == "gaussian") return TestKind::gaussian;
  if (s == "sphere_bump") return TestKind::sphere_bump;
  if (s == "modulated_bump") return TestKind::modulated_bump;
  if (s == "dilate") return TestKind::dilate;
  throw DomainError("unknown test function kind '" + std::string(s) +
                    "' (expected gaussian, sphere_bump, modulated_bump or dilate)");
}

/// Real test function with max amplitude 1:
///   gaussian        exp(-|x/scale|^2)
///   sphere_bump     C-infinity bump in |x|, supported on ||x| - 1| < scale/2
///   modulated_bump  cos(frequency x_1) exp(-|x/scale|^2)
///   dilate          exp(-|scale x|^2), the unit Gaussian dilated by lambda = scale
inline GridFunction make_test_function(const GridSpec& g, TestKind kind, double scale, double frequency = 0.0) {
  g.validate();
  const double h = g.spacing();
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ResolutionError("test function scale must be positive");
  const double width = kind == TestKind::dilate ? 1.0 / scale : scale;
  if (width < 4.0 * h) {
    std::ostringstream os;
    os << to_string(kind) << ": feature width " << width << " is below 4h = " << 4.0 * h;
    throw ResolutionError(os.str());
  }
  if (!(frequency >= 0.0) || frequency > std::numbers::pi / (2.0 * h)) {
    std::ostringstream os;
    os << to_string(kind) << ": frequency " << frequency << " outside [0, pi/(2h) = " << std::numbers::pi / (2.0 * h)
       << "]";
    throw ResolutionError(os.str());
  }
  std::vector<double> v(g.size());
  for (std::size_t flat = 0; flat < v.size(); ++flat) {
    const auto idx = g.unflatten(flat);
    double r2 = 0.0;
    for (int d = 0; d < g.n; ++d) {
      const double x = g.coordinate(idx[static_cast<std::size_t>(d)]);
      r2 += x * x;
    }
    double val = 0.0;
    switch (kind) {
      case TestKind::gaussian:
        val = std::exp(-r2 / (scale * scale));
        break;
      case TestKind::dilate:
        val = std::exp(-r2 * scale * scale);
        break;
      case TestKind::modulated_bump:
        val = std::cos(frequency * g.coordinate(idx[0])) * std::exp(-r2 / (scale * scale));
        break;
      case TestKind::sphere_bump: {
        const double u = (std::sqrt(r2) - 1.0) / (0.5 * scale);
        val = std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
        break;
      }
    }
    v[flat] = val;
  }
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) throw ResolutionError(std::string(to_string(kind)) + ": no grid point inside the support");
  for (double& x : v) x /= peak;
  GridFunction f(g, std::move(v));
  double boundary = 0.0;
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    const auto idx = g.unflatten(flat);
    for (int d = 0; d < g.n; ++d) {
      const auto j = idx[static_cast<std::size_t>(d)];
      if (j == 0 || j == g.points - 1) boundary = std::max(boundary, std::abs(f[flat]));
    }
  }
  if (boundary > 1e-12) {
    std::ostringstream os;
    os << to_string(kind) << ": boundary value " << boundary << " exceeds 1e-12; enlarge the cube";
    throw ResolutionError(os.str());
  }
  return f;
}

}  // namespace sconv::op
