#pragma once

// L^p norms on grids, battery ratios ||S f||_q / ||f||_p, and (p, q) sweeps.
// Ratios are lower bounds for the operator norm; nothing here claims more.

#include <sconv/errors.hpp>
#include <sconv/grid.hpp>
#include <sconv/kernel.hpp>
#include <sconv/multiplier.hpp>
#include <sconv/operator.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace sconv::normlab {

using grid::GridFunction;
using grid::GridSpec;
using kernel::KernelParams;
using multiplier::RegionQuery;

/// (h^n sum |f|^p)^{1/p}; max |f| for p = inf.
inline double lp_norm(const GridFunction& f, double p) {
  if (!(p >= 1.0)) {
    std::ostringstream os;
    os << "lp_norm: p = " << p << " must be >= 1";
    throw DomainError(os.str());
  }
  if (std::isinf(p)) return f.max_abs();
  // scale by the max to keep |f|^p in range for large p
  const double scale = f.max_abs();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (double v : f.samples()) acc += std::pow(std::abs(v) / scale, p);
  return scale * std::pow(std::pow(f.spec().spacing(), f.spec().n) * acc, 1.0 / p);
}

namespace detail {

/// Runs fn(i) for i < count on up to `workers` threads; rethrows the
/// exception of the lowest failing index.
template <typename F>
void parallel_for(std::size_t count, unsigned workers, F&& fn) {
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::vector<std::exception_ptr> errors(count);
  const auto run = [&](unsigned t) {
    for (std::size_t i = t; i < count; i += threads) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Battery.

struct BatteryItem {
  std::string id;
  GridFunction f;
};

/// Versioned battery descriptor. Random items (sums of three Gaussians) need a seed.
struct BatterySpec {
  std::string version = "std-v1";
  GridSpec grid{1, 64.0, 8192};
  std::vector<double> gaussian_sigmas{1.0, 2.0, 4.0, 8.0};
  std::vector<double> bump_scales{0.1, 0.2, 0.4};
  std::vector<double> dilate_lambdas{0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> modulated_omegas{1.0, 4.0, 16.0};
  double modulated_sigma = 2.0;
  std::size_t random_items = 0;
  std::optional<std::uint64_t> seed;

  void validate() const {
    grid.validate();
    if (random_items > 0 && !seed) throw DomainError("battery.seed is mandatory when battery.random_items > 0");
    if (!(modulated_sigma > 0.0)) throw DomainError("battery.modulated_sigma must be positive");
    if (gaussian_sigmas.empty() && bump_scales.empty() && dilate_lambdas.empty() && modulated_omegas.empty() &&
        random_items == 0) {
      throw EmptyBatteryError("battery descriptor selects no functions");
    }
  }
};

inline std::vector<BatteryItem> build_battery(const BatterySpec& spec) {
  spec.validate();
  using op::TestKind;
  std::vector<BatteryItem> items;
  const auto tag = [](const char* kind, const char* key, double v) {
    return std::string(kind) + ":" + key + "=" + detail::format_double(v);
  };
  for (double s : spec.gaussian_sigmas) {
    items.push_back({tag("gaussian", "sigma", s), op::make_test_function(spec.grid, TestKind::gaussian, s)});
  }
  for (double s : spec.bump_scales) {
    items.push_back({tag("sphere_bump", "scale", s), op::make_test_function(spec.grid, TestKind::sphere_bump, s)});
  }
  for (double l : spec.dilate_lambdas) {
    items.push_back({tag("dilate", "lambda", l), op::make_test_function(spec.grid, TestKind::dilate, l)});
  }
  for (double w : spec.modulated_omegas) {
    items.push_back({tag("modulated", "omega", w),
                     op::make_test_function(spec.grid, TestKind::modulated_bump, spec.modulated_sigma, w)});
  }
  if (spec.random_items > 0) {
    std::mt19937_64 rng(*spec.seed);
    const GridSpec& g = spec.grid;
    for (std::size_t r = 0; r < spec.random_items; ++r) {
      std::vector<double> v(g.size(), 0.0);
      for (int term = 0; term < 3; ++term) {
        std::array<double, 3> center{};
        for (int d = 0; d < g.n; ++d) center[static_cast<std::size_t>(d)] = -8.0 + 16.0 * detail::unit_uniform(rng);
        const double sigma = 0.5 + 3.5 * detail::unit_uniform(rng);
        const double amp = -1.0 + 2.0 * detail::unit_uniform(rng);
        for (std::size_t flat = 0; flat < v.size(); ++flat) {
          const auto idx = g.unflatten(flat);
          double r2 = 0.0;
          for (int d = 0; d < g.n; ++d) {
            const double x = g.coordinate(idx[static_cast<std::size_t>(d)]) - center[static_cast<std::size_t>(d)];
            r2 += x * x;
          }
          v[flat] += amp * std::exp(-r2 / (sigma * sigma));
        }
      }
      double peak = 0.0;
      for (double x : v) peak = std::max(peak, std::abs(x));
      if (peak > 0.0) {
        for (double& x : v) x /= peak;
      }
      items.push_back({"random:" + std::to_string(r), GridFunction(g, std::move(v))});
    }
  }
  return items;
}

// ---------------------------------------------------------------------------
// Ratios.

struct MultiplierChoice {
  multiplier::Form form = multiplier::Form::reference;
  double calibration = 1.0;
};

/// reference form for n = 1, the closed form of the paper otherwise.
inline MultiplierChoice default_choice(const KernelParams& p) {
  return {p.n == 1 ? multiplier::Form::reference : multiplier::Form::paper, 1.0};
}

struct AppliedItem {
  std::string id;
  GridFunction f;
  GridFunction image;
};

struct AppliedBattery {
  KernelParams params;
  std::vector<AppliedItem> items;
  double max_multiplier = 0.0;
  std::size_t alias_warnings = 0;
};

inline void check_boundary(const BatteryItem& item) {
  const GridFunction& f = item.f;
  const GridSpec& g = f.spec();
  double edge = 0.0;
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    const auto idx = g.unflatten(flat);
    for (int d = 0; d < g.n; ++d) {
      const auto j = idx[static_cast<std::size_t>(d)];
      if (j == 0 || j == g.points - 1) edge = std::max(edge, std::abs(f[flat]));
    }
  }
  if (edge > 1e-10 * f.max_abs()) throw BoundaryError("battery item " + item.id + " is not negligible at the boundary");
}

/// S f for every battery item with one shared multiplier table.
inline AppliedBattery apply_battery(const KernelParams& p, const std::vector<BatteryItem>& battery,
                                    const MultiplierChoice& choice, unsigned workers = 1) {
  if (battery.empty()) throw EmptyBatteryError("battery is empty");
  const GridSpec& g = battery.front().f.spec();
  for (const auto& item : battery) {
    if (!(item.f.spec() == g)) throw DomainError("battery items must share one grid");
    check_boundary(item);
  }
  if (g.n != p.n) throw DomainError("battery grid dimension and kernel dimension differ");
  op::SpectralOptions opts;
  opts.calibration = choice.calibration;
  const std::vector<double> table = op::multiplier_table(g, p, choice.form, opts);

  AppliedBattery out{p, {}, 0.0, 0};
  std::vector<std::optional<op::SpectralResult>> results(battery.size());
  detail::parallel_for(battery.size(), workers, [&](std::size_t i) { results[i] = op::apply_multiplier(battery[i].f, table); });
  for (std::size_t i = 0; i < battery.size(); ++i) {
    out.max_multiplier = std::max(out.max_multiplier, results[i]->max_multiplier);
    if (results[i]->alias_warning) ++out.alias_warnings;
    out.items.push_back({battery[i].id, battery[i].f, std::move(results[i]->output)});
  }
  return out;
}

struct NormReport {
  RegionQuery query;
  double max_ratio = 0.0;
  std::string argmax;
  std::size_t battery_size = 0;
  std::size_t skipped = 0;
  std::optional<bool> predicted;  // region_main; empty outside its alpha domain
  double a_needed = 0.0;
  double max_multiplier = 0.0;
  std::vector<std::pair<std::string, double>> ratios;
};

inline NormReport ratio_report(const AppliedBattery& applied, double p, double q) {
  NormReport r{RegionQuery(p, q, applied.params), 0.0, {}, 0, 0, std::nullopt, 0.0, 0.0, {}};
  r.a_needed = multiplier::a_needed(r.query);
  r.max_multiplier = applied.max_multiplier;
  try {
    r.predicted = multiplier::region_main(r.query);
  } catch (const DomainError&) {
    r.predicted.reset();
  }
  for (const auto& item : applied.items) {
    const double denom = lp_norm(item.f, p);
    if (denom < 1e-12) {
      ++r.skipped;
      continue;
    }
    const double ratio = lp_norm(item.image, q) / denom;
    r.ratios.emplace_back(item.id, ratio);
    if (r.argmax.empty() || ratio > r.max_ratio) {
      r.max_ratio = ratio;
      r.argmax = item.id;
    }
  }
  r.battery_size = r.ratios.size();
  if (r.battery_size == 0) throw EmptyBatteryError("every battery item has ||f||_p < 1e-12");
  return r;
}

inline NormReport ratio_report(const KernelParams& params, double p, double q, const std::vector<BatteryItem>& battery,
                               const MultiplierChoice& choice) {
  return ratio_report(apply_battery(params, battery, choice), p, q);
}

// ---------------------------------------------------------------------------
// Sweep.

struct RegionPoint {
  int n = 1;
  double alpha = 0.0;
  double p = 0.0;
  double q = 0.0;
  std::optional<bool> main;
  std::optional<bool> strichartz;
  std::optional<bool> one_dim;
  std::optional<bool> hl;
  double a_needed = 0.0;
  double max_ratio = std::numeric_limits<double>::quiet_NaN();
  std::string argmax;
  std::size_t battery_size = 0;
  std::optional<std::uint64_t> seed;
  /// Empty unless the measurement failed; failures are data.
  std::string error;
};

struct SweepOptions {
  unsigned workers = 1;
  std::optional<MultiplierChoice> choice;  // default_choice(params) when empty
};

namespace detail {

template <typename F>
std::optional<bool> verdict(F&& f) {
  try {
    return f();
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

inline std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

}  // namespace detail

/// Verdict columns for one cell; measurement fields are left unset.
inline RegionPoint classify(const KernelParams& params, double p, double q) {
  const RegionQuery query(p, q, params);
  RegionPoint pt;
  pt.n = params.n;
  pt.alpha = params.alpha;
  pt.p = p;
  pt.q = q;
  pt.a_needed = multiplier::a_needed(query);
  pt.main = detail::verdict([&] { return multiplier::region_main(query); });
  pt.strichartz = detail::verdict([&] { return multiplier::region_strichartz(query); });
  pt.one_dim = detail::verdict([&] { return multiplier::region_one_dim(query); });
  pt.hl = detail::verdict([&] { return multiplier::hl_admissible(multiplier::decay_exponent_predicted(params), query); });
  return pt;
}

inline std::vector<RegionPoint> sweep_region(const KernelParams& params, const std::vector<double>& p_grid,
                                             const std::vector<double>& q_grid, const BatterySpec& battery_spec,
                                             const SweepOptions& opts = {}) {
  if (p_grid.empty() || q_grid.empty()) throw DomainError("sweep grids must be nonempty");
  for (double v : p_grid) {
    if (!(v > 1.0) || !std::isfinite(v)) throw DomainError("sweep p values must lie in (1, inf)");
  }
  for (double v : q_grid) {
    if (!(v > 1.0) || !std::isfinite(v)) throw DomainError("sweep q values must lie in (1, inf)");
  }
  const auto battery = build_battery(battery_spec);

  std::optional<AppliedBattery> applied;
  std::string failure;
  try {
    applied = apply_battery(params, battery, opts.choice.value_or(default_choice(params)), opts.workers);
  } catch (const PoleError& e) {
    failure = std::string("PoleError: ") + e.what();
  } catch (const NumericalError& e) {
    failure = std::string("NumericalError: ") + e.what();
  } catch (const ConvergenceError& e) {
    failure = std::string("ConvergenceError: ") + e.what();
  }

  std::vector<RegionPoint> cells(p_grid.size() * q_grid.size());
  detail::parallel_for(cells.size(), opts.workers, [&](std::size_t c) {
    const double p = p_grid[c / q_grid.size()];
    const double q = q_grid[c % q_grid.size()];
    RegionPoint pt = classify(params, p, q);
    pt.seed = battery_spec.random_items > 0 ? battery_spec.seed : std::nullopt;
    if (applied) {
      try {
        const NormReport r = ratio_report(*applied, p, q);
        pt.max_ratio = r.max_ratio;
        pt.argmax = r.argmax;
        pt.battery_size = r.battery_size;
      } catch (const Error& e) {
        pt.error = e.what();
      }
    } else {
      pt.error = failure;
    }
    cells[c] = std::move(pt);
  });
  return cells;
}

inline constexpr const char* kSweepHeader = "n,alpha,p,q,main,strichartz,one_dim,hl,a_needed,max_ratio,argmax,battery_size,seed";

inline void write_sweep_csv(std::ostream& os, const std::vector<RegionPoint>& points) {
  const auto flag = [](const std::optional<bool>& v) { return v ? (*v ? "true" : "false") : "na"; };
  os << kSweepHeader << '\n';
  for (const auto& pt : points) {
    os << pt.n << ',' << detail::format_double(pt.alpha) << ',' << detail::format_double(pt.p) << ','
       << detail::format_double(pt.q) << ',' << flag(pt.main) << ',' << flag(pt.strichartz) << ',' << flag(pt.one_dim)
       << ',' << flag(pt.hl) << ',' << detail::format_double(pt.a_needed) << ',' << detail::format_double(pt.max_ratio)
       << ',' << (pt.error.empty() ? pt.argmax : "error:" + detail::sanitize(pt.error)) << ',' << pt.battery_size << ','
       << (pt.seed ? std::to_string(*pt.seed) : std::string("none")) << '\n';
  }
}

}  // namespace sconv::normlab
