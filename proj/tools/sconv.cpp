// sconv: command-line front end.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input,
// 3 numerical non-convergence, 4 I/O.

#include <sconv/checks.hpp>
#include <sconv/errors.hpp>
#include <sconv/grid.hpp>
#include <sconv/kernel.hpp>
#include <sconv/multiplier.hpp>
#include <sconv/normlab.hpp>
#include <sconv/operator.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace sconv;

namespace {

enum Exit : int { kOk = 0, kVerify = 1, kInput = 2, kConverge = 3, kIo = 4 };

/// Every configurable field, for the --help footer.
struct FieldDoc {
  std::string section;
  std::string name;
  std::string rule;
  std::string text;
};

std::vector<FieldDoc>& field_docs() {
  static std::vector<FieldDoc> docs;
  return docs;
}

template <typename T>
CLI::Option* field(CLI::App* app, const std::string& section, const std::string& name, T& var, const std::string& text,
                   const std::string& rule) {
  field_docs().push_back({section, name, rule, text});
  return app->add_option("--" + name, var, text + " [" + rule + "]")->capture_default_str();
}

CLI::Option* flag(CLI::App* app, const std::string& section, const std::string& name, bool& var, const std::string& text) {
  field_docs().push_back({section, name, "flag", text});
  return app->add_flag("--" + name, var, text);
}

std::string help_footer() {
  std::ostringstream os;
  os << "\nConfiguration fields (INI: top-level keys for globals, [subcommand] sections otherwise;\n"
        "command-line flags override the file):\n";
  std::string section;
  for (const auto& d : field_docs()) {
    if (d.section != section) {
      section = d.section;
      os << "\n  [" << section << "]\n";
    }
    os << "    --" << d.name << "  " << d.text << "; rule: " << d.rule << '\n';
  }
  os << "\nExit codes: 0 success, 1 verification failure, 2 invalid input, 3 non-convergence, 4 I/O.\n";
  return os.str();
}

/// Rethrows DomainError / RangeError with a field path prefix.
template <typename F>
auto at_field(const std::string& path, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const RangeError& e) {
    throw RangeError(path + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(path + ": " + e.what());
  } catch (const ResolutionError& e) {
    throw ResolutionError(path + ": " + e.what());
  }
}

struct Globals {
  std::string out = ".";
  unsigned workers = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

fs::path output_dir(const Globals& g) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec || !fs::is_directory(g.out)) throw IoError("cannot create output directory " + g.out);
  return fs::path(g.out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct BesselArgs {
  checks::BesselSuiteConfig cfg;
};

int cmd_bessel_check(const Globals& g, const BesselArgs& a) {
  at_field("bessel-check", [&] { a.cfg.validate(); });
  const fs::path dir = output_dir(g);
  const auto report = checks::run_bessel_suite(a.cfg);

  std::ostringstream csv;
  csv << "a,constant,t_max,samples\n";
  for (const auto& e : report.envelopes) csv << g17(e.order) << ',' << g17(e.constant) << ',' << g17(e.t_max) << ',' << e.samples << '\n';
  write_text(dir / "bessel_envelopes.csv", csv.str());

  std::ostringstream manifest;
  for (const auto& c : report.checks) {
    manifest << (c.passed ? "PASS " : "FAIL ") << c.name << " measured=" << g17(c.measured) << " tol=" << g17(c.tolerance)
             << " " << c.detail << '\n';
  }
  write_text(dir / "bessel_check.txt", manifest.str());
  std::cout << manifest.str();
  if (!report.passed()) {
    std::cerr << "bessel-check: failing checks:\n";
    for (const auto& c : report.checks) {
      if (!c.passed) std::cerr << "  " << c.name << '\n';
    }
    return kVerify;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct FourierArgs {
  checks::FourierCheckConfig cfg;
  bool misparse = false;
};

int cmd_fourier_check(const Globals& g, FourierArgs a) {
  if (a.misparse) a.cfg.paper_override = multiplier::m_paper_misparsed;
  at_field("fourier-check", [&] { a.cfg.validate(); });
  const fs::path dir = output_dir(g);
  const auto report = checks::run_fourier_check(a.cfg);

  std::ostringstream csv;
  csv << "alpha,s,oracle,m_paper,m_reference,ratio_paper,ratio_reference\n";
  for (const auto& r : report.rows) {
    csv << g17(r.alpha) << ',' << g17(r.s) << ',' << g17(r.oracle) << ',' << g17(r.m_paper) << ',' << g17(r.m_reference)
        << ',' << g17(r.ratio_paper) << ',' << g17(r.ratio_reference) << '\n';
  }
  write_text(dir / "fourier_check.csv", csv.str());

  for (const auto* v : {&report.paper, &report.reference}) {
    std::cout << v->form << ": " << (v->constant ? "constant" : "not constant") << " (spread " << g17(v->spread)
              << ", tolerance " << g17(report.tolerance) << ", calibration " << g17(v->calibration) << ")\n";
  }
  std::ostringstream cal;
  if (const auto sel = report.selected()) {
    cal << "form = " << sel->form << "\ncalibration = " << g17(sel->calibration) << "\nspread = " << g17(sel->spread) << '\n';
  } else {
    cal << "form = none\n";
  }
  write_text(dir / "calibration.txt", cal.str());
  return report.passed() ? kOk : kVerify;
}

// ---------------------------------------------------------------------------

struct ApplyArgs {
  int n = 1;
  double alpha = 0.75;
  double half_width = 64.0;
  std::size_t points = 4096;
  std::string input;
  std::string kind = "gaussian";
  double scale = 1.0;
  double frequency = 0.0;
  std::string form = "auto";
  double calibration = 1.0;
  bool direct = false;
  kernel::QuadratureConfig quad = op::direct_defaults();
};

multiplier::Form resolve_form(const std::string& name, int n) {
  if (name == "auto") return n == 1 ? multiplier::Form::reference : multiplier::Form::paper;
  return multiplier::parse_form(name);
}

int cmd_apply(const Globals& g, const ApplyArgs& a) {
  const kernel::KernelParams params = at_field("apply.alpha", [&] { return kernel::KernelParams(a.alpha, a.n); });
  if (a.direct && a.n != 1) throw DomainError("direct oracle is n=1 only");
  const multiplier::Form form = at_field("apply.form", [&] { return resolve_form(a.form, a.n); });
  if (a.direct) at_field("apply.quadrature", [&] { a.quad.validate(); });

  std::optional<grid::GridFunction> f;
  if (!a.input.empty()) {
    f = grid::read_binary<double>(a.input);
    if (f->spec().n != a.n) throw DomainError("apply.n: input file has dimension " + std::to_string(f->spec().n));
  } else {
    const grid::GridSpec spec = at_field("apply.grid", [&] { return grid::GridSpec(a.n, a.half_width, a.points); });
    const op::TestKind kind = at_field("apply.kind", [&] { return op::parse_test_kind(a.kind); });
    f = at_field("apply.scale", [&] { return op::make_test_function(spec, kind, a.scale, a.frequency); });
  }
  const fs::path dir = output_dir(g);

  op::SpectralOptions opts;
  opts.calibration = a.calibration;
  const auto spectral = op::apply_salpha_spectral(*f, params, form, opts);
  grid::write_binary((dir / "input.scnv").string(), *f);
  grid::write_binary((dir / "spectral.scnv").string(), spectral.output);
  grid::write_csv((dir / "spectral.csv").string(), spectral.output);
  std::cout << "form = " << multiplier::to_string(form) << '\n'
            << "max_multiplier = " << g17(spectral.max_multiplier) << '\n'
            << "max_imag_residue = " << g17(spectral.max_imag) << '\n'
            << "realness = passed\n"
            << "alias_warning = " << (spectral.alias_warning ? "true" : "false") << '\n'
            << "wraparound_bound = " << g17(op::wraparound_bound(f->spec(), params)) << '\n';

  if (a.direct) {
    const auto direct = op::convolve_direct(*f, params, a.quad, g.workers);
    grid::write_binary((dir / "direct.scnv").string(), direct.output);
    grid::write_csv((dir / "direct.csv").string(), direct.output);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < f->size(); ++i) {
      const double d = spectral.output[i] - direct.output[i];
      num += d * d;
      den += direct.output[i] * direct.output[i];
    }
    std::cout << "direct_truncation_radius = " << g17(direct.truncation_radius) << '\n'
              << "direct_tail_error_estimate = " << g17(direct.tail_error_estimate) << '\n'
              << "l2_discrepancy = " << g17(den > 0.0 ? std::sqrt(num / den) : std::sqrt(num)) << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  int n = 1;
  double alpha = 0.9;
  std::vector<double> p_grid{1.05, 1.15, 1.25, 4.0 / 3.0, 1.5, 1.65, 1.8, 2.0};
  std::vector<double> q_grid{2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 12.0};
  double half_width = 64.0;
  std::size_t points = 8192;
  normlab::BatterySpec battery;
  std::string form = "auto";
  double calibration = 1.0;
  std::string output_name = "sweep.csv";
};

int cmd_sweep(const Globals& g, SweepArgs a) {
  const kernel::KernelParams params = at_field("sweep.alpha", [&] { return kernel::KernelParams(a.alpha, a.n); });
  const multiplier::Form form = at_field("sweep.form", [&] { return resolve_form(a.form, a.n); });
  a.battery.grid = at_field("sweep.grid", [&] { return grid::GridSpec(a.n, a.half_width, a.points); });
  if (a.battery.grid.size() > (std::size_t{1} << 24)) throw RangeError("sweep.points: N^n above 2^24 samples");
  if (g.seed_given) a.battery.seed = g.seed;
  at_field("sweep.battery", [&] { a.battery.validate(); });
  if (a.output_name.empty() || a.output_name.find('/') != std::string::npos) {
    throw DomainError("sweep.output-name must be a plain file name");
  }
  const fs::path dir = output_dir(g);

  normlab::SweepOptions opts;
  opts.workers = g.workers;
  opts.choice = normlab::MultiplierChoice{form, a.calibration};
  const auto cells = at_field("sweep.grid", [&] { return normlab::sweep_region(params, a.p_grid, a.q_grid, a.battery, opts); });
  std::ostringstream csv;
  normlab::write_sweep_csv(csv, cells);
  write_text(dir / a.output_name, csv.str());
  std::size_t failed = 0;
  for (const auto& c : cells) failed += c.error.empty() ? 0 : 1;
  std::cout << "cells = " << cells.size() << "\nfailed_cells = " << failed << "\nwritten = " << (dir / a.output_name).string()
            << '\n';
  return kOk;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const NumericalError*>(&e)) return kConverge;
  if (dynamic_cast<const Error*>(&e)) return kInput;
  return kVerify;
}

std::string error_class(const std::exception& e) {
  if (dynamic_cast<const RangeError*>(&e)) return "RangeError";
  if (dynamic_cast<const PoleError*>(&e)) return "PoleError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const ResolutionError*>(&e)) return "ResolutionError";
  if (dynamic_cast<const BoundaryError*>(&e)) return "BoundaryError";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  if (dynamic_cast<const IoError*>(&e)) return "IoError";
  return "error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sconv: convolution with (|y|^2 - 1)^{-alpha} outside the unit ball, its multiplier, and L^p-L^q checks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file (key = value, [subcommand] sections)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Globals globals;
  field(&app, "global", "out", globals.out, "output directory", "created if missing");
  field(&app, "global", "workers", globals.workers, "worker threads for sweeps and the direct oracle", "integer in [1, 256]")
      ->check(CLI::Range(1u, 256u));
  auto* seed_opt = field(&app, "global", "seed", globals.seed, "seed for randomized battery items",
                         "unsigned 64-bit; mandatory when random items are requested");

  // bessel-check
  BesselArgs bessel;
  auto* bc = app.add_subcommand("bessel-check", "special-function suite and envelope constants");
  field(bc, "bessel-check", "orders", bessel.cfg.envelope_orders, "envelope orders a", "each |a| <= 50");
  field(bc, "bessel-check", "recurrence-orders", bessel.cfg.recurrence_orders, "orders for the three-term recurrence",
        "each |a| <= 49");
  field(bc, "bessel-check", "t-max", bessel.cfg.t_max, "upper end of the envelope grid", "positive, finite");
  field(bc, "bessel-check", "samples", bessel.cfg.samples, "envelope grid points", "integer >= 100");
  field(bc, "bessel-check", "closed-form-tol", bessel.cfg.closed_form_tol, "J_{+-1/2} closed-form tolerance", "positive");
  field(bc, "bessel-check", "recurrence-tol", bessel.cfg.recurrence_tol, "recurrence residual tolerance", "positive");
  field(bc, "bessel-check", "stability-tol", bessel.cfg.stability_tol, "envelope change on doubling the grid", "positive");
  field(bc, "bessel-check", "gamma-tol", bessel.cfg.gamma_tol, "gamma reflection tolerance", "positive");

  // fourier-check
  FourierArgs fourier;
  auto* fc = app.add_subcommand("fourier-check", "closed-form multipliers against the quadrature oracle (n = 1)");
  field(fc, "fourier-check", "alphas", fourier.cfg.alphas, "alpha grid", "each in (1/2, 1)");
  field(fc, "fourier-check", "s-values", fourier.cfg.s_values, "frequency grid", "each positive");
  field(fc, "fourier-check", "tol", fourier.cfg.tolerance, "ratio constancy tolerance", "positive");
  field(fc, "fourier-check", "jacobi-order", fourier.cfg.quadrature.jacobi_order, "Gauss-Jacobi order", "integer >= 1");
  field(fc, "fourier-check", "panel-count", fourier.cfg.quadrature.panel_count, "panels per half period", "integer >= 1");
  field(fc, "fourier-check", "truncation-radius", fourier.cfg.quadrature.truncation_radius, "start of the accelerated tail",
        "> 2");
  field(fc, "fourier-check", "tail-tol", fourier.cfg.quadrature.tail_tol, "tail increment tolerance", "in (0, 1e-2]");
  field(fc, "fourier-check", "max-tail-terms", fourier.cfg.quadrature.max_tail_terms, "tail half-period cap",
        "integer in [16, 380]");
  flag(fc, "fourier-check", "misparse-hook", fourier.misparse, "test hook: read (|s|/2)^mu as |s|/2^mu in m_paper");

  // apply
  ApplyArgs ap;
  auto* ac = app.add_subcommand("apply", "apply S_alpha to a grid function (spectral, optionally direct)");
  field(ac, "apply", "n", ap.n, "dimension", "integer in 1..3");
  field(ac, "apply", "alpha", ap.alpha, "kernel exponent", "positive; not an integer; n/2 - alpha not an integer");
  field(ac, "apply", "half-width", ap.half_width, "cube half-width L", "> 2");
  field(ac, "apply", "points", ap.points, "points per axis N", "power of two with 2L/N < 0.25");
  field(ac, "apply", "input", ap.input, "SCNV1 input file (overrides kind)", "readable SCNV1 real file");
  field(ac, "apply", "kind", ap.kind, "synthesized input", "gaussian | sphere_bump | modulated_bump | dilate");
  field(ac, "apply", "scale", ap.scale, "width (or lambda for dilate)", "feature width >= 4h");
  field(ac, "apply", "frequency", ap.frequency, "modulation frequency", "in [0, pi/(2h)]");
  field(ac, "apply", "form", ap.form, "multiplier", "auto | paper | reference (reference needs n = 1)");
  field(ac, "apply", "calibration", ap.calibration, "global multiplier constant", "finite");
  flag(ac, "apply", "direct", ap.direct, "also run the direct quadrature oracle (n = 1, 1/2 < alpha < 1)");
  field(ac, "apply", "jacobi-order", ap.quad.jacobi_order, "direct: Gauss-Jacobi order", "integer >= 1");
  field(ac, "apply", "panel-count", ap.quad.panel_count, "direct: 8-point panels per grid cell", "integer >= 1");
  field(ac, "apply", "truncation-radius", ap.quad.truncation_radius, "direct: initial cut-off radius", "> 2");
  field(ac, "apply", "tail-tol", ap.quad.tail_tol, "direct: tail remainder tolerance", "in (0, 1e-2]");

  // sweep
  SweepArgs sw;
  auto* sc = app.add_subcommand("sweep", "(p, q) region sweep with battery ratios");
  field(sc, "sweep", "n", sw.n, "dimension", "integer in 1..3");
  field(sc, "sweep", "alpha", sw.alpha, "kernel exponent", "positive");
  field(sc, "sweep", "p-grid", sw.p_grid, "p values", "each in (1, inf)");
  field(sc, "sweep", "q-grid", sw.q_grid, "q values", "each in (1, inf)");
  field(sc, "sweep", "half-width", sw.half_width, "battery cube half-width L", "> 2");
  field(sc, "sweep", "points", sw.points, "battery points per axis N", "power of two, 2L/N < 0.25, N^n <= 2^24");
  field(sc, "sweep", "gaussian-sigmas", sw.battery.gaussian_sigmas, "Gaussian widths", "each >= 4h, negligible at the boundary");
  field(sc, "sweep", "bump-scales", sw.battery.bump_scales, "sphere bump widths", "each >= 4h");
  field(sc, "sweep", "dilate-lambdas", sw.battery.dilate_lambdas, "dilation factors", "each 1/lambda >= 4h");
  field(sc, "sweep", "modulated-omegas", sw.battery.modulated_omegas, "modulation frequencies", "each in [0, pi/(2h)]");
  field(sc, "sweep", "modulated-sigma", sw.battery.modulated_sigma, "modulated envelope width", "positive");
  field(sc, "sweep", "random-items", sw.battery.random_items, "random Gaussian sums", "integer >= 0; needs --seed");
  field(sc, "sweep", "form", sw.form, "multiplier", "auto | paper | reference (reference needs n = 1)");
  field(sc, "sweep", "calibration", sw.calibration, "global multiplier constant", "finite");
  field(sc, "sweep", "output-name", sw.output_name, "CSV file name inside --out", "plain file name");

  app.footer(help_footer());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }
  globals.seed_given = seed_opt->count() > 0;

  try {
    if (bc->parsed()) return cmd_bessel_check(globals, bessel);
    if (fc->parsed()) return cmd_fourier_check(globals, fourier);
    if (ac->parsed()) return cmd_apply(globals, ap);
    if (sc->parsed()) return cmd_sweep(globals, sw);
  } catch (const std::exception& e) {
    std::cerr << "sconv: " << error_class(e) << ": " << e.what() << '\n';
    return exit_code(e);
  }
  return kInput;
}
