#pragma once

// Samples on the centered periodic cube [-L, L)^n with N points per axis,
// x_j = -L + j h, h = 2L/N, stored row-major (last axis fastest).
//
// Binary layout (little-endian):
//   "SCNV1"          5 bytes
//   n                uint32
//   N                uint32
//   L                float64
//   tag              uint32, 0 = real float64, 1 = complex (re, im) float64 pairs
//   payload          N^n values in row-major order

#include <sconv/errors.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace sconv::grid {

static_assert(std::endian::native == std::endian::little, "binary grid format assumes a little-endian host");

struct GridSpec {
  int n = 1;
  double half_width = 64.0;
  std::size_t points = 4096;

  GridSpec() = default;
  GridSpec(int n_, double half_width_, std::size_t points_) : n(n_), half_width(half_width_), points(points_) {
    validate();
  }

  void validate() const {
    std::ostringstream os;
    if (n < 1 || n > 3) {
      os << "grid dimension n = " << n << " outside 1..3";
    } else if (!(half_width > 2.0) || !std::isfinite(half_width)) {
      os << "grid half_width = " << half_width << " must exceed 2";
    } else if (points < 2 || !std::has_single_bit(points)) {
      os << "grid points = " << points << " must be a power of two >= 2";
    } else if (!(spacing() < 0.25)) {
      os << "grid spacing h = 2L/N = " << spacing() << " must be below 0.25";
    } else {
      return;
    }
    throw DomainError(os.str());
  }

  [[nodiscard]] double spacing() const { return 2.0 * half_width / static_cast<double>(points); }

  [[nodiscard]] std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < n; ++d) s *= points;
    return s;
  }

  [[nodiscard]] double coordinate(std::size_t j) const { return -half_width + static_cast<double>(j) * spacing(); }

  /// Signed frequency index in [-N/2, N/2) of FFT slot j.
  [[nodiscard]] long frequency_index(std::size_t j) const {
    const long jj = static_cast<long>(j);
    const long half = static_cast<long>(points / 2);
    return jj < half ? jj : jj - static_cast<long>(points);
  }

  [[nodiscard]] double wavenumber(std::size_t j) const {
    return std::numbers::pi * static_cast<double>(frequency_index(j)) / half_width;
  }

  /// Per-axis indices of flat index `flat`.
  [[nodiscard]] std::array<std::size_t, 3> unflatten(std::size_t flat) const {
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int d = n - 1; d >= 0; --d) {
      idx[static_cast<std::size_t>(d)] = flat % points;
      flat /= points;
    }
    return idx;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

template <typename T>
class BasicGridFunction {
 public:
  using value_type = T;

  BasicGridFunction(GridSpec spec, std::vector<T> samples) : spec_(spec), samples_(std::move(samples)) {
    spec_.validate();
    if (samples_.size() != spec_.size()) {
      std::ostringstream os;
      os << "grid function has " << samples_.size() << " samples, expected N^n = " << spec_.size();
      throw DomainError(os.str());
    }
    for (const T& v : samples_) {
      if (!finite(v)) throw DomainError("grid function samples must be finite");
    }
  }

  /// All-zero function on `spec`.
  explicit BasicGridFunction(GridSpec spec) : BasicGridFunction(spec, std::vector<T>(spec.size())) {}

  [[nodiscard]] const GridSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const std::vector<T>& samples() const noexcept { return samples_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  const T& operator[](std::size_t i) const { return samples_[i]; }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const T& v : samples_) m = std::max(m, static_cast<double>(std::abs(v)));
    return m;
  }

 private:
  static bool finite(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
      return std::isfinite(v);
    } else {
      return std::isfinite(v.real()) && std::isfinite(v.imag());
    }
  }

  GridSpec spec_;
  std::vector<T> samples_;
};

using GridFunction = BasicGridFunction<double>;
using ComplexGridFunction = BasicGridFunction<std::complex<double>>;

template <typename T>
BasicGridFunction<T> operator*(double c, const BasicGridFunction<T>& f) {
  std::vector<T> v = f.samples();
  for (T& x : v) x *= c;
  return {f.spec(), std::move(v)};
}

template <typename T>
BasicGridFunction<T> operator+(const BasicGridFunction<T>& f, const BasicGridFunction<T>& g) {
  if (!(f.spec() == g.spec())) throw DomainError("grid functions live on different grids");
  std::vector<T> v = f.samples();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += g[i];
  return {f.spec(), std::move(v)};
}

template <typename T>
BasicGridFunction<T> operator-(const BasicGridFunction<T>& f, const BasicGridFunction<T>& g) {
  return f + (-1.0) * g;
}

// ---------------------------------------------------------------------------
// Serialization.

inline constexpr char kMagic[5] = {'S', 'C', 'N', 'V', '1'};

namespace detail {

template <typename T>
constexpr std::uint32_t payload_tag() {
  return std::is_floating_point_v<T> ? 0u : 1u;
}

template <typename V>
void put(std::ostream& os, const V& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V get(std::istream& is, const std::string& path) {
  V v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(V))) throw IoError("truncated grid file: " + path);
  return v;
}

}  // namespace detail

template <typename T>
void write_binary(const std::string& path, const BasicGridFunction<T>& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  detail::put(os, static_cast<std::uint32_t>(f.spec().n));
  detail::put(os, static_cast<std::uint32_t>(f.spec().points));
  detail::put(os, f.spec().half_width);
  detail::put(os, detail::payload_tag<T>());
  os.write(reinterpret_cast<const char*>(f.samples().data()), static_cast<std::streamsize>(f.size() * sizeof(T)));
  if (!os) throw IoError("write failed: " + path);
}

template <typename T>
BasicGridFunction<T> read_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  char magic[sizeof(kMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not an SCNV1 grid file: " + path);
  }
  const auto n = detail::get<std::uint32_t>(is, path);
  const auto points = detail::get<std::uint32_t>(is, path);
  const auto half_width = detail::get<double>(is, path);
  const auto tag = detail::get<std::uint32_t>(is, path);
  if (tag != detail::payload_tag<T>()) {
    throw IoError("grid file payload tag " + std::to_string(tag) + " does not match the requested type: " + path);
  }
  GridSpec spec;
  spec.n = static_cast<int>(n);
  spec.half_width = half_width;
  spec.points = points;
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw IoError(std::string("invalid grid header in ") + path + ": " + e.what());
  }
  std::vector<T> v(spec.size());
  if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)))) {
    throw IoError("truncated grid payload: " + path);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after grid payload: " + path);
  try {
    return {spec, std::move(v)};
  } catch (const DomainError& e) {
    throw IoError(std::string("invalid grid payload in ") + path + ": " + e.what());
  }
}

/// CSV with index columns i0.., coordinate columns x0.., then value (or re, im).
template <typename T>
void write_csv(std::ostream& os, const BasicGridFunction<T>& f) {
  const GridSpec& g = f.spec();
  for (int d = 0; d < g.n; ++d) os << 'i' << d << ',';
  for (int d = 0; d < g.n; ++d) os << 'x' << d << ',';
  os << (std::is_floating_point_v<T> ? "value" : "re,im") << '\n';
  char buf[64];
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    const auto idx = g.unflatten(flat);
    for (int d = 0; d < g.n; ++d) os << idx[static_cast<std::size_t>(d)] << ',';
    for (int d = 0; d < g.n; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g,", g.coordinate(idx[static_cast<std::size_t>(d)]));
      os << buf;
    }
    if constexpr (std::is_floating_point_v<T>) {
      std::snprintf(buf, sizeof(buf), "%.17g", f[flat]);
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g", f[flat].real(), f[flat].imag());
    }
    os << buf << '\n';
  }
}

template <typename T>
void write_csv(const std::string& path, const BasicGridFunction<T>& f) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_csv(os, f);
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace sconv::grid
