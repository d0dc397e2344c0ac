#pragma once

// Periodic box [-L/2, L/2)^d with n points per axis, complex fields sampled on
// it, and the discrete Lebesgue norms used everywhere else.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "snls/error.hpp"

namespace snls {

using cplx = std::complex<double>;

struct Grid {
  int d = 1;
  std::size_t n = 256;
  double L = 40.0;

  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= n;
    return s;
  }
  double spacing() const { return L / static_cast<double>(n); }
  double cell_volume() const { return std::pow(spacing(), d); }
  /// Coordinate of index i along one axis.
  double coordinate(std::size_t i) const { return -0.5 * L + spacing() * static_cast<double>(i); }
  /// Wavenumber of FFT index i along one axis.
  double wavenumber(std::size_t i) const {
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    auto k = static_cast<std::ptrdiff_t>(i);
    if (k >= half) k -= static_cast<std::ptrdiff_t>(n);
    return 2.0 * std::numbers::pi / L * static_cast<double>(k);
  }
  /// Row-major multi-index of a flat index (axis 0 slowest).
  std::array<std::size_t, 3> unflatten(std::size_t flat) const {
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int axis = d - 1; axis >= 0; --axis) {
      idx[static_cast<std::size_t>(axis)] = flat % n;
      flat /= n;
    }
    return idx;
  }
  std::array<double, 3> position(std::size_t flat) const {
    const auto idx = unflatten(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int axis = 0; axis < d; ++axis) x[static_cast<std::size_t>(axis)] = coordinate(idx[static_cast<std::size_t>(axis)]);
    return x;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline void validate(const Grid& g) {
  if (g.d < 1 || g.d > 3) throw Error(ErrorCode::InvalidConfig, "grid dimension must be 1, 2 or 3");
  if (g.n < 2 || !std::has_single_bit(g.n)) {
    throw Error(ErrorCode::InvalidConfig, "points per axis must be a power of two >= 2");
  }
  if (!(g.L > 0) || !std::isfinite(g.L)) throw Error(ErrorCode::InvalidConfig, "side length must be positive");
}

inline bool all_finite(std::span<const cplx> v) {
  return std::all_of(v.begin(), v.end(),
                     [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

/// Complex samples on a grid, row-major.
class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(const Grid& grid) : grid_(grid), values_(grid.size(), cplx{0.0, 0.0}) {}
  ComplexField(const Grid& grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw Error(ErrorCode::LengthMismatch, "field has " + std::to_string(values_.size()) +
                                                 " values, grid needs " + std::to_string(grid_.size()));
    }
    if (!all_finite(values_)) throw Error(ErrorCode::NonFinite, "field contains NaN or Inf");
  }

  template <class F>
  static ComplexField sample(const Grid& grid, F&& f) {
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.position(i));
    return ComplexField(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }

  friend bool operator==(const ComplexField&, const ComplexField&) = default;

 private:
  Grid grid_{};
  std::vector<cplx> values_;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

/// (sum |f_i|^p h^d)^{1/p}, or max |f_i| when p is infinite.
inline double lp_norm(std::span<const cplx> v, double cell_volume, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
  }
  double s = 0.0;
  if (p == 2.0) {
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s * cell_volume);
  }
  const double half_p = 0.5 * p;
  for (const auto& z : v) {
    const double a2 = std::norm(z);
    if (a2 > 0.0) s += std::pow(a2, half_p);
  }
  return std::pow(s * cell_volume, 1.0 / p);
}

inline double lp_norm(const ComplexField& f, double p) {
  return lp_norm(f.values(), f.grid().cell_volume(), p);
}

/// L^2 distance between two fields on the same grid.
inline double l2_distance(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid(), b.grid());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * a.grid().cell_volume());
}

/// Fraction of the mass lying outside the central half-box [-L/4, L/4)^d.
/// Used to watch for wrap-around of the periodic surrogate.
inline double outer_mass_fraction(const ComplexField& f) {
  const Grid& g = f.grid();
  double total = 0.0;
  double outer = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = g.position(i);
    bool inside = true;
    for (int a = 0; a < g.d; ++a) {
      const double xa = x[static_cast<std::size_t>(a)];
      if (xa < -0.25 * g.L || xa >= 0.25 * g.L) inside = false;
    }
    const double m = std::norm(f[i]);
    total += m;
    if (!inside) outer += m;
  }
  return total > 0.0 ? outer / total : 0.0;
}

namespace detail {

template <class T>
void write_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::array<unsigned char, 8> bytes{};
  std::memcpy(bytes.data(), &value, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), 8);
}

template <class T>
T read_le(std::istream& is) {
  static_assert(sizeof(T) == 8);
  std::array<unsigned char, 8> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!is) throw Error(ErrorCode::Io, "truncated field file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), 8);
  return value;
}

}  // namespace detail

/// Binary layout: int64 d, int64 n, float64 L, then (re, im) float64 pairs,
/// row-major, all little-endian.
inline void write_field(std::ostream& os, const ComplexField& f) {
  const Grid& g = f.grid();
  detail::write_le<std::int64_t>(os, g.d);
  detail::write_le<std::int64_t>(os, static_cast<std::int64_t>(g.n));
  detail::write_le<double>(os, g.L);
  for (const auto& z : f.values()) {
    detail::write_le<double>(os, z.real());
    detail::write_le<double>(os, z.imag());
  }
  if (!os) throw Error(ErrorCode::Io, "failed to write field");
}

inline ComplexField read_field(std::istream& is) {
  Grid g;
  g.d = static_cast<int>(detail::read_le<std::int64_t>(is));
  const auto n = detail::read_le<std::int64_t>(is);
  if (n < 2) throw Error(ErrorCode::Io, "bad point count in field header");
  g.n = static_cast<std::size_t>(n);
  g.L = detail::read_le<double>(is);
  validate(g);
  std::vector<cplx> v(g.size());
  for (auto& z : v) {
    const double re = detail::read_le<double>(is);
    const double im = detail::read_le<double>(is);
    z = {re, im};
  }
  return ComplexField(g, std::move(v));
}

}  // namespace snls
