#pragma once

// Finite-mode multiplicative noise: coefficient fields e_m, optional linear
// multipliers b_m, the Ito correction drift and the noise increment itself.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "snls/brownian.hpp"
#include "snls/error.hpp"
#include "snls/exponents.hpp"
#include "snls/grid.hpp"

namespace snls {

struct CoefficientSpec {
  enum class Kind { constant, gaussian_bump, file };
  Kind kind = Kind::constant;
  cplx value{1.0, 0.0};  // constant value, or bump amplitude
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double width = 1.0;
  std::string path;

  static CoefficientSpec constant(cplx v) { return {Kind::constant, v, {}, 1.0, {}}; }
  static CoefficientSpec gaussian_bump(cplx amplitude, double width, std::array<double, 3> center = {}) {
    return {Kind::gaussian_bump, amplitude, center, width, {}};
  }
  static CoefficientSpec file(std::string path) { return {Kind::file, {}, {}, 1.0, std::move(path)}; }

  friend bool operator==(const CoefficientSpec&, const CoefficientSpec&) = default;
};

inline ComplexField realize(const CoefficientSpec& spec, const Grid& grid) {
  switch (spec.kind) {
    case CoefficientSpec::Kind::constant: {
      std::vector<cplx> v(grid.size(), spec.value);
      if (!all_finite(v)) throw Error(ErrorCode::UnboundedCoefficient, "constant coefficient is not finite");
      return ComplexField(grid, std::move(v));
    }
    case CoefficientSpec::Kind::gaussian_bump: {
      if (!(spec.width > 0)) throw Error(ErrorCode::InvalidConfig, "bump width must be positive");
      std::vector<cplx> v(grid.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto x = grid.position(i);
        double r2 = 0.0;
        for (int a = 0; a < grid.d; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          r2 += (x[ua] - spec.center[ua]) * (x[ua] - spec.center[ua]);
        }
        v[i] = spec.value * std::exp(-r2 / (spec.width * spec.width));
      }
      if (!all_finite(v)) throw Error(ErrorCode::UnboundedCoefficient, "bump coefficient is not finite");
      return ComplexField(grid, std::move(v));
    }
    case CoefficientSpec::Kind::file: {
      std::ifstream in(spec.path, std::ios::binary);
      if (!in) throw Error(ErrorCode::Io, "cannot open coefficient file " + spec.path);
      try {
        ComplexField f = read_field(in);
        require_same_grid(f.grid(), grid);
        return f;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NonFinite) throw Error(ErrorCode::UnboundedCoefficient, spec.path);
        throw;
      }
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown coefficient kind");
}

struct NoiseModel {
  Grid grid;
  std::vector<ComplexField> coeffs;         // e_m
  std::vector<ComplexField> linear_coeffs;  // b_m
  bool conservative = true;                 // every e_m real
  bool linear_real = true;                  // every b_m real
  double coeff_sup_sum = 0.0;               // sum_m ||e_m||_inf^2
  double linear_sup_sum = 0.0;              // sum_m ||b_m||_inf^2
  std::vector<double> abs_sq_sum;           // sum_m |e_m(x)|^2
  std::vector<double> linear_abs_sq_sum;    // sum_m |b_m(x)|^2

  std::size_t modes() const { return coeffs.size() + linear_coeffs.size(); }
  bool empty() const { return modes() == 0; }
  /// Every sub-flow of the noise is a pointwise phase rotation.
  bool phase_exact() const { return conservative && linear_real; }
};

inline NoiseModel make_noise_model(std::vector<ComplexField> coeffs, std::vector<ComplexField> linear,
                                   const Grid& grid) {
  NoiseModel model;
  model.grid = grid;
  model.abs_sq_sum.assign(grid.size(), 0.0);
  model.linear_abs_sq_sum.assign(grid.size(), 0.0);
  auto absorb = [&](const ComplexField& f, std::vector<double>& sq, double& sup_sum, bool& real) {
    require_same_grid(f.grid(), grid);
    if (!all_finite(f.values())) throw Error(ErrorCode::UnboundedCoefficient, "coefficient has NaN/Inf");
    double sup = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double a2 = std::norm(f[i]);
      sq[i] += a2;
      sup = std::max(sup, a2);
      if (std::abs(f[i].imag()) > 1e-14) real = false;
    }
    sup_sum += sup;
  };
  for (const auto& e : coeffs) absorb(e, model.abs_sq_sum, model.coeff_sup_sum, model.conservative);
  for (const auto& b : linear) absorb(b, model.linear_abs_sq_sum, model.linear_sup_sum, model.linear_real);
  model.coeffs = std::move(coeffs);
  model.linear_coeffs = std::move(linear);
  return model;
}

inline NoiseModel make_noise_model(const std::vector<CoefficientSpec>& coeff_spec,
                                   const std::vector<CoefficientSpec>& linear_spec, const Grid& grid) {
  std::vector<ComplexField> e;
  std::vector<ComplexField> b;
  for (const auto& s : coeff_spec) e.push_back(realize(s, grid));
  for (const auto& s : linear_spec) b.push_back(realize(s, grid));
  return make_noise_model(std::move(e), std::move(b), grid);
}

/// |u|^power computed from |u|^2, with 0^0 = 1 and 0^s = 0 for s > 0.
inline double abs_pow(double abs_sq, double power) {
  if (power == 0.0) return 1.0;
  if (abs_sq == 0.0) return 0.0;
  if (power == 2.0) return abs_sq;
  return std::pow(abs_sq, 0.5 * power);
}

namespace detail {

/// out += scale * [ -1/2 phi S(x) |u|^{2(gamma-1)} u - 1/2 B(x) u ]
inline void add_stratonovich_drift(std::span<const cplx> u, const NoiseModel& model, double gamma_minus_1,
                                   double phi, double scale, std::span<cplx> out) {
  const bool has_e = !model.coeffs.empty();
  const bool has_b = !model.linear_coeffs.empty();
  if (!has_e && !has_b) return;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double factor = 0.0;
    if (has_e && phi != 0.0) factor += phi * model.abs_sq_sum[i] * abs_pow(std::norm(u[i]), 2.0 * gamma_minus_1);
    if (has_b) factor += model.linear_abs_sq_sum[i];
    out[i] += (-0.5 * scale * factor) * u[i];
  }
}

/// out += -i [ phi sum_m e_m |u|^{gamma-1} u db_m + sum_m b_m u db'_m ]
inline void add_noise_term(std::span<const cplx> u, const NoiseModel& model, double gamma_minus_1, double phi,
                           std::span<const double> increments, std::span<cplx> out) {
  const std::size_t M = model.coeffs.size();
  const std::size_t Mb = model.linear_coeffs.size();
  const cplx minus_i{0.0, -1.0};
  for (std::size_t i = 0; i < u.size(); ++i) {
    cplx e_sum{0.0, 0.0};
    if (phi != 0.0) {
      for (std::size_t m = 0; m < M; ++m) e_sum += model.coeffs[m][i] * increments[m];
      e_sum *= phi * abs_pow(std::norm(u[i]), gamma_minus_1);
    }
    for (std::size_t m = 0; m < Mb; ++m) e_sum += model.linear_coeffs[m][i] * increments[M + m];
    out[i] += minus_i * e_sum * u[i];
  }
}

}  // namespace detail

inline ComplexField stratonovich_drift(const ComplexField& u, const NoiseModel& model, const Rational& gamma,
                                       double phi) {
  require_same_grid(u.grid(), model.grid);
  ComplexField out(u.grid());
  detail::add_stratonovich_drift(u.values(), model, to_double(gamma - 1), phi, 1.0, out.values());
  return out;
}

inline ComplexField noise_term(const ComplexField& u, const NoiseModel& model, const Rational& gamma, double phi,
                               std::span<const double> increments_at_step) {
  require_same_grid(u.grid(), model.grid);
  if (increments_at_step.size() != model.modes()) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(model.modes()) + " increments, got " +
                                               std::to_string(increments_at_step.size()));
  }
  ComplexField out(u.grid());
  detail::add_noise_term(u.values(), model, to_double(gamma - 1), phi, increments_at_step, out.values());
  return out;
}

/// Exact pathwise solution of the noise-only Stratonovich dynamics with real
/// coefficients: |u(t,x)| = |u0(x)| and the phase winds by
/// -sum_m e_m(x) |u0(x)|^{gamma-1} beta_m(t).
inline ComplexField diffusion_only_exact(const ComplexField& u0, const NoiseModel& model, const Rational& gamma,
                                         const BrownianPath& path, double t) {
  require_same_grid(u0.grid(), model.grid);
  if (!model.conservative) throw Error(ErrorCode::NotConservative, "coefficients must be real-valued");
  if (!model.linear_coeffs.empty()) throw Error(ErrorCode::NotConservative, "linear part must be absent");
  if (path.modes < model.coeffs.size()) throw Error(ErrorCode::LengthMismatch, "path has too few modes");
  std::vector<double> beta(model.coeffs.size());
  for (std::size_t m = 0; m < beta.size(); ++m) beta[m] = path.value(m, t);
  const double g1 = to_double(gamma - 1);
  ComplexField out(u0.grid());
  for (std::size_t i = 0; i < u0.size(); ++i) {
    double phase = 0.0;
    for (std::size_t m = 0; m < beta.size(); ++m) phase += model.coeffs[m][i].real() * beta[m];
    phase *= abs_pow(std::norm(u0[i]), g1);
    out[i] = u0[i] * std::polar(1.0, -phase);
  }
  return out;
}

}  // namespace snls
