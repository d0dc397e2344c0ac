#pragma once

// Time integrators for
//   du = (i Lap u - i lambda |u|^{alpha-1} u - 1/2 sum |e_m|^2 |u|^{2(gamma-1)} u - 1/2 sum |b_m|^2 u) dt
//        - i sum (e_m |u|^{gamma-1} u + b_m u) dbeta_m
//
// picard_solve  : truncated mild formulation solved by fixed-point iteration on
//                 adaptively halved windows, chained with the accumulated Z_t.
// splitstep_solve: Strang splitting with exact phase sub-steps; untruncated.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "snls/brownian.hpp"
#include "snls/dynamics.hpp"
#include "snls/error.hpp"
#include "snls/exponents.hpp"
#include "snls/grid.hpp"
#include "snls/noise.hpp"
#include "snls/propagator.hpp"
#include "snls/trajectory.hpp"

namespace snls {

struct InitialCondition {
  enum class Kind { gaussian, plane_wave, file };
  Kind kind = Kind::gaussian;
  double amplitude = 1.0;
  double width = 1.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  std::array<double, 3> momentum{0.0, 0.0, 0.0};
  std::array<int, 3> mode{0, 0, 0};
  std::string path;

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

/// gaussian: A exp(-|x-c|^2 / (2 w^2)) exp(i k.x); plane_wave: A exp(i 2 pi m.x / L).
inline ComplexField realize(const InitialCondition& ic, const Grid& grid) {
  switch (ic.kind) {
    case InitialCondition::Kind::gaussian:
      if (!(ic.width > 0)) throw Error(ErrorCode::InvalidConfig, "initial width must be positive");
      return ComplexField::sample(grid, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        double phase = 0.0;
        for (int a = 0; a < grid.d; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          r2 += (x[ua] - ic.center[ua]) * (x[ua] - ic.center[ua]);
          phase += ic.momentum[ua] * x[ua];
        }
        return ic.amplitude * std::exp(-0.5 * r2 / (ic.width * ic.width)) * std::polar(1.0, phase);
      });
    case InitialCondition::Kind::plane_wave:
      return ComplexField::sample(grid, [&](const std::array<double, 3>& x) {
        double phase = 0.0;
        for (int a = 0; a < grid.d; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          phase += 2.0 * std::numbers::pi * ic.mode[ua] * x[ua] / grid.L;
        }
        return ic.amplitude * std::polar(1.0, phase);
      });
    case InitialCondition::Kind::file: {
      std::ifstream in(ic.path, std::ios::binary);
      if (!in) throw Error(ErrorCode::Io, "cannot open initial condition " + ic.path);
      ComplexField f = read_field(in);
      require_same_grid(f.grid(), grid);
      return f;
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown initial condition kind");
}

enum class Scheme { picard, splitstep };

inline std::string_view to_string(Scheme s) { return s == Scheme::picard ? "picard" : "splitstep"; }

struct SimConfig {
  ModelParams params;
  Grid grid;
  std::vector<CoefficientSpec> noise;         // e_m
  std::vector<CoefficientSpec> linear_noise;  // b_m
  double T = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::picard;
  double truncation_level = std::numeric_limits<double>::infinity();
  double picard_tol = 1e-10;
  int picard_max_iters = 100;
  double contraction_target = 0.5;
  double initial_window = 0.0;  // 0 means the whole horizon
  std::uint64_t seed = 0;
  InitialCondition initial_condition;
  bool laplacian = true;     // false zeroes every wavenumber
  bool nonlinearity = true;  // false drops the lambda term
  bool store_states = true;

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline void validate(const SimConfig& c) {
  validate(c.params);
  validate(c.grid);
  if (c.grid.d != c.params.d) throw Error(ErrorCode::InvalidConfig, "grid and model dimensions differ");
  if (!(c.T > 0) || !(c.dt > 0) || !std::isfinite(c.T)) throw Error(ErrorCode::InvalidConfig, "need T > 0, dt > 0");
  const double ratio = c.T / c.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1) {
    throw Error(ErrorCode::InvalidConfig, "dt must divide T");
  }
  if (!(c.truncation_level > 0)) throw Error(ErrorCode::InvalidConfig, "truncation level must be positive");
  if (!(c.picard_tol > 0)) throw Error(ErrorCode::InvalidConfig, "picard_tol must be positive");
  if (c.picard_max_iters < 1) throw Error(ErrorCode::InvalidConfig, "picard_max_iters must be >= 1");
  if (!(c.contraction_target > 0 && c.contraction_target < 1)) {
    throw Error(ErrorCode::InvalidConfig, "contraction_target must lie in (0, 1)");
  }
  if (c.initial_window < 0) throw Error(ErrorCode::InvalidConfig, "initial_window must be >= 0");
}

struct WindowRecord {
  double start = 0.0;
  double length = 0.0;
  int iterations = 0;
  double contraction_ratio = 0.0;  // largest successive-difference ratio seen
};

struct SolveReport {
  Scheme scheme = Scheme::picard;
  Trajectory trajectory;
  double tau = 0.0;
  std::vector<WindowRecord> windows;
  bool truncation_ever_active = false;
  double max_outer_mass_fraction = 0.0;
  bool critical = false;
  ComplexField final_state;
};

namespace detail {

struct SolverContext {
  SimConfig config;
  SpectralPlan plan;
  NoiseModel model;
  std::size_t steps;
  double cell;
  double alpha_minus_1;
  double gamma_minus_1;
  double lambda;  // 0 when the nonlinearity is switched off
  std::vector<char> outer_mask;

  explicit SolverContext(const SimConfig& c)
      : config(c),
        plan(c.grid, c.laplacian),
        model(make_noise_model(c.noise, c.linear_noise, c.grid)),
        steps(c.steps()),
        cell(c.grid.cell_volume()),
        alpha_minus_1(to_double(c.params.alpha - 1)),
        gamma_minus_1(to_double(c.params.gamma - 1)),
        lambda(c.nonlinearity ? static_cast<double>(c.params.lambda) : 0.0),
        outer_mask(c.grid.size(), 0) {
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      const auto x = c.grid.position(i);
      for (int a = 0; a < c.grid.d; ++a) {
        const double xa = x[static_cast<std::size_t>(a)];
        if (xa < -0.25 * c.grid.L || xa >= 0.25 * c.grid.L) outer_mask[i] = 1;
      }
    }
  }

  double outer_fraction(std::span<const cplx> u) const {
    double total = 0.0;
    double outer = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double m = std::norm(u[i]);
      total += m;
      if (outer_mask[i]) outer += m;
    }
    return total > 0.0 ? outer / total : 0.0;
  }

  void check_path(const BrownianPath& path) const {
    if (path.steps() != steps) {
      throw Error(ErrorCode::MeshMismatch, "path has " + std::to_string(path.steps()) + " steps, config needs " +
                                               std::to_string(steps));
    }
    if (path.modes != model.modes()) {
      throw Error(ErrorCode::LengthMismatch, "path has " + std::to_string(path.modes) + " modes, noise has " +
                                                 std::to_string(model.modes()));
    }
    for (std::size_t l = 0; l <= steps; ++l) {
      if (std::abs(path.mesh[l] - static_cast<double>(l) * config.dt) > 1e-9 * config.T) {
        throw Error(ErrorCode::MeshMismatch, "path mesh is not the uniform solver mesh");
      }
    }
  }
};

/// Appends one sample to the trajectory; `acc` holds Z over [0, t).
inline void record_sample(SolveReport& report, const SolverContext& ctx, double t, std::span<const cplx> u,
                          const ZAccumulator& acc, bool keep_state) {
  Trajectory& tr = report.trajectory;
  tr.times.push_back(t);
  tr.running_mass.push_back(lp_norm(u, ctx.cell, 2.0));
  tr.running_z[0].push_back(acc.component1());
  tr.running_z[1].push_back(acc.component2());
  if (keep_state) tr.states.emplace_back(ctx.config.grid, std::vector<cplx>(u.begin(), u.end()));
}

inline double first_crossing(const Trajectory& tr, double level, double T) {
  for (std::size_t j = 0; j < tr.size(); ++j) {
    if (tr.z_total(j) >= level) return tr.times[j];
  }
  return T;
}

}  // namespace detail

inline SolveReport picard_solve(const SimConfig& config, const BrownianPath& path) {
  validate(config);
  const detail::SolverContext ctx(config);
  ctx.check_path(path);
  const std::size_t N = ctx.steps;
  const std::size_t npts = config.grid.size();
  const double dt = config.dt;
  const double level = config.truncation_level;
  const ModelParams& params = config.params;
  const auto step_mult = ctx.plan.multiplier(dt);

  // Y-norm used in the E-norm of iterate differences.
  const TimeExponents te = time_exponents(params);
  const bool alpha_branch = params.y_uses_alpha_branch();
  const double y_q = alpha_branch ? to_double(te.q) : te.q_tilde.to_double();
  const double y_p = alpha_branch ? to_double(params.alpha + 1) : to_double(2 * params.gamma);

  SolveReport report;
  report.scheme = Scheme::picard;
  report.critical = params.critical();

  ComplexField u0 = realize(config.initial_condition, config.grid);
  std::vector<cplx> u_start(u0.values().begin(), u0.values().end());
  ZAccumulator prefix(params);
  std::vector<double> incr(ctx.model.modes());

  std::size_t window_steps = N;
  if (config.initial_window > 0) {
    window_steps = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(config.initial_window / dt)), 1, N);
  }

  using Block = std::vector<std::vector<cplx>>;
  Block prev;
  Block next;
  std::vector<cplx> hat(npts);
  std::vector<cplx> force(npts);
  const cplx minus_i{0.0, -1.0};

  // E-norm of a - b over one window, plus E-norm of a alone.
  auto e_norms = [&](const Block& a, const Block& b, std::size_t m) {
    double sup_diff = 0.0;
    double sup_a = 0.0;
    double y_diff = 0.0;
    double y_a = 0.0;
    std::vector<cplx> d(npts);
    for (std::size_t j = 0; j <= m; ++j) {
      for (std::size_t i = 0; i < npts; ++i) d[i] = a[j][i] - b[j][i];
      const double d2 = lp_norm(d, ctx.cell, 2.0);
      const double a2 = lp_norm(a[j], ctx.cell, 2.0);
      sup_diff = std::max(sup_diff, d2);
      sup_a = std::max(sup_a, a2);
      if (j < m) {
        const double dy = lp_norm(d, ctx.cell, y_p);
        const double ay = lp_norm(a[j], ctx.cell, y_p);
        if (dy > 0) y_diff += std::pow(dy, y_q) * dt;
        if (ay > 0) y_a += std::pow(ay, y_q) * dt;
      }
    }
    const double yd = y_diff > 0 ? std::pow(y_diff, 1.0 / y_q) : 0.0;
    const double ya = y_a > 0 ? std::pow(y_a, 1.0 / y_q) : 0.0;
    return std::pair{sup_diff + yd, sup_a + ya};
  };

  std::size_t a = 0;
  while (a < N) {
    const std::size_t m = std::min(window_steps, N - a);
    prev.assign(m + 1, std::vector<cplx>(npts));
    next.assign(m + 1, std::vector<cplx>(npts));

    // Zeroth iterate: free evolution of the window's initial datum.
    prev[0] = u_start;
    std::copy(u_start.begin(), u_start.end(), hat.begin());
    ctx.plan.forward(hat);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < npts; ++i) hat[i] *= step_mult[i];
      prev[j + 1] = hat;
      ctx.plan.backward(prev[j + 1]);
    }

    bool converged = false;
    bool contraction_failed = false;
    int iterations = 0;
    double prev_diff = -1.0;
    double max_ratio = 0.0;
    for (int k = 1; k <= config.picard_max_iters; ++k) {
      next[0] = u_start;
      std::copy(u_start.begin(), u_start.end(), hat.begin());
      ctx.plan.forward(hat);
      ZAccumulator acc = prefix;
      for (std::size_t j = 0; j < m; ++j) {
        const std::vector<cplx>& v = prev[j];
        const double phi = theta(acc.total(), level);
        std::fill(force.begin(), force.end(), cplx{0.0, 0.0});
        if (ctx.lambda != 0.0 && phi != 0.0) {
          const cplx c = minus_i * (ctx.lambda * phi * dt);
          for (std::size_t i = 0; i < npts; ++i) force[i] += c * abs_pow(std::norm(v[i]), ctx.alpha_minus_1) * v[i];
        }
        if (!ctx.model.empty()) {
          for (std::size_t mm = 0; mm < incr.size(); ++mm) incr[mm] = path.increment(mm, a + j);
          detail::add_stratonovich_drift(v, ctx.model, ctx.gamma_minus_1, phi, dt, force);
          detail::add_noise_term(v, ctx.model, ctx.gamma_minus_1, phi, incr, force);
        }
        acc.add_state(v, ctx.cell, dt);
        ctx.plan.forward(force);
        for (std::size_t i = 0; i < npts; ++i) hat[i] = (hat[i] + force[i]) * step_mult[i];
        next[j + 1] = hat;
        ctx.plan.backward(next[j + 1]);
      }
      iterations = k;
      const auto [diff, scale] = e_norms(next, prev, m);
      if (k >= 2 && prev_diff > 1e-13 * scale) {
        const double ratio = diff / prev_diff;
        max_ratio = std::max(max_ratio, ratio);
        if (ratio > config.contraction_target) {
          contraction_failed = true;
          break;
        }
      }
      std::swap(prev, next);
      if (diff <= config.picard_tol * scale || diff == 0.0) {
        converged = true;
        break;
      }
      prev_diff = diff;
    }

    if (contraction_failed) {
      if (m == 1) {
        throw Error(ErrorCode::NoContraction, "no contraction even on a single step at t = " +
                                                  std::to_string(static_cast<double>(a) * dt) +
                                                  " (ratio " + std::to_string(max_ratio) + ")");
      }
      window_steps = std::max<std::size_t>(1, m / 2);
      continue;
    }
    if (!converged) {
      throw Error(ErrorCode::MaxItersExceeded, "Picard iteration did not reach tolerance within " +
                                                   std::to_string(config.picard_max_iters) + " iterations at t = " +
                                                   std::to_string(static_cast<double>(a) * dt));
    }

    // Accept: prev now holds the converged iterate.
    for (std::size_t j = 0; j < m; ++j) {
      const std::vector<cplx>& w = prev[j];
      if (theta(prefix.total(), level) < 1.0) report.truncation_ever_active = true;
      detail::record_sample(report, ctx, path.mesh[a + j], w, prefix, config.store_states);
      prefix.add_state(w, ctx.cell, dt);
    }
    if (!all_finite(prev[m])) throw Error(ErrorCode::NonFinite, "solution became non-finite");
    report.max_outer_mass_fraction = std::max(report.max_outer_mass_fraction, ctx.outer_fraction(prev[m]));
    report.windows.push_back({static_cast<double>(a) * dt, static_cast<double>(m) * dt, iterations, max_ratio});
    u_start = prev[m];
    a += m;
  }
  detail::record_sample(report, ctx, path.mesh[N], u_start, prefix, config.store_states);
  report.final_state = ComplexField(config.grid, u_start);
  report.tau = detail::first_crossing(report.trajectory, level, config.T);
  return report;
}

inline SolveReport splitstep_solve(const SimConfig& config, const BrownianPath& path) {
  validate(config);
  const detail::SolverContext ctx(config);
  ctx.check_path(path);
  const std::size_t N = ctx.steps;
  const std::size_t npts = config.grid.size();
  const double dt = config.dt;
  const auto half = ctx.plan.multiplier(0.5 * dt);
  const NoiseModel& model = ctx.model;
  const std::size_t M = model.coeffs.size();
  const std::size_t Mb = model.linear_coeffs.size();

  SolveReport report;
  report.scheme = Scheme::splitstep;
  report.critical = config.params.critical();

  ComplexField u0 = realize(config.initial_condition, config.grid);
  std::vector<cplx> u(u0.values().begin(), u0.values().end());
  std::vector<cplx> scratch(npts);
  std::vector<double> incr(model.modes());
  ZAccumulator acc(config.params);

  auto half_linear = [&]() {
    if (!config.laplacian) return;
    ctx.plan.forward(u);
    for (std::size_t i = 0; i < npts; ++i) u[i] *= half[i];
    ctx.plan.backward(u);
  };

  for (std::size_t l = 0; l < N; ++l) {
    detail::record_sample(report, ctx, path.mesh[l], u, acc, config.store_states);
    acc.add_state(u, ctx.cell, dt);

    half_linear();
    if (ctx.lambda != 0.0) {
      for (std::size_t i = 0; i < npts; ++i) {
        u[i] *= std::polar(1.0, -ctx.lambda * abs_pow(std::norm(u[i]), ctx.alpha_minus_1) * dt);
      }
    }
    if (!model.empty()) {
      for (std::size_t mm = 0; mm < incr.size(); ++mm) incr[mm] = path.increment(mm, l);
      if (model.phase_exact()) {
        for (std::size_t i = 0; i < npts; ++i) {
          double e_sum = 0.0;
          for (std::size_t m = 0; m < M; ++m) e_sum += model.coeffs[m][i].real() * incr[m];
          double b_sum = 0.0;
          for (std::size_t m = 0; m < Mb; ++m) b_sum += model.linear_coeffs[m][i].real() * incr[M + m];
          const double phase = e_sum * abs_pow(std::norm(u[i]), ctx.gamma_minus_1) + b_sum;
          u[i] *= std::polar(1.0, -phase);
        }
      } else {
        // Euler-Maruyama on the Ito form for complex coefficients.
        std::copy(u.begin(), u.end(), scratch.begin());
        detail::add_stratonovich_drift(scratch, model, ctx.gamma_minus_1, 1.0, dt, u);
        detail::add_noise_term(scratch, model, ctx.gamma_minus_1, 1.0, incr, u);
      }
    }
    half_linear();
    if (!all_finite(u)) throw Error(ErrorCode::NonFinite, "solution became non-finite");
    report.max_outer_mass_fraction = std::max(report.max_outer_mass_fraction, ctx.outer_fraction(u));
  }
  detail::record_sample(report, ctx, path.mesh[N], u, acc, config.store_states);
  report.final_state = ComplexField(config.grid, u);
  report.windows.push_back({0.0, config.T, 1, 0.0});
  report.tau = detail::first_crossing(report.trajectory, config.truncation_level, config.T);
  return report;
}

inline SolveReport solve(const SimConfig& config, const BrownianPath& path) {
  return config.scheme == Scheme::picard ? picard_solve(config, path) : splitstep_solve(config, path);
}

/// The Brownian path a config expects: uniform mesh, one mode per coefficient.
inline BrownianPath path_for(const SimConfig& config, std::uint64_t seed, std::uint64_t path_index) {
  return sample_brownian_path(uniform_mesh(config.T, config.steps()), config.noise.size() + config.linear_noise.size(),
                              seed, path_index);
}

struct CoincidenceResult {
  double discrepancy = 0.0;  // max relative L^2 gap over mesh times <= tau
  double tau = 0.0;          // stopping time of the lower level
};

/// Solves at two truncation levels on the same path and compares them up to
/// the lower level's stopping time.
inline CoincidenceResult path_coincidence_check(SimConfig config, const BrownianPath& path, double level_low,
                                                double level_high) {
  if (!(level_low < level_high)) throw Error(ErrorCode::InvalidParams, "levels must increase");
  config.store_states = true;
  config.truncation_level = level_low;
  const SolveReport low = picard_solve(config, path);
  config.truncation_level = level_high;
  const SolveReport high = picard_solve(config, path);
  CoincidenceResult r;
  r.tau = low.tau;
  const auto& tl = low.trajectory;
  const auto& th = high.trajectory;
  for (std::size_t j = 0; j < tl.size() && j < th.size() && tl.times[j] <= r.tau; ++j) {
    const double ref = std::max(lp_norm(th.states[j], 2.0), 1e-300);
    r.discrepancy = std::max(r.discrepancy, l2_distance(tl.states[j], th.states[j]) / ref);
  }
  return r;
}

}  // namespace snls
