#pragma once

// Localisation layer: power nonlinearities, the piecewise-linear cutoff
// theta_n, the truncation factor phi_n = theta_n(Z_t) and the stopping time.

#include <cmath>
#include <limits>

#include "snls/error.hpp"
#include "snls/exponents.hpp"
#include "snls/grid.hpp"
#include "snls/noise.hpp"
#include "snls/trajectory.hpp"

namespace snls {

/// G(u) = |u|^{sigma-1} u pointwise, G(0) = 0.
inline ComplexField power_nonlinearity(const ComplexField& u, const Rational& sigma) {
  if (sigma < 1) throw Error(ErrorCode::InvalidParams, "sigma must be >= 1");
  const double s1 = to_double(sigma - 1);
  ComplexField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = abs_pow(std::norm(u[i]), s1) * u[i];
  return out;
}

/// 1 on [0, level], 2 - x/level on [level, 2 level], 0 beyond. An infinite
/// level never truncates.
inline double theta(double x, double level) {
  if (std::isinf(level)) return 1.0;
  if (x <= level) return 1.0;
  if (x >= 2.0 * level) return 0.0;
  return 2.0 - x / level;
}

struct TruncationState {
  double level = std::numeric_limits<double>::infinity();
  bool active = false;
  double current_phi = 1.0;
};

inline double evaluate_phi(const Trajectory& traj, double t, const TruncationState& trunc,
                           const ModelParams& params) {
  if (t <= traj.times.front()) return theta(0.0, trunc.level);
  return theta(z_process(traj, t, params), trunc.level);
}

/// Z components of an already accepted prefix [0, kr).
struct ZPrefix {
  double component1 = 0.0;
  double component2 = 0.0;
};

/// phi on a chained window: each Z component combines the prefix and the
/// window part as (prefix^q + window^q)^{1/q} (max for q = inf). `window`
/// carries times relative to the window start.
inline double evaluate_phi_chained(const ZPrefix& prefix, const Trajectory& window, double t_local,
                                   double level, const ModelParams& params) {
  const TimeExponents te = time_exponents(params);
  const double q = to_double(te.q);
  const double qt = te.q_tilde.to_double();
  double w1 = 0.0;
  double w2 = 0.0;
  if (t_local > window.times.front()) {
    w1 = bochner_norm(window, q, to_double(params.alpha + 1), t_local);
    w2 = bochner_norm(window, qt, to_double(2 * params.gamma), t_local);
  }
  const double z1 = std::pow(std::pow(prefix.component1, q) + std::pow(w1, q), 1.0 / q);
  const double z2 = std::isinf(qt) ? std::max(prefix.component2, w2)
                                   : std::pow(std::pow(prefix.component2, qt) + std::pow(w2, qt), 1.0 / qt);
  return theta(z1 + z2, level);
}

/// First mesh time with Z_t >= level, else T.
inline double detect_stopping_time(const Trajectory& traj, double level, double T, const ModelParams& params) {
  if (traj.times.empty()) return T;
  if (traj.has_states()) {
    ZAccumulator acc(params);
    for (std::size_t j = 0; j < traj.size() && traj.times[j] <= T; ++j) {
      if (acc.total() >= level) return traj.times[j];
      if (j + 1 < traj.size()) {
        acc.add_state(traj.states[j].values(), traj.states[j].grid().cell_volume(),
                      traj.times[j + 1] - traj.times[j]);
      }
    }
    return T;
  }
  for (std::size_t j = 0; j < traj.size() && traj.times[j] <= T; ++j) {
    if (traj.z_total(j) >= level) return traj.times[j];
  }
  return T;
}

}  // namespace snls
