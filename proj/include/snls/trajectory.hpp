#pragma once

// Time-sampled paths t -> u(t), Bochner norms L^q(0,t; L^p) with
// left-endpoint quadrature, and the running norm Z_t.

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "snls/error.hpp"
#include "snls/exponents.hpp"
#include "snls/grid.hpp"

namespace snls {

struct Trajectory {
  std::vector<double> times;
  /// Empty when the producer did not retain states (ensemble runs).
  std::vector<ComplexField> states;
  /// ||u(t_j)||_2.
  std::vector<double> running_mass;
  /// Z components accumulated over [0, t_j): L^q L^{alpha+1} and L^{q~} L^{2 gamma}.
  std::array<std::vector<double>, 2> running_z;

  std::size_t size() const { return times.size(); }
  bool has_states() const { return !states.empty() && states.size() == times.size(); }
  double z_total(std::size_t j) const { return running_z[0][j] + running_z[1][j]; }
};

/// (sum_j a_j^q dt_j)^{1/q} over [0, t_end) with left-endpoint weights, where
/// a_j is the spatial norm at times[j]. q = inf gives the max over the
/// sample points whose interval meets [0, t_end).
inline double bochner_from_norms(std::span<const double> times, std::span<const double> norms,
                                 double q, double t_end) {
  if (times.empty()) throw Error(ErrorCode::EmptyTrajectory, "no samples");
  double acc = 0.0;
  for (std::size_t j = 0; j < times.size() && times[j] < t_end; ++j) {
    const double next = (j + 1 < times.size()) ? std::min(times[j + 1], t_end) : t_end;
    const double dt = next - times[j];
    if (dt <= 0.0) continue;
    if (std::isinf(q)) {
      acc = std::max(acc, norms[j]);
    } else if (norms[j] > 0.0) {
      acc += std::pow(norms[j], q) * dt;
    }
  }
  if (std::isinf(q)) return acc;
  return acc > 0.0 ? std::pow(acc, 1.0 / q) : 0.0;
}

inline double bochner_norm(const Trajectory& traj, double q, double p, double t_end) {
  if (traj.times.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no samples");
  if (!traj.has_states()) throw Error(ErrorCode::EmptyTrajectory, "trajectory carries no states");
  if (t_end > traj.times.back() + 1e-12 * std::max(1.0, std::abs(traj.times.back()))) {
    throw Error(ErrorCode::OutOfRange, "t_end beyond the last sample time");
  }
  std::vector<double> norms(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) norms[j] = lp_norm(traj.states[j], p);
  return bochner_from_norms(traj.times, norms, q, t_end);
}

/// Incremental left-endpoint accumulator for the two components of Z_t.
/// Continuing the sums across windows is exactly the chained cutoff
/// ((prefix^q + window^q)^{1/q} per component).
class ZAccumulator {
 public:
  ZAccumulator() = default;
  explicit ZAccumulator(const ModelParams& params) {
    const TimeExponents te = time_exponents(params);
    q_ = to_double(te.q);
    q_tilde_ = te.q_tilde.to_double();
    p_alpha_ = to_double(params.alpha + 1);
    p_gamma_ = to_double(2 * params.gamma);
  }

  double q() const { return q_; }
  double q_tilde() const { return q_tilde_; }
  double p_alpha() const { return p_alpha_; }
  double p_gamma() const { return p_gamma_; }

  void add_norms(double norm_alpha, double norm_gamma, double dt) {
    if (norm_alpha > 0.0) s1_ += std::pow(norm_alpha, q_) * dt;
    if (std::isinf(q_tilde_)) {
      s2_ = std::max(s2_, norm_gamma);
    } else if (norm_gamma > 0.0) {
      s2_ += std::pow(norm_gamma, q_tilde_) * dt;
    }
  }

  void add_state(std::span<const cplx> u, double cell_volume, double dt) {
    add_norms(lp_norm(u, cell_volume, p_alpha_), lp_norm(u, cell_volume, p_gamma_), dt);
  }

  double component1() const { return s1_ > 0.0 ? std::pow(s1_, 1.0 / q_) : 0.0; }
  double component2() const {
    if (std::isinf(q_tilde_)) return s2_;
    return s2_ > 0.0 ? std::pow(s2_, 1.0 / q_tilde_) : 0.0;
  }
  double total() const { return component1() + component2(); }

 private:
  double q_ = 2.0;
  double q_tilde_ = 2.0;
  double p_alpha_ = 2.0;
  double p_gamma_ = 2.0;
  double s1_ = 0.0;
  double s2_ = 0.0;
};

/// Z_t = ||u||_{L^q(0,t;L^{alpha+1})} + ||u||_{L^{q~}(0,t;L^{2 gamma})}.
inline double z_process(const Trajectory& traj, double t, const ModelParams& params) {
  const TimeExponents te = time_exponents(params);
  return bochner_norm(traj, to_double(te.q), to_double(params.alpha + 1), t) +
         bochner_norm(traj, te.q_tilde.to_double(), to_double(2 * params.gamma), t);
}

/// Builds a trajectory from sampled states, filling the running norms.
inline Trajectory build_trajectory(std::vector<double> times, std::vector<ComplexField> states,
                                   const ModelParams& params) {
  if (times.size() != states.size()) throw Error(ErrorCode::LengthMismatch, "times/states size");
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) throw Error(ErrorCode::MeshMismatch, "times must increase");
  }
  Trajectory traj;
  traj.times = std::move(times);
  traj.states = std::move(states);
  ZAccumulator acc(params);
  for (std::size_t j = 0; j < traj.size(); ++j) {
    if (j > 0) require_same_grid(traj.states[j].grid(), traj.states[0].grid());
    traj.running_mass.push_back(lp_norm(traj.states[j], 2.0));
    traj.running_z[0].push_back(acc.component1());
    traj.running_z[1].push_back(acc.component2());
    if (j + 1 < traj.size()) {
      acc.add_state(traj.states[j].values(), traj.states[j].grid().cell_volume(),
                    traj.times[j + 1] - traj.times[j]);
    }
  }
  return traj;
}

}  // namespace snls
