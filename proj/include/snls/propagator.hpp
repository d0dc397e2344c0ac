#pragma once

// The free Schroedinger group U(t) = exp(i t Laplacian) as the spectral
// multiplier exp(-i |k|^2 t), plus the deterministic and stochastic
// convolutions assembled from it.

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <vector>

#include "snls/brownian.hpp"
#include "snls/error.hpp"
#include "snls/exponents.hpp"
#include "snls/grid.hpp"
#include "snls/trajectory.hpp"

namespace snls {

namespace detail {

// The FFTW planner is not re-entrant; execution with the new-array interface is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  FftwPlans(const Grid& g) {
    std::vector<int> dims(static_cast<std::size_t>(g.d), static_cast<int>(g.n));
    std::vector<cplx> scratch(g.size());
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(fftw_planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft(g.d, dims.data(), buf, buf, FFTW_FORWARD, flags);
    backward = fftw_plan_dft(g.d, dims.data(), buf, buf, FFTW_BACKWARD, flags);
  }
  ~FftwPlans() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  FftwPlans(const FftwPlans&) = delete;
  FftwPlans& operator=(const FftwPlans&) = delete;
};

}  // namespace detail

/// Immutable transform plan plus the |k|^2 table. Cheap to copy, safe to share
/// across threads. With `laplacian == false` every |k|^2 is zero and U(t) is
/// the identity (used to isolate the noise dynamics).
class SpectralPlan {
 public:
  explicit SpectralPlan(const Grid& grid, bool laplacian = true)
      : grid_(grid), laplacian_(laplacian), k2_(grid.size(), 0.0) {
    validate(grid);
    if (laplacian) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto idx = grid.unflatten(i);
        double s = 0.0;
        for (int a = 0; a < grid.d; ++a) {
          const double k = grid.wavenumber(idx[static_cast<std::size_t>(a)]);
          s += k * k;
        }
        k2_[i] = s;
      }
    }
    plans_ = std::make_shared<detail::FftwPlans>(grid);
  }

  const Grid& grid() const { return grid_; }
  bool laplacian() const { return laplacian_; }
  std::span<const double> wavenumber_squares() const { return k2_; }

  /// Unnormalised forward DFT, in place.
  void forward(std::span<cplx> data) const {
    fftw_execute_dft(plans_->forward, as_fftw(data), as_fftw(data));
  }
  /// Inverse DFT including the 1/N factor, in place.
  void backward(std::span<cplx> data) const {
    fftw_execute_dft(plans_->backward, as_fftw(data), as_fftw(data));
    const double inv = 1.0 / static_cast<double>(data.size());
    for (auto& z : data) z *= inv;
  }

  /// exp(-i |k|^2 t) per mode.
  std::vector<cplx> multiplier(double t) const {
    std::vector<cplx> m(k2_.size());
    for (std::size_t i = 0; i < k2_.size(); ++i) m[i] = std::polar(1.0, -k2_[i] * t);
    return m;
  }

 private:
  static fftw_complex* as_fftw(std::span<cplx> s) { return reinterpret_cast<fftw_complex*>(s.data()); }

  Grid grid_;
  bool laplacian_ = true;
  std::vector<double> k2_;
  std::shared_ptr<detail::FftwPlans> plans_;
};

inline ComplexField free_evolve(const SpectralPlan& plan, const ComplexField& f, double t) {
  require_same_grid(plan.grid(), f.grid());
  std::vector<cplx> v(f.values().begin(), f.values().end());
  plan.forward(v);
  const auto mult = plan.multiplier(t);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= mult[i];
  plan.backward(v);
  return ComplexField(f.grid(), std::move(v));
}

/// Left-endpoint Duhamel sum  sum_{t_l < t} U(t - t_l) f(t_l) dt_l, where
/// dt_l runs to the next sample (or to t for the last one).
inline ComplexField duhamel_convolution(const SpectralPlan& plan, const Trajectory& forcing, double t) {
  if (forcing.times.empty() || !forcing.has_states()) {
    throw Error(ErrorCode::EmptyTrajectory, "forcing has no samples");
  }
  const Grid& g = plan.grid();
  std::vector<cplx> acc(g.size(), cplx{0.0, 0.0});
  std::vector<cplx> buf(g.size());
  for (std::size_t l = 0; l < forcing.size() && forcing.times[l] < t; ++l) {
    require_same_grid(g, forcing.states[l].grid());
    const double next = (l + 1 < forcing.size()) ? std::min(forcing.times[l + 1], t) : t;
    const double dt = next - forcing.times[l];
    if (dt <= 0.0) continue;
    const auto src = forcing.states[l].values();
    std::copy(src.begin(), src.end(), buf.begin());
    plan.forward(buf);
    const auto mult = plan.multiplier(t - forcing.times[l]);
    for (std::size_t i = 0; i < buf.size(); ++i) acc[i] += mult[i] * buf[i] * dt;
  }
  plan.backward(acc);
  return ComplexField(g, std::move(acc));
}

/// Integrand of a stochastic convolution: at each mesh time t_l the fields
/// Phi_m(t_l) for every noise mode m.
struct ModeTrajectory {
  std::vector<double> times;
  std::vector<std::vector<ComplexField>> fields;  // fields[l][m]
};

/// Ito left-point sum  sum_m sum_{t_l < t} U(t - t_l) Phi_m(t_l) dbeta_m(t_l).
inline ComplexField stochastic_convolution(const SpectralPlan& plan, const ModeTrajectory& integrand,
                                           const BrownianPath& increments, double t) {
  if (integrand.times.size() != integrand.fields.size()) {
    throw Error(ErrorCode::LengthMismatch, "integrand times/fields size");
  }
  if (integrand.times.size() > increments.mesh.size()) {
    throw Error(ErrorCode::MeshMismatch, "integrand extends beyond the Brownian mesh");
  }
  for (std::size_t l = 0; l < integrand.times.size(); ++l) {
    if (integrand.times[l] != increments.mesh[l]) {
      throw Error(ErrorCode::MeshMismatch, "integrand and increments use different meshes");
    }
  }
  const Grid& g = plan.grid();
  std::vector<cplx> acc(g.size(), cplx{0.0, 0.0});
  std::vector<cplx> buf(g.size());
  for (std::size_t l = 0; l < integrand.times.size() && l < increments.steps() && integrand.times[l] < t; ++l) {
    const auto& modes = integrand.fields[l];
    if (modes.size() > increments.modes) throw Error(ErrorCode::LengthMismatch, "more modes than increments");
    std::fill(buf.begin(), buf.end(), cplx{0.0, 0.0});
    for (std::size_t m = 0; m < modes.size(); ++m) {
      require_same_grid(g, modes[m].grid());
      const double db = increments.increment(m, l);
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += modes[m][i] * db;
    }
    plan.forward(buf);
    const auto mult = plan.multiplier(t - integrand.times[l]);
    for (std::size_t i = 0; i < buf.size(); ++i) acc[i] += mult[i] * buf[i];
  }
  plan.backward(acc);
  return ComplexField(g, std::move(acc));
}

/// ||U(.) x||_{L^q(0,T;L^p)} / ||x||_2 on a uniform mesh of `time_steps` intervals.
inline double strichartz_ratio(const SpectralPlan& plan, const ComplexField& x, const StrichartzPair& pair,
                               double T, std::size_t time_steps) {
  require_same_grid(plan.grid(), x.grid());
  const double norm0 = lp_norm(x, 2.0);
  if (norm0 == 0.0) return 0.0;
  const double p = to_double(pair.p);
  const double q = to_double(pair.q);
  std::vector<cplx> hat(x.values().begin(), x.values().end());
  plan.forward(hat);
  std::vector<double> times(time_steps + 1);
  std::vector<double> norms(time_steps + 1);
  std::vector<cplx> buf(hat.size());
  const double cell = x.grid().cell_volume();
  for (std::size_t j = 0; j <= time_steps; ++j) {
    times[j] = T * static_cast<double>(j) / static_cast<double>(time_steps);
    const auto mult = plan.multiplier(times[j]);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = hat[i] * mult[i];
    plan.backward(buf);
    norms[j] = lp_norm(buf, cell, p);
  }
  return bochner_from_norms(times, norms, q, T) / norm0;
}

/// A smooth random unit-mass field: a superposition of four Gaussian packets
/// whose physical parameters do not depend on the resolution.
inline ComplexField random_packet_field(const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Packet {
    std::array<double, 3> center;
    std::array<double, 3> momentum;
    double width;
    cplx weight;
  };
  std::vector<Packet> packets(4);
  for (auto& pk : packets) {
    for (int a = 0; a < 3; ++a) {
      pk.center[static_cast<std::size_t>(a)] = (unit(rng) - 0.5) * 0.125 * grid.L;
      pk.momentum[static_cast<std::size_t>(a)] = (unit(rng) - 0.5) * 4.0;
    }
    pk.width = 0.5 + 1.5 * unit(rng);
    pk.weight = std::polar(0.25 + unit(rng), 2.0 * std::numbers::pi * unit(rng));
  }
  ComplexField f = ComplexField::sample(grid, [&](const std::array<double, 3>& x) {
    cplx s{0.0, 0.0};
    for (const auto& pk : packets) {
      double r2 = 0.0;
      double phase = 0.0;
      for (int a = 0; a < grid.d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const double dx = x[ua] - pk.center[ua];
        r2 += dx * dx;
        phase += pk.momentum[ua] * x[ua];
      }
      s += pk.weight * std::exp(-0.5 * r2 / (pk.width * pk.width)) * std::polar(1.0, phase);
    }
    return s;
  });
  const double nrm = lp_norm(f, 2.0);
  for (auto& z : f.values()) z /= nrm;
  return f;
}

/// Empirical lower bound on the homogeneous Strichartz constant: the running
/// maximum of ||U(.) x||_{L^q L^p} over `samples` random unit-mass fields.
inline double estimate_strichartz_constant(const SpectralPlan& plan, std::size_t samples,
                                           const StrichartzPair& pair, double T, std::uint64_t seed,
                                           std::size_t time_steps = 64) {
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const ComplexField x = random_packet_field(plan.grid(), detail::splitmix64(seed + s));
    best = std::max(best, strichartz_ratio(plan, x, pair, T, time_steps));
  }
  return best;
}

}  // namespace snls
