#pragma once

// Counter-addressed Brownian increments. Every increment is a pure function of
// (seed, path, mode, step), so paths are reproducible under any schedule.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "snls/error.hpp"

namespace snls {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t path, std::uint64_t mode,
                                     std::uint64_t step, std::uint64_t lane) {
  std::uint64_t h = splitmix64(seed ^ 0x5bd1e9955bd1e995ULL);
  h = splitmix64(h ^ path);
  h = splitmix64(h ^ (mode * 0xd6e8feb86659fd93ULL));
  h = splitmix64(h ^ step);
  return splitmix64(h ^ (lane + 0x2545f4914f6cdd1dULL));
}

/// Uniform in (0, 1), never 0.
inline double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Standard normal variate addressed by counters (Box-Muller on two hashed lanes).
inline double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t mode,
                             std::uint64_t step) {
  const double u1 = detail::to_open_unit(detail::counter_hash(seed, path, mode, step, 0));
  const double u2 = detail::to_open_unit(detail::counter_hash(seed, path, mode, step, 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct BrownianPath {
  std::vector<double> mesh;
  std::size_t modes = 0;
  /// increments[m * steps() + l] ~ N(0, mesh[l+1] - mesh[l]).
  std::vector<double> increments;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;

  std::size_t steps() const { return mesh.empty() ? 0 : mesh.size() - 1; }
  double increment(std::size_t m, std::size_t l) const { return increments[m * steps() + l]; }
  double& increment(std::size_t m, std::size_t l) { return increments[m * steps() + l]; }
  /// beta_m(t) = sum of increments over mesh points strictly before t.
  double value(std::size_t m, double t) const {
    double b = 0.0;
    for (std::size_t l = 0; l < steps() && mesh[l] < t; ++l) b += increment(m, l);
    return b;
  }
  /// All mode increments at step l.
  std::vector<double> increments_at(std::size_t l) const {
    std::vector<double> out(modes);
    for (std::size_t m = 0; m < modes; ++m) out[m] = increment(m, l);
    return out;
  }
};

inline std::vector<double> uniform_mesh(double T, std::size_t steps) {
  std::vector<double> mesh(steps + 1);
  for (std::size_t l = 0; l <= steps; ++l) mesh[l] = T * static_cast<double>(l) / static_cast<double>(steps);
  return mesh;
}

inline BrownianPath sample_brownian_path(std::vector<double> mesh, std::size_t modes,
                                         std::uint64_t seed, std::uint64_t path_index) {
  for (std::size_t l = 1; l < mesh.size(); ++l) {
    if (!(mesh[l] > mesh[l - 1])) throw Error(ErrorCode::MeshMismatch, "mesh must be strictly increasing");
  }
  BrownianPath path;
  path.mesh = std::move(mesh);
  path.modes = modes;
  path.seed = seed;
  path.path_index = path_index;
  const std::size_t steps = path.steps();
  path.increments.resize(modes * steps);
  for (std::size_t m = 0; m < modes; ++m) {
    for (std::size_t l = 0; l < steps; ++l) {
      const double dt = path.mesh[l + 1] - path.mesh[l];
      path.increment(m, l) = std::sqrt(dt) * counter_normal(seed, path_index, m, l);
    }
  }
  return path;
}

/// Sums consecutive blocks of `factor` increments: the same Brownian path seen
/// on a mesh `factor` times coarser.
inline BrownianPath coarsen(const BrownianPath& fine, std::size_t factor) {
  if (factor == 0 || fine.steps() % factor != 0) {
    throw Error(ErrorCode::MeshMismatch, "coarsening factor must divide the step count");
  }
  BrownianPath coarse;
  coarse.modes = fine.modes;
  coarse.seed = fine.seed;
  coarse.path_index = fine.path_index;
  const std::size_t steps = fine.steps() / factor;
  coarse.mesh.resize(steps + 1);
  for (std::size_t l = 0; l <= steps; ++l) coarse.mesh[l] = fine.mesh[l * factor];
  coarse.increments.assign(coarse.modes * steps, 0.0);
  for (std::size_t m = 0; m < fine.modes; ++m) {
    for (std::size_t l = 0; l < steps; ++l) {
      double s = 0.0;
      for (std::size_t k = 0; k < factor; ++k) s += fine.increment(m, l * factor + k);
      coarse.increment(m, l) = s;
    }
  }
  return coarse;
}

inline BrownianPath negated(BrownianPath path) {
  for (auto& x : path.increments) x = -x;
  return path;
}

}  // namespace snls
