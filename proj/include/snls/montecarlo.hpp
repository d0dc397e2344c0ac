#pragma once

// Path ensembles: independent Brownian paths addressed by path index, solved
// in parallel, reduced in path order so results never depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "snls/error.hpp"
#include "snls/solver.hpp"

namespace snls {

/// Worker count from SNLS_THREADS (0 or unset = hardware concurrency).
inline unsigned worker_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("SNLS_THREADS")) {
    try {
      n = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      n = 0;
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned threads = worker_count()) {
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
}

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline MeanEstimate estimate_mean(const std::vector<double>& xs) {
  MeanEstimate e;
  if (xs.empty()) return e;
  double s = 0.0;
  for (double x : xs) s += x;
  e.mean = s / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double v = 0.0;
    for (double x : xs) v += (x - e.mean) * (x - e.mean);
    v /= static_cast<double>(xs.size() - 1);
    e.stderr_ = std::sqrt(v / static_cast<double>(xs.size()));
  }
  return e;
}

struct PathRecord {
  std::uint64_t path_index = 0;
  bool ok = false;
  std::string failure;  // error code name when !ok
  double tau = std::numeric_limits<double>::quiet_NaN();
  double yt_norm = 0.0;   // ||u||_{L^q(0,T;L^{alpha+1})}
  double z_T = 0.0;
  double sup_mass = 0.0;  // sup_t ||u(t)||_2
  double initial_mass = 0.0;
  std::size_t windows = 0;
  bool truncation_ever_active = false;
};

struct EnsembleSummary {
  std::size_t n_paths = 0;
  std::size_t n_failed = 0;
  std::uint64_t seed = 0;
  double level = std::numeric_limits<double>::infinity();
  double T = 0.0;
  MeanEstimate mean_yt_norm;
  std::map<int, MeanEstimate> mean_sup_mass_p;  // p -> E sup_t ||u||_2^p
  MeanEstimate mean_z_T;
  MeanEstimate tau_equals_T_frequency;
  std::vector<double> taus;
  std::vector<PathRecord> paths;
};

inline PathRecord solve_path(const SimConfig& config, std::uint64_t seed, std::uint64_t index) {
  PathRecord rec;
  rec.path_index = index;
  try {
    const SolveReport rep = solve(config, path_for(config, seed, index));
    const Trajectory& tr = rep.trajectory;
    rec.ok = true;
    rec.tau = rep.tau;
    rec.yt_norm = tr.running_z[0].back();
    rec.z_T = tr.z_total(tr.size() - 1);
    rec.sup_mass = *std::max_element(tr.running_mass.begin(), tr.running_mass.end());
    rec.initial_mass = tr.running_mass.front();
    rec.windows = rep.windows.size();
    rec.truncation_ever_active = rep.truncation_ever_active;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoContraction && e.code() != ErrorCode::MaxItersExceeded &&
        e.code() != ErrorCode::NonFinite) {
      throw;
    }
    rec.ok = false;
    rec.failure = std::string(to_string(e.code()));
  }
  return rec;
}

inline EnsembleSummary summarize(std::vector<PathRecord> records, const SimConfig& config, std::uint64_t seed) {
  EnsembleSummary s;
  s.n_paths = records.size();
  s.seed = seed;
  s.level = config.truncation_level;
  s.T = config.T;
  std::vector<double> yt, zt, hits;
  std::map<int, std::vector<double>> sup_p{{1, {}}, {2, {}}, {4, {}}};
  for (const auto& r : records) {
    s.taus.push_back(r.tau);
    // Failed paths stay in the denominator of the frequency as "did not reach T".
    hits.push_back(r.ok && r.tau >= config.T ? 1.0 : 0.0);
    if (!r.ok) {
      ++s.n_failed;
      continue;
    }
    yt.push_back(r.yt_norm);
    zt.push_back(r.z_T);
    for (auto& [p, v] : sup_p) v.push_back(std::pow(r.sup_mass, p));
  }
  s.mean_yt_norm = estimate_mean(yt);
  s.mean_z_T = estimate_mean(zt);
  for (const auto& [p, v] : sup_p) s.mean_sup_mass_p[p] = estimate_mean(v);
  s.tau_equals_T_frequency = estimate_mean(hits);
  s.paths = std::move(records);
  return s;
}

inline EnsembleSummary run_ensemble(const SimConfig& config, std::size_t n_paths, std::uint64_t seed,
                                    unsigned threads = worker_count()) {
  if (n_paths < 2) throw Error(ErrorCode::InvalidParams, "an ensemble needs at least two paths");
  validate(config);
  SimConfig cfg = config;
  cfg.store_states = false;
  std::vector<PathRecord> records(n_paths);
  parallel_for(n_paths, [&](std::size_t i) { records[i] = solve_path(cfg, seed, i); }, threads);
  return summarize(std::move(records), config, seed);
}

struct ChebyshevCheck {
  double level = 0.0;
  double frequency = 0.0;  // empirical P(Z_T >= level)
  double bound = 0.0;      // E[Z_T] / level + 3 stderr
  bool passed = false;
};

inline ChebyshevCheck chebyshev_check(const EnsembleSummary& s, double level) {
  ChebyshevCheck c;
  c.level = level;
  std::size_t ok = 0;
  std::size_t above = 0;
  for (const auto& r : s.paths) {
    if (!r.ok) continue;
    ++ok;
    if (r.z_T >= level) ++above;
  }
  if (ok == 0) return c;
  c.frequency = static_cast<double>(above) / static_cast<double>(ok);
  const double se = std::sqrt(c.frequency * (1.0 - c.frequency) / static_cast<double>(ok));
  c.bound = s.mean_z_T.mean / level + 3.0 * se;
  c.passed = c.frequency <= c.bound;
  return c;
}

struct UniformityRow {
  double level = 0.0;
  MeanEstimate mean_yt_norm;
  MeanEstimate tau_equals_T_frequency;
  std::size_t n_failed = 0;
};

struct UniformityStudy {
  std::vector<UniformityRow> rows;
  std::vector<EnsembleSummary> summaries;
  double max_min_ratio = 1.0;
};

/// E||u_n||_{Y_T} across truncation levels on common Brownian paths.
inline UniformityStudy truncation_uniformity_study(const SimConfig& config, const std::vector<double>& levels,
                                                   std::size_t n_paths, std::uint64_t seed,
                                                   unsigned threads = worker_count()) {
  if (levels.empty()) throw Error(ErrorCode::InvalidParams, "no levels given");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) throw Error(ErrorCode::InvalidParams, "levels must increase");
  }
  UniformityStudy study;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double level : levels) {
    SimConfig cfg = config;
    cfg.truncation_level = level;
    EnsembleSummary s = run_ensemble(cfg, n_paths, seed, threads);
    study.rows.push_back({level, s.mean_yt_norm, s.tau_equals_T_frequency, s.n_failed});
    lo = std::min(lo, s.mean_yt_norm.mean);
    hi = std::max(hi, s.mean_yt_norm.mean);
    study.summaries.push_back(std::move(s));
  }
  study.max_min_ratio = lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  return study;
}

}  // namespace snls
