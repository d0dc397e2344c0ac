#pragma once

// Invariant suites driven by `snls verify` and by the acceptance binary.
// Every check uses fixed seeds, so a given build always reports the same
// numbers.

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "snls/brownian.hpp"
#include "snls/config.hpp"
#include "snls/dynamics.hpp"
#include "snls/exponents.hpp"
#include "snls/grid.hpp"
#include "snls/io.hpp"
#include "snls/montecarlo.hpp"
#include "snls/noise.hpp"
#include "snls/propagator.hpp"
#include "snls/solver.hpp"
#include "snls/trajectory.hpp"

namespace snls {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  ojson data = ojson::object();
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return !checks.empty();
  }

  ojson to_json() const {
    ojson j;
    j["suite"] = suite;
    j["passed"] = passed();
    ojson arr = ojson::array();
    for (const auto& c : checks) {
      arr.push_back({{"name", c.name},
                     {"passed", c.passed},
                     {"detail", c.detail},
                     {"seconds", c.seconds},
                     {"data", c.data}});
    }
    j["checks"] = std::move(arr);
    return j;
  }

  std::string to_text() const {
    std::ostringstream o;
    for (const auto& c : checks) {
      char secs[32];
      std::snprintf(secs, sizeof secs, "%.2fs", c.seconds);
      o << (c.passed ? "PASS " : "FAIL ") << suite << '/' << c.name << " (" << secs << "): " << c.detail << '\n';
    }
    return o.str();
  }
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::LengthMismatch, "need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::string fmt(double x, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

/// Euler-Maruyama on the Ito form of the noise-only dynamics
///   du = -1/2 S |u|^{2(gamma-1)} u dt - i sum_m e_m |u|^{gamma-1} u dbeta_m.
inline ComplexField euler_maruyama_diffusion_only(const ComplexField& u0, const NoiseModel& model,
                                                  const Rational& gamma, const BrownianPath& path) {
  require_same_grid(u0.grid(), model.grid);
  if (path.modes < model.modes()) throw Error(ErrorCode::LengthMismatch, "path has too few modes");
  const double g1 = to_double(gamma - 1);
  std::vector<cplx> u(u0.values().begin(), u0.values().end());
  std::vector<cplx> prev(u.size());
  std::vector<double> incr(model.modes());
  for (std::size_t l = 0; l < path.steps(); ++l) {
    const double dt = path.mesh[l + 1] - path.mesh[l];
    for (std::size_t m = 0; m < incr.size(); ++m) incr[m] = path.increment(m, l);
    prev = u;
    detail::add_stratonovich_drift(prev, model, g1, 1.0, dt, u);
    detail::add_noise_term(prev, model, g1, 1.0, incr, u);
  }
  return ComplexField(u0.grid(), std::move(u));
}

/// A validated config from explicit physical parameters.
inline SimConfig make_sim_config(int d, Rational alpha, Rational gamma, int lambda, std::size_t n, double L, double T,
                                 double dt) {
  SimConfig c;
  c.params = make_model_params(d, alpha, gamma, lambda);
  c.grid = Grid{d, n, L};
  c.T = T;
  c.dt = dt;
  return c;
}

namespace detail {

template <class Fn>
CheckResult timed_check(const std::string& name, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::vector<cplx> random_values(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cplx> v(n);
  for (auto& z : v) z = {normal(rng), normal(rng)};
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------- exponents

/// Scaling identity 2/q + d/(alpha+1) = d/2 over alpha = 1 + k/8 up to the
/// L^2-critical power, plus q = alpha + 1 exactly at criticality.
inline CheckResult check_exponent_algebra() {
  CheckResult r;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;
  for (int d = 1; d <= 3; ++d) {
    const Rational crit = Rational(1) + Rational(4, d);
    for (int k = 1;; ++k) {
      const Rational alpha = Rational(1) + Rational(k, 8);
      if (alpha > crit) break;
      ++cases;
      const Rational q = strichartz_q(alpha + 1, d);
      bool ok = Rational(2) / q + Rational(d) / (alpha + 1) == Rational(d, 2);
      if (alpha == crit) ok = ok && q == alpha + 1;
      if (!ok) {
        ++failures;
        if (first_failure.empty()) first_failure = "d=" + std::to_string(d) + " alpha=" + to_string(alpha);
      }
    }
    // The critical power is not always of the form 1 + k/8.
    ++cases;
    if (strichartz_q(crit + 1, d) != crit + 1) ++failures;
  }
  r.passed = failures == 0 && cases > 0;
  r.detail = std::to_string(cases) + " (d, alpha) cases, " + std::to_string(failures) + " identity failures" +
             (first_failure.empty() ? "" : " first at " + first_failure);
  r.data = {{"cases", cases}, {"failures", failures}};
  return r;
}

/// Exhaustive search over small rationals q: (p, d) = (4, 1) admits only q = 8.
inline CheckResult check_exponent_search_oracle() {
  CheckResult r;
  std::vector<Rational> found;
  for (std::int64_t num = 1; num <= 64; ++num) {
    for (std::int64_t den = 1; den <= 8; ++den) {
      const Rational q(num, den);
      if (Rational(2) / q + Rational(1, 4) == Rational(1, 2)) {
        if (std::find(found.begin(), found.end(), q) == found.end()) found.push_back(q);
      }
    }
  }
  const Rational q = strichartz_q(4, 1);
  r.passed = found.size() == 1 && found[0] == q && q == Rational(8);
  r.detail = "strichartz_q(4, 1) = " + to_string(q) + ", search found " + std::to_string(found.size()) + " solution(s)";
  return r;
}

inline CheckResult check_bootstrap_identities() {
  CheckResult r;
  std::size_t cases = 0;
  std::size_t failures = 0;
  for (int d = 1; d <= 3; ++d) {
    const Rational amax = Rational(1) + Rational(4, d);
    const Rational gmax = Rational(1) + Rational(2, d);
    for (int ka = 1; ka <= 16; ++ka) {
      const Rational alpha = Rational(1) + (amax - 1) * Rational(ka, 16);
      for (int kg = 0; kg <= 8; ++kg) {
        const Rational gamma = Rational(1) + (gmax - 1) * Rational(kg, 8);
        const ModelParams p = make_model_params(d, alpha, gamma, 1);
        const BootstrapExponents b = bootstrap_exponents(p);
        ++cases;
        bool ok = b.theta_global == Rational(1) - b.theta_interp;
        // Lyapunov exponent: 1/(2 gamma) = theta/(alpha+1) + (1 - theta)/2.
        ok = ok && Rational(1) / (2 * gamma) == b.theta_interp / (alpha + 1) + (Rational(1) - b.theta_interp) / 2;
        ok = ok && b.critical == (alpha == amax);
        ok = ok && b.theta_degenerate == (gamma == Rational(1));
        if (alpha < amax) ok = ok && gamma_global_bound(d, alpha) < gmax && gamma_global_bound(d, alpha) > 1;
        if (!ok) ++failures;
      }
    }
  }
  const Rational delta = bootstrap_exponents(make_model_params(1, 3, 1, 1)).delta;
  const double sigma = picard_window_length(1.0, 1.0, delta, Rational(3), 10.0);
  const bool window_ok = std::abs(sigma - 1.0 / 256.0) < 1e-15;
  const DichotomyRoots roots = dichotomy_roots(3.0);
  const bool roots_ok = roots.c1 <= 2.0 && roots.c2 > roots.c1 && std::abs(dichotomy_gap(roots.c1, 3.0)) < 1e-10 &&
                        std::abs(dichotomy_gap(roots.c2, 3.0)) < 1e-10;
  r.passed = failures == 0 && window_ok && roots_ok;
  r.detail = std::to_string(cases) + " bootstrap cases, " + std::to_string(failures) + " failures; window(1,1,1/2,3,10) = " +
             fmt(sigma, 17) + "; dichotomy roots for alpha=3: " + fmt(roots.c1, 12) + ", " + fmt(roots.c2, 12);
  return r;
}

inline SuiteReport run_exponents_suite() {
  SuiteReport s{"exponents", {}};
  s.checks.push_back(detail::timed_check("scaling_identity", check_exponent_algebra));
  s.checks.push_back(detail::timed_check("search_oracle", check_exponent_search_oracle));
  s.checks.push_back(detail::timed_check("bootstrap_identities", check_bootstrap_identities));
  return s;
}

// --------------------------------------------------------------- unitarity

/// Unitarity, group law and time reversal of the free propagator on random fields.
inline CheckResult check_propagator_unitarity(std::size_t cases = 1000, std::size_t n = 512, double tol = 1e-12) {
  CheckResult r;
  const Grid g{1, n, 2.0 * std::numbers::pi * 16.0};
  const SpectralPlan plan(g);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> time(-5.0, 5.0);
  double worst_unit = 0.0, worst_group = 0.0, worst_reverse = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    const ComplexField f(g, detail::random_values(g.size(), rng));
    const double s = time(rng);
    const double t = time(rng);
    const double nf = lp_norm(f, 2.0);
    const ComplexField ft = free_evolve(plan, f, t);
    worst_unit = std::max(worst_unit, std::abs(lp_norm(ft, 2.0) - nf) / nf);
    const ComplexField two_step = free_evolve(plan, free_evolve(plan, f, s), t);
    const ComplexField one_step = free_evolve(plan, f, s + t);
    worst_group = std::max(worst_group, l2_distance(two_step, one_step) / nf);
    worst_reverse = std::max(worst_reverse, l2_distance(free_evolve(plan, ft, -t), f) / nf);
  }
  r.passed = worst_unit < tol && worst_group < tol && worst_reverse < tol;
  r.detail = std::to_string(cases) + " fields: unitarity " + fmt(worst_unit, 3) + ", group law " + fmt(worst_group, 3) +
             ", reversal " + fmt(worst_reverse, 3) + " (tol " + fmt(tol, 2) + ")";
  r.data = {{"unitarity", worst_unit}, {"group_law", worst_group}, {"reversal", worst_reverse}};
  return r;
}

/// Free Gaussian exp(-x^2/2): sup-norm decays like (1 + 4t^2)^{-1/4}, so the
/// log-log slope over t in [5, 20] is close to -1/2 while the packet stays
/// well inside the box.
inline CheckResult check_dispersive_decay() {
  CheckResult r;
  const Grid g{1, 4096, 400.0};
  const SpectralPlan plan(g);
  const ComplexField f = ComplexField::sample(g, [](const std::array<double, 3>& x) { return cplx(std::exp(-0.5 * x[0] * x[0])); });
  std::vector<double> ts, sups;
  double worst_oracle = 0.0;
  for (int k = 0; k <= 12; ++k) {
    const double t = 5.0 * std::pow(4.0, k / 12.0);
    const ComplexField u = free_evolve(plan, f, t);
    const double sup = lp_norm(u, INFINITY);
    ts.push_back(t);
    sups.push_back(sup);
    worst_oracle = std::max(worst_oracle, std::abs(sup - std::pow(1.0 + 4.0 * t * t, -0.25)));
  }
  const double slope = loglog_slope(ts, sups);
  // Any wrap-around would show up as a departure from the closed form.
  r.passed = slope >= -0.55 && slope <= -0.45 && worst_oracle < 1e-8;
  r.detail = "slope " + fmt(slope, 5) + " over t in [5, 20] (closed-form sup error " + fmt(worst_oracle, 3) + ")";
  r.data = {{"slope", slope}, {"oracle_error", worst_oracle}};
  return r;
}

inline SuiteReport run_unitarity_suite() {
  SuiteReport s{"unitarity", {}};
  s.checks.push_back(detail::timed_check("unitarity_group_law", [] { return check_propagator_unitarity(); }));
  s.checks.push_back(detail::timed_check("dispersive_decay", check_dispersive_decay));
  return s;
}

// -------------------------------------------------------------- strichartz

/// Empirical Strichartz constant for (p, q) = (4, 8), d = 1, across grid
/// refinement on the same physical data.
inline CheckResult check_strichartz_refinement(std::size_t samples = 16) {
  CheckResult r;
  const StrichartzPair pair = strichartz_pair(4, 1);
  std::vector<double> consts;
  for (std::size_t n : {256u, 512u, 1024u}) {
    const SpectralPlan plan(Grid{1, n, 40.0});
    consts.push_back(estimate_strichartz_constant(plan, samples, pair, 1.0, 7));
  }
  const double lo = *std::min_element(consts.begin(), consts.end());
  const double hi = *std::max_element(consts.begin(), consts.end());
  r.passed = std::isfinite(hi) && hi < 10.0 && lo > 0.0 && hi / lo < 1.05;
  r.detail = "C(n=256,512,1024) = " + fmt(consts[0], 6) + ", " + fmt(consts[1], 6) + ", " + fmt(consts[2], 6);
  r.data = {{"constants", consts}};
  return r;
}

/// A single plane wave keeps |u| constant: ||U(.)x||_{L^q L^p} = ||x||_p T^{1/q}.
inline CheckResult check_strichartz_plane_wave() {
  CheckResult r;
  const Grid g{1, 256, 2.0 * std::numbers::pi};
  const SpectralPlan plan(g);
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::plane_wave;
  ic.mode = {3, 0, 0};
  const ComplexField x = realize(ic, g);
  const StrichartzPair pair = strichartz_pair(4, 1);
  const double T = 0.75;
  const double ratio = strichartz_ratio(plan, x, pair, T, 32);
  const double expected = lp_norm(x, 4.0) * std::pow(T, 1.0 / 8.0) / lp_norm(x, 2.0);
  const double err = std::abs(ratio - expected) / expected;
  r.passed = err < 1e-12;
  r.detail = "plane-wave relative error " + fmt(err, 3);
  return r;
}

struct StochasticStrichartzEstimate {
  double ratio = 0.0;  // (E ||S||^2_{L^q L^p})^{1/2} / (E int sum_m ||Phi_m||_2^2 ds)^{1/2}
  double lo = 0.0;     // 95% interval from the standard error of the squared norm
  double hi = 0.0;
  double assembly_gap = 0.0;  // recursion vs direct stochastic_convolution at T, first path
};

/// Monte Carlo ratio for the stochastic convolution S = int U(t-s) Phi dW with
/// the adapted integrand Phi_m(s) = e_m U(s) x. The denominator is exact
/// because Phi is deterministic.
inline StochasticStrichartzEstimate stochastic_strichartz_ratio(std::size_t n, std::size_t paths = 200,
                                                                std::size_t steps = 64, std::uint64_t seed = 31) {
  const double T = 1.0;
  const double dt = T / static_cast<double>(steps);
  const Grid g{1, n, 40.0};
  const SpectralPlan plan(g);
  const StrichartzPair pair = strichartz_pair(4, 1);
  const double p = to_double(pair.p);
  const double q = to_double(pair.q);
  const NoiseModel model =
      make_noise_model({CoefficientSpec::constant(0.5), CoefficientSpec::gaussian_bump(1.0, 3.0)}, {}, g);
  const ComplexField x = random_packet_field(g, 5);
  const auto mesh = uniform_mesh(T, steps);

  ModeTrajectory phi;
  double denom_sq = 0.0;
  for (std::size_t l = 0; l <= steps; ++l) {
    const ComplexField ux = free_evolve(plan, x, mesh[l]);
    std::vector<ComplexField> modes;
    for (const auto& e : model.coeffs) {
      ComplexField f(g);
      for (std::size_t i = 0; i < g.size(); ++i) f[i] = e[i] * ux[i];
      if (l < steps) denom_sq += std::pow(lp_norm(f, 2.0), 2.0) * dt;
      modes.push_back(std::move(f));
    }
    phi.times.push_back(mesh[l]);
    phi.fields.push_back(std::move(modes));
  }

  StochasticStrichartzEstimate est;
  const auto step = plan.multiplier(dt);
  std::vector<double> squares(paths);
  std::vector<double> norms(steps + 1);
  std::vector<cplx> hat(g.size());
  std::vector<cplx> buf(g.size());
  for (std::size_t path_index = 0; path_index < paths; ++path_index) {
    const BrownianPath path = sample_brownian_path(mesh, model.modes(), seed, path_index);
    std::fill(hat.begin(), hat.end(), cplx{0.0, 0.0});
    for (std::size_t l = 0; l <= steps; ++l) {
      buf = hat;
      plan.backward(buf);
      norms[l] = lp_norm(buf, g.cell_volume(), p);
      if (l == steps) break;
      std::fill(buf.begin(), buf.end(), cplx{0.0, 0.0});
      for (std::size_t m = 0; m < model.modes(); ++m) {
        const double db = path.increment(m, l);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += phi.fields[l][m][i] * db;
      }
      plan.forward(buf);
      for (std::size_t i = 0; i < hat.size(); ++i) hat[i] = (hat[i] + buf[i]) * step[i];
    }
    const double s = bochner_from_norms(mesh, norms, q, T);
    squares[path_index] = s * s;
    if (path_index == 0) {
      buf = hat;
      plan.backward(buf);
      const ComplexField direct = stochastic_convolution(plan, phi, path, T);
      double gap = 0.0;
      for (std::size_t i = 0; i < buf.size(); ++i) gap = std::max(gap, std::abs(buf[i] - direct[i]));
      est.assembly_gap = gap / std::max(lp_norm(direct, std::numeric_limits<double>::infinity()), 1e-300);
    }
  }
  const MeanEstimate m = estimate_mean(squares);
  const double denom = std::sqrt(denom_sq);
  est.ratio = std::sqrt(m.mean) / denom;
  est.lo = std::sqrt(std::max(0.0, m.mean - 1.96 * m.stderr_)) / denom;
  est.hi = std::sqrt(m.mean + 1.96 * m.stderr_) / denom;
  return est;
}

/// The Monte Carlo stochastic Strichartz ratio is finite and stable under grid
/// refinement; the 95% intervals at n = 128 and 256 must overlap.
inline CheckResult check_stochastic_strichartz(std::size_t paths = 200) {
  CheckResult r;
  const StochasticStrichartzEstimate a = stochastic_strichartz_ratio(128, paths);
  const StochasticStrichartzEstimate b = stochastic_strichartz_ratio(256, paths);
  const bool finite = std::isfinite(a.hi) && std::isfinite(b.hi) && a.ratio > 0.0 && b.ratio > 0.0;
  const bool overlap = a.lo <= b.hi && b.lo <= a.hi;
  const bool assembly = a.assembly_gap < 1e-12 && b.assembly_gap < 1e-12;
  r.passed = finite && overlap && assembly && std::max(a.hi, b.hi) < 10.0;
  r.detail = "ratio n=128: " + fmt(a.ratio, 5) + " [" + fmt(a.lo, 4) + ", " + fmt(a.hi, 4) + "], n=256: " +
             fmt(b.ratio, 5) + " [" + fmt(b.lo, 4) + ", " + fmt(b.hi, 4) + "] (95%, " + std::to_string(paths) +
             " paths); recursive vs direct assembly " + fmt(std::max(a.assembly_gap, b.assembly_gap), 3);
  r.data = {{"ratio", {a.ratio, b.ratio}}, {"lo", {a.lo, b.lo}}, {"hi", {a.hi, b.hi}}};
  return r;
}

inline SuiteReport run_strichartz_suite() {
  SuiteReport s{"strichartz", {}};
  s.checks.push_back(detail::timed_check("refinement_stability", [] { return check_strichartz_refinement(); }));
  s.checks.push_back(detail::timed_check("plane_wave", check_strichartz_plane_wave));
  s.checks.push_back(detail::timed_check("stochastic_convolution", [] { return check_stochastic_strichartz(); }));
  return s;
}

// -------------------------------------------------------------- oracle-sde

struct SdeOracleResult {
  std::vector<double> dts;
  std::vector<double> errors;
  double slope = 0.0;
};

/// Strong error of Euler-Maruyama against the exact phase-rotation solution
/// on common Brownian paths (coarser meshes sum the fine increments).
inline SdeOracleResult sde_strong_order(const Rational& gamma, std::size_t paths = 100, int finest = 10,
                                        int coarsest = 6, std::uint64_t seed = 31) {
  const Grid g{1, 32, 20.0};
  const double T = 1.0;
  const NoiseModel model =
      make_noise_model({CoefficientSpec::constant(0.7), CoefficientSpec::gaussian_bump(0.8, 3.0, {1.0, 0, 0})}, {}, g);
  InitialCondition ic;
  ic.amplitude = 1.0;
  ic.width = 2.0;
  const ComplexField u0 = realize(ic, g);
  const double n0 = lp_norm(u0, 2.0);
  const auto fine_steps = std::size_t{1} << finest;
  SdeOracleResult res;
  for (int k = coarsest; k <= finest; ++k) res.dts.push_back(T / static_cast<double>(std::size_t{1} << k));
  res.errors.assign(res.dts.size(), 0.0);
  for (std::size_t p = 0; p < paths; ++p) {
    const BrownianPath fine = sample_brownian_path(uniform_mesh(T, fine_steps), model.modes(), seed, p);
    const ComplexField exact = diffusion_only_exact(u0, model, gamma, fine, T);
    for (std::size_t i = 0; i < res.dts.size(); ++i) {
      const int k = coarsest + static_cast<int>(i);
      const BrownianPath path = coarsen(fine, std::size_t{1} << (finest - k));
      const ComplexField em = euler_maruyama_diffusion_only(u0, model, gamma, path);
      res.errors[i] += l2_distance(em, exact) / n0 / static_cast<double>(paths);
    }
  }
  res.slope = loglog_slope(res.dts, res.errors);
  return res;
}

inline CheckResult check_sde_oracle(std::size_t paths = 100, double lo = 0.4, double hi = 0.6) {
  CheckResult r;
  r.passed = true;
  for (const Rational gamma : {Rational(1), Rational(2)}) {
    const SdeOracleResult res = sde_strong_order(gamma, paths);
    const bool ok = res.slope >= lo && res.slope <= hi;
    r.passed = r.passed && ok;
    if (!r.detail.empty()) r.detail += "; ";
    r.detail += "gamma=" + to_string(gamma) + " order " + fmt(res.slope, 4) + " (errors " + fmt(res.errors.front(), 3) +
                " .. " + fmt(res.errors.back(), 3) + ")";
    r.data["gamma_" + to_string(gamma)] = {{"dts", res.dts}, {"errors", res.errors}, {"slope", res.slope}};
  }
  r.detail += ", " + std::to_string(paths) + " paths, accepted [" + fmt(lo, 2) + ", " + fmt(hi, 2) + "]";
  return r;
}

inline SuiteReport run_oracle_sde_suite() {
  SuiteReport s{"oracle-sde", {}};
  s.checks.push_back(detail::timed_check("strong_order", [] { return check_sde_oracle(); }));
  return s;
}

// -------------------------------------------------------------------- mass

/// Split-step with real coefficients: relative mass drift after every step.
inline CheckResult check_splitstep_mass(std::size_t paths = 20, std::size_t steps = 1000, double tol = 1e-10) {
  CheckResult r;
  double worst = 0.0;
  for (const Rational gamma : {Rational(1), Rational(3, 2)}) {
    SimConfig c = make_sim_config(1, 3, gamma, 1, 128, 40.0, 1.0, 1.0 / static_cast<double>(steps));
    c.scheme = Scheme::splitstep;
    c.noise = {CoefficientSpec::constant(0.6), CoefficientSpec::gaussian_bump(0.8, 4.0)};
    c.initial_condition.amplitude = 1.2;
    c.initial_condition.width = 1.5;
    c.initial_condition.momentum = {0.5, 0, 0};
    c.store_states = false;
    for (std::size_t p = 0; p < paths; ++p) {
      const SolveReport rep = solve(c, path_for(c, 5, p));
      const auto& mass = rep.trajectory.running_mass;
      for (double m : mass) worst = std::max(worst, std::abs(m - mass.front()) / mass.front());
    }
  }
  r.passed = worst < tol;
  r.detail = "max relative mass drift " + fmt(worst, 3) + " over " + std::to_string(steps) + " steps, " +
             std::to_string(paths) + " paths x gamma in {1, 3/2} (tol " + fmt(tol, 2) + ")";
  r.data = {{"max_drift", worst}};
  return r;
}

struct OvershootStudy {
  std::vector<double> dts;
  std::vector<double> overshoot;
  double slope = 0.0;
};

/// Mean over paths of (sup_t ||u(t)||_2 - ||u0||_2)_+ / ||u0||_2 for the
/// Picard solver, on common Brownian paths under dt-halving.
inline OvershootStudy picard_mass_overshoot(std::size_t paths = 20, int coarsest = 5, int finest = 9,
                                            std::uint64_t seed = 11) {
  const double T = 1.0;
  SimConfig c = make_sim_config(1, 3, 1, 1, 64, 30.0, T, T / 32.0);
  c.noise = {CoefficientSpec::constant(0.3)};
  c.initial_condition.amplitude = 1.5;
  c.initial_condition.width = 1.5;
  c.store_states = false;
  OvershootStudy st;
  const auto fine_steps = std::size_t{1} << finest;
  for (int k = coarsest; k <= finest; ++k) st.dts.push_back(T / static_cast<double>(std::size_t{1} << k));
  st.overshoot.assign(st.dts.size(), 0.0);
  for (std::size_t p = 0; p < paths; ++p) {
    const BrownianPath fine = sample_brownian_path(uniform_mesh(T, fine_steps), 1, seed, p);
    for (std::size_t i = 0; i < st.dts.size(); ++i) {
      const int k = coarsest + static_cast<int>(i);
      SimConfig ck = c;
      ck.dt = st.dts[i];
      const SolveReport rep = picard_solve(ck, coarsen(fine, std::size_t{1} << (finest - k)));
      const auto& mass = rep.trajectory.running_mass;
      const double sup = *std::max_element(mass.begin(), mass.end());
      st.overshoot[i] += std::max(0.0, sup - mass.front()) / mass.front() / static_cast<double>(paths);
    }
  }
  st.slope = loglog_slope(st.dts, st.overshoot);
  return st;
}

inline CheckResult check_picard_overshoot(std::size_t paths = 20) {
  CheckResult r;
  const OvershootStudy st = picard_mass_overshoot(paths);
  bool positive = true;
  for (double o : st.overshoot) positive = positive && o > 0.0;
  r.passed = positive && st.slope >= 0.5;
  std::string seq;
  for (double o : st.overshoot) seq += (seq.empty() ? "" : ", ") + fmt(o, 3);
  r.detail = "sup-mass overshoot order " + fmt(st.slope, 4) + " (need >= 0.5), means [" + seq + "]";
  r.data = {{"dts", st.dts}, {"overshoot", st.overshoot}, {"slope", st.slope}};
  return r;
}

inline SuiteReport run_mass_suite() {
  SuiteReport s{"mass", {}};
  s.checks.push_back(detail::timed_check("splitstep_conservation", [] { return check_splitstep_mass(); }));
  s.checks.push_back(detail::timed_check("picard_overshoot_order", [] { return check_picard_overshoot(); }));
  return s;
}

// -------------------------------------------------------------- truncation

/// |theta(x) - theta(y)| <= |x - y| / level on dyadic inputs, where every
/// floating-point operation involved is exact.
inline CheckResult check_theta_lipschitz(std::size_t pairs = 10000) {
  CheckResult r;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> exp_dist(-3, 6);
  std::uniform_int_distribution<std::int64_t> mant(0, std::int64_t{3} << 20);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double level = std::ldexp(1.0, exp_dist(rng));
    const double x = std::ldexp(static_cast<double>(mant(rng)), -20) * level;
    const double y = std::ldexp(static_cast<double>(mant(rng)), -20) * level;
    if (!(std::abs(theta(x, level) - theta(y, level)) <= std::abs(x - y) / level)) ++violations;
  }
  r.passed = violations == 0;
  r.detail = std::to_string(violations) + " violations in " + std::to_string(pairs) + " pairs";
  return r;
}

/// Cutoff evaluated from an accepted prefix plus a window equals the cutoff
/// computed on the concatenated trajectory.
inline CheckResult check_window_chaining(std::size_t cases = 50, double tol = 1e-12) {
  CheckResult r;
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> gap(1, 4);
  std::uniform_int_distribution<int> len(2, 12);
  std::uniform_int_distribution<int> gamma_pick(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  std::size_t partial = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    const ModelParams params = make_model_params(1, Rational(3), Rational(2 + gamma_pick(rng), 2), 1);
    const Grid g{1, 16, 8.0};
    const int m1 = len(rng);
    const int m2 = len(rng);
    std::vector<double> times;
    std::vector<ComplexField> states;
    double t = 0.0;
    for (int j = 0; j <= m1 + m2; ++j) {
      times.push_back(t);
      auto v = detail::random_values(g.size(), rng);
      for (auto& z : v) z *= 0.5 + unit(rng);
      states.emplace_back(g, std::move(v));
      t += std::ldexp(static_cast<double>(gap(rng)), -6);
    }
    const Trajectory full = build_trajectory(times, states, params);
    const double split = times[static_cast<std::size_t>(m1)];
    const TimeExponents te = time_exponents(params);
    ZPrefix prefix{bochner_norm(full, to_double(te.q), to_double(params.alpha + 1), split),
                   bochner_norm(full, te.q_tilde.to_double(), to_double(2 * params.gamma), split)};
    std::vector<double> wt;
    std::vector<ComplexField> ws;
    for (std::size_t j = static_cast<std::size_t>(m1); j < times.size(); ++j) {
      wt.push_back(times[j] - split);
      ws.push_back(states[j]);
    }
    const Trajectory window = build_trajectory(wt, ws, params);
    const double z_end = z_process(full, times.back(), params);
    const double level = z_end * (0.3 + 0.5 * unit(rng));
    for (std::size_t j = 0; j < wt.size(); ++j) {
      for (double frac : {0.0, 0.5}) {
        double tl = wt[j];
        if (frac > 0.0) {
          if (j + 1 == wt.size()) continue;
          tl = 0.5 * (wt[j] + wt[j + 1]);
        }
        const double chained = evaluate_phi_chained(prefix, window, tl, level, params);
        const double direct = evaluate_phi(full, split + tl, TruncationState{level, true, 1.0}, params);
        if (chained > 0.0 && chained < 1.0) ++partial;
        worst = std::max(worst, std::abs(chained - direct));
      }
    }
  }
  r.passed = worst <= tol && partial > 0;
  r.detail = "max |phi_chained - phi_concatenated| = " + fmt(worst, 3) + " over " + std::to_string(cases) +
             " two-window trajectories (" + std::to_string(partial) + " evaluations inside the ramp)";
  r.data = {{"max_error", worst}};
  return r;
}

/// For 2 gamma <= alpha + 1 the discrete Lyapunov/Holder chain
///   ||u||_{L^q~ L^{2g}}^q~ <= (sup ||u||_2)^{q~(1-theta)} ||u||_{L^q L^{a+1}}^{q~ theta}
/// holds for any sampled trajectory (q~ theta = q). Slack covers rounding only.
inline CheckResult check_discrete_interpolation(std::size_t cases = 100) {
  CheckResult r;
  std::mt19937_64 rng(4321);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> steps_dist(3, 40);
  std::size_t violations = 0;
  std::size_t checked = 0;
  double worst_ratio = 0.0;
  const double slack = 1e-12;
  while (checked < cases) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const Rational amax = Rational(1) + Rational(4, d);
    const Rational alpha = Rational(1) + (amax - 1) * Rational(1 + static_cast<std::int64_t>(rng() % 16), 16);
    const Rational gmax = Rational(1) + Rational(2, d);
    const Rational gamma = Rational(1) + (gmax - 1) * Rational(static_cast<std::int64_t>(rng() % 9), 8);
    if (2 * gamma > alpha + 1) continue;
    const ModelParams params = make_model_params(d, alpha, gamma, 1);
    const std::size_t n = d == 1 ? 32 : (d == 2 ? 8 : 4);
    const Grid g{d, n, 6.0};
    const int m = steps_dist(rng);
    std::vector<double> times;
    std::vector<ComplexField> states;
    double t = 0.0;
    for (int j = 0; j <= m; ++j) {
      times.push_back(t);
      auto v = detail::random_values(g.size(), rng);
      const double scale = std::exp(3.0 * (unit(rng) - 0.5));
      for (auto& z : v) z *= scale * (unit(rng) < 0.2 ? 0.0 : 1.0);
      states.emplace_back(g, std::move(v));
      t += 0.01 + unit(rng);
    }
    const Trajectory traj = build_trajectory(times, states, params);
    const TimeExponents te = time_exponents(params);
    const BootstrapExponents b = bootstrap_exponents(params);
    const double th = to_double(b.theta_interp);
    const double T = times.back();
    double sup2 = 0.0;
    for (std::size_t j = 0; j + 1 < traj.size(); ++j) sup2 = std::max(sup2, lp_norm(traj.states[j], 2.0));
    const double ya = bochner_norm(traj, to_double(te.q), to_double(alpha + 1), T);
    ++checked;
    double lhs, rhs;
    if (te.q_tilde.infinite) {
      lhs = bochner_norm(traj, INFINITY, 2.0, T);
      rhs = sup2;
    } else {
      const double qt = te.q_tilde.to_double();
      lhs = std::pow(bochner_norm(traj, qt, to_double(2 * gamma), T), qt);
      rhs = std::pow(sup2, qt * (1.0 - th)) * std::pow(ya, qt * th);
    }
    if (rhs > 0.0) worst_ratio = std::max(worst_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + slack)) ++violations;
  }
  r.passed = violations == 0;
  r.detail = std::to_string(violations) + " violations in " + std::to_string(checked) +
             " random trajectories (largest lhs/rhs " + fmt(worst_ratio, 15) + ")";
  r.data = {{"violations", violations}, {"max_ratio", worst_ratio}};
  return r;
}

/// Settings shared by the localisation and global-existence checks: d = 1,
/// alpha = 2, gamma = 1, defocusing, real noise.
inline SimConfig localisation_config() {
  SimConfig c = make_sim_config(1, 2, 1, 1, 64, 32.0, 1.0, 1.0 / 64.0);
  c.noise = {CoefficientSpec::constant(0.5), CoefficientSpec::gaussian_bump(1.0, 3.0)};
  c.initial_condition.amplitude = 1.6;
  c.initial_condition.width = 1.0;
  c.store_states = false;
  return c;
}

inline CheckResult check_path_coincidence(std::size_t paths = 20, double level = 4.0) {
  CheckResult r;
  const SimConfig c = localisation_config();
  double worst = 0.0;
  std::size_t stopped = 0;
  for (std::size_t p = 0; p < paths; ++p) {
    const CoincidenceResult res = path_coincidence_check(c, path_for(c, 17, p), level, 2.0 * level);
    worst = std::max(worst, res.discrepancy);
    if (res.tau < c.T) ++stopped;
  }
  const double bound = 10.0 * c.picard_tol;
  r.passed = worst <= bound;
  r.detail = "max discrepancy up to tau_n " + fmt(worst, 3) + " (bound " + fmt(bound, 2) + "), levels (" + fmt(level) +
             ", " + fmt(2 * level) + "), " + std::to_string(stopped) + "/" + std::to_string(paths) +
             " paths stopped before T";
  r.data = {{"max_discrepancy", worst}, {"stopped", stopped}};
  return r;
}

inline SuiteReport run_truncation_suite() {
  SuiteReport s{"truncation", {}};
  s.checks.push_back(detail::timed_check("theta_lipschitz", [] { return check_theta_lipschitz(); }));
  s.checks.push_back(detail::timed_check("window_chaining", [] { return check_window_chaining(); }));
  s.checks.push_back(detail::timed_check("discrete_interpolation", [] { return check_discrete_interpolation(); }));
  s.checks.push_back(detail::timed_check("path_coincidence", [] { return check_path_coincidence(); }));
  return s;
}

// ------------------------------------------------------- solver ensembles

struct CrossValidation {
  std::vector<double> dts;
  std::vector<double> gaps;
  double slope = 0.0;
};

/// Relative L^2 gap at T between the Picard and split-step solvers on the
/// same Brownian paths, averaged over paths, under dt-halving.
inline CrossValidation scheme_cross_validation(std::size_t paths = 40, int coarsest = 5, int finest = 9,
                                               std::uint64_t seed = 23) {
  const double T = 0.5;
  SimConfig c = make_sim_config(1, 3, 1, 1, 128, 40.0, T, T / 32.0);
  c.noise = {CoefficientSpec::constant(0.3), CoefficientSpec::gaussian_bump(0.3, 3.0)};
  c.initial_condition.amplitude = 1.2;
  c.initial_condition.width = 1.5;
  c.initial_condition.momentum = {0.5, 0, 0};
  c.store_states = false;
  CrossValidation cv;
  const auto fine_steps = std::size_t{1} << finest;
  for (int k = coarsest; k <= finest; ++k) cv.dts.push_back(T / static_cast<double>(std::size_t{1} << k));
  cv.gaps.assign(cv.dts.size(), 0.0);
  for (std::size_t p = 0; p < paths; ++p) {
    const BrownianPath fine = sample_brownian_path(uniform_mesh(T, fine_steps), c.noise.size(), seed, p);
    for (std::size_t i = 0; i < cv.dts.size(); ++i) {
      const int k = coarsest + static_cast<int>(i);
      SimConfig ck = c;
      ck.dt = cv.dts[i];
      const BrownianPath path = coarsen(fine, std::size_t{1} << (finest - k));
      ck.scheme = Scheme::picard;
      const SolveReport a = solve(ck, path);
      ck.scheme = Scheme::splitstep;
      const SolveReport b = solve(ck, path);
      cv.gaps[i] += l2_distance(a.final_state, b.final_state) / lp_norm(b.final_state, 2.0) / static_cast<double>(paths);
    }
  }
  cv.slope = loglog_slope(cv.dts, cv.gaps);
  return cv;
}

inline CheckResult check_scheme_cross_validation(std::size_t paths = 40) {
  CheckResult r;
  const CrossValidation cv = scheme_cross_validation(paths);
  r.passed = cv.slope >= 0.5;
  std::string seq;
  for (double g : cv.gaps) seq += (seq.empty() ? "" : ", ") + fmt(g, 3);
  r.detail = "gap order " + fmt(cv.slope, 4) + " (need >= 0.5), mean gaps [" + seq + "], " + std::to_string(paths) +
             " paths";
  r.data = {{"dts", cv.dts}, {"gaps", cv.gaps}, {"slope", cv.slope}};
  return r;
}

struct GlobalExistenceResult {
  std::vector<double> levels;
  std::vector<double> frequencies;
  std::vector<ChebyshevCheck> chebyshev;
  std::size_t failed = 0;
};

inline GlobalExistenceResult global_existence_shadow(std::size_t paths = 200, std::vector<double> levels = {4, 8, 16},
                                                     std::uint64_t seed = 2024) {
  const SimConfig c = localisation_config();
  GlobalExistenceResult g;
  g.levels = levels;
  const UniformityStudy st = truncation_uniformity_study(c, levels, paths, seed);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    g.frequencies.push_back(st.rows[i].tau_equals_T_frequency.mean);
    g.chebyshev.push_back(chebyshev_check(st.summaries[i], levels[i]));
    g.failed += st.rows[i].n_failed;
  }
  return g;
}

inline CheckResult check_global_existence(std::size_t paths = 200) {
  CheckResult r;
  const GlobalExistenceResult g = global_existence_shadow(paths);
  bool monotone = true;
  for (std::size_t i = 1; i < g.frequencies.size(); ++i) monotone = monotone && g.frequencies[i] >= g.frequencies[i - 1];
  bool cheb = true;
  for (const auto& c : g.chebyshev) cheb = cheb && c.passed;
  const bool top = g.frequencies.back() >= 0.95;
  r.passed = monotone && top && cheb;
  std::string seq;
  for (std::size_t i = 0; i < g.levels.size(); ++i) {
    seq += (i ? ", " : "") + std::string("n=") + fmt(g.levels[i]) + ": " + fmt(g.frequencies[i], 4);
  }
  r.detail = "P(tau_n = T) " + seq + "; monotone " + (monotone ? "yes" : "no") + ", Chebyshev " +
             (cheb ? "ok" : "violated") + ", " + std::to_string(paths) + " paths, " + std::to_string(g.failed) +
             " failed solves";
  r.data = {{"levels", g.levels}, {"frequencies", g.frequencies}};
  return r;
}

inline SuiteReport run_solver_suite() {
  SuiteReport s{"solver", {}};
  s.checks.push_back(detail::timed_check("scheme_cross_validation", [] { return check_scheme_cross_validation(); }));
  s.checks.push_back(detail::timed_check("global_existence_shadow", [] { return check_global_existence(); }));
  return s;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"unitarity", "mass",       "oracle-sde", "strichartz",
                                              "truncation", "exponents", "all"};
  return names;
}

/// Runs one named suite; "all" runs every suite plus the solver ensembles.
inline std::vector<SuiteReport> run_suite(const std::string& name) {
  const std::vector<std::pair<std::string, std::function<SuiteReport()>>> table{
      {"exponents", run_exponents_suite}, {"unitarity", run_unitarity_suite}, {"strichartz", run_strichartz_suite},
      {"oracle-sde", run_oracle_sde_suite}, {"mass", run_mass_suite},          {"truncation", run_truncation_suite}};
  std::vector<SuiteReport> out;
  for (const auto& [n, fn] : table) {
    if (name == n || name == "all") out.push_back(fn());
  }
  if (name == "all") out.push_back(run_solver_suite());
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "unknown suite '" + name + "'");
  return out;
}

}  // namespace snls
