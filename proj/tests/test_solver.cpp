#include <gtest/gtest.h>

#include "snls/solver.hpp"
#include "snls/verify.hpp"
#include "test_support.hpp"

using namespace snls;
using snls::testing::code_of;

namespace {

SimConfig noisy_config() {
  SimConfig c = make_sim_config(1, 3, Rational(3, 2), 1, 64, 24.0, 0.25, 1.0 / 256.0);
  c.noise = {CoefficientSpec::constant(0.4), CoefficientSpec::gaussian_bump(0.6, 2.0)};
  c.initial_condition.amplitude = 1.0;
  c.initial_condition.width = 1.5;
  return c;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(SimConfig, Validation) {
  SimConfig c = noisy_config();
  EXPECT_NO_THROW(validate(c));
  c.dt = 0.3;
  EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::InvalidConfig);
  c = noisy_config();
  c.grid.d = 2;
  EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::InvalidConfig);
  c = noisy_config();
  c.contraction_target = 1.0;
  EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::InvalidConfig);
  c = noisy_config();
  c.params.alpha = 6;
  EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::InvalidParams);
}

TEST(PicardSolve, FreeEquationConvergesImmediately) {
  SimConfig c = noisy_config();
  c.noise.clear();
  c.nonlinearity = false;
  const SolveReport rep = picard_solve(c, path_for(c, 0, 0));
  ASSERT_FALSE(rep.windows.empty());
  for (const auto& w : rep.windows) EXPECT_EQ(w.iterations, 1);
  const SpectralPlan plan(c.grid);
  const ComplexField expected = free_evolve(plan, realize(c.initial_condition, c.grid), c.T);
  EXPECT_LT(max_abs_diff(rep.final_state, expected), 1e-12);
  EXPECT_EQ(rep.tau, c.T);
}

TEST(PicardSolve, NoiseOnlyIsExponentialEulerMaruyama) {
  SimConfig c = noisy_config();
  c.laplacian = false;
  c.nonlinearity = false;
  const BrownianPath path = path_for(c, 3, 1);
  const SolveReport rep = picard_solve(c, path);
  const NoiseModel model = make_noise_model(c.noise, {}, c.grid);
  const ComplexField em = euler_maruyama_diffusion_only(realize(c.initial_condition, c.grid), model, c.params.gamma, path);
  EXPECT_LT(max_abs_diff(rep.final_state, em), 1e-9);
}

TEST(PicardSolve, NoiseOnlyApproachesExactSolution) {
  SimConfig c = noisy_config();
  c.laplacian = false;
  c.nonlinearity = false;
  c.T = 0.5;
  const NoiseModel model = make_noise_model(c.noise, {}, c.grid);
  const ComplexField u0 = realize(c.initial_condition, c.grid);
  std::vector<double> errors;
  for (int k : {5, 9}) {
    c.dt = c.T / static_cast<double>(1 << k);
    double err = 0.0;
    for (std::uint64_t p = 0; p < 8; ++p) {
      const BrownianPath fine = sample_brownian_path(uniform_mesh(c.T, 1u << 9), 2, 7, p);
      const BrownianPath path = coarsen(fine, 1u << (9 - k));
      const SolveReport rep = picard_solve(c, path);
      err += l2_distance(rep.final_state, diffusion_only_exact(u0, model, c.params.gamma, fine, c.T));
    }
    errors.push_back(err / 8.0);
  }
  // Strong order 1/2: sixteen times fewer steps should cost at least a factor two.
  EXPECT_LT(errors[1], errors[0] / 2.0);
  EXPECT_LT(errors[1], 0.05);
}

TEST(SplitStep, FreeEquationMatchesPropagator) {
  SimConfig c = noisy_config();
  c.noise.clear();
  c.nonlinearity = false;
  c.scheme = Scheme::splitstep;
  const SolveReport rep = solve(c, path_for(c, 0, 0));
  const SpectralPlan plan(c.grid);
  EXPECT_LT(max_abs_diff(rep.final_state, free_evolve(plan, realize(c.initial_condition, c.grid), c.T)), 1e-12);
}

TEST(SplitStep, ConservesMassOverLongRuns) {
  SimConfig c = noisy_config();
  c.scheme = Scheme::splitstep;
  c.T = 10.0;
  c.dt = 1e-3;
  c.store_states = false;
  const SolveReport rep = splitstep_solve(c, path_for(c, 11, 0));
  ASSERT_EQ(rep.trajectory.size(), 10001u);
  const double m0 = rep.trajectory.running_mass.front();
  for (double m : rep.trajectory.running_mass) EXPECT_NEAR(m, m0, 1e-11 * m0);
}

TEST(SplitStep, DeterministicSelfConvergenceOrder) {
  SimConfig c = noisy_config();
  c.noise.clear();
  c.params.lambda = -1;
  c.scheme = Scheme::splitstep;
  c.T = 0.5;
  c.initial_condition.amplitude = 1.5;
  c.dt = c.T / 4096.0;
  const ComplexField ref = solve(c, path_for(c, 0, 0)).final_state;
  std::vector<double> dts, errs;
  for (int k : {5, 6, 7, 8}) {
    c.dt = c.T / static_cast<double>(1 << k);
    dts.push_back(c.dt);
    errs.push_back(l2_distance(solve(c, path_for(c, 0, 0)).final_state, ref));
  }
  EXPECT_GE(loglog_slope(dts, errs), 1.0);
}

TEST(PathCoincidence, LinearDynamicsCoincideBelowTheLowerLevel) {
  SimConfig c = localisation_config();
  c.nonlinearity = false;
  for (std::uint64_t p = 0; p < 4; ++p) {
    const CoincidenceResult r = path_coincidence_check(c, path_for(c, 5, p), 2.0, 6.0);
    EXPECT_LT(r.discrepancy, 1e-10);
    EXPECT_GT(r.tau, 0.0);
  }
  EXPECT_EQ(code_of([&] { path_coincidence_check(c, path_for(c, 5, 0), 4.0, 4.0); }), ErrorCode::InvalidParams);
}

TEST(Solve, DeterministicForFixedPath) {
  SimConfig c = noisy_config();
  const BrownianPath path = path_for(c, 99, 4);
  for (Scheme s : {Scheme::picard, Scheme::splitstep}) {
    c.scheme = s;
    const SolveReport a = solve(c, path);
    const SolveReport b = solve(c, path);
    EXPECT_EQ(a.final_state, b.final_state);
    EXPECT_EQ(a.trajectory.running_z, b.trajectory.running_z);
    EXPECT_EQ(a.tau, b.tau);
  }
}

TEST(Solve, TruncationStopsTheRunningNorm) {
  SimConfig c = noisy_config();
  c.truncation_level = 0.05;
  const SolveReport rep = picard_solve(c, path_for(c, 1, 0));
  EXPECT_LT(rep.tau, c.T);
  EXPECT_TRUE(rep.truncation_ever_active);
  EXPECT_GE(rep.trajectory.z_total(rep.trajectory.size() - 1), c.truncation_level);
}

TEST(Solve, Errors) {
  SimConfig c = noisy_config();
  const BrownianPath short_path = sample_brownian_path(uniform_mesh(c.T, 8), 2, 0, 0);
  EXPECT_EQ(code_of([&] { picard_solve(c, short_path); }), ErrorCode::MeshMismatch);
  const BrownianPath one_mode = sample_brownian_path(uniform_mesh(c.T, c.steps()), 1, 0, 0);
  EXPECT_EQ(code_of([&] { splitstep_solve(c, one_mode); }), ErrorCode::LengthMismatch);

  SimConfig capped = c;
  capped.picard_max_iters = 1;
  EXPECT_EQ(code_of([&] { picard_solve(capped, path_for(capped, 0, 0)); }), ErrorCode::MaxItersExceeded);

  SimConfig blowup = c;
  blowup.scheme = Scheme::splitstep;
  blowup.params.alpha = 5;
  blowup.initial_condition.amplitude = 1e200;
  EXPECT_EQ(code_of([&] { solve(blowup, path_for(blowup, 0, 0)); }), ErrorCode::NonFinite);
}
