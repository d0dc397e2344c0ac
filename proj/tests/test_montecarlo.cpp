#include <gtest/gtest.h>

#include "snls/montecarlo.hpp"
#include "snls/verify.hpp"
#include "test_support.hpp"

using namespace snls;
using snls::testing::code_of;

namespace {

SimConfig small_config() {
  SimConfig c = make_sim_config(1, 3, Rational(3, 2), 1, 32, 16.0, 0.25, 1.0 / 64.0);
  c.noise = {CoefficientSpec::constant(0.5)};
  c.scheme = Scheme::splitstep;
  return c;
}

}  // namespace

TEST(EstimateMean, SmallSamples) {
  const MeanEstimate e = estimate_mean({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.stderr_, std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(estimate_mean({}).mean, 0.0);
  EXPECT_EQ(estimate_mean({5.0}).stderr_, 0.0);
}

TEST(Ensemble, DeterministicDynamicsHaveNoSpread) {
  SimConfig c = small_config();
  c.noise.clear();
  const EnsembleSummary s = run_ensemble(c, 6, 1, 1);
  EXPECT_EQ(s.n_paths, 6u);
  EXPECT_EQ(s.n_failed, 0u);
  EXPECT_EQ(s.mean_yt_norm.stderr_, 0.0);
  EXPECT_EQ(s.tau_equals_T_frequency.mean, 1.0);
  EXPECT_EQ(s.tau_equals_T_frequency.stderr_, 0.0);
}

TEST(Ensemble, SupMassEqualsInitialMassForConservativeNoise) {
  const SimConfig c = small_config();
  const EnsembleSummary s = run_ensemble(c, 8, 3, 1);
  const double m0 = lp_norm(realize(c.initial_condition, c.grid), 2.0);
  EXPECT_NEAR(s.mean_sup_mass_p.at(2).mean, m0 * m0, 1e-12);
  EXPECT_LT(s.mean_sup_mass_p.at(2).stderr_, 1e-12);
  for (const auto& r : s.paths) EXPECT_NEAR(r.sup_mass, r.initial_mass, 1e-12);
}

TEST(Ensemble, ReproducibleAcrossThreadCounts) {
  SimConfig c = small_config();
  c.scheme = Scheme::picard;
  const EnsembleSummary a = run_ensemble(c, 8, 17, 1);
  const EnsembleSummary b = run_ensemble(c, 8, 17, 4);
  ASSERT_EQ(a.paths.size(), b.paths.size());
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    EXPECT_EQ(a.paths[i].yt_norm, b.paths[i].yt_norm);
    EXPECT_EQ(a.paths[i].z_T, b.paths[i].z_T);
    EXPECT_EQ(a.paths[i].tau, b.paths[i].tau);
  }
  EXPECT_EQ(a.mean_yt_norm.mean, b.mean_yt_norm.mean);
}

TEST(Ensemble, AntitheticPathConjugatesNoiseOnlySolution) {
  SimConfig c = small_config();
  c.laplacian = false;
  c.nonlinearity = false;
  const BrownianPath path = path_for(c, 8, 2);
  const SolveReport plus = solve(c, path);
  const SolveReport minus = solve(c, negated(path));
  // Real initial data: flipping the Brownian path conjugates the phase.
  for (std::size_t i = 0; i < plus.final_state.size(); ++i) {
    EXPECT_LT(std::abs(minus.final_state[i] - std::conj(plus.final_state[i])), 1e-13);
  }
}

TEST(Ensemble, RejectsTinyEnsembles) {
  const SimConfig c = small_config();
  EXPECT_EQ(code_of([&] { run_ensemble(c, 1, 0); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([&] { truncation_uniformity_study(c, {}, 4, 0); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([&] { truncation_uniformity_study(c, {8.0, 4.0}, 4, 0); }), ErrorCode::InvalidParams);
}

TEST(Ensemble, ChebyshevBoundHolds) {
  const SimConfig c = localisation_config();
  const EnsembleSummary s = run_ensemble(c, 24, 5);
  for (double level : {1.0, 2.0, 4.0, 8.0}) {
    const ChebyshevCheck cc = chebyshev_check(s, level);
    EXPECT_TRUE(cc.passed) << "level " << level << ": " << cc.frequency << " > " << cc.bound;
    EXPECT_GE(cc.frequency, 0.0);
    EXPECT_LE(cc.frequency, 1.0);
  }
}

TEST(Ensemble, TruncatedNormsAreUniformAcrossLevels) {
  const SimConfig c = localisation_config();
  const UniformityStudy study = truncation_uniformity_study(c, {8.0, 16.0, 32.0}, 16, 2024);
  ASSERT_EQ(study.rows.size(), 3u);
  EXPECT_LE(study.max_min_ratio, 1.2);
  for (const auto& row : study.rows) EXPECT_EQ(row.n_failed, 0u);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  for (int h : hits) EXPECT_EQ(h, 1);
}
