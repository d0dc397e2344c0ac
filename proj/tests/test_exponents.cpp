#include <gtest/gtest.h>

#include <random>

#include "snls/exponents.hpp"
#include "test_support.hpp"

using namespace snls;
using snls::testing::code_of;

TEST(StrichartzQ, KnownPairs) {
  EXPECT_EQ(strichartz_q(4, 2), Rational(4));
  EXPECT_EQ(strichartz_q(4, 1), Rational(8));
  EXPECT_EQ(strichartz_q_at_infinity(1), Rational(4));
}

TEST(StrichartzQ, SearchOracleForFourInOneDimension) {
  // Every small rational q satisfying the scaling identity for (p, d) = (4, 1).
  std::vector<Rational> hits;
  for (std::int64_t a = 1; a <= 100; ++a) {
    for (std::int64_t b = 1; b <= 10; ++b) {
      const Rational q(a, b);
      if (Rational(2) / q + Rational(1, 4) == Rational(1, 2) &&
          std::find(hits.begin(), hits.end(), q) == hits.end()) {
        hits.push_back(q);
      }
    }
  }
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0], strichartz_q(4, 1));
}

TEST(StrichartzQ, RejectsEndpointAndBeyond) {
  for (int d = 1; d <= 4; ++d) {
    EXPECT_EQ(code_of([&] { strichartz_q(2, d); }), ErrorCode::NotAdmissible);
    EXPECT_EQ(code_of([&] { strichartz_q(Rational(3, 2), d); }), ErrorCode::NotAdmissible);
  }
  EXPECT_EQ(code_of([] { strichartz_q_at_infinity(2); }), ErrorCode::NotAdmissible);
  EXPECT_EQ(code_of([] { strichartz_q_at_infinity(3); }), ErrorCode::NotAdmissible);
  // d = 3 needs p < 6 for q > 2.
  EXPECT_EQ(code_of([] { strichartz_q(6, 3); }), ErrorCode::NotAdmissible);
}

TEST(StrichartzQ, ScalingIdentityIsExact) {
  for (int d = 1; d <= 3; ++d) {
    for (int k = 1; k * d <= 32; ++k) {
      const Rational p = Rational(2) + Rational(k, 8);
      const StrichartzPair pair = strichartz_pair(p, d);
      EXPECT_EQ(Rational(2) / pair.q + Rational(d) / pair.p, Rational(d, 2)) << "d=" << d << " k=" << k;
      EXPECT_GT(pair.q, Rational(2));
    }
  }
}

TEST(StrichartzQ, CriticalPowerGivesEqualExponents) {
  for (int d = 1; d <= 6; ++d) {
    const Rational alpha = Rational(1) + Rational(4, d);
    EXPECT_EQ(strichartz_q(alpha + 1, d), alpha + 1) << "d=" << d;
  }
}

TEST(ModelParams, RangeValidation) {
  EXPECT_NO_THROW(make_model_params(1, 5, 3, 1));
  for (int d = 1; d <= 3; ++d) {
    try {
      make_model_params(d, Rational(1) + Rational(5, d), 1, 1);
      FAIL() << "alpha beyond 1 + 4/d accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidParams);
      EXPECT_NE(std::string(e.what()).find("local existence range"), std::string::npos);
    }
    EXPECT_EQ(code_of([&] { make_model_params(d, 2, Rational(1) + Rational(3, d), 1); }), ErrorCode::InvalidParams);
  }
  EXPECT_EQ(code_of([] { make_model_params(1, 1, 1, 1); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { make_model_params(1, 2, Rational(1, 2), 1); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { make_model_params(1, 2, 1, 0); }), ErrorCode::InvalidParams);
}

TEST(TimeExponents, LinearNoiseHasInfiniteSecondExponent) {
  const TimeExponents te = time_exponents(make_model_params(1, 3, 1, 1));
  EXPECT_EQ(te.q, Rational(8));
  EXPECT_TRUE(te.q_tilde.infinite);
  const TimeExponents te2 = time_exponents(make_model_params(1, 3, Rational(3, 2), 1));
  EXPECT_FALSE(te2.q_tilde.infinite);
  EXPECT_EQ(te2.q_tilde.value, Rational(12));
}

TEST(BootstrapExponents, WorkedExamples) {
  const BootstrapExponents a = bootstrap_exponents(make_model_params(1, 3, 1, 1));
  EXPECT_EQ(a.delta, Rational(1, 2));
  EXPECT_EQ(a.delta_tilde, Rational(1));
  EXPECT_TRUE(a.theta_degenerate);
  EXPECT_EQ(a.theta_global, Rational(1));
  EXPECT_FALSE(a.critical);

  const BootstrapExponents b = bootstrap_exponents(make_model_params(2, 3, 1, 1));
  EXPECT_EQ(b.delta, Rational(0));
  EXPECT_TRUE(b.critical);

  const BootstrapExponents c = bootstrap_exponents(make_model_params(1, 3, Rational(3, 2), 1));
  EXPECT_EQ(c.delta_tilde, Rational(3, 4));
  EXPECT_FALSE(c.theta_degenerate);
}

TEST(BootstrapExponents, InterpolationExponentProperties) {
  for (int d = 1; d <= 3; ++d) {
    const Rational amax = Rational(1) + Rational(4, d);
    const Rational gmax = Rational(1) + Rational(2, d);
    for (int ka = 1; ka <= 12; ++ka) {
      const Rational alpha = Rational(1) + (amax - 1) * Rational(ka, 12);
      for (int kg = 0; kg <= 6; ++kg) {
        const Rational gamma = Rational(1) + (gmax - 1) * Rational(kg, 6);
        const BootstrapExponents b = bootstrap_exponents(make_model_params(d, alpha, gamma, -1));
        EXPECT_EQ(b.theta_global, Rational(1) - b.theta_interp);
        EXPECT_EQ(b.delta > Rational(0), alpha < amax);
        if (2 * gamma <= alpha + 1 && gamma > Rational(1)) {
          EXPECT_GT(b.theta_interp, Rational(0));
          EXPECT_LE(b.theta_interp, Rational(1));
        }
      }
    }
  }
}

TEST(GammaGlobalBound, WorkedExamples) {
  EXPECT_EQ(gamma_global_bound(1, 2), Rational(8, 7));
  EXPECT_EQ(gamma_global_bound(1, 3), Rational(11, 10));
  const Rational near_one = gamma_global_bound(2, Rational(1001, 1000));
  EXPECT_LT(near_one - 1, Rational(1, 1000));
  EXPECT_EQ(code_of([] { gamma_global_bound(1, 5); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { gamma_global_bound(2, 4); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { gamma_global_bound(1, 1); }), ErrorCode::OutOfRange);
}

TEST(GammaGlobalBound, StaysInsideLocalRange) {
  int samples = 0;
  for (int d = 1; d <= 4; ++d) {
    const Rational amax = Rational(1) + Rational(4, d);
    for (int k = 1; k <= 25; ++k, ++samples) {
      const Rational alpha = Rational(1) + (amax - 1) * Rational(k, 26);
      const Rational bound = gamma_global_bound(d, alpha);
      EXPECT_LT(bound, Rational(1) + Rational(2, d));
      EXPECT_GT(bound, Rational(1));
    }
  }
  EXPECT_EQ(samples, 100);
}

TEST(PicardWindowLength, WorkedExampleAndCaps) {
  EXPECT_NEAR(picard_window_length(1.0, 1.0, Rational(1, 2), 3, 10.0), 1.0 / 256.0, 1e-15);
  EXPECT_DOUBLE_EQ(picard_window_length(1e-6, 1.0, Rational(1, 2), 3, 10.0), 10.0);
  EXPECT_DOUBLE_EQ(picard_window_length(0.0, 1.0, Rational(1, 2), 3, 10.0), 10.0);
  EXPECT_EQ(code_of([] { picard_window_length(1.0, 1.0, 0, 3, 1.0); }), ErrorCode::CriticalDelta);
  // sigma ~ K^{-(alpha-1)/delta}: doubling K divides sigma by 2^{(alpha-1)/delta}.
  const double s1 = picard_window_length(10.0, 1.0, Rational(1, 2), 3, 1.0);
  const double s2 = picard_window_length(20.0, 1.0, Rational(1, 2), 3, 1.0);
  EXPECT_NEAR(s1 / s2, 16.0, 1e-10);
}

TEST(PicardWindowLength, GuaranteesContractionCondition) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> logu(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const Rational amax = Rational(1) + Rational(4, d);
    const Rational alpha = Rational(1) + (amax - 1) * Rational(1 + static_cast<std::int64_t>(rng() % 15), 16);
    const Rational delta = Rational(1) + Rational(d) * (Rational(1) - alpha) / 4;
    const double K = std::pow(10.0, logu(rng));
    const double C1 = std::pow(10.0, logu(rng));
    const double T = std::pow(10.0, logu(rng));
    const double sigma = picard_window_length(K, C1, delta, alpha, T);
    const double a = to_double(alpha);
    EXPECT_LE(sigma, T);
    EXPECT_LE(C1 * std::pow(sigma, to_double(delta)) * std::pow(K, a - 1.0),
              std::pow(2.0, -(a + 1.0)) * (1.0 + 1e-12) + 1e-15);
  }
}

TEST(Dichotomy, RootsAndClassification) {
  for (double alpha : {1.5, 2.0, 3.0, 5.0}) {
    const DichotomyRoots r = dichotomy_roots(alpha);
    EXPECT_LT(r.c1, 2.0);
    EXPECT_GT(r.c2, r.c1);
    EXPECT_NEAR(r.c1, 1.0 + std::pow(r.c1, alpha) / std::pow(2.0, alpha + 1.0), 1e-10);
    EXPECT_NEAR(r.c2, 1.0 + std::pow(r.c2, alpha) / std::pow(2.0, alpha + 1.0), 1e-10);
  }
  for (int a : {2, 3, 5}) {
    EXPECT_EQ(calculus_dichotomy_check(0.0, a), DichotomyBranch::lower_branch);
    // f(2) = 1 + 1/2 - 2 < 0: the premise x <= 1 + x^a / 2^{a+1} fails at x = 2.
    EXPECT_EQ(calculus_dichotomy_check(2.0, a), DichotomyBranch::violates_premise);
    EXPECT_EQ(calculus_dichotomy_check(1e3, a), DichotomyBranch::upper_branch);
    const DichotomyRoots r = dichotomy_roots(a);
    EXPECT_EQ(calculus_dichotomy_check(r.c1 * 0.999, a), DichotomyBranch::lower_branch);
    EXPECT_EQ(calculus_dichotomy_check(r.c2 * 1.001, a), DichotomyBranch::upper_branch);
  }
}

TEST(Rationals, ParseAndPrint) {
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_EQ(parse_rational("3/2"), Rational(3, 2));
  EXPECT_EQ(parse_rational("1.125"), Rational(9, 8));
  EXPECT_EQ(parse_rational("-0.5"), Rational(-1, 2));
  EXPECT_EQ(to_string(Rational(7, 3)), "7/3");
  EXPECT_EQ(to_string(Rational(4)), "4");
  EXPECT_EQ(code_of([] { parse_rational("x"); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { parse_rational("1/0"); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { parse_rational(""); }), ErrorCode::InvalidParams);
}
