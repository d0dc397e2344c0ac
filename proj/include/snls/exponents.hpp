#pragma once

// Exact exponent algebra: Strichartz pairs, subcriticality margins,
// interpolation exponents and the constants of the global-existence bootstrap.
// Everything here is exact rational arithmetic; doubles only appear in the
// handful of functions whose inputs are real-valued (window length, dichotomy).

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "snls/error.hpp"

namespace snls {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// Parses "3", "-2", "3/2" or a finite decimal such as "1.125".
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw Error(ErrorCode::InvalidParams, "cannot parse rational '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    if (s.empty()) fail();
    std::size_t pos = 0;
    std::int64_t value = 0;
    try {
      value = std::stoll(std::string(s), &pos);
    } catch (const std::exception&) {
      fail();
    }
    if (pos != s.size()) fail();
    return value;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t den = parse_int(text.substr(slash + 1));
    if (den == 0) return fail();
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 15) return fail();
    bool negative = !whole.empty() && whole.front() == '-';
    if (negative) whole.remove_prefix(1);
    std::int64_t w = whole.empty() ? 0 : parse_int(whole);
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    if (w < 0 || f < 0) return fail();
    Rational value(w * scale + f, scale);
    return negative ? -value : value;
  }
  return Rational(parse_int(text));
}

/// A Lebesgue exponent that may be infinite.
struct Exponent {
  bool infinite = false;
  Rational value{0};

  static Exponent finite(Rational v) { return {false, v}; }
  static Exponent infinity() { return {true, Rational(0)}; }

  double to_double() const {
    return infinite ? std::numeric_limits<double>::infinity() : snls::to_double(value);
  }
  friend bool operator==(const Exponent&, const Exponent&) = default;
};

inline std::string to_string(const Exponent& e) { return e.infinite ? "inf" : to_string(e.value); }

/// (d, alpha, gamma, lambda) with 1 < alpha <= 1 + 4/d and 1 <= gamma <= 1 + 2/d.
struct ModelParams {
  int d = 1;
  Rational alpha{3};
  Rational gamma{1};
  int lambda = 1;

  bool alpha_critical() const { return alpha == Rational(1) + Rational(4, d); }
  bool gamma_critical() const { return gamma == Rational(1) + Rational(2, d); }
  bool critical() const { return alpha_critical() || gamma_critical(); }
  /// The Y-space uses L^q L^{alpha+1} iff alpha + 1 >= 2 gamma.
  bool y_uses_alpha_branch() const { return alpha + 1 >= 2 * gamma; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline void validate(const ModelParams& p) {
  if (p.d < 1) throw Error(ErrorCode::InvalidParams, "dimension d must be positive");
  const Rational alpha_max = Rational(1) + Rational(4, p.d);
  const Rational gamma_max = Rational(1) + Rational(2, p.d);
  if (!(p.alpha > 1 && p.alpha <= alpha_max)) {
    throw Error(ErrorCode::InvalidParams,
                "alpha = " + to_string(p.alpha) + " outside the local existence range (1, " +
                    to_string(alpha_max) + "]");
  }
  if (!(p.gamma >= 1 && p.gamma <= gamma_max)) {
    throw Error(ErrorCode::InvalidParams,
                "gamma = " + to_string(p.gamma) + " outside the local existence range [1, " +
                    to_string(gamma_max) + "]");
  }
  if (p.lambda != 1 && p.lambda != -1) {
    throw Error(ErrorCode::InvalidParams, "lambda must be +1 (defocusing) or -1 (focusing)");
  }
}

inline ModelParams make_model_params(int d, Rational alpha, Rational gamma, int lambda) {
  ModelParams p{d, alpha, gamma, lambda};
  validate(p);
  return p;
}

struct StrichartzPair {
  Rational p;  // spatial exponent
  Rational q;  // temporal exponent

  friend bool operator==(const StrichartzPair&, const StrichartzPair&) = default;
};

/// Temporal exponent q with 2/q + d/p = d/2. Rejects p <= 2 (q would be
/// infinite) and anything forcing q <= 2 (endpoint and beyond).
inline Rational strichartz_q(const Rational& p, int d) {
  if (d < 1) throw Error(ErrorCode::NotAdmissible, "dimension must be positive");
  if (p <= 2) {
    throw Error(ErrorCode::NotAdmissible,
                "p = " + to_string(p) + " <= 2 gives no finite temporal exponent");
  }
  const Rational two_over_q = Rational(d, 2) - Rational(d) / p;
  // two_over_q > 0 because p > 2; q > 2 iff two_over_q < 1.
  if (two_over_q >= 1) {
    throw Error(ErrorCode::NotAdmissible,
                "p = " + to_string(p) + " in d = " + std::to_string(d) + " forces q <= 2");
  }
  return Rational(2) / two_over_q;
}

/// The p = infinity end of the scaling line. Only d = 1 is admissible (q = 4).
inline Rational strichartz_q_at_infinity(int d) {
  if (d == 1) return Rational(4);
  if (d == 2) throw Error(ErrorCode::NotAdmissible, "(q, p, d) = (2, inf, 2) is excluded");
  throw Error(ErrorCode::NotAdmissible, "p = inf in d >= 3 forces q < 2");
}

inline StrichartzPair strichartz_pair(const Rational& p, int d) { return {p, strichartz_q(p, d)}; }

/// Temporal exponents of the running norm Z_t: q for (alpha+1), q~ for 2 gamma.
/// For gamma = 1 the second pair is the L^2 endpoint and q~ is infinite.
struct TimeExponents {
  Rational q;
  Exponent q_tilde;
};

inline TimeExponents time_exponents(const ModelParams& params) {
  TimeExponents t;
  t.q = strichartz_q(params.alpha + 1, params.d);
  if (params.gamma == Rational(1)) {
    t.q_tilde = Exponent::infinity();
  } else {
    t.q_tilde = Exponent::finite(strichartz_q(2 * params.gamma, params.d));
  }
  return t;
}

struct BootstrapExponents {
  Rational delta;          // 1 + d (1 - alpha) / 4
  Rational delta_tilde;    // 1 + d (1 - gamma) / 2
  Rational theta_interp;   // 1/(2 gamma) = theta/(alpha+1) + (1-theta)/2
  Rational theta_global;   // (alpha + 1 - 2 gamma) / ((alpha - 1) gamma)
  bool critical = false;          // delta == 0
  bool theta_degenerate = false;  // gamma == 1: linear noise, interpolation is trivial
};

inline BootstrapExponents bootstrap_exponents(const ModelParams& params) {
  validate(params);
  const Rational d(params.d);
  const Rational& a = params.alpha;
  const Rational& g = params.gamma;
  BootstrapExponents b;
  b.delta = Rational(1) + d * (Rational(1) - a) / 4;
  b.delta_tilde = Rational(1) + d * (Rational(1) - g) / 2;
  b.theta_interp = (g - 1) * (a + 1) / (g * (a - 1));
  if (g == Rational(1)) {
    // Limit value gamma -> 1 of the global theta; the gamma = 1 case is the
    // linear-noise regime and is handled without interpolation.
    b.theta_global = Rational(1);
    b.theta_degenerate = true;
  } else {
    b.theta_global = (a + 1 - 2 * g) / ((a - 1) * g);
  }
  b.critical = (b.delta == Rational(0));
  return b;
}

/// Exclusive upper bound on gamma for global existence with real coefficients.
inline Rational gamma_global_bound(int d, const Rational& alpha) {
  if (d < 1) throw Error(ErrorCode::OutOfRange, "dimension must be positive");
  const Rational alpha_crit = Rational(1) + Rational(4, d);
  if (!(alpha > 1 && alpha < alpha_crit)) {
    throw Error(ErrorCode::OutOfRange,
                "alpha = " + to_string(alpha) + " is not strictly subcritical (1, " +
                    to_string(alpha_crit) + ")");
  }
  const Rational dd(d);
  return (alpha - 1) / (alpha + 1) * (Rational(4) + dd * (Rational(1) - alpha)) /
             (4 * alpha + dd * (Rational(1) - alpha)) +
         1;
}

/// sigma = min(C1^{-1/delta} (2^{alpha+1} K^{alpha-1})^{-1/delta}, T), which
/// guarantees C1 sigma^delta K^{alpha-1} <= 2^{-(alpha+1)}.
inline double picard_window_length(double K, double C1, const Rational& delta,
                                   const Rational& alpha, double T) {
  if (delta == Rational(0)) throw Error(ErrorCode::CriticalDelta, "delta = 0: no bootstrap window exists");
  if (delta < 0) throw Error(ErrorCode::InvalidParams, "delta must be positive");
  if (!(K >= 0) || !(C1 > 0) || !(T > 0)) {
    throw Error(ErrorCode::InvalidParams, "need K >= 0, C1 > 0, T > 0");
  }
  if (K == 0) return T;
  const double a = to_double(alpha);
  const double log_sigma =
      -(std::log(C1) + (a + 1.0) * std::log(2.0) + (a - 1.0) * std::log(K)) / to_double(delta);
  if (log_sigma >= std::log(T)) return T;
  return std::exp(log_sigma);
}

enum class DichotomyBranch { lower_branch, upper_branch, violates_premise };

inline std::string_view to_string(DichotomyBranch b) {
  switch (b) {
    case DichotomyBranch::lower_branch: return "lower_branch";
    case DichotomyBranch::upper_branch: return "upper_branch";
    case DichotomyBranch::violates_premise: return "violates_premise";
  }
  return "?";
}

/// The two positive roots c1 <= 2 < c2 of x = 1 + x^alpha / 2^{alpha+1}.
struct DichotomyRoots {
  double c1;
  double c2;
};

inline double dichotomy_gap(double x, double alpha) {
  return 1.0 + std::pow(x, alpha) / std::pow(2.0, alpha + 1.0) - x;
}

inline DichotomyRoots dichotomy_roots(double alpha) {
  if (!(alpha > 1)) throw Error(ErrorCode::InvalidParams, "alpha must exceed 1");
  auto bisect = [alpha](double lo, double hi) {
    // gap(lo) and gap(hi) have opposite signs
    const bool lo_positive = dichotomy_gap(lo, alpha) > 0;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((dichotomy_gap(mid, alpha) > 0) == lo_positive) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  // gap(0) = 1 > 0 and gap(2) = -1/2 < 0 for every alpha.
  DichotomyRoots r{};
  r.c1 = bisect(0.0, 2.0);
  double hi = 4.0;
  while (dichotomy_gap(hi, alpha) <= 0) hi *= 2.0;
  r.c2 = bisect(2.0, hi);
  return r;
}

inline DichotomyBranch calculus_dichotomy_check(double x, const Rational& alpha) {
  if (!(x >= 0)) throw Error(ErrorCode::InvalidParams, "x must be non-negative");
  const double a = to_double(alpha);
  const DichotomyRoots roots = dichotomy_roots(a);
  if (dichotomy_gap(x, a) < 0) return DichotomyBranch::violates_premise;
  // Premise holds, so x sits on one side of the gap (c1, c2).
  return x <= 0.5 * (roots.c1 + roots.c2) ? DichotomyBranch::lower_branch
                                          : DichotomyBranch::upper_branch;
}

}  // namespace snls
