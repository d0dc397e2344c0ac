#pragma once

// JSON configuration for simulations. Physical parameters (d, alpha, gamma,
// lambda, T) have no defaults and must be spelled out; solver tolerances do.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "snls/error.hpp"
#include "snls/exponents.hpp"
#include "snls/solver.hpp"

namespace snls {

using ojson = nlohmann::ordered_json;

namespace detail {

inline ojson rational_to_json(const Rational& r) { return to_string(r); }

inline Rational rational_from_json(const nlohmann::json& j, const char* key) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v) && std::abs(v) < 1e15) return Rational(static_cast<std::int64_t>(v));
  }
  throw Error(ErrorCode::InvalidConfig,
              std::string(key) + " must be an integer or a rational string such as \"3/2\"");
}

inline ojson level_to_json(double level) {
  if (std::isinf(level)) return "inf";
  return level;
}

inline double level_from_json(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  if (j.is_number()) return j.get<double>();
  throw Error(ErrorCode::InvalidConfig, "truncation_level must be a number or \"inf\"");
}

inline ojson complex_to_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw Error(ErrorCode::InvalidConfig, "complex values are a number or [re, im]");
}

template <class T>
ojson axes_to_json(const std::array<T, 3>& v, int d) {
  ojson a = ojson::array();
  for (int i = 0; i < d; ++i) a.push_back(v[static_cast<std::size_t>(i)]);
  return a;
}

template <class T>
std::array<T, 3> axes_from_json(const nlohmann::json& j, int d) {
  std::array<T, 3> v{};
  if (j.is_number()) {
    for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = j.get<T>();
    return v;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != d) {
    throw Error(ErrorCode::InvalidConfig, "per-axis values need exactly d entries");
  }
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)].get<T>();
  return v;
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::InvalidConfig, std::string("missing key '") + key + "'");
  return j.at(key);
}

inline ojson coefficient_to_json(const CoefficientSpec& c, int d) {
  ojson j;
  switch (c.kind) {
    case CoefficientSpec::Kind::constant:
      j["kind"] = "constant";
      j["value"] = complex_to_json(c.value);
      break;
    case CoefficientSpec::Kind::gaussian_bump:
      j["kind"] = "gaussian_bump";
      j["amplitude"] = complex_to_json(c.value);
      j["width"] = c.width;
      j["center"] = axes_to_json(c.center, d);
      break;
    case CoefficientSpec::Kind::file:
      j["kind"] = "file";
      j["path"] = c.path;
      break;
  }
  return j;
}

inline CoefficientSpec coefficient_from_json(const nlohmann::json& j, int d) {
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind == "constant") return CoefficientSpec::constant(complex_from_json(require(j, "value")));
  if (kind == "gaussian_bump") {
    CoefficientSpec c = CoefficientSpec::gaussian_bump(complex_from_json(require(j, "amplitude")),
                                                       require(j, "width").get<double>());
    if (j.contains("center")) c.center = axes_from_json<double>(j.at("center"), d);
    return c;
  }
  if (kind == "file") return CoefficientSpec::file(require(j, "path").get<std::string>());
  throw Error(ErrorCode::InvalidConfig, "unknown coefficient kind '" + kind + "'");
}

inline ojson initial_to_json(const InitialCondition& ic, int d) {
  ojson j;
  switch (ic.kind) {
    case InitialCondition::Kind::gaussian:
      j["kind"] = "gaussian";
      j["amplitude"] = ic.amplitude;
      j["width"] = ic.width;
      j["center"] = axes_to_json(ic.center, d);
      j["momentum"] = axes_to_json(ic.momentum, d);
      break;
    case InitialCondition::Kind::plane_wave:
      j["kind"] = "plane_wave";
      j["amplitude"] = ic.amplitude;
      j["mode"] = axes_to_json(ic.mode, d);
      break;
    case InitialCondition::Kind::file:
      j["kind"] = "file";
      j["path"] = ic.path;
      break;
  }
  return j;
}

inline InitialCondition initial_from_json(const nlohmann::json& j, int d) {
  InitialCondition ic;
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind == "gaussian") {
    ic.kind = InitialCondition::Kind::gaussian;
    ic.amplitude = require(j, "amplitude").get<double>();
    ic.width = require(j, "width").get<double>();
    if (j.contains("center")) ic.center = axes_from_json<double>(j.at("center"), d);
    if (j.contains("momentum")) ic.momentum = axes_from_json<double>(j.at("momentum"), d);
  } else if (kind == "plane_wave") {
    ic.kind = InitialCondition::Kind::plane_wave;
    ic.amplitude = require(j, "amplitude").get<double>();
    ic.mode = axes_from_json<int>(require(j, "mode"), d);
  } else if (kind == "file") {
    ic.kind = InitialCondition::Kind::file;
    ic.path = require(j, "path").get<std::string>();
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown initial condition kind '" + kind + "'");
  }
  return ic;
}

}  // namespace detail

inline ojson config_to_json(const SimConfig& c) {
  const int d = c.params.d;
  ojson j;
  j["units"] = "dimensionless";
  j["model"] = {{"d", c.params.d},
                {"alpha", detail::rational_to_json(c.params.alpha)},
                {"gamma", detail::rational_to_json(c.params.gamma)},
                {"lambda", c.params.lambda}};
  j["horizon"] = {{"T", c.T}, {"dt", c.dt}};
  j["grid"] = {{"n", c.grid.n}, {"L", c.grid.L}};
  j["scheme"] = std::string(to_string(c.scheme));
  j["truncation_level"] = detail::level_to_json(c.truncation_level);
  j["solver"] = {{"picard_tol", c.picard_tol},
                 {"picard_max_iters", c.picard_max_iters},
                 {"contraction_target", c.contraction_target},
                 {"initial_window", c.initial_window}};
  ojson coeffs = ojson::array();
  for (const auto& s : c.noise) coeffs.push_back(detail::coefficient_to_json(s, d));
  ojson linear = ojson::array();
  for (const auto& s : c.linear_noise) linear.push_back(detail::coefficient_to_json(s, d));
  j["noise"] = {{"coefficients", coeffs}, {"linear", linear}};
  j["initial_condition"] = detail::initial_to_json(c.initial_condition, d);
  j["seed"] = c.seed;
  j["switches"] = {{"laplacian", c.laplacian}, {"nonlinearity", c.nonlinearity}};
  return j;
}

/// Parses and validates. Structural problems raise InvalidConfig; parameters
/// outside the admissible range raise InvalidParams.
inline SimConfig config_from_json(const nlohmann::json& j) {
  SimConfig c;
  try {
    if (j.contains("units") && j.at("units").get<std::string>() != "dimensionless") {
      throw Error(ErrorCode::InvalidConfig, "units must be \"dimensionless\"");
    }
    const auto& model = detail::require(j, "model");
    c.params.d = detail::require(model, "d").get<int>();
    c.params.alpha = detail::rational_from_json(detail::require(model, "alpha"), "alpha");
    c.params.gamma = detail::rational_from_json(detail::require(model, "gamma"), "gamma");
    c.params.lambda = detail::require(model, "lambda").get<int>();
    const int d = c.params.d;
    if (d < 1 || d > 3) throw Error(ErrorCode::InvalidConfig, "d must be 1, 2 or 3");

    const auto& horizon = detail::require(j, "horizon");
    c.T = detail::require(horizon, "T").get<double>();
    c.dt = detail::require(horizon, "dt").get<double>();

    const auto& grid = detail::require(j, "grid");
    c.grid.d = d;
    c.grid.n = detail::require(grid, "n").get<std::size_t>();
    c.grid.L = detail::require(grid, "L").get<double>();

    if (j.contains("scheme")) {
      const std::string s = j.at("scheme").get<std::string>();
      if (s == "picard") {
        c.scheme = Scheme::picard;
      } else if (s == "splitstep") {
        c.scheme = Scheme::splitstep;
      } else {
        throw Error(ErrorCode::InvalidConfig, "scheme must be picard or splitstep");
      }
    }
    if (j.contains("truncation_level")) c.truncation_level = detail::level_from_json(j.at("truncation_level"));
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.picard_tol = s.value("picard_tol", c.picard_tol);
      c.picard_max_iters = s.value("picard_max_iters", c.picard_max_iters);
      c.contraction_target = s.value("contraction_target", c.contraction_target);
      c.initial_window = s.value("initial_window", c.initial_window);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      if (n.contains("coefficients")) {
        for (const auto& e : n.at("coefficients")) c.noise.push_back(detail::coefficient_from_json(e, d));
      }
      if (n.contains("linear")) {
        for (const auto& b : n.at("linear")) c.linear_noise.push_back(detail::coefficient_from_json(b, d));
      }
    }
    c.initial_condition = detail::initial_from_json(detail::require(j, "initial_condition"), d);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("switches")) {
      const auto& s = j.at("switches");
      c.laplacian = s.value("laplacian", true);
      c.nonlinearity = s.value("nonlinearity", true);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  validate(c);
  return c;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace snls
