#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snls/snls.hpp"

namespace {

using namespace snls;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

std::string exponent_row(int d, const Rational& alpha, const Rational& gamma) {
  const ModelParams p = make_model_params(d, alpha, gamma, 1);
  const TimeExponents te = time_exponents(p);
  const BootstrapExponents b = bootstrap_exponents(p);
  std::string bound = "na";
  if (!p.alpha_critical()) bound = to_string(gamma_global_bound(d, alpha));
  std::ostringstream o;
  o << d << ',' << to_string(alpha) << ',' << to_string(gamma) << ',' << to_string(te.q) << ','
    << to_string(te.q_tilde) << ',' << to_string(b.delta) << ',' << to_string(b.delta_tilde) << ','
    << to_string(b.theta_interp) << ',' << to_string(b.theta_global) << ',' << bound << ','
    << (b.critical ? "true" : "false") << ',' << (b.theta_degenerate ? "true" : "false");
  return o.str();
}

int run_exponents(const std::optional<int>& d, const std::string& alpha, const std::string& gamma,
                  const std::string& table) {
  std::vector<std::string> rows;
  if (!table.empty()) {
    std::ifstream in(table);
    if (!in) throw Error(ErrorCode::Io, "cannot open table file '" + table + "'");
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto cells = split_csv_line(line);
      if (header) {
        header = false;
        if (cells.size() != 3 || cells[0] != "d" || cells[1] != "alpha" || cells[2] != "gamma") {
          throw Error(ErrorCode::InvalidConfig, "table header must be d,alpha,gamma");
        }
        continue;
      }
      if (cells.size() != 3) throw Error(ErrorCode::InvalidConfig, "table rows need three cells: " + line);
      int dd = 0;
      try {
        dd = std::stoi(cells[0]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidConfig, "bad dimension '" + cells[0] + "'");
      }
      rows.push_back(exponent_row(dd, parse_rational(cells[1]), parse_rational(cells[2])));
    }
  } else {
    if (!d || alpha.empty() || gamma.empty()) {
      throw Error(ErrorCode::InvalidConfig, "give --d, --alpha and --gamma, or --table");
    }
    rows.push_back(exponent_row(*d, parse_rational(alpha), parse_rational(gamma)));
  }
  std::cout << "d,alpha,gamma,q,q_tilde,delta,delta_tilde,theta_interp,theta_global,gamma_bound,critical,"
               "theta_degenerate\n";
  for (const auto& r : rows) std::cout << r << '\n';
  return 0;
}

struct SimulateArgs {
  std::string config;
  std::string scheme;
  std::optional<std::uint64_t> seed;
  std::uint64_t path_index = 0;
  std::string out = "run";
  bool plot = false;
};

int run_simulate(const SimulateArgs& a) {
  SimConfig c = load_config(a.config);
  if (!a.scheme.empty()) {
    if (a.scheme == "picard") {
      c.scheme = Scheme::picard;
    } else if (a.scheme == "splitstep") {
      c.scheme = Scheme::splitstep;
    } else {
      throw Error(ErrorCode::InvalidConfig, "scheme must be picard or splitstep");
    }
  }
  if (a.seed) c.seed = *a.seed;
  c.store_states = false;
  const SolveReport rep = solve(c, path_for(c, c.seed, a.path_index));

  const fs::path dir(a.out);
  ensure_directory(dir);
  RunManifest m = begin_manifest("simulate", c, a.path_index);
  emit_file(m, dir, "trajectory.csv", trajectory_csv(rep.trajectory));
  emit_file(m, dir, "report.json", report_to_json(rep, c, a.path_index).dump(2) + "\n");
  if (a.plot) emit_file(m, dir, "plot.svg", trajectory_svg(rep.trajectory));
  finish_manifest(m, dir);
  std::cout << "tau = " << format_real(rep.tau) << " (T = " << format_real(c.T) << "), "
            << rep.windows.size() << " window(s), outputs in " << dir.string() << '\n';
  return 0;
}

struct EnsembleArgs {
  std::string config;
  std::size_t paths = 100;
  std::string levels;
  std::optional<std::uint64_t> seed;
  std::string out = "ensemble";
  bool plot = false;
  bool persist_paths = false;
};

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> out;
  for (const auto& cell : split_csv_line(text)) {
    if (cell == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad level '" + cell + "'");
    }
  }
  return out;
}

int run_ensemble_cmd(const EnsembleArgs& a) {
  SimConfig c = load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  std::vector<double> levels = a.levels.empty() ? std::vector<double>{c.truncation_level} : parse_levels(a.levels);
  for (double l : levels) {
    if (!(l > 0)) throw Error(ErrorCode::InvalidConfig, "levels must be positive");
  }
  const UniformityStudy study = truncation_uniformity_study(c, levels, a.paths, c.seed);

  const fs::path dir(a.out);
  ensure_directory(dir);
  RunManifest m = begin_manifest("ensemble", c, 0);
  ojson summary;
  summary["seed"] = c.seed;
  summary["n_paths"] = a.paths;
  summary["max_min_ratio_yt_norm"] = json_real(study.max_min_ratio);
  ojson per_level = ojson::array();
  for (const auto& s : study.summaries) {
    ojson lj = ensemble_to_json(s);
    lj["chebyshev"] = ojson::object();
    if (std::isfinite(s.level)) {
      const ChebyshevCheck cc = chebyshev_check(s, s.level);
      lj["chebyshev"] = {{"frequency", cc.frequency}, {"bound", json_real(cc.bound)}, {"passed", cc.passed}};
    }
    per_level.push_back(std::move(lj));
  }
  summary["levels"] = std::move(per_level);
  emit_file(m, dir, "summary.json", summary.dump(2) + "\n");
  emit_file(m, dir, "levels.csv", levels_csv(study));
  if (a.persist_paths) {
    for (const auto& s : study.summaries) emit_file(m, dir, "paths_level_" + format_real(s.level) + ".csv", paths_csv(s));
  }
  if (a.plot) emit_file(m, dir, "levels.svg", levels_svg(study));
  finish_manifest(m, dir);
  std::cout << levels_csv(study);
  return 0;
}

int run_verify(const std::string& suite, const std::string& json_path) {
  const auto reports = run_suite(suite);
  ojson all = ojson::array();
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << r.to_text();
    all.push_back(r.to_json());
    ok = ok && r.passed();
  }
  ojson doc;
  doc["suite"] = suite;
  doc["passed"] = ok;
  doc["reports"] = std::move(all);
  if (!json_path.empty()) write_text_file(json_path, doc.dump(2) + "\n");
  std::cout << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic NLS simulator with nonlinear Stratonovich noise"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SNLS_VERSION);

  auto* ex = app.add_subcommand("exponents", "Exponent table as CSV on standard output");
  std::optional<int> ex_d;
  std::string ex_alpha, ex_gamma, ex_table;
  ex->add_option("--d", ex_d, "space dimension");
  ex->add_option("--alpha", ex_alpha, "nonlinearity power, e.g. 3 or 7/3");
  ex->add_option("--gamma", ex_gamma, "noise power, e.g. 1 or 3/2");
  ex->add_option("--table", ex_table, "CSV file with header d,alpha,gamma");

  auto* sim = app.add_subcommand("simulate", "Solve one Brownian path and write a run directory");
  SimulateArgs sa;
  sim->add_option("config", sa.config, "JSON config file")->required();
  sim->add_option("--scheme", sa.scheme, "picard or splitstep (overrides config)");
  sim->add_option("--seed", sa.seed, "seed (overrides config)");
  sim->add_option("--path-index", sa.path_index, "Brownian path index");
  sim->add_option("--out", sa.out, "output directory");
  sim->add_flag("--plot", sa.plot, "also write plot.svg");

  auto* ens = app.add_subcommand("ensemble", "Monte Carlo ensemble across truncation levels");
  EnsembleArgs ea;
  ens->add_option("config", ea.config, "JSON config file")->required();
  ens->add_option("--paths", ea.paths, "number of paths (>= 2)");
  ens->add_option("--levels", ea.levels, "comma-separated truncation levels, inf allowed");
  ens->add_option("--seed", ea.seed, "seed (overrides config)");
  ens->add_option("--out", ea.out, "output directory");
  ens->add_flag("--plot", ea.plot, "also write levels.svg");
  ens->add_flag("--persist-paths", ea.persist_paths, "write per-path CSV for every level");

  auto* ver = app.add_subcommand("verify", "Run an invariant suite");
  std::string suite = "all";
  std::string verify_json;
  ver->add_option("--suite", suite, "unitarity|mass|oracle-sde|strichartz|truncation|exponents|all")
      ->check(CLI::IsMember(suite_names()));
  ver->add_option("--json", verify_json, "write the JSON report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*ex) return run_exponents(ex_d, ex_alpha, ex_gamma, ex_table);
    if (*sim) return run_simulate(sa);
    if (*ens) return run_ensemble_cmd(ea);
    if (*ver) return run_verify(suite, verify_json);
  } catch (const Error& e) {
    std::cerr << error_json(e) << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << error_json(Error(ErrorCode::Io, e.what())) << '\n';
    return 4;
  }
  return 0;
}
