#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sys/wait.h>

#include "snls/config.hpp"
#include "snls/io.hpp"
#include "snls/verify.hpp"
#include "test_support.hpp"

using namespace snls;
using snls::testing::code_of;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("snls_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int status = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(SNLS_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_text_file(out);
  r.err = read_text_file(err);
  return r;
}

SimConfig rich_config() {
  SimConfig c = make_sim_config(2, Rational(7, 3), Rational(3, 2), -1, 16, 12.5, 0.5, 0.0625);
  c.noise = {CoefficientSpec::constant({0.25, 0.0}),
             CoefficientSpec::gaussian_bump({0.5, 0.125}, 1.75, {0.5, -1.0, 0.0})};
  c.linear_noise = {CoefficientSpec::constant(0.1)};
  c.scheme = Scheme::splitstep;
  c.truncation_level = 12.0;
  c.picard_tol = 1e-9;
  c.picard_max_iters = 40;
  c.contraction_target = 0.25;
  c.initial_window = 0.125;
  c.seed = 123456789012345ULL;
  c.initial_condition.amplitude = 0.8;
  c.initial_condition.width = 1.3;
  c.initial_condition.center = {0.1, 0.2, 0.0};
  c.initial_condition.momentum = {1.0, -0.5, 0.0};
  c.laplacian = false;
  return c;
}

void write_config(const fs::path& path, const SimConfig& c) { write_text_file(path, config_to_json(c).dump(2)); }

SimConfig cli_config() {
  SimConfig c = make_sim_config(1, 3, Rational(3, 2), 1, 32, 16.0, 0.25, 1.0 / 32.0);
  c.noise = {CoefficientSpec::constant(0.5)};
  c.seed = 7;
  return c;
}

}  // namespace

TEST(Config, RoundTripsThroughJsonText) {
  std::vector<SimConfig> configs{rich_config(), cli_config(), localisation_config()};
  SimConfig plane = cli_config();
  plane.initial_condition.kind = InitialCondition::Kind::plane_wave;
  plane.initial_condition.mode = {3, 0, 0};
  plane.initial_condition.width = 1.0;
  configs.push_back(plane);
  for (auto& c : configs) {
    // Whether states are retained is a runtime choice, not part of the file format.
    c.store_states = true;
    const std::string text = config_to_json(c).dump(2);
    const SimConfig back = config_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(back, c) << text;
    EXPECT_EQ(config_to_json(back).dump(2), text);
  }
}

TEST(Config, StructuralAndRangeErrors) {
  nlohmann::json j = nlohmann::json::parse(config_to_json(cli_config()).dump());
  nlohmann::json missing = j;
  missing.erase("horizon");
  EXPECT_EQ(code_of([&] { config_from_json(missing); }), ErrorCode::InvalidConfig);
  nlohmann::json units = j;
  units["units"] = "SI";
  EXPECT_EQ(code_of([&] { config_from_json(units); }), ErrorCode::InvalidConfig);
  nlohmann::json wrong_type = j;
  wrong_type["grid"]["n"] = "many";
  EXPECT_EQ(code_of([&] { config_from_json(wrong_type); }), ErrorCode::InvalidConfig);
  nlohmann::json supercritical = j;
  supercritical["model"]["alpha"] = "6";
  EXPECT_EQ(code_of([&] { config_from_json(supercritical); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { load_config("/nonexistent/config.json"); }), ErrorCode::Io);
  const fs::path dir = scratch_dir("bad_json");
  write_text_file(dir / "bad.json", "{ not json");
  EXPECT_EQ(code_of([&] { load_config((dir / "bad.json").string()); }), ErrorCode::InvalidConfig);
}

TEST(Hashes, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello world\n"), "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST(Io, FormattingAndErrors) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(exit_code_for(ErrorCode::InvalidParams), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::NoContraction), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::NonFinite), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::Io), 4);
  const auto j = nlohmann::json::parse(error_json(Error(ErrorCode::NoContraction, "stuck")));
  EXPECT_EQ(j["error"], "NoContraction");
  EXPECT_EQ(j["exit_code"], 3);
  EXPECT_EQ(code_of([] { read_text_file("/nonexistent/file"); }), ErrorCode::Io);
}

TEST(Io, TrajectoryCsvLayout) {
  SimConfig c = cli_config();
  const SolveReport rep = solve(c, path_for(c, 1, 0));
  const std::string csv = trajectory_csv(rep.trajectory);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,mass,z_component_1,z_component_2,z_total");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), rep.trajectory.size() + 1);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(Cli, SimulateWritesInventoriedRunDirectory) {
  const fs::path dir = scratch_dir("simulate");
  write_config(dir / "config.json", cli_config());
  const CliResult r = run_cli("simulate " + (dir / "config.json").string() + " --out " + (dir / "run").string() + " --plot", dir);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto manifest = nlohmann::json::parse(read_text_file(dir / "run" / "manifest.json"));
  std::set<std::string> names;
  for (const auto& f : manifest["files"]) {
    const std::string name = f["name"];
    names.insert(name);
    const std::string content = read_text_file(dir / "run" / name);
    EXPECT_EQ(f["sha256"], sha256_hex(content)) << name;
    EXPECT_EQ(f["bytes"], content.size()) << name;
  }
  EXPECT_EQ(names, (std::set<std::string>{"trajectory.csv", "report.json", "plot.svg"}));
  EXPECT_EQ(manifest["config_hash"], git_blob_hash(canonical_config_text(config_to_json(cli_config()))));
  EXPECT_EQ(manifest["seed"], 7);
  const auto report = nlohmann::json::parse(read_text_file(dir / "run" / "report.json"));
  EXPECT_EQ(report["reached_T"], true);
  EXPECT_EQ(report["scheme"], "picard");
}

TEST(Cli, RerunIsByteIdentical) {
  const fs::path dir = scratch_dir("rerun");
  write_config(dir / "config.json", cli_config());
  for (const char* out : {"a", "b"}) {
    const CliResult r = run_cli("simulate " + (dir / "config.json").string() + " --scheme splitstep --seed 3 --out " +
                                    (dir / out).string(),
                                dir);
    ASSERT_EQ(r.status, 0) << r.err;
  }
  for (const char* name : {"trajectory.csv", "report.json"}) {
    EXPECT_EQ(read_text_file(dir / "a" / name), read_text_file(dir / "b" / name)) << name;
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("exit_codes");
  EXPECT_EQ(run_cli("simulate " + (dir / "missing.json").string(), dir).status, 4);

  auto bad = nlohmann::json::parse(config_to_json(cli_config()).dump());
  bad["model"]["alpha"] = "6";
  write_text_file(dir / "bad.json", bad.dump());
  const CliResult r = run_cli("simulate " + (dir / "bad.json").string(), dir);
  EXPECT_EQ(r.status, 2);
  const auto err = nlohmann::json::parse(r.err);
  EXPECT_EQ(err["error"], "InvalidParams");

  EXPECT_EQ(run_cli("exponents --d 1 --alpha 6 --gamma 1", dir).status, 2);
  EXPECT_EQ(run_cli("no-such-command", dir).status, 2);
  EXPECT_EQ(run_cli("verify --suite nonsense", dir).status, 2);

  SimConfig capped = cli_config();
  capped.picard_max_iters = 1;
  write_config(dir / "capped.json", capped);
  EXPECT_EQ(run_cli("simulate " + (dir / "capped.json").string() + " --out " + (dir / "capped").string(), dir).status, 3);
}

TEST(Cli, ExponentsTable) {
  const fs::path dir = scratch_dir("exponents");
  const CliResult one = run_cli("exponents --d 1 --alpha 3 --gamma 3/2", dir);
  ASSERT_EQ(one.status, 0) << one.err;
  EXPECT_EQ(one.out,
            "d,alpha,gamma,q,q_tilde,delta,delta_tilde,theta_interp,theta_global,gamma_bound,critical,theta_degenerate\n"
            "1,3,3/2,8,12,1/2,3/4,2/3,1/3,11/10,false,false\n");

  write_text_file(dir / "table.csv", "d,alpha,gamma\n1,3,1\n2,3,1\n");
  const CliResult table = run_cli("exponents --table " + (dir / "table.csv").string(), dir);
  ASSERT_EQ(table.status, 0) << table.err;
  EXPECT_NE(table.out.find("\n1,3,1,8,inf,1/2,1,0,1,11/10,false,true\n"), std::string::npos) << table.out;
  EXPECT_NE(table.out.find("\n2,3,1,4,inf,0,1,0,1,na,true,true\n"), std::string::npos) << table.out;

  write_text_file(dir / "bad.csv", "x,y,z\n1,3,1\n");
  EXPECT_EQ(run_cli("exponents --table " + (dir / "bad.csv").string(), dir).status, 2);
}

TEST(Cli, EnsembleAndVerify) {
  const fs::path dir = scratch_dir("ensemble");
  write_config(dir / "config.json", cli_config());
  const CliResult r = run_cli("ensemble " + (dir / "config.json").string() + " --paths 4 --levels 2,inf --out " +
                                  (dir / "ens").string() + " --persist-paths --plot",
                              dir);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto summary = nlohmann::json::parse(read_text_file(dir / "ens" / "summary.json"));
  EXPECT_EQ(summary["levels"].size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "ens" / "levels.csv"));
  EXPECT_TRUE(fs::exists(dir / "ens" / "levels.svg"));
  EXPECT_TRUE(fs::exists(dir / "ens" / "manifest.json"));

  const CliResult v = run_cli("verify --suite exponents --json " + (dir / "verify.json").string(), dir);
  EXPECT_EQ(v.status, 0) << v.out;
  EXPECT_NE(v.out.find("verify: all checks passed"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(read_text_file(dir / "verify.json"))["passed"], true);
}
