#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

#include <json.hpp>

#include "povmdyn/povm_json.hpp"
#include "povmdyn/scenario.hpp"

#include "support/fixtures.hpp"
#include "support/properties.hpp"

using namespace povmdyn;
using nlohmann::json;

namespace {

struct CommandResult {
  int status = -1;
  std::string output;
};

// Run the CLI binary through the shell, capturing stdout+stderr.
CommandResult run_cli(const std::string& args) {
  CommandResult result;
  const std::string cmd = std::string("'") + POVMDYN_CLI_PATH + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[512];
  while (size_t got = std::fread(buffer, 1, sizeof buffer, pipe)) {
    result.output.append(buffer, got);
  }
  const int rc = pclose(pipe);
  result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return result;
}

std::string write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  return path.string();
}

std::string write_trine(const std::filesystem::path& dir) {
  const std::string path = (dir / "trine.json").string();
  save_povm(fixtures::trine_povm(), path);
  return path;
}

int count_lines(const std::string& path) {
  std::ifstream in(path);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  return lines;
}

} // namespace

TEST_SUITE("scenario") {

TEST_CASE("the time grid covers [0, t_max] inclusive") {
  const std::vector<double> grid = time_grid(40.0, 0.05);
  REQUIRE(grid.size() == 801);
  CHECK(grid.front() == 0.0);
  CHECK(std::abs(grid.back() - 40.0) <= 1e-9);

  const std::vector<double> coarse = time_grid(1.0, 0.1);
  REQUIRE(coarse.size() == 11);
  CHECK(std::abs(coarse[3] - 0.3) <= 1e-12);

  CHECK_THROWS_AS(time_grid(10.0, 0.0), ValidationError);
  CHECK_THROWS_AS(time_grid(10.0, -0.1), ValidationError);
  CHECK_THROWS_AS(time_grid(-1.0, 0.1), ValidationError);
}

TEST_CASE("configs parse kebab-case keys over sensible defaults") {
  const ScenarioConfig minimal = config_from_json(json{{"povm", "p.json"}});
  CHECK(minimal.povm_path == "p.json");
  CHECK(minimal.model == "chain");
  CHECK(minimal.n_l == 20);
  CHECK(minimal.profile == "uniform");
  CHECK(minimal.omega0 == 1.0);
  CHECK(minimal.t_max == 40.0);
  CHECK(minimal.dt == 0.05);
  CHECK(minimal.epsilon == 1e-3);
  CHECK(minimal.state.kind == "mixed");
  CHECK(minimal.audit_naimark);
  CHECK(minimal.audit_cpt);
  CHECK(minimal.audit_triad);
  CHECK(minimal.n_xi == 0);

  const ScenarioConfig full = config_from_json(json{
      {"povm", "p.json"},
      {"model", "chain"},
      {"n-l", 7},
      {"profile", "pst"},
      {"omega0", 2.0},
      {"t-max", 12.5},
      {"dt", 0.1},
      {"epsilon", 0.01},
      {"state", json{{"kind", "pure"}, {"vector", json::array({json::array({1.0, 0.0}),
                                                               json::array({0.0, 0.0})})}}},
      {"audits", json{{"cpt", false}}},
      {"n-xi", 5},
  });
  CHECK(full.n_l == 7);
  CHECK(full.profile == "pst");
  CHECK(full.omega0 == 2.0);
  CHECK(full.t_max == 12.5);
  CHECK(full.dt == 0.1);
  CHECK(full.epsilon == 0.01);
  CHECK(full.state.kind == "pure");
  CHECK(full.audit_naimark);
  CHECK(!full.audit_cpt);
  CHECK(full.audit_triad);
  CHECK(full.n_xi == 5);

  // The periodic model defaults to the single-level ancilla.
  const ScenarioConfig periodic =
      config_from_json(json{{"povm", "p.json"}, {"model", "periodic"}});
  CHECK(periodic.n_l == 1);

  CHECK_THROWS_AS(config_from_json(json{{"povm", "p.json"}, {"nL", 3}}),
                  ValidationError);
}

TEST_CASE("check_config names each broken field") {
  ScenarioConfig config;
  config.povm_path = "p.json";
  CHECK(check_config(config).empty());

  config.dt = 0.0;
  auto violations = check_config(config);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].invariant == "dt must be positive");

  config.dt = 0.05;
  config.model = "periodic";
  config.n_l = 2;
  violations = check_config(config);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].invariant == "periodic model requires n-l = 1");

  config = ScenarioConfig{};
  auto empty_path = check_config(config);
  REQUIRE(empty_path.size() == 1);
  CHECK(empty_path[0].invariant == "povm path must be set");

  config.povm_path = "p.json";
  config.epsilon = 1.0;
  CHECK(check_config(config).size() == 1);
}

TEST_CASE("state specs parse from strings, objects, and files") {
  CHECK(state_spec_from_string("mixed").kind == "mixed");

  const StateSpec pure = state_spec_from_string("pure:[[1,0],[0,1]]");
  REQUIRE(pure.kind == "pure");
  REQUIRE(pure.pure.size() == 2);
  CHECK(std::abs(pure.pure(1) - Complex(0.0, 1.0)) <= 1e-15);
  // make_state normalizes: (|0> + i|1>)/sqrt(2).
  const DensityMatrix rho = make_state(pure, 2);
  CHECK(std::abs(rho.matrix()(0, 0).real() - 0.5) <= 1e-12);
  CHECK(std::abs(rho.matrix()(0, 1) - Complex(0.0, -0.5)) <= 1e-12);

  const StateSpec density = state_spec_from_string(
      "density:[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]");
  REQUIRE(density.kind == "density");
  CHECK((make_state(density, 2).matrix() - 0.5 * Matrix::Identity(2, 2)).norm() <=
        1e-12);

  const auto dir = properties::scratch_dir("statespec");
  const std::string path = write_text(
      dir / "state.json", R"({"kind": "pure", "vector": [[0,0],[1,0]]})");
  const StateSpec from_file = state_spec_from_string("@" + path);
  CHECK(from_file.kind == "pure");
  CHECK(std::abs(from_file.pure(1) - Complex(1.0, 0.0)) <= 1e-15);

  CHECK((make_state(state_spec_from_string("mixed"), 3).matrix() -
         Matrix::Identity(3, 3) / 3.0)
            .norm() <= 1e-14);

  CHECK_THROWS_AS(state_spec_from_string("bloch:+x"), ValidationError);
  CHECK_THROWS_AS(state_spec_from_string("pure:not json"), ValidationError);
  CHECK_THROWS_AS(make_state(pure, 3), DimensionError);
  // A matrix that is not a state is rejected at construction.
  CHECK_THROWS_AS(
      make_state(state_spec_from_string("density:[[[1,0],[0,0]],[[0,0],[1,0]]]"),
                 2),
      ValidationError);
}

TEST_CASE("validate_config_file folds POVM and register checks in") {
  const auto dir = properties::scratch_dir("validate");
  const std::string povm_path = write_trine(dir);

  const std::string good = write_text(
      dir / "good.json", std::string(R"({"povm": ")") + povm_path + R"("})");
  CHECK(validate_config_file(good).empty());

  // A POVM whose effects sum to 0.9 I must surface a completeness violation.
  Povm defective = fixtures::trine_povm();
  for (Matrix& f : defective.effects) f *= 0.9;
  const std::string defective_path = (dir / "defective.json").string();
  save_povm(defective, defective_path);
  const std::string bad_povm = write_text(
      dir / "bad_povm.json",
      std::string(R"({"povm": ")") + defective_path + R"("})");
  const auto povm_violations = validate_config_file(bad_povm);
  REQUIRE(!povm_violations.empty());
  bool mentions_completeness = false;
  for (const auto& v : povm_violations) {
    if (v.invariant.find("completeness") != std::string::npos) {
      mentions_completeness = true;
      CHECK(std::abs(v.residual - 0.1 * std::sqrt(2.0)) <= 1e-12);
    }
  }
  CHECK(mentions_completeness);

  // Register too small for the trine spectrum {0, 1, 2}.
  const std::string small_register = write_text(
      dir / "small_register.json",
      std::string(R"({"povm": ")") + povm_path + R"(", "n-xi": 2})");
  CHECK(!validate_config_file(small_register).empty());

  const std::string missing = write_text(
      dir / "missing.json", R"({"povm": "/nonexistent/povm.json"})");
  CHECK(!validate_config_file(missing).empty());
}

TEST_CASE("run_scenario writes the trace table and a faithful summary") {
  const auto dir = properties::scratch_dir("run");
  ScenarioConfig config;
  config.povm_path = write_trine(dir);
  config.state = state_spec_from_string("pure:[[1,0],[0,0]]");
  config.epsilon = 0.05;
  const ScenarioResult result = run_scenario(config, (dir / "out").string());

  CHECK(result.plateau_status == "ok");
  CHECK(count_lines(result.trace_path) == 802); // header + 801 grid points

  std::ifstream trace(result.trace_path);
  std::string header;
  std::getline(trace, header);
  CHECK(header.rfind("t,p0,xi0_phase,beta_abs_0", 0) == 0);
  std::string first_row;
  std::getline(trace, first_row);
  CHECK(first_row.rfind("0,1,", 0) == 0); // t = 0: P0 = 1, phase 0

  std::ifstream summary_in(result.summary_path);
  const json summary = json::parse(summary_in);

  const auto& p = summary.at("probabilities");
  CHECK(std::abs(p.at("direct")[0].get<double>() - 2.0 / 3.0) <= 1e-12);
  CHECK(std::abs(p.at("naimark")[1].get<double>() - 1.0 / 6.0) <= 1e-12);
  CHECK(std::abs(p.at("projective")[2].get<double>() - 1.0 / 6.0) <= 1e-12);
  CHECK(p.at("max-route-spread").get<double>() <= 1e-12);

  CHECK(summary.at("naimark").at("max-detection-residual").get<double>() <= 1e-10);
  CHECK(summary.at("plateau").at("status").get<std::string>() == "ok");
  CHECK(summary.at("plateau").at("t-start").get<double>() <= 5.0);
  CHECK(!summary.at("revivals").at("times").empty());

  CHECK(summary.at("cpt").at("max-pointer-gram-residual").get<double>() <= 1e-10);
  CHECK(summary.at("cpt").at("max-cpt-residual").get<double>() <= 1e-10);
  CHECK(summary.at("triad").at("max-marginal-deviation").get<double>() <= 1e-12);
  CHECK(summary.at("triad").at("discard-probability").get<double>() <= 1e-12);
}

TEST_CASE("POVM files fail loudly when unreadable or malformed") {
  const auto dir = properties::scratch_dir("povmio");
  CHECK_THROWS_AS(load_povm((dir / "absent.json").string()), IoError);

  const std::string malformed = write_text(dir / "broken.json", "{not json");
  CHECK_THROWS_WITH_AS(load_povm(malformed),
                       doctest::Contains("malformed JSON"), ValidationError);

  const std::string keyless = write_text(dir / "keyless.json", R"({"dim": 2})");
  CHECK_THROWS_WITH_AS(load_povm(keyless), doctest::Contains("effects"),
                       ValidationError);
}

TEST_CASE("the CLI validates, simulates, and audits end to end") {
  const auto dir = properties::scratch_dir("cli");
  const std::string povm_path = write_trine(dir);
  const std::string config_path = write_text(
      dir / "config.json",
      std::string(R"({"povm": ")") + povm_path +
          R"(", "t-max": 10, "state": "mixed"})");

  const CommandResult help = run_cli("--help");
  CHECK(help.status == 0);
  CHECK(help.output.find("simulate") != std::string::npos);

  const CommandResult ok = run_cli("validate '" + config_path + "'");
  CHECK(ok.status == 0);
  CHECK(ok.output.rfind("ok:", 0) == 0);

  // Validation failure: POVM JSON without an effects array, exit code 2.
  const std::string keyless = write_text(dir / "keyless.json", R"({"dim": 2})");
  const std::string bad_config = write_text(
      dir / "bad.json", std::string(R"({"povm": ")") + keyless + R"("})");
  const CommandResult invalid = run_cli("validate '" + bad_config + "'");
  CHECK(invalid.status == 2);
  CHECK(invalid.output.find("violation:") != std::string::npos);
  CHECK(invalid.output.find("effects") != std::string::npos);

  // Missing files are I/O failures, exit code 3.
  const CommandResult io = run_cli("simulate --config '" +
                                   (dir / "absent.json").string() + "'");
  CHECK(io.status == 3);

  const CommandResult sim = run_cli(
      "simulate --config '" + config_path + "' --out-dir '" +
      (dir / "out").string() + "'");
  CHECK(sim.status == 0);
  CHECK(sim.output.find("plateau: ok") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "out" / "trace.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "summary.json"));

  const CommandResult audit =
      run_cli("audit-cpt --povm '" + povm_path + "' --overlap 0.5");
  CHECK(audit.status == 0);
  const json audit_out = json::parse(audit.output);
  CHECK(std::abs(audit_out.at("cpt-residual").get<double>() -
                 std::sqrt(2.0) / 4.0) <= 1e-12);
  CHECK(audit_out.at("kraus-residual").get<double>() <= 1e-10);
  CHECK(!audit_out.at("cpt").get<bool>());

  const CommandResult triad = run_cli(
      "triad --povm '" + povm_path + "' --state 'pure:[[1,0],[0,0]]'");
  CHECK(triad.status == 0);
  const json triad_out = json::parse(triad.output);
  CHECK(std::abs(triad_out.at("marginals")[0].get<double>() - 2.0 / 3.0) <=
        1e-12);
  CHECK(std::abs(triad_out.at("marginals")[1].get<double>() - 1.0 / 6.0) <=
        1e-12);
  CHECK(triad_out.at("reduced-state-distance-from-rho-out").get<double>() >
        0.01);
}

TEST_CASE("randomized pipeline invariants hold") {
  for (const auto& outcome :
       {properties::scenario_determinism(), properties::povm_json_round_trip()}) {
    INFO(outcome.name, ": ", outcome.detail);
    CHECK(outcome.ok);
    CHECK(outcome.cases >= 3);
  }
}

} // TEST_SUITE
