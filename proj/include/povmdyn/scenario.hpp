#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "povmdyn/qmatrix.hpp"
#include "povmdyn/states.hpp"

namespace povmdyn {

// Initial system state: maximally mixed, a pure vector, or an explicit
// density matrix.
struct StateSpec {
  std::string kind = "mixed"; // mixed | pure | density
  Vector pure;
  Matrix density;
};

StateSpec state_spec_from_json(const nlohmann::json& j);
// "mixed", "pure:<json vector>", "density:<json matrix>", or "@file.json".
StateSpec state_spec_from_string(const std::string& text);
DensityMatrix make_state(const StateSpec& spec, Index dim);

struct ScenarioConfig {
  std::string povm_path;
  std::string model = "chain";    // chain | periodic
  Index n_l = 20;
  std::string profile = "uniform"; // uniform | pst
  double omega0 = 1.0;
  double t_max = 40.0;
  double dt = 0.05;
  double epsilon = 1e-3;
  StateSpec state;
  bool audit_naimark = true;
  bool audit_cpt = true;
  bool audit_triad = true;
  Index n_xi = 0; // 0 = choose max(2, n_gamma)
};

ScenarioConfig config_from_json(const nlohmann::json& j);

// Structural checks that need no file access; empty result means valid.
std::vector<Violation> check_config(const ScenarioConfig& config);

// Full report for a config file: structure, ranges, POVM file invariants,
// state consistency. Never runs the simulation.
std::vector<Violation> validate_config_file(const std::string& path);

// Uniform grid 0, dt, ..., covering [0, t_max] (last point within one part in
// 1e9 of t_max is kept).
std::vector<double> time_grid(double t_max, double dt);

struct ScenarioResult {
  std::string trace_path;
  std::string summary_path;
  std::string plateau_status; // "ok" | "no-plateau"
};

// Runs the configured pipeline and writes trace.csv and summary.json under
// out_dir; byte-identical outputs for identical configs.
ScenarioResult run_scenario(const ScenarioConfig& config,
                            const std::string& out_dir);

} // namespace povmdyn
