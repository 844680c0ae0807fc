#include "povmdyn/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "povmdyn/cpt_audit.hpp"
#include "povmdyn/dynamics.hpp"
#include "povmdyn/errors.hpp"
#include "povmdyn/naimark.hpp"
#include "povmdyn/povm_json.hpp"
#include "povmdyn/triad.hpp"

namespace povmdyn {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ValidationError("unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

} // namespace

StateSpec state_spec_from_json(const json& j) {
  StateSpec spec;
  if (j.is_string()) {
    spec.kind = j.get<std::string>();
    if (spec.kind != "mixed") {
      throw ValidationError("state \"" + spec.kind +
                            "\" needs an object with its vector or matrix");
    }
    return spec;
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ValidationError("state must be \"mixed\" or an object with a \"kind\"");
  }
  spec.kind = j["kind"].get<std::string>();
  if (spec.kind == "mixed") {
    reject_unknown_keys(j, {"kind"}, "state");
  } else if (spec.kind == "pure") {
    reject_unknown_keys(j, {"kind", "vector"}, "state");
    if (!j.contains("vector")) {
      throw ValidationError("pure state requires a \"vector\" key");
    }
    spec.pure = vector_from_json(j["vector"]);
  } else if (spec.kind == "density") {
    reject_unknown_keys(j, {"kind", "matrix"}, "state");
    if (!j.contains("matrix")) {
      throw ValidationError("density state requires a \"matrix\" key");
    }
    spec.density = matrix_from_json(j["matrix"]);
  } else {
    throw ValidationError("state kind \"" + spec.kind +
                          "\" is not one of mixed, pure, density");
  }
  return spec;
}

StateSpec state_spec_from_string(const std::string& text) {
  if (text == "mixed") {
    return StateSpec{};
  }
  if (!text.empty() && text[0] == '@') {
    return state_spec_from_json(read_json_file(text.substr(1)));
  }
  const auto parse_payload = [&](size_t offset) {
    try {
      return json::parse(text.substr(offset));
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("malformed state JSON: ") + e.what());
    }
  };
  if (text.rfind("pure:", 0) == 0) {
    StateSpec spec;
    spec.kind = "pure";
    spec.pure = vector_from_json(parse_payload(5));
    return spec;
  }
  if (text.rfind("density:", 0) == 0) {
    StateSpec spec;
    spec.kind = "density";
    spec.density = matrix_from_json(parse_payload(8));
    return spec;
  }
  throw ValidationError("state must be mixed, pure:<json>, density:<json>, "
                        "or @file.json");
}

DensityMatrix make_state(const StateSpec& spec, Index dim) {
  if (spec.kind == "mixed") {
    return DensityMatrix::maximally_mixed(dim);
  }
  if (spec.kind == "pure") {
    if (spec.pure.size() != dim) {
      throw DimensionError("pure state has length " +
                            std::to_string(spec.pure.size()) +
                            ", expected " + std::to_string(dim));
    }
    return DensityMatrix::pure(spec.pure);
  }
  if (spec.kind == "density") {
    if (spec.density.rows() != dim || spec.density.cols() != dim) {
      throw DimensionError("density matrix shape does not match dimension " +
                            std::to_string(dim));
    }
    return DensityMatrix(spec.density);
  }
  throw ValidationError("state kind \"" + spec.kind +
                        "\" is not one of mixed, pure, density");
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) {
    throw ValidationError("config must be a JSON object");
  }
  reject_unknown_keys(j,
                      {"povm", "model", "n-l", "profile", "omega0", "t-max",
                       "dt", "epsilon", "state", "audits", "n-xi"},
                      "config");

  ScenarioConfig config;
  const auto read_string = [&](const char* key, std::string& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) {
      throw ValidationError(std::string("config key \"") + key +
                            "\" must be a string");
    }
    out = j[key].get<std::string>();
  };
  const auto read_number = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) {
      throw ValidationError(std::string("config key \"") + key +
                            "\" must be a number");
    }
    out = j[key].get<double>();
  };
  const auto read_index = [&](const char* key, Index& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) {
      throw ValidationError(std::string("config key \"") + key +
                            "\" must be an integer");
    }
    out = j[key].get<Index>();
  };

  read_string("povm", config.povm_path);
  read_string("model", config.model);
  read_index("n-l", config.n_l);
  read_string("profile", config.profile);
  read_number("omega0", config.omega0);
  read_number("t-max", config.t_max);
  read_number("dt", config.dt);
  read_number("epsilon", config.epsilon);
  read_index("n-xi", config.n_xi);
  if (config.model == "periodic" && !j.contains("n-l")) {
    config.n_l = 1;
  }
  if (j.contains("state")) {
    config.state = state_spec_from_json(j["state"]);
  }
  if (j.contains("audits")) {
    const json& a = j["audits"];
    if (!a.is_object()) {
      throw ValidationError("config key \"audits\" must be an object");
    }
    reject_unknown_keys(a, {"naimark", "cpt", "triad"}, "audits");
    const auto read_flag = [&](const char* key, bool& out) {
      if (!a.contains(key)) return;
      if (!a[key].is_boolean()) {
        throw ValidationError(std::string("audit flag \"") + key +
                              "\" must be a boolean");
      }
      out = a[key].get<bool>();
    };
    read_flag("naimark", config.audit_naimark);
    read_flag("cpt", config.audit_cpt);
    read_flag("triad", config.audit_triad);
  }
  return config;
}

std::vector<Violation> check_config(const ScenarioConfig& config) {
  std::vector<Violation> violations;
  if (config.povm_path.empty()) {
    violations.push_back({"povm path must be set", 0.0});
  }
  if (config.model != "chain" && config.model != "periodic") {
    violations.push_back({"model must be chain or periodic", 0.0});
  }
  if (config.profile != "uniform" && config.profile != "pst") {
    violations.push_back({"profile must be uniform or pst", 0.0});
  }
  if (config.n_l < 1) {
    violations.push_back({"n-l must be at least 1", 0.0});
  }
  if (config.model == "periodic" && config.n_l != 1) {
    violations.push_back({"periodic model requires n-l = 1", 0.0});
  }
  if (!(config.omega0 > 0.0) || !std::isfinite(config.omega0)) {
    violations.push_back({"omega0 must be positive", 0.0});
  }
  if (!(config.t_max > 0.0) || !std::isfinite(config.t_max)) {
    violations.push_back({"t-max must be positive", 0.0});
  }
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
    violations.push_back({"dt must be positive", 0.0});
  }
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
    violations.push_back({"epsilon must lie in (0, 1)", 0.0});
  }
  if (config.state.kind != "mixed" && config.state.kind != "pure" &&
      config.state.kind != "density") {
    violations.push_back({"state kind must be mixed, pure, or density", 0.0});
  }
  if (config.n_xi < 0) {
    violations.push_back({"n-xi must be positive when given", 0.0});
  }
  return violations;
}

std::vector<Violation> validate_config_file(const std::string& path) {
  const json raw = read_json_file(path);
  ScenarioConfig config;
  try {
    config = config_from_json(raw);
  } catch (const ValidationError& e) {
    return {{e.what(), 0.0}};
  }
  std::vector<Violation> violations = check_config(config);
  if (config.povm_path.empty()) {
    return violations;
  }

  json povm_raw;
  try {
    povm_raw = read_json_file(config.povm_path);
  } catch (const Error& e) {
    violations.push_back({e.what(), 0.0});
    return violations;
  }
  Index dim = 0;
  Index n_gamma = 0;
  try {
    std::vector<Matrix> effects;
    std::vector<std::string> labels;
    if (!povm_raw.is_object() || !povm_raw.contains("effects")) {
      throw ValidationError("POVM file is missing the \"effects\" key");
    }
    if (!povm_raw["effects"].is_array() || povm_raw["effects"].empty()) {
      throw ValidationError("\"effects\" must be a non-empty array of matrices");
    }
    for (const json& e : povm_raw["effects"]) {
      effects.push_back(matrix_from_json(e));
    }
    if (povm_raw.contains("labels")) {
      for (const json& l : povm_raw["labels"]) {
        labels.push_back(l.get<std::string>());
      }
    }
    for (const Violation& v : check_povm(effects, labels)) {
      violations.push_back(v);
    }
    dim = effects[0].rows();
    n_gamma = static_cast<Index>(effects.size());
  } catch (const ValidationError& e) {
    violations.push_back({e.what(), 0.0});
    return violations;
  }

  try {
    make_state(config.state, dim);
  } catch (const ValidationError& e) {
    violations.push_back({e.what(), 0.0});
  }
  if (config.n_xi > 0 && static_cast<double>(config.n_xi) <
                             static_cast<double>(n_gamma)) {
    violations.push_back(
        {"n-xi must be at least the outcome count for exact readout", 0.0});
  }
  return violations;
}

std::vector<double> time_grid(double t_max, double dt) {
  if (!(t_max > 0.0) || !(dt > 0.0)) {
    throw ValidationError("time grid requires positive t-max and dt");
  }
  const double slack = 1e-9 * std::max(1.0, t_max);
  const auto n = static_cast<size_t>(std::floor((t_max + slack) / dt));
  std::vector<double> times(n + 1);
  for (size_t i = 0; i <= n; ++i) {
    times[i] = static_cast<double>(i) * dt;
  }
  return times;
}

ScenarioResult run_scenario(const ScenarioConfig& config,
                            const std::string& out_dir) {
  const std::vector<Violation> violations = check_config(config);
  if (!violations.empty()) {
    throw ValidationError(describe(violations));
  }

  const Povm povm = load_povm(config.povm_path);
  const MeasurementSet ms = detection_ops(povm);
  const DensityMatrix rho = make_state(config.state, povm.dim);
  const Index n_gamma = static_cast<Index>(povm.effects.size());

  const ChainSpec spec =
      config.model == "periodic"
          ? coupling_profile("uniform", 1, config.omega0)
          : coupling_profile(config.profile, config.n_l, config.omega0);
  const AncillaLayout layout{n_gamma, spec.n_levels};

  const std::vector<double> times = time_grid(config.t_max, config.dt);
  const EvolutionTrace trace = beta_amplitudes(spec, times);

  // Outcome statistics by three independent routes.
  const std::vector<double> p_direct = probabilities(rho, povm);
  const NaimarkModel nm = naimark_unitary(ms);
  const NaimarkReport nrep = recover_and_verify(nm, povm, rho);
  const XiSpec xi = default_xi_spec(n_gamma, config.n_xi);
  const TriadModel tm = triad_projectors(
      nm, xi, Matrix::Identity(nm.layout.dim(), nm.layout.dim()));
  const std::vector<double> p_projective = triad_probabilities(tm, rho);
  double route_spread = 0.0;
  for (Index g = 0; g < n_gamma; ++g) {
    const size_t i = static_cast<size_t>(g);
    route_spread = std::max(route_spread, std::abs(nrep.p_hat[i] - p_direct[i]));
    route_spread = std::max(route_spread, std::abs(p_projective[i] - p_direct[i]));
  }

  const auto window = plateau_window(trace, config.epsilon);
  const std::vector<double> revivals = revival_times(trace, config.epsilon);

  std::filesystem::create_directories(out_dir);
  const std::string trace_path =
      (std::filesystem::path(out_dir) / "trace.csv").string();
  const std::string summary_path =
      (std::filesystem::path(out_dir) / "summary.json").string();

  std::ofstream csv(trace_path);
  if (!csv) {
    throw IoError("cannot write " + trace_path);
  }
  csv << "t,p0,xi0_phase";
  for (Index l = 0; l <= spec.n_levels; ++l) {
    csv << ",beta_abs_" << l;
  }
  csv << "\n";
  for (size_t i = 0; i < trace.times.size(); ++i) {
    csv << fmt17(trace.times[i]) << ',' << fmt17(trace.p0[i]) << ','
        << fmt17(trace.xi0_phase[i]);
    for (Index l = 0; l <= spec.n_levels; ++l) {
      csv << ',' << fmt17(std::abs(trace.betas[i](l)));
    }
    csv << "\n";
  }
  if (!csv.good()) {
    throw IoError("failed while writing " + trace_path);
  }
  csv.close();

  ordered_json summary;
  summary["config"] = {{"povm", config.povm_path},
                       {"model", config.model},
                       {"n-l", spec.n_levels},
                       {"profile", spec.profile},
                       {"omega0", config.omega0},
                       {"t-max", config.t_max},
                       {"dt", config.dt},
                       {"epsilon", config.epsilon},
                       {"state", config.state.kind},
                       {"n-xi", xi.n_xi}};
  summary["probabilities"] = {{"labels", povm.labels},
                              {"direct", p_direct},
                              {"naimark", nrep.p_hat},
                              {"projective", p_projective},
                              {"max-route-spread", route_spread}};
  if (config.audit_naimark) {
    summary["naimark"] = {{"max-detection-residual", nrep.max_m_residual},
                          {"max-effect-residual", nrep.max_f_residual},
                          {"max-probability-deviation", nrep.max_p_deviation}};
  }

  const std::string status = window ? "ok" : "no-plateau";
  ordered_json plateau = {{"status", status}, {"epsilon", config.epsilon}};
  if (window) {
    plateau["t-start"] = window->t_start;
    plateau["t-end"] = window->t_end;
    plateau["length"] = window->t_end - window->t_start;
  }
  summary["plateau"] = plateau;
  summary["revivals"] = {
      {"times", revivals},
      {"expected-near", static_cast<double>(spec.n_levels) / config.omega0},
      {"note", "revival spacing read as n_L/omega0 in physical time, "
               "tolerance plus or minus 50 percent"}};

  if (config.audit_cpt) {
    // Gram of the chain pointer states at every sampled time where they are
    // defined; the induced map must stay CPT throughout.
    size_t sampled = 0;
    double max_gram_residual = 0.0;
    double max_kraus = 0.0;
    double max_cpt = 0.0;
    for (size_t i = 0; i < trace.times.size(); ++i) {
      if (trace.p0[i] >= 1.0 - 1e-6) continue;
      ++sampled;
      const std::vector<Vector> pointers =
          pointer_states(n_gamma, trace.betas[i], layout);
      const GramModel gm = gram_matrix(pointers);
      max_gram_residual = std::max(
          max_gram_residual,
          (gm.q - Matrix::Identity(n_gamma, n_gamma)).norm());
      const CptDeviation dev = cpt_deviation(gm, ms);
      max_kraus = std::max(max_kraus, dev.kraus_residual);
      max_cpt = std::max(max_cpt, dev.cpt_residual);
    }
    summary["cpt"] = {{"sampled-times", sampled},
                      {"max-pointer-gram-residual", max_gram_residual},
                      {"max-kraus-residual", max_kraus},
                      {"max-cpt-residual", max_cpt}};
  }

  if (config.audit_triad) {
    const double t_star = xi_orthogonality_time(xi);
    const TriadReducedState red = triad_reduced_state(tm, rho, t_star);
    const PostMeasurement pm = post_measurement(rho, ms);
    const DoubleLabelPovm dl = double_label_povm(tm, rho);
    double max_n_completeness = 0.0;
    for (double r : red.completeness_residuals) {
      max_n_completeness = std::max(max_n_completeness, r);
    }
    summary["triad"] = {
        {"n-xi", xi.n_xi},
        {"orthogonality-time", t_star},
        {"recurrence-time", 2.0 * std::numbers::pi},
        {"note", "finite readout register: overlaps vanish exactly at the "
                 "orthogonality time and recur with period 2*pi"},
        {"discard-probability", discard_probability(tm, rho)},
        {"marginals", dl.marginals},
        {"max-marginal-deviation", dl.max_marginal_deviation},
        {"effect-completeness-residual", dl.completeness_residual},
        {"max-readout-completeness-residual", max_n_completeness},
        {"reduced-state-distance-from-rho-out",
         trace_distance(red.rho_s.matrix(), pm.rho_out.matrix())}};
  }

  std::ofstream out(summary_path);
  if (!out) {
    throw IoError("cannot write " + summary_path);
  }
  out << summary.dump(2) << "\n";
  if (!out.good()) {
    throw IoError("failed while writing " + summary_path);
  }
  return ScenarioResult{trace_path, summary_path, status};
}

} // namespace povmdyn
