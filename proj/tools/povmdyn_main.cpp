#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "povmdyn/cpt_audit.hpp"
#include "povmdyn/dynamics.hpp"
#include "povmdyn/errors.hpp"
#include "povmdyn/naimark.hpp"
#include "povmdyn/povm_json.hpp"
#include "povmdyn/scenario.hpp"
#include "povmdyn/states.hpp"
#include "povmdyn/triad.hpp"

namespace {

using namespace povmdyn;
using nlohmann::ordered_json;

int run_validate(const std::string& config_path) {
  const std::vector<Violation> violations = validate_config_file(config_path);
  if (violations.empty()) {
    std::cout << "ok: config and POVM satisfy all invariants\n";
    return 0;
  }
  for (const Violation& v : violations) {
    std::cout << "violation: " << v.invariant;
    if (v.residual != 0.0) {
      std::cout << " (residual " << v.residual << ")";
    }
    std::cout << "\n";
  }
  return 2;
}

int run_audit_cpt(const std::string& povm_path, const std::string& gram_path,
                  double overlap) {
  const Povm povm = load_povm(povm_path);
  const MeasurementSet ms = detection_ops(povm);
  const Index n = static_cast<Index>(povm.effects.size());

  GramModel gm = [&] {
    if (!gram_path.empty()) {
      return gram_from_overlaps(matrix_from_json(read_json_file(gram_path)));
    }
    Matrix q = Matrix::Constant(n, n, Complex(overlap, 0.0));
    q.diagonal().setOnes();
    return gram_from_overlaps(q);
  }();

  const CptDeviation dev = cpt_deviation(gm, ms);
  ordered_json out;
  out["n-gamma"] = n;
  out["overlap-model"] = gram_path.empty() ? "uniform-offdiagonal" : "file";
  if (gram_path.empty()) {
    out["offdiagonal-overlap"] = overlap;
  }
  out["gram-eigenvalues"] = std::vector<double>(
      gm.eigen.eigenvalues.data(),
      gm.eigen.eigenvalues.data() + gm.eigen.eigenvalues.size());
  out["kraus-residual"] = dev.kraus_residual;
  out["cpt-residual"] = dev.cpt_residual;
  out["cpt"] = dev.cpt_residual <= 1e-10;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_triad(const std::string& povm_path, const std::string& state_text,
              long n_xi, double t, bool t_given) {
  const Povm povm = load_povm(povm_path);
  const MeasurementSet ms = detection_ops(povm);
  const DensityMatrix rho = make_state(state_spec_from_string(state_text), povm.dim);
  const NaimarkModel nm = naimark_unitary(ms);
  const XiSpec xi = default_xi_spec(static_cast<Index>(povm.effects.size()),
                                    static_cast<Index>(n_xi));
  const TriadModel tm = triad_projectors(
      nm, xi, Matrix::Identity(nm.layout.dim(), nm.layout.dim()));

  const double t_star = xi_orthogonality_time(xi);
  const double t_eval = t_given ? t : t_star;
  const NaimarkReport nrep = recover_and_verify(nm, povm, rho);
  const TriadReducedState red = triad_reduced_state(tm, rho, t_eval);
  const DoubleLabelPovm dl = double_label_povm(tm, rho);
  const PostMeasurement pm = post_measurement(rho, ms);

  ordered_json out;
  out["n-xi"] = xi.n_xi;
  out["orthogonality-time"] = t_star;
  out["evaluated-at"] = t_eval;
  out["note"] = "finite readout register: overlaps vanish exactly at the "
                "orthogonality time and recur with period 2*pi";
  out["p-direct"] = probabilities(rho, povm);
  out["p-naimark"] = nrep.p_hat;
  out["p-projective"] = triad_probabilities(tm, rho);
  out["discard-probability"] = discard_probability(tm, rho);
  out["marginals"] = dl.marginals;
  out["max-marginal-deviation"] = dl.max_marginal_deviation;
  out["effect-completeness-residual"] = dl.completeness_residual;
  out["reduced-state-distance-from-rho-out"] =
      trace_distance(red.rho_s.matrix(), pm.rho_out.matrix());
  std::cout << out.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"POVM measurement dynamics: Naimark models, chain evolution, "
               "and CPT audits"};
  app.require_subcommand(1);

  std::string validate_config;
  CLI::App* validate = app.add_subcommand(
      "validate", "Check a scenario config and its POVM without running");
  validate->add_option("config", validate_config, "scenario config JSON file")
      ->required();

  std::string sim_config;
  ScenarioConfig base;
  std::string sim_state = "mixed";
  long sim_n_l = base.n_l;
  long sim_n_xi = base.n_xi;
  std::string out_dir = ".";
  bool no_naimark = false;
  bool no_cpt = false;
  bool no_triad = false;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run the measurement dynamics and write trace.csv + summary.json");
  CLI::Option* o_config =
      simulate->add_option("--config", sim_config, "scenario config JSON file");
  CLI::Option* o_povm =
      simulate->add_option("--povm", base.povm_path, "POVM JSON file");
  CLI::Option* o_model =
      simulate->add_option("--model", base.model, "chain or periodic");
  CLI::Option* o_n_l =
      simulate->add_option("--n-l", sim_n_l, "chain length n_L");
  CLI::Option* o_profile =
      simulate->add_option("--profile", base.profile, "uniform or pst");
  CLI::Option* o_omega0 =
      simulate->add_option("--omega0", base.omega0, "base coupling frequency");
  CLI::Option* o_t_max = simulate->add_option("--t-max", base.t_max,
                                              "sweep end time (units 1/omega0)");
  CLI::Option* o_dt = simulate->add_option("--dt", base.dt, "time step");
  CLI::Option* o_epsilon =
      simulate->add_option("--epsilon", base.epsilon, "plateau threshold on P0");
  CLI::Option* o_state = simulate->add_option(
      "--state", sim_state, "mixed, pure:<json>, density:<json>, or @file.json");
  CLI::Option* o_n_xi = simulate->add_option(
      "--n-xi", sim_n_xi, "readout register dimension (0 = automatic)");
  simulate->add_option("--out-dir", out_dir, "output directory");
  simulate->add_flag("--no-naimark", no_naimark, "skip the recovery audit");
  simulate->add_flag("--no-cpt", no_cpt, "skip the pointer CPT audit");
  simulate->add_flag("--no-triad", no_triad, "skip the readout-register audit");

  std::string audit_povm;
  std::string audit_gram;
  double audit_overlap = 0.5;
  CLI::App* audit = app.add_subcommand(
      "audit-cpt", "Test whether forced pointer overlaps leave a CPT map");
  audit->add_option("--povm", audit_povm, "POVM JSON file")->required();
  audit->add_option("--overlap", audit_overlap,
                    "uniform off-diagonal pointer overlap");
  audit->add_option("--gram", audit_gram,
                    "JSON matrix of pointer overlaps (overrides --overlap)");

  std::string triad_povm;
  std::string triad_state = "mixed";
  long triad_n_xi = 0;
  double triad_t = 0.0;
  CLI::App* triad = app.add_subcommand(
      "triad", "Readout-register statistics: projective route, marginals, "
               "reduced state");
  triad->add_option("--povm", triad_povm, "POVM JSON file")->required();
  triad->add_option("--state", triad_state,
                    "mixed, pure:<json>, density:<json>, or @file.json");
  triad->add_option("--n-xi", triad_n_xi,
                    "readout register dimension (0 = automatic)");
  CLI::Option* o_triad_t = triad->add_option(
      "--t", triad_t, "evaluation time (default: orthogonality time)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) {
      return run_validate(validate_config);
    }
    if (simulate->parsed()) {
      ScenarioConfig config;
      if (o_config->count() > 0) {
        config = config_from_json(read_json_file(sim_config));
      }
      if (o_povm->count() > 0) config.povm_path = base.povm_path;
      if (o_model->count() > 0) config.model = base.model;
      if (o_n_l->count() > 0) config.n_l = static_cast<Index>(sim_n_l);
      if (o_profile->count() > 0) config.profile = base.profile;
      if (o_omega0->count() > 0) config.omega0 = base.omega0;
      if (o_t_max->count() > 0) config.t_max = base.t_max;
      if (o_dt->count() > 0) config.dt = base.dt;
      if (o_epsilon->count() > 0) config.epsilon = base.epsilon;
      if (o_state->count() > 0) config.state = state_spec_from_string(sim_state);
      if (o_n_xi->count() > 0) config.n_xi = static_cast<Index>(sim_n_xi);
      if (o_config->count() == 0 && o_model->count() > 0 &&
          config.model == "periodic" && o_n_l->count() == 0) {
        config.n_l = 1;
      }
      if (no_naimark) config.audit_naimark = false;
      if (no_cpt) config.audit_cpt = false;
      if (no_triad) config.audit_triad = false;

      const ScenarioResult result = run_scenario(config, out_dir);
      std::cout << "trace: " << result.trace_path << "\n"
                << "summary: " << result.summary_path << "\n"
                << "plateau: " << result.plateau_status << "\n";
      return 0;
    }
    if (audit->parsed()) {
      return run_audit_cpt(audit_povm, audit_gram, audit_overlap);
    }
    if (triad->parsed()) {
      return run_triad(triad_povm, triad_state, triad_n_xi, triad_t,
                       o_triad_t->count() > 0);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
