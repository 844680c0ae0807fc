#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "povmdyn/cpt_audit.hpp"
#include "povmdyn/dynamics.hpp"
#include "povmdyn/errors.hpp"
#include "povmdyn/naimark.hpp"
#include "povmdyn/scenario.hpp"
#include "povmdyn/states.hpp"
#include "povmdyn/triad.hpp"

namespace py = pybind11;
using namespace povmdyn;

namespace {

MeasurementSet measurement_set(const std::vector<Matrix>& m_ops) {
  return MeasurementSet::validated(m_ops);
}

Povm povm_of(std::vector<Matrix> effects) {
  return validate_povm(std::move(effects), {});
}

ChainSpec chain_of(const std::vector<double>& omegas) {
  ChainSpec spec;
  spec.n_levels = static_cast<Index>(omegas.size());
  spec.omegas = omegas;
  return spec;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "POVM measurement dynamics: Naimark models, chain evolution, "
            "CPT audits";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("tensor", &tensor, py::arg("a"), py::arg("b"),
        "Kronecker product, system-major ordering.");
  m.def(
      "partial_trace",
      [](const Matrix& mat, Index dim_first, Index dim_second,
         const std::string& keep) {
        if (keep != "first" && keep != "second") {
          throw ValidationError("keep must be \"first\" or \"second\"");
        }
        return partial_trace(mat, dim_first, dim_second,
                             keep == "first" ? Keep::First : Keep::Second);
      },
      py::arg("m"), py::arg("dim_first"), py::arg("dim_second"),
      py::arg("keep") = "first", "Reduced matrix over the kept factor.");
  m.def("psd_sqrt", &psd_sqrt, py::arg("f"),
        "Principal square root of a PSD matrix.");
  m.def("evolve_unitary", &evolve_unitary, py::arg("h"), py::arg("t"),
        "exp(-i h t) via Hermitian eigendecomposition.");
  m.def("trace_distance", &trace_distance, py::arg("a"), py::arg("b"));

  m.def(
      "check_povm",
      [](const std::vector<Matrix>& effects,
         const std::vector<std::string>& labels) {
        std::vector<std::pair<std::string, double>> out;
        for (const Violation& v : check_povm(effects, labels)) {
          out.emplace_back(v.invariant, v.residual);
        }
        return out;
      },
      py::arg("effects"), py::arg("labels") = std::vector<std::string>{},
      "List of violated POVM invariants with residuals (empty = valid).");
  m.def(
      "detection_ops",
      [](std::vector<Matrix> effects) {
        return detection_ops(povm_of(std::move(effects))).ops;
      },
      py::arg("effects"), "Principal-root detection operators of a POVM.");
  m.def(
      "probabilities",
      [](const Matrix& rho, std::vector<Matrix> effects) {
        return probabilities(DensityMatrix(rho), povm_of(std::move(effects)));
      },
      py::arg("rho"), py::arg("effects"), "Outcome probabilities Tr[rho F].");
  m.def(
      "post_measurement",
      [](const Matrix& rho, const std::vector<Matrix>& m_ops) {
        const PostMeasurement pm =
            post_measurement(DensityMatrix(rho), measurement_set(m_ops));
        py::list detected;
        for (const DetectedState& d : pm.detected) {
          detected.append(py::make_tuple(
              d.probability,
              d.state ? py::cast(d.state->matrix()) : py::none()));
        }
        return py::make_tuple(pm.rho_out.matrix(), detected);
      },
      py::arg("rho"), py::arg("m_ops"),
      "(rho_out, [(p, detected state or None)]).");

  m.def(
      "naimark_unitary",
      [](const std::vector<Matrix>& m_ops) {
        return naimark_unitary(measurement_set(m_ops)).v_sa;
      },
      py::arg("m_ops"),
      "Joint unitary mapping |psi>|ready> to sum_g M^g|psi>|g>.");
  m.def(
      "naimark_recovery",
      [](const std::vector<Matrix>& m_ops, std::vector<Matrix> effects,
         const Matrix& rho) {
        const NaimarkReport report =
            recover_and_verify(naimark_unitary(measurement_set(m_ops)),
                               povm_of(std::move(effects)), DensityMatrix(rho));
        py::dict out;
        out["m_residual"] = report.max_m_residual;
        out["f_residual"] = report.max_f_residual;
        out["p_deviation"] = report.max_p_deviation;
        out["p_hat"] = report.p_hat;
        return out;
      },
      py::arg("m_ops"), py::arg("effects"), py::arg("rho"),
      "Residuals of detection operators, effects, and statistics recovered "
      "from the joint unitary.");

  m.def("coupling_profile",
        [](const std::string& kind, Index n_l, double omega0) {
          return coupling_profile(kind, n_l, omega0).omegas;
        },
        py::arg("kind"), py::arg("n_l"), py::arg("omega0") = 1.0,
        "Chain couplings: \"uniform\" or \"pst\".");
  m.def(
      "beta_amplitudes",
      [](const std::vector<double>& omegas, const std::vector<double>& times) {
        const EvolutionTrace trace = beta_amplitudes(chain_of(omegas), times);
        Matrix out(static_cast<Index>(times.size()),
                   static_cast<Index>(omegas.size()) + 1);
        for (size_t i = 0; i < trace.betas.size(); ++i) {
          out.row(static_cast<Index>(i)) = trace.betas[i].transpose();
        }
        return out;
      },
      py::arg("omegas"), py::arg("times"),
      "Row per time: amplitudes beta_0..beta_nL of the excitation walk.");
  m.def(
      "evolve_joint",
      [](const Matrix& rho, const std::vector<Matrix>& m_ops,
         const std::vector<double>& omegas, double t) {
        return evolve_joint(DensityMatrix(rho), measurement_set(m_ops),
                            chain_of(omegas), t)
            .matrix();
      },
      py::arg("rho"), py::arg("m_ops"), py::arg("omegas"), py::arg("t"),
      "Full-matrix joint state at time t.");
  m.def(
      "closed_form_joint",
      [](const Matrix& rho, const std::vector<Matrix>& m_ops,
         const std::vector<double>& omegas, double t) {
        return closed_form_joint(DensityMatrix(rho), measurement_set(m_ops),
                                 chain_of(omegas), t)
            .matrix();
      },
      py::arg("rho"), py::arg("m_ops"), py::arg("omegas"), py::arg("t"),
      "Three-term closed form of the joint state at time t.");

  m.def(
      "cpt_deviation",
      [](const Matrix& overlaps, const std::vector<Matrix>& m_ops) {
        const CptDeviation dev =
            cpt_deviation(gram_from_overlaps(overlaps), measurement_set(m_ops));
        return py::make_tuple(dev.kraus_residual, dev.cpt_residual);
      },
      py::arg("overlaps"), py::arg("m_ops"),
      "(kraus_residual, cpt_residual) of the map forced by pointer overlaps.");

  m.def(
      "triad_statistics",
      [](const std::vector<Matrix>& m_ops, const Matrix& rho, Index n_xi) {
        const NaimarkModel nm = naimark_unitary(measurement_set(m_ops));
        const XiSpec xi = default_xi_spec(nm.layout.n_gamma, n_xi);
        const TriadModel tm = triad_projectors(
            nm, xi, Matrix::Identity(nm.layout.dim(), nm.layout.dim()));
        const DensityMatrix state(rho);
        const DoubleLabelPovm dl = double_label_povm(tm, state);
        const TriadReducedState red =
            triad_reduced_state(tm, state, xi_orthogonality_time(xi));
        py::dict out;
        out["p_projective"] = triad_probabilities(tm, state);
        out["discard_probability"] = discard_probability(tm, state);
        out["marginals"] = dl.marginals;
        out["max_marginal_deviation"] = dl.max_marginal_deviation;
        out["reduced_state"] = red.rho_s.matrix();
        return out;
      },
      py::arg("m_ops"), py::arg("rho"), py::arg("n_xi") = 0,
      "Readout-register route: projective statistics, double-label marginals, "
      "decohered reduced state.");

  m.def(
      "run_scenario",
      [](const std::string& config_json, const std::string& out_dir) {
        ScenarioConfig config;
        try {
          config = config_from_json(nlohmann::json::parse(config_json));
        } catch (const nlohmann::json::parse_error& e) {
          throw ValidationError(std::string("malformed config JSON: ") +
                                e.what());
        }
        const ScenarioResult result = run_scenario(config, out_dir);
        py::dict out;
        out["trace"] = result.trace_path;
        out["summary"] = result.summary_path;
        out["plateau_status"] = result.plateau_status;
        return out;
      },
      py::arg("config_json"), py::arg("out_dir") = ".",
      "Run a full scenario from a config JSON string; writes trace.csv and "
      "summary.json.");
}
