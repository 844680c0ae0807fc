"""POVM measurement dynamics: Naimark models, chain evolution, CPT audits."""

from povmdyn._core import (
    beta_amplitudes,
    check_povm,
    closed_form_joint,
    coupling_profile,
    cpt_deviation,
    detection_ops,
    evolve_joint,
    evolve_unitary,
    naimark_recovery,
    naimark_unitary,
    partial_trace,
    post_measurement,
    probabilities,
    psd_sqrt,
    run_scenario,
    tensor,
    trace_distance,
    triad_statistics,
)

__all__ = [
    "beta_amplitudes",
    "check_povm",
    "closed_form_joint",
    "coupling_profile",
    "cpt_deviation",
    "detection_ops",
    "evolve_joint",
    "evolve_unitary",
    "naimark_recovery",
    "naimark_unitary",
    "partial_trace",
    "post_measurement",
    "probabilities",
    "psd_sqrt",
    "run_scenario",
    "tensor",
    "trace_distance",
    "triad_statistics",
]
