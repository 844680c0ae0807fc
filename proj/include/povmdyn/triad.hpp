#pragma once

#include <vector>

#include "povmdyn/naimark.hpp"
#include "povmdyn/qmatrix.hpp"
#include "povmdyn/states.hpp"

namespace povmdyn {

// Finite readout register: generator diag(0..n_xi-1), initial pointer the
// uniform superposition, outcome gamma written with coupling strength
// spectrum[gamma]. Pointer overlaps then follow a closed-form kernel with an
// exact orthogonality time for integer spectra.
struct XiSpec {
  Index n_xi = 2;
  std::vector<double> spectrum;
};

XiSpec default_xi_spec(Index n_gamma, Index n_xi = 0);
void validate_xi_spec(const XiSpec& xi);

// Matrix of <Xi^g'(t)|Xi^g(t)> = (1/n_xi) sum_m e^{-i t (o_g - o_g') m}.
Matrix vno_pointer_overlaps(const XiSpec& xi, double t);
std::vector<Vector> vno_pointer_vectors(const XiSpec& xi, double t);

// Earliest time at which all pointer overlaps vanish exactly (2*pi/n_xi);
// requires an integer spectrum.
double xi_orthogonality_time(const XiSpec& xi);

// Swap of two n-dimensional factors.
Matrix swap_unitary(Index n);

// Joint S+A description measured projectively by the register: projectors
// P^g = V'(I x |g><g|)V plus the complement as an explicit discard outcome,
// the recovered detection operators, and the readout basis e_k used to
// unravel the ancilla.
struct TriadModel {
  Index n_s = 0;
  Index n_a = 0;
  Matrix v_sa;
  Vector psi0;
  std::vector<Vector> pointer_kets;
  XiSpec xi;
  Matrix e_basis; // unitary; column k is |e_k>
  std::vector<Matrix> projectors;
  Matrix discard_projector;
  std::vector<Matrix> m_ops; // <g|V|psi0>
};

TriadModel triad_from_unitary(const Matrix& v, Index n_s, Index n_a,
                              const Vector& psi0,
                              const std::vector<Vector>& pointer_kets,
                              const XiSpec& xi, const Matrix& e_basis);
TriadModel triad_projectors(const NaimarkModel& nm);
TriadModel triad_projectors(const NaimarkModel& nm, const XiSpec& xi,
                            const Matrix& e_basis);

// p_g = Tr[(rho x |psi0><psi0|) P^g]  (the projective route to the statistics).
std::vector<double> triad_probabilities(const TriadModel& tm,
                                        const DensityMatrix& rho);
double discard_probability(const TriadModel& tm, const DensityMatrix& rho);

// System state after the register has decohered the gamma sectors,
// unravelled over the readout basis: rho_S = sum_gk N^(kg) M^g rho M^g' N^(kg)'.
struct TriadReducedState {
  DensityMatrix rho_s;
  std::vector<std::vector<Matrix>> n_ops;     // [gamma][k]
  std::vector<double> completeness_residuals; // per gamma: ||sum_k N'N - I||_F
  double max_offdiag_overlap = 0.0;           // register overlaps at the given t
};

TriadReducedState triad_reduced_state(const TriadModel& tm,
                                      const DensityMatrix& rho, double t);

// Refined outcome set F^(gk) = M^(gk)' M^(gk), M^(gk) = N^(kg) M^g, whose
// k-marginals reproduce the original statistics.
struct DoubleLabelPovm {
  std::vector<std::vector<Matrix>> effects;
  std::vector<std::vector<double>> probs;
  std::vector<double> marginals;
  double completeness_residual = 0.0;
  double max_marginal_deviation = 0.0;
};

DoubleLabelPovm double_label_povm(const TriadModel& tm, const DensityMatrix& rho);

} // namespace povmdyn
