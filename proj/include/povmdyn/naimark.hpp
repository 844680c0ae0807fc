#pragma once

#include <vector>

#include "povmdyn/qmatrix.hpp"
#include "povmdyn/states.hpp"

namespace povmdyn {

// Canonical ancilla basis: index 0 is the ready state |psi0>, the remaining
// n_gamma*n_levels indices hold the pointer levels |gamma, ell>.
struct AncillaLayout {
  Index n_gamma = 0;
  Index n_levels = 1; // chain length n_L; the periodic model uses 1

  Index dim() const { return n_gamma * n_levels + 1; }
  static constexpr Index ready_index() { return 0; }

  // gamma is zero-based, ell is the one-based chain level (1..n_levels).
  Index index(Index gamma, Index ell) const;
};

// The vectors xi_j^(ell): xi_j^(0) = |j>|psi0>, xi_j^(ell) = sum_g M^g|j> |g,ell>.
// Stored as columns in ell-major order (column ell*n_s + j).
struct XiBasis {
  Index n_s = 0;
  AncillaLayout layout;
  Matrix columns;
  double gram_residual = 0.0;

  Vector xi(Index j, Index ell) const;
};

XiBasis xi_basis(const MeasurementSet& ms, const AncillaLayout& layout);

// Joint unitary acting on (system) x (ancilla) that maps |psi>|psi0> to
// sum_g M^g|psi>|g,1>, together with the layout and the detection operators
// it was built from.
struct NaimarkModel {
  AncillaLayout layout;
  Matrix v_sa;
  Index psi0_index = 0;
  double alpha = 0.0; // global phase convention; the i prefactor cancels it
  MeasurementSet ms;

  Vector ready_state() const; // |psi0> in the ancilla space
};

NaimarkModel naimark_unitary(const MeasurementSet& ms);

// Block <gamma,1|V|psi0> of a joint operator, an n_s x n_s system operator.
Matrix detection_block(const Matrix& v, const AncillaLayout& layout, Index n_s,
                       Index gamma);

struct NaimarkReport {
  std::vector<Matrix> m_hat;        // <gamma|V|psi0> blocks
  std::vector<double> m_residuals;  // ||m_hat - M||_F
  std::vector<Matrix> f_hat;        // Tr_A[(I x |psi0><psi0|) V' (I x |g><g|) V]
  std::vector<double> f_residuals;  // ||f_hat - F||_F
  std::vector<double> p_hat;        // Tr[(rho x |psi0><psi0|) V' (I x |g><g|) V]
  std::vector<double> p_direct;     // Tr[rho F]
  double max_m_residual = 0.0;
  double max_f_residual = 0.0;
  double max_p_deviation = 0.0;
};

NaimarkReport recover_and_verify(const NaimarkModel& model, const Povm& povm,
                                 const DensityMatrix& rho);

} // namespace povmdyn
