#include "povmdyn/naimark.hpp"

#include <numbers>
#include <string>

#include "povmdyn/errors.hpp"

namespace povmdyn {

Index AncillaLayout::index(Index gamma, Index ell) const {
  if (gamma < 0 || gamma >= n_gamma) {
    throw DimensionError("pointer label " + std::to_string(gamma) +
                         " out of range [0, " + std::to_string(n_gamma) + ")");
  }
  if (ell < 1 || ell > n_levels) {
    throw DimensionError("chain level " + std::to_string(ell) +
                         " out of range [1, " + std::to_string(n_levels) + "]");
  }
  return 1 + (ell - 1) * n_gamma + gamma;
}

Vector XiBasis::xi(Index j, Index ell) const {
  if (j < 0 || j >= n_s || ell < 0 || ell > layout.n_levels) {
    throw DimensionError("xi index out of range");
  }
  return columns.col(ell * n_s + j);
}

XiBasis xi_basis(const MeasurementSet& ms, const AncillaLayout& layout) {
  if (layout.n_gamma != static_cast<Index>(ms.ops.size())) {
    throw DimensionError("layout expects " + std::to_string(layout.n_gamma) +
                         " outcomes, measurement set has " +
                         std::to_string(ms.ops.size()));
  }
  const Index n_s = ms.dim;
  const Index n_a = layout.dim();

  XiBasis basis;
  basis.n_s = n_s;
  basis.layout = layout;
  basis.columns = Matrix::Zero(n_s * n_a, n_s * (layout.n_levels + 1));
  for (Index j = 0; j < n_s; ++j) {
    // xi_j^(0) = |j> x |psi0>
    basis.columns(j * n_a + AncillaLayout::ready_index(), j) = 1.0;
    for (Index ell = 1; ell <= layout.n_levels; ++ell) {
      const Index col = ell * n_s + j;
      for (Index g = 0; g < layout.n_gamma; ++g) {
        const Index a = layout.index(g, ell);
        for (Index r = 0; r < n_s; ++r) {
          basis.columns(r * n_a + a, col) += ms.ops[static_cast<size_t>(g)](r, j);
        }
      }
    }
  }

  const Matrix gram = basis.columns.adjoint() * basis.columns;
  basis.gram_residual =
      (gram - Matrix::Identity(gram.rows(), gram.cols())).norm();
  if (basis.gram_residual > 1e-8) {
    throw NumericalError("xi vectors are not orthonormal (Gram residual " +
                         std::to_string(basis.gram_residual) +
                         "); measurement set likely violates completeness");
  }
  return basis;
}

Vector NaimarkModel::ready_state() const {
  return basis_vector(layout.dim(), psi0_index);
}

NaimarkModel naimark_unitary(const MeasurementSet& ms) {
  NaimarkModel model;
  model.layout = AncillaLayout{static_cast<Index>(ms.ops.size()), 1};
  model.alpha = -std::numbers::pi / 2;
  model.ms = ms;

  // The construction realizes a POVM only when the operators are complete;
  // the xi Gram check enforces that (and sets up the orthonormality proof).
  (void)xi_basis(ms, model.layout);

  const Index n_a = model.layout.dim();
  const Index dim = ms.dim * n_a;
  if (dim > kMaxDim) {
    throw DimensionError("joint dimension " + std::to_string(dim) +
                         " exceeds maximum " + std::to_string(kMaxDim));
  }

  // H = sum_g M^g x |g,1><psi0| + h.c., with omega = 1.
  Matrix h = Matrix::Zero(dim, dim);
  Matrix raise = Matrix::Zero(n_a, n_a);
  for (Index g = 0; g < model.layout.n_gamma; ++g) {
    raise.setZero();
    raise(model.layout.index(g, 1), AncillaLayout::ready_index()) = 1.0;
    h += tensor(ms.ops[static_cast<size_t>(g)], raise);
  }
  h += Matrix(h.adjoint());

  // At t_d = pi/2 the evolution sends |psi>|psi0> to -i sum_g M^g|psi>|g,1>;
  // the i prefactor removes that phase, so V xi_j^(0) = xi_j^(1) exactly.
  model.v_sa = Complex(0.0, 1.0) * evolve_unitary(h, std::numbers::pi / 2);

  const double residual = unitarity_residual(model.v_sa);
  if (residual > 1e-10) {
    throw NumericalError("joint unitary residual " + std::to_string(residual));
  }
  return model;
}

Matrix detection_block(const Matrix& v, const AncillaLayout& layout, Index n_s,
                       Index gamma) {
  const Index n_a = layout.dim();
  if (v.rows() != n_s * n_a || v.cols() != n_s * n_a) {
    throw DimensionError("operator does not match system x ancilla layout");
  }
  return sandwich_second(v, n_s, n_a, basis_vector(n_a, layout.index(gamma, 1)),
                         basis_vector(n_a, AncillaLayout::ready_index()));
}

NaimarkReport recover_and_verify(const NaimarkModel& model, const Povm& povm,
                                 const DensityMatrix& rho) {
  const Index n_s = povm.dim;
  const Index n_a = model.layout.dim();
  if (model.ms.dim != n_s || rho.dim() != n_s) {
    throw DimensionError("system dimensions disagree");
  }
  if (static_cast<Index>(povm.effects.size()) != model.layout.n_gamma) {
    throw DimensionError("outcome counts disagree");
  }

  const Vector psi0 = model.ready_state();
  const Matrix ready_proj = tensor(Matrix::Identity(n_s, n_s),
                                   Matrix(psi0 * psi0.adjoint()));
  const Matrix joint_rho = tensor(rho.matrix(), Matrix(psi0 * psi0.adjoint()));
  const std::vector<double> p_direct = probabilities(rho, povm);

  NaimarkReport report;
  report.p_direct = p_direct;
  for (Index g = 0; g < model.layout.n_gamma; ++g) {
    const Matrix m_hat = detection_block(model.v_sa, model.layout, n_s, g);
    report.m_hat.push_back(m_hat);
    report.m_residuals.push_back(
        (m_hat - model.ms.ops[static_cast<size_t>(g)]).norm());

    // P_g = V' (I x |g><g|) V, measured on the ready sector.
    const Vector pointer = basis_vector(n_a, model.layout.index(g, 1));
    const Matrix pvm_block =
        model.v_sa.adjoint() *
        tensor(Matrix::Identity(n_s, n_s), Matrix(pointer * pointer.adjoint())) *
        model.v_sa;
    const Matrix f_hat =
        partial_trace(ready_proj * pvm_block, n_s, n_a, Keep::First);
    report.f_hat.push_back(f_hat);
    report.f_residuals.push_back(
        (f_hat - povm.effects[static_cast<size_t>(g)]).norm());

    const double p_hat = (joint_rho * pvm_block).trace().real();
    report.p_hat.push_back(p_hat);
    report.max_p_deviation = std::max(
        report.max_p_deviation, std::abs(p_hat - p_direct[static_cast<size_t>(g)]));
    report.max_m_residual = std::max(report.max_m_residual, report.m_residuals.back());
    report.max_f_residual = std::max(report.max_f_residual, report.f_residuals.back());
  }
  return report;
}

} // namespace povmdyn
