#include "povmdyn/triad.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "povmdyn/errors.hpp"

namespace povmdyn {

XiSpec default_xi_spec(Index n_gamma, Index n_xi) {
  if (n_gamma < 1) {
    throw ValidationError("need at least one outcome");
  }
  XiSpec xi;
  xi.n_xi = n_xi > 0 ? n_xi : std::max<Index>(2, n_gamma);
  xi.spectrum.resize(static_cast<size_t>(n_gamma));
  for (Index g = 0; g < n_gamma; ++g) {
    xi.spectrum[static_cast<size_t>(g)] = static_cast<double>(g);
  }
  validate_xi_spec(xi);
  return xi;
}

void validate_xi_spec(const XiSpec& xi) {
  if (xi.n_xi < 1) {
    throw ValidationError("register dimension must be positive");
  }
  if (xi.spectrum.empty()) {
    throw ValidationError("coupling spectrum is empty");
  }
  double max_spread = 0.0;
  for (size_t a = 0; a < xi.spectrum.size(); ++a) {
    if (!std::isfinite(xi.spectrum[a])) {
      throw ValidationError("coupling spectrum must be finite");
    }
    for (size_t b = a + 1; b < xi.spectrum.size(); ++b) {
      const double diff = std::abs(xi.spectrum[a] - xi.spectrum[b]);
      if (diff < 1e-12) {
        throw ValidationError("coupling spectrum entries " + std::to_string(a) +
                              " and " + std::to_string(b) + " coincide");
      }
      max_spread = std::max(max_spread, diff);
    }
  }
  if (static_cast<double>(xi.n_xi) <= max_spread) {
    throw ValidationError("register dimension " + std::to_string(xi.n_xi) +
                          " must exceed the spectrum spread " +
                          std::to_string(max_spread));
  }
}

Matrix vno_pointer_overlaps(const XiSpec& xi, double t) {
  validate_xi_spec(xi);
  const Index n = static_cast<Index>(xi.spectrum.size());
  Matrix q(n, n);
  for (Index gp = 0; gp < n; ++gp) {
    for (Index g = 0; g < n; ++g) {
      const double delta =
          xi.spectrum[static_cast<size_t>(g)] - xi.spectrum[static_cast<size_t>(gp)];
      Complex sum = 0.0;
      for (Index m = 0; m < xi.n_xi; ++m) {
        sum += std::exp(Complex(0.0, -t * delta * static_cast<double>(m)));
      }
      q(gp, g) = sum / static_cast<double>(xi.n_xi);
    }
  }
  return q;
}

std::vector<Vector> vno_pointer_vectors(const XiSpec& xi, double t) {
  validate_xi_spec(xi);
  std::vector<Vector> pointers;
  pointers.reserve(xi.spectrum.size());
  const double amp = 1.0 / std::sqrt(static_cast<double>(xi.n_xi));
  for (double o : xi.spectrum) {
    Vector v(xi.n_xi);
    for (Index m = 0; m < xi.n_xi; ++m) {
      v(m) = amp * std::exp(Complex(0.0, -t * o * static_cast<double>(m)));
    }
    pointers.push_back(std::move(v));
  }
  return pointers;
}

double xi_orthogonality_time(const XiSpec& xi) {
  validate_xi_spec(xi);
  for (double o : xi.spectrum) {
    if (std::abs(o - std::round(o)) > 1e-9) {
      throw ValidationError(
          "exact pointer orthogonality requires an integer coupling spectrum");
    }
  }
  return 2.0 * std::numbers::pi / static_cast<double>(xi.n_xi);
}

Matrix swap_unitary(Index n) {
  if (n < 1 || n * n > kMaxDim) {
    throw DimensionError("invalid swap dimension " + std::to_string(n));
  }
  Matrix s = Matrix::Zero(n * n, n * n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      s(b * n + a, a * n + b) = 1.0;
    }
  }
  return s;
}

TriadModel triad_from_unitary(const Matrix& v, Index n_s, Index n_a,
                              const Vector& psi0,
                              const std::vector<Vector>& pointer_kets,
                              const XiSpec& xi, const Matrix& e_basis) {
  if (v.rows() != n_s * n_a || v.cols() != n_s * n_a) {
    throw DimensionError("joint unitary does not match system x ancilla shape");
  }
  if (unitarity_residual(v) > 1e-10) {
    throw ValidationError("joint operator is not unitary");
  }
  if (psi0.size() != n_a || std::abs(psi0.norm() - 1.0) > 1e-10) {
    throw ValidationError("ready state must be a unit vector of the ancilla space");
  }
  if (pointer_kets.empty() || static_cast<Index>(pointer_kets.size()) > n_a) {
    throw DimensionError("pointer ket count must lie in [1, n_a]");
  }
  if (e_basis.rows() != n_a || e_basis.cols() != n_a ||
      unitarity_residual(e_basis) > 1e-10) {
    throw ValidationError("readout basis must be a unitary on the ancilla space");
  }
  if (static_cast<Index>(xi.spectrum.size()) !=
      static_cast<Index>(pointer_kets.size())) {
    throw DimensionError("register spectrum size must match pointer count");
  }
  validate_xi_spec(xi);

  TriadModel tm;
  tm.n_s = n_s;
  tm.n_a = n_a;
  tm.v_sa = v;
  tm.psi0 = psi0;
  tm.pointer_kets = pointer_kets;
  tm.xi = xi;
  tm.e_basis = e_basis;

  const Matrix id_s = Matrix::Identity(n_s, n_s);
  Matrix pointer_sum = Matrix::Zero(n_a, n_a);
  double worst = 0.0;
  for (size_t g = 0; g < pointer_kets.size(); ++g) {
    const Vector& ket = pointer_kets[g];
    if (ket.size() != n_a) {
      throw DimensionError("pointer ket " + std::to_string(g) + " has wrong length");
    }
    for (size_t gp = 0; gp < g; ++gp) {
      if (std::abs(pointer_kets[gp].dot(ket)) > 1e-10) {
        throw ValidationError("pointer kets are not orthogonal");
      }
    }
    if (std::abs(ket.norm() - 1.0) > 1e-10) {
      throw ValidationError("pointer kets must be unit vectors");
    }
    pointer_sum += ket * ket.adjoint();

    const Matrix p = v.adjoint() * tensor(id_s, Matrix(ket * ket.adjoint())) * v;
    worst = std::max(worst, hermiticity_residual(p));
    worst = std::max(worst, (p * p - p).norm());
    tm.projectors.push_back(p);
    tm.m_ops.push_back(sandwich_second(v, n_s, n_a, ket, psi0));
  }
  tm.discard_projector =
      v.adjoint() *
      tensor(id_s, Matrix(Matrix::Identity(n_a, n_a) - pointer_sum)) * v;
  worst = std::max(worst, (tm.discard_projector * tm.discard_projector -
                           tm.discard_projector).norm());
  for (size_t g = 0; g < tm.projectors.size(); ++g) {
    for (size_t gp = 0; gp < g; ++gp) {
      worst = std::max(worst, (tm.projectors[g] * tm.projectors[gp]).norm());
    }
  }
  if (worst > 1e-8) {
    throw NumericalError("projector construction residual " + std::to_string(worst));
  }
  return tm;
}

TriadModel triad_projectors(const NaimarkModel& nm) {
  return triad_projectors(nm, default_xi_spec(nm.layout.n_gamma),
                          Matrix::Identity(nm.layout.dim(), nm.layout.dim()));
}

TriadModel triad_projectors(const NaimarkModel& nm, const XiSpec& xi,
                            const Matrix& e_basis) {
  if (nm.layout.n_levels != 1) {
    throw ValidationError("projective readout expects the single-level layout");
  }
  const Index n_a = nm.layout.dim();
  std::vector<Vector> kets;
  for (Index g = 0; g < nm.layout.n_gamma; ++g) {
    kets.push_back(basis_vector(n_a, nm.layout.index(g, 1)));
  }
  return triad_from_unitary(nm.v_sa, nm.ms.dim, n_a,
                            basis_vector(n_a, nm.psi0_index), kets, xi, e_basis);
}

namespace {

Matrix joint_input(const TriadModel& tm, const DensityMatrix& rho) {
  if (rho.dim() != tm.n_s) {
    throw DimensionError("state dimension " + std::to_string(rho.dim()) +
                         " does not match system dimension " +
                         std::to_string(tm.n_s));
  }
  return tensor(rho.matrix(), Matrix(tm.psi0 * tm.psi0.adjoint()));
}

} // namespace

std::vector<double> triad_probabilities(const TriadModel& tm,
                                        const DensityMatrix& rho) {
  const Matrix joint = joint_input(tm, rho);
  std::vector<double> probs;
  probs.reserve(tm.projectors.size());
  for (const Matrix& p : tm.projectors) {
    probs.push_back(std::max(0.0, (joint * p).trace().real()));
  }
  return probs;
}

double discard_probability(const TriadModel& tm, const DensityMatrix& rho) {
  return (joint_input(tm, rho) * tm.discard_projector).trace().real();
}

TriadReducedState triad_reduced_state(const TriadModel& tm,
                                      const DensityMatrix& rho, double t) {
  const Matrix overlaps = vno_pointer_overlaps(tm.xi, t);
  double max_offdiag = 0.0;
  for (Index a = 0; a < overlaps.rows(); ++a) {
    for (Index b = 0; b < overlaps.cols(); ++b) {
      if (a != b) max_offdiag = std::max(max_offdiag, std::abs(overlaps(a, b)));
    }
  }
  if (max_offdiag > 1e-6) {
    throw ValidationError(
        "register pointers still overlap at t = " + std::to_string(t) +
        " (max off-diagonal " + std::to_string(max_offdiag) +
        "); evaluate at or beyond the orthogonality time");
  }
  if (rho.dim() != tm.n_s) {
    throw DimensionError("state dimension does not match system dimension");
  }

  std::vector<std::vector<Matrix>> n_ops;
  std::vector<double> completeness_residuals;
  Matrix rho_s = Matrix::Zero(tm.n_s, tm.n_s);
  for (size_t g = 0; g < tm.pointer_kets.size(); ++g) {
    const Matrix detected = tm.m_ops[g] * rho.matrix() * tm.m_ops[g].adjoint();
    std::vector<Matrix> row;
    Matrix completeness = Matrix::Zero(tm.n_s, tm.n_s);
    for (Index k = 0; k < tm.n_a; ++k) {
      const Matrix n_kg = sandwich_second(Matrix(tm.v_sa.adjoint()), tm.n_s,
                                          tm.n_a, Vector(tm.e_basis.col(k)),
                                          tm.pointer_kets[g]);
      completeness += n_kg.adjoint() * n_kg;
      rho_s += n_kg * detected * n_kg.adjoint();
      row.push_back(n_kg);
    }
    completeness_residuals.push_back(
        (completeness - Matrix::Identity(tm.n_s, tm.n_s)).norm());
    n_ops.push_back(std::move(row));
  }
  return TriadReducedState{DensityMatrix(std::move(rho_s)), std::move(n_ops),
                           std::move(completeness_residuals), max_offdiag};
}

DoubleLabelPovm double_label_povm(const TriadModel& tm, const DensityMatrix& rho) {
  if (rho.dim() != tm.n_s) {
    throw DimensionError("state dimension does not match system dimension");
  }
  DoubleLabelPovm out;
  Matrix total = Matrix::Zero(tm.n_s, tm.n_s);
  for (size_t g = 0; g < tm.pointer_kets.size(); ++g) {
    std::vector<Matrix> effect_row;
    std::vector<double> prob_row;
    double marginal = 0.0;
    for (Index k = 0; k < tm.n_a; ++k) {
      const Matrix n_kg = sandwich_second(Matrix(tm.v_sa.adjoint()), tm.n_s,
                                          tm.n_a, Vector(tm.e_basis.col(k)),
                                          tm.pointer_kets[g]);
      const Matrix m_gk = n_kg * tm.m_ops[g];
      const Matrix f_gk = m_gk.adjoint() * m_gk;
      const double p = std::max(0.0, (rho.matrix() * f_gk).trace().real());
      total += f_gk;
      marginal += p;
      effect_row.push_back(f_gk);
      prob_row.push_back(p);
    }
    const double direct =
        (rho.matrix() * tm.m_ops[g].adjoint() * tm.m_ops[g]).trace().real();
    out.max_marginal_deviation =
        std::max(out.max_marginal_deviation, std::abs(marginal - direct));
    out.effects.push_back(std::move(effect_row));
    out.probs.push_back(std::move(prob_row));
    out.marginals.push_back(marginal);
  }
  out.completeness_residual =
      (total - Matrix::Identity(tm.n_s, tm.n_s)).norm();
  return out;
}

} // namespace povmdyn
