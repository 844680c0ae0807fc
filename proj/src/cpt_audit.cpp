#include "povmdyn/cpt_audit.hpp"

#include <cmath>
#include <string>

#include "povmdyn/errors.hpp"

namespace povmdyn {

namespace {

GramModel finish_gram(Matrix q) {
  GramModel gm;
  gm.eigen = herm_eig(q);
  for (Index j = 0; j < gm.eigen.eigenvalues.size(); ++j) {
    double& lambda = gm.eigen.eigenvalues(j);
    if (lambda < -1e-12) {
      throw ValidationError("overlap matrix has negative eigenvalue " +
                            std::to_string(lambda));
    }
    if (lambda < 0.0) lambda = 0.0;
  }
  gm.q = std::move(q);
  return gm;
}

} // namespace

GramModel gram_matrix(const std::vector<Vector>& pointers) {
  if (pointers.empty()) {
    throw ValidationError("no pointer states given");
  }
  const Index n = static_cast<Index>(pointers.size());
  const Index len = pointers[0].size();
  Matrix q(n, n);
  for (Index a = 0; a < n; ++a) {
    const Vector& va = pointers[static_cast<size_t>(a)];
    if (va.size() != len) {
      throw DimensionError("pointer states differ in length");
    }
    const double norm_err = std::abs(va.norm() - 1.0);
    if (norm_err > 1e-10) {
      throw ValidationError("pointer state " + std::to_string(a) +
                            " is not unit-norm (deviation " +
                            std::to_string(norm_err) + ")");
    }
    for (Index b = 0; b < n; ++b) {
      q(a, b) = va.dot(pointers[static_cast<size_t>(b)]);
    }
  }
  return finish_gram(std::move(q));
}

GramModel gram_from_overlaps(const Matrix& q) {
  if (q.rows() != q.cols() || q.rows() == 0) {
    throw DimensionError("overlap matrix must be square and non-empty");
  }
  if (hermiticity_residual(q) > 1e-10) {
    throw ValidationError("overlap matrix is not Hermitian");
  }
  for (Index a = 0; a < q.rows(); ++a) {
    if (std::abs(q(a, a) - 1.0) > 1e-10) {
      throw ValidationError("overlap matrix diagonal entry " +
                            std::to_string(a) + " is not 1");
    }
  }
  return finish_gram(q);
}

std::vector<InducedOperator> induced_map_operators(const GramModel& gm,
                                                   const MeasurementSet& ms) {
  if (gm.size() != static_cast<Index>(ms.ops.size())) {
    throw DimensionError("overlap matrix order " + std::to_string(gm.size()) +
                         " does not match " + std::to_string(ms.ops.size()) +
                         " detection operators");
  }
  std::vector<InducedOperator> out;
  out.reserve(static_cast<size_t>(gm.size()));
  for (Index j = 0; j < gm.size(); ++j) {
    Matrix l = Matrix::Zero(ms.dim, ms.dim);
    for (Index g = 0; g < gm.size(); ++g) {
      l += std::conj(gm.eigen.eigenvectors(g, j)) * ms.ops[static_cast<size_t>(g)];
    }
    out.push_back(InducedOperator{gm.eigen.eigenvalues(j), std::move(l)});
  }
  return out;
}

CptDeviation cpt_deviation(const GramModel& gm, const MeasurementSet& ms) {
  const std::vector<InducedOperator> ops = induced_map_operators(gm, ms);
  Matrix kraus_sum = Matrix::Zero(ms.dim, ms.dim);
  Matrix weighted_sum = Matrix::Zero(ms.dim, ms.dim);
  for (const InducedOperator& lj : ops) {
    const Matrix gram_term = lj.op.adjoint() * lj.op;
    kraus_sum += gram_term;
    weighted_sum += lj.weight * gram_term;
  }
  const Matrix id = Matrix::Identity(ms.dim, ms.dim);
  return CptDeviation{(kraus_sum - id).norm(), (weighted_sum - id).norm()};
}

Matrix apply_overlap_map(const GramModel& gm, const MeasurementSet& ms,
                         const Matrix& rho) {
  if (rho.rows() != ms.dim || rho.cols() != ms.dim) {
    throw DimensionError("state dimension does not match measurement set");
  }
  if (gm.size() != static_cast<Index>(ms.ops.size())) {
    throw DimensionError("overlap matrix order does not match outcome count");
  }
  Matrix out = Matrix::Zero(ms.dim, ms.dim);
  for (Index gp = 0; gp < gm.size(); ++gp) {
    for (Index g = 0; g < gm.size(); ++g) {
      out += gm.q(gp, g) * ms.ops[static_cast<size_t>(g)] * rho *
             ms.ops[static_cast<size_t>(gp)].adjoint();
    }
  }
  return out;
}

} // namespace povmdyn
