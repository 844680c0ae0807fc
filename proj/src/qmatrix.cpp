#include "povmdyn/qmatrix.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace povmdyn {

double hermiticity_residual(const Matrix& m) {
  return (m - m.adjoint()).norm();
}

double unitarity_residual(const Matrix& u) {
  return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  if (a.rows() * b.rows() > kMaxDim || a.cols() * b.cols() > kMaxDim) {
    throw DimensionError("tensor: product dimension " +
                         std::to_string(a.rows() * b.rows()) + "x" +
                         std::to_string(a.cols() * b.cols()) + " exceeds max " +
                         std::to_string(kMaxDim));
  }
  return Eigen::kroneckerProduct(a, b);
}

Matrix partial_trace(const Matrix& m, Index dim_first, Index dim_second, Keep keep) {
  if (dim_first < 1 || dim_second < 1 || m.rows() != m.cols() ||
      m.rows() != dim_first * dim_second) {
    throw DimensionError("partial_trace: matrix is " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()) + ", expected square of dim " +
                         std::to_string(dim_first) + "*" + std::to_string(dim_second));
  }
  if (keep == Keep::First) {
    Matrix out = Matrix::Zero(dim_first, dim_first);
    for (Index i = 0; i < dim_first; ++i)
      for (Index j = 0; j < dim_first; ++j)
        for (Index k = 0; k < dim_second; ++k)
          out(i, j) += m(i * dim_second + k, j * dim_second + k);
    return out;
  }
  Matrix out = Matrix::Zero(dim_second, dim_second);
  for (Index k = 0; k < dim_second; ++k)
    for (Index l = 0; l < dim_second; ++l)
      for (Index i = 0; i < dim_first; ++i)
        out(k, l) += m(i * dim_second + k, i * dim_second + l);
  return out;
}

HermEig herm_eig(const Matrix& h) {
  if (h.rows() != h.cols()) {
    throw DimensionError("herm_eig: matrix is not square");
  }
  const double scale = std::max(1.0, h.norm());
  const double residual = hermiticity_residual(h);
  if (!(residual <= 1e-10 * scale)) {
    throw ValidationError("herm_eig: matrix is not Hermitian, ||h - h^dag||_F = " +
                          std::to_string(residual));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("herm_eig: eigensolver did not converge");
  }
  return HermEig{solver.eigenvalues(), solver.eigenvectors()};
}

Matrix evolve_unitary(const Matrix& h, double t) {
  if (!std::isfinite(t)) {
    throw ValidationError("evolve_unitary: time is not finite");
  }
  const HermEig eig = herm_eig(h);
  const Eigen::ArrayXcd phases =
      (Complex(0.0, -t) * eig.eigenvalues.array().cast<Complex>()).exp();
  return eig.eigenvectors * phases.matrix().asDiagonal() * eig.eigenvectors.adjoint();
}

Matrix psd_sqrt(const Matrix& f) {
  const HermEig eig = herm_eig(f);
  const double tol = 1e-10 * std::max(1.0, f.norm());
  RealVector roots(eig.eigenvalues.size());
  for (Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double lambda = eig.eigenvalues(i);
    if (lambda < -tol) {
      throw ValidationError("psd_sqrt: matrix is not positive semidefinite, eigenvalue " +
                            std::to_string(lambda));
    }
    roots(i) = std::sqrt(std::max(lambda, 0.0));
  }
  return eig.eigenvectors * roots.cast<Complex>().asDiagonal() *
         eig.eigenvectors.adjoint();
}

Matrix sandwich_second(const Matrix& m, Index dim_first, Index dim_second,
                       const Vector& bra, const Vector& ket) {
  if (m.rows() != dim_first * dim_second || m.cols() != dim_first * dim_second ||
      bra.size() != dim_second || ket.size() != dim_second) {
    throw DimensionError("sandwich_second: dimension mismatch");
  }
  Matrix out = Matrix::Zero(dim_first, dim_first);
  for (Index r = 0; r < dim_first; ++r)
    for (Index c = 0; c < dim_first; ++c) {
      Complex acc = 0.0;
      for (Index i = 0; i < dim_second; ++i) {
        if (bra(i) == Complex(0.0)) continue;
        for (Index j = 0; j < dim_second; ++j)
          acc += std::conj(bra(i)) * m(r * dim_second + i, c * dim_second + j) * ket(j);
      }
      out(r, c) = acc;
    }
  return out;
}

double trace_distance(const Matrix& a, const Matrix& b) {
  const HermEig eig = herm_eig(a - b);
  return 0.5 * eig.eigenvalues.array().abs().sum();
}

Vector basis_vector(Index dim, Index i) {
  if (i < 0 || i >= dim) {
    throw DimensionError("basis_vector: index out of range");
  }
  Vector v = Vector::Zero(dim);
  v(i) = 1.0;
  return v;
}

} // namespace povmdyn
