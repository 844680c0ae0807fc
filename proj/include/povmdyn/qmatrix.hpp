#pragma once

#include <complex>
#include <Eigen/Dense>

#include "povmdyn/errors.hpp"

namespace povmdyn {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Hard cap on any produced matrix dimension.
inline constexpr Index kMaxDim = 4096;

// Result of a Hermitian eigendecomposition: h = V diag(lambda) V^dag,
// eigenvalues ascending, V unitary.
struct HermEig {
  RealVector eigenvalues;
  Matrix eigenvectors;
};

// Frobenius distance to the nearest Hermitian matrix, ||m - m^dag||_F.
double hermiticity_residual(const Matrix& m);

// ||u^dag u - I||_F.
double unitarity_residual(const Matrix& u);

// Kronecker product. Index convention is system-major: composite row index
// r = r_a * b.rows() + r_b, fixed repo-wide.
Matrix tensor(const Matrix& a, const Matrix& b);

enum class Keep { First, Second };

// Reduce an operator on a (dim_first x dim_second)-factored space to the kept
// factor. Preserves the trace.
Matrix partial_trace(const Matrix& m, Index dim_first, Index dim_second, Keep keep);

// Eigendecomposition of a Hermitian matrix. Throws ValidationError if the
// input is not Hermitian to 1e-10 * max(1, ||h||_F).
HermEig herm_eig(const Matrix& h);

// U = exp(-i h t) via eigendecomposition (hbar = 1).
Matrix evolve_unitary(const Matrix& h, double t);

// Unique positive-semidefinite square root. Eigenvalues below
// -1e-10 * max(1, ||f||_F) raise ValidationError; small negatives clamp to 0.
Matrix psd_sqrt(const Matrix& f);

// (I_{first} x <bra|) m (I_{first} x |ket>): contracts the second tensor
// factor of an operator on a (dim_first x dim_second) space against ancilla
// vectors, leaving a dim_first x dim_first block.
Matrix sandwich_second(const Matrix& m, Index dim_first, Index dim_second,
                       const Vector& bra, const Vector& ket);

// Trace distance (1/2)||a - b||_1 for Hermitian a, b.
double trace_distance(const Matrix& a, const Matrix& b);

// Canonical basis column |i> of the given dimension.
Vector basis_vector(Index dim, Index i);

} // namespace povmdyn
