#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "povmdyn/qmatrix.hpp"
#include "povmdyn/states.hpp"

namespace fixtures {

using povmdyn::Complex;
using povmdyn::DensityMatrix;
using povmdyn::Index;
using povmdyn::Matrix;
using povmdyn::MeasurementSet;
using povmdyn::Povm;
using povmdyn::Vector;

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Qubit direction at Bloch angle theta in the x-z plane.
inline Vector bloch_direction(double theta) {
  Vector v(2);
  v << std::cos(theta / 2.0), std::sin(theta / 2.0);
  return v;
}

// Three symmetric rank-1 effects (2/3)|phi><phi| at Bloch angles 0, 120, 240
// degrees; a complete qubit POVM that is not projective.
inline std::vector<Matrix> trine_effects() {
  std::vector<Matrix> effects;
  for (int g = 0; g < 3; ++g) {
    const Vector phi = bloch_direction(2.0 * std::numbers::pi * g / 3.0);
    effects.push_back((2.0 / 3.0) * (phi * phi.adjoint()));
  }
  return effects;
}

inline Povm trine_povm() {
  return povmdyn::validate_povm(trine_effects(), {"a", "b", "c"});
}

inline MeasurementSet trine_ms() { return povmdyn::detection_ops(trine_povm()); }

inline std::vector<Matrix> qubit_pvm_effects() {
  std::vector<Matrix> effects;
  for (int j = 0; j < 2; ++j) {
    const Vector e = povmdyn::basis_vector(2, j);
    effects.push_back(e * e.adjoint());
  }
  return effects;
}

inline Complex random_amplitude(std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  return Complex(gauss(rng), gauss(rng));
}

inline Matrix random_matrix(std::mt19937& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = random_amplitude(rng);
    }
  }
  return m;
}

inline Matrix random_hermitian(std::mt19937& rng, Index n) {
  const Matrix a = random_matrix(rng, n, n);
  return 0.5 * (a + a.adjoint());
}

inline Matrix random_unitary(std::mt19937& rng, Index n) {
  return povmdyn::evolve_unitary(random_hermitian(rng, n), 1.0);
}

inline Vector random_state_vector(std::mt19937& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    v(i) = random_amplitude(rng);
  }
  return v / v.norm();
}

inline DensityMatrix random_density(std::mt19937& rng, Index n) {
  const Matrix a = random_matrix(rng, n, n);
  Matrix rho = a * a.adjoint();
  rho /= rho.trace();
  return DensityMatrix(0.5 * (rho + Matrix(rho.adjoint())));
}

// Random complete POVM: G_g = A_g' A_g whitened by S^(-1/2), S = sum G_g.
inline Povm random_povm(std::mt19937& rng, Index dim, Index n_gamma) {
  std::vector<Matrix> grams;
  Matrix s = Matrix::Zero(dim, dim);
  for (Index g = 0; g < n_gamma; ++g) {
    const Matrix a = random_matrix(rng, dim, dim);
    grams.push_back(a.adjoint() * a);
    s += grams.back();
  }
  const povmdyn::HermEig eig = povmdyn::herm_eig(0.5 * (s + Matrix(s.adjoint())));
  povmdyn::RealVector inv_sqrt(eig.eigenvalues.size());
  for (Index i = 0; i < inv_sqrt.size(); ++i) {
    inv_sqrt(i) = 1.0 / std::sqrt(eig.eigenvalues(i));
  }
  const Matrix whiten = eig.eigenvectors *
                        inv_sqrt.cast<Complex>().asDiagonal() *
                        eig.eigenvectors.adjoint();
  std::vector<Matrix> effects;
  for (const Matrix& g : grams) {
    Matrix f = whiten * g * whiten;
    effects.push_back(0.5 * (f + Matrix(f.adjoint())));
  }
  return povmdyn::validate_povm(std::move(effects), {});
}

inline MeasurementSet random_measurement_set(std::mt19937& rng, Index dim,
                                             Index n_gamma) {
  return povmdyn::detection_ops(random_povm(rng, dim, n_gamma));
}

} // namespace fixtures
