#pragma once

#include <vector>

#include "povmdyn/qmatrix.hpp"
#include "povmdyn/states.hpp"

namespace povmdyn {

// Overlap (Gram) matrix of apparatus pointer states, with its spectral
// decomposition q = sum_j q_j |u_j><u_j|.
struct GramModel {
  Matrix q;
  HermEig eigen;

  Index size() const { return q.rows(); }
};

GramModel gram_matrix(const std::vector<Vector>& pointers);
GramModel gram_from_overlaps(const Matrix& q);

struct InducedOperator {
  double weight; // q_j
  Matrix op;     // L^(j) = sum_g <u_j|g> M^g
};

std::vector<InducedOperator> induced_map_operators(const GramModel& gm,
                                                   const MeasurementSet& ms);

struct CptDeviation {
  double kraus_residual = 0.0; // ||sum_j L'L - I||_F, zero by completeness
  double cpt_residual = 0.0;   // ||sum_j q_j L'L - I||_F, zero iff map is CPT
};

CptDeviation cpt_deviation(const GramModel& gm, const MeasurementSet& ms);

// The map rho -> sum_gg' Q_g'g M^g rho M^g''; trace-preserving only when
// cpt_residual vanishes, so the raw matrix is returned.
Matrix apply_overlap_map(const GramModel& gm, const MeasurementSet& ms,
                         const Matrix& rho);

} // namespace povmdyn
