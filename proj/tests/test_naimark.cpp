#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "povmdyn/naimark.hpp"

#include "support/fixtures.hpp"
#include "support/properties.hpp"

using namespace povmdyn;

TEST_SUITE("naimark") {

TEST_CASE("ancilla layout places the ready state first, then level shells") {
  const AncillaLayout layout{3, 2};
  CHECK(layout.dim() == 7);
  CHECK(AncillaLayout::ready_index() == 0);
  // Level 1 occupies slots 1..3, level 2 slots 4..6, gamma-major inside.
  CHECK(layout.index(0, 1) == 1);
  CHECK(layout.index(2, 1) == 3);
  CHECK(layout.index(0, 2) == 4);
  CHECK(layout.index(2, 2) == 6);
  CHECK_THROWS_AS(layout.index(3, 1), DimensionError);
  CHECK_THROWS_AS(layout.index(0, 0), DimensionError);
  CHECK_THROWS_AS(layout.index(0, 3), DimensionError);
}

TEST_CASE("trine xi vectors are orthonormal in the joint space") {
  const MeasurementSet ms = detection_ops(fixtures::trine_povm());
  const AncillaLayout layout{3, 1};
  const XiBasis basis = xi_basis(ms, layout);
  REQUIRE(basis.columns.rows() == 2 * layout.dim());
  REQUIRE(basis.columns.cols() == 4); // two blocks, levels 0 and 1
  const Matrix gram = basis.columns.adjoint() * basis.columns;
  CHECK((gram - Matrix::Identity(4, 4)).norm() <= 1e-12);
  CHECK(basis.gram_residual <= 1e-12);
}

TEST_CASE("projective measurements give product xi vectors") {
  // For a PVM, M^gamma = |gamma><gamma|, so xi_j^(1) is exactly |j>|j,1>.
  const MeasurementSet pvm =
      detection_ops(validate_povm(fixtures::qubit_pvm_effects(), {}));
  const AncillaLayout layout{2, 1};
  const XiBasis basis = xi_basis(pvm, layout);
  for (Index j = 0; j < 2; ++j) {
    Vector expected = Vector::Zero(2 * layout.dim());
    expected(j * layout.dim() + layout.index(j, 1)) = 1.0;
    CHECK((basis.xi(j, 1) - expected).norm() <= 1e-14);
  }
}

TEST_CASE("the dilation unitary maps ready vectors to level-1 vectors") {
  const MeasurementSet ms = detection_ops(fixtures::trine_povm());
  const NaimarkModel nm = naimark_unitary(ms);
  CHECK(unitarity_residual(nm.v_sa) <= 1e-10);
  CHECK(std::abs(nm.alpha + std::numbers::pi / 2.0) <= 1e-15);

  const XiBasis basis = xi_basis(ms, nm.layout);
  for (Index j = 0; j < 2; ++j) {
    CHECK((nm.v_sa * basis.xi(j, 0) - basis.xi(j, 1)).norm() <= 1e-10);
  }
}

TEST_CASE("detection blocks of the unitary reproduce the operators") {
  const MeasurementSet ms = detection_ops(fixtures::trine_povm());
  const NaimarkModel nm = naimark_unitary(ms);
  for (Index g = 0; g < 3; ++g) {
    const Matrix block = detection_block(nm.v_sa, nm.layout, 2, g);
    CHECK((block - ms.ops[static_cast<size_t>(g)]).norm() <= 1e-10);
  }
}

TEST_CASE("recover_and_verify reports tiny residuals and exact statistics") {
  const Povm trine = fixtures::trine_povm();
  const MeasurementSet ms = detection_ops(trine);
  const NaimarkModel nm = naimark_unitary(ms);
  const DensityMatrix rho = DensityMatrix::pure(basis_vector(2, 0));
  const NaimarkReport report = recover_and_verify(nm, trine, rho);

  CHECK(report.max_m_residual <= 1e-10);
  CHECK(report.max_f_residual <= 1e-9);
  CHECK(report.max_p_deviation <= 1e-12);
  REQUIRE(report.p_hat.size() == 3);
  CHECK(std::abs(report.p_hat[0] - 2.0 / 3.0) <= 1e-12);
  CHECK(std::abs(report.p_hat[1] - 1.0 / 6.0) <= 1e-12);
  CHECK(std::abs(report.p_hat[2] - 1.0 / 6.0) <= 1e-12);
  for (const Matrix& f : report.f_hat) {
    CHECK(hermiticity_residual(f) <= 1e-12);
  }
}

TEST_CASE("an incomplete operator set cannot seed the construction") {
  MeasurementSet bad;
  bad.dim = 2;
  bad.ops = {Matrix(0.5 * Matrix::Identity(2, 2))};
  const AncillaLayout layout{1, 1};
  CHECK_THROWS_AS(xi_basis(bad, layout), NumericalError);
  CHECK_THROWS_AS(naimark_unitary(bad), NumericalError);
}

TEST_CASE("randomized dilation invariants hold") {
  for (const auto& outcome :
       {properties::xi_gram_identity(), properties::sigma_block_orthogonality(),
        properties::naimark_round_trip()}) {
    INFO(outcome.name, ": ", outcome.detail);
    CHECK(outcome.ok);
    CHECK(outcome.cases >= 20);
  }
}

} // TEST_SUITE
