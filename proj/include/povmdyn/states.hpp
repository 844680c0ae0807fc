#pragma once

#include <optional>
#include <string>
#include <vector>

#include "povmdyn/qmatrix.hpp"

namespace povmdyn {

// One failed invariant, with the offending residual where meaningful.
struct Violation {
  std::string invariant;
  double residual = 0.0;
};

std::string describe(const std::vector<Violation>& violations);

// Quantum state: Hermitian, unit trace, PSD (all to 1e-10). The constructor
// validates; use unchecked() only for matrices produced by operations that
// guarantee the invariants.
class DensityMatrix {
public:
  explicit DensityMatrix(Matrix rho);

  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix maximally_mixed(Index dim);
  static DensityMatrix unchecked(Matrix rho);

  Index dim() const { return rho_.rows(); }
  const Matrix& matrix() const { return rho_; }

private:
  DensityMatrix() = default;
  Matrix rho_;
};

// Ordered effects {F^gamma} with outcome labels; Sum F = I, each F PSD.
struct Povm {
  Index dim = 0;
  std::vector<Matrix> effects;
  std::vector<std::string> labels;
};

// Ordered detection operators {M^gamma} with Sum M^dag M = I.
struct MeasurementSet {
  Index dim = 0;
  std::vector<Matrix> ops;

  static MeasurementSet validated(std::vector<Matrix> ops);
};

// Non-throwing invariant check; empty result means valid.
std::vector<Violation> check_povm(const std::vector<Matrix>& effects,
                                  const std::vector<std::string>& labels);

// Throws ValidationError describing every violated invariant.
Povm validate_povm(std::vector<Matrix> effects, std::vector<std::string> labels);

// M^gamma = twist_gamma * sqrt(F^gamma); default twist is the identity, so the
// principal PSD root.
MeasurementSet detection_ops(const Povm& povm,
                             const std::vector<Matrix>* twists = nullptr);

// p_gamma = Tr[rho F^gamma], clamped at 0, renormalization-free.
std::vector<double> probabilities(const DensityMatrix& rho, const Povm& povm);

// Conditional state for one outcome; state is absent when the outcome
// probability is below 1e-12 (the normalized state is undefined there).
struct DetectedState {
  double probability = 0.0;
  std::optional<DensityMatrix> state;
};

struct PostMeasurement {
  DensityMatrix rho_out;
  std::vector<DetectedState> detected;
};

// rho_out = Sum_gamma M rho M^dag plus the gamma-detected states.
PostMeasurement post_measurement(const DensityMatrix& rho, const MeasurementSet& ms);

} // namespace povmdyn
