#include "povmdyn/states.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace povmdyn {

namespace {

constexpr double kStateTol = 1e-10;
constexpr double kDetectedStateFloor = 1e-12;

void append_psd_violations(const Matrix& m, const std::string& name,
                           std::vector<Violation>& out) {
  const double herm = hermiticity_residual(m);
  if (herm > kStateTol * std::max(1.0, m.norm())) {
    out.push_back({name + " is not Hermitian", herm});
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver((m + m.adjoint()) / 2.0);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -kStateTol * std::max(1.0, m.norm())) {
    out.push_back({name + " has a negative eigenvalue", -min_eig});
  }
}

} // namespace

std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].invariant << " (residual " << violations[i].residual << ")";
  }
  return os.str();
}

DensityMatrix::DensityMatrix(Matrix rho) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) {
    throw DimensionError("DensityMatrix: matrix must be square and non-empty");
  }
  if (!rho.allFinite()) {
    throw ValidationError("DensityMatrix: entries must be finite");
  }
  const double herm = hermiticity_residual(rho);
  if (herm > kStateTol) {
    throw ValidationError("DensityMatrix: not Hermitian, residual " +
                          std::to_string(herm));
  }
  const double trace_err = std::abs(rho.trace() - Complex(1.0));
  if (trace_err > kStateTol) {
    throw ValidationError("DensityMatrix: trace differs from 1 by " +
                          std::to_string(trace_err));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver((rho + rho.adjoint()) / 2.0);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -kStateTol) {
    throw ValidationError("DensityMatrix: negative eigenvalue " +
                          std::to_string(min_eig));
  }
  rho_ = std::move(rho);
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double n = psi.norm();
  if (n < 1e-14) {
    throw ValidationError("DensityMatrix::pure: zero vector");
  }
  const Vector unit = psi / n;
  return unchecked(unit * unit.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  if (dim < 1) throw DimensionError("maximally_mixed: dim must be positive");
  return unchecked(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::unchecked(Matrix rho) {
  DensityMatrix d;
  d.rho_ = std::move(rho);
  return d;
}

std::vector<Violation> check_povm(const std::vector<Matrix>& effects,
                                  const std::vector<std::string>& labels) {
  std::vector<Violation> out;
  if (effects.empty()) {
    out.push_back({"effects list is empty", 0.0});
    return out;
  }
  const Index dim = effects[0].rows();
  for (size_t g = 0; g < effects.size(); ++g) {
    if (effects[g].rows() != dim || effects[g].cols() != dim) {
      out.push_back({"effect " + std::to_string(g) + " has mismatched dimensions", 0.0});
      return out;
    }
    if (!effects[g].allFinite()) {
      out.push_back({"effect " + std::to_string(g) + " has non-finite entries", 0.0});
      return out;
    }
  }
  for (size_t g = 0; g < effects.size(); ++g) {
    append_psd_violations(effects[g], "effect " + std::to_string(g), out);
  }
  Matrix sum = Matrix::Zero(dim, dim);
  for (const Matrix& f : effects) sum += f;
  const double completeness = (sum - Matrix::Identity(dim, dim)).norm();
  if (completeness > kStateTol) {
    out.push_back({"completeness: Sum_gamma F^gamma differs from identity", completeness});
  }
  if (!labels.empty()) {
    if (labels.size() != effects.size()) {
      out.push_back({"labels count differs from effects count", 0.0});
    } else {
      std::set<std::string> seen(labels.begin(), labels.end());
      if (seen.size() != labels.size()) {
        out.push_back({"labels are not distinct", 0.0});
      }
    }
  }
  return out;
}

Povm validate_povm(std::vector<Matrix> effects, std::vector<std::string> labels) {
  if (labels.empty()) {
    for (size_t g = 0; g < effects.size(); ++g) labels.push_back(std::to_string(g));
  }
  const auto violations = check_povm(effects, labels);
  if (!violations.empty()) {
    throw ValidationError("invalid POVM: " + describe(violations));
  }
  Povm p;
  p.dim = effects[0].rows();
  p.effects = std::move(effects);
  p.labels = std::move(labels);
  return p;
}

MeasurementSet MeasurementSet::validated(std::vector<Matrix> ops) {
  if (ops.empty()) throw ValidationError("MeasurementSet: empty operator list");
  const Index dim = ops[0].rows();
  Matrix sum = Matrix::Zero(dim, dim);
  for (const Matrix& m : ops) {
    if (m.rows() != dim || m.cols() != dim) {
      throw DimensionError("MeasurementSet: mismatched operator dimensions");
    }
    sum += m.adjoint() * m;
  }
  const double residual = (sum - Matrix::Identity(dim, dim)).norm();
  if (residual > kStateTol) {
    throw ValidationError("MeasurementSet: Sum M^dag M differs from identity by " +
                          std::to_string(residual));
  }
  MeasurementSet ms;
  ms.dim = dim;
  ms.ops = std::move(ops);
  return ms;
}

MeasurementSet detection_ops(const Povm& povm, const std::vector<Matrix>* twists) {
  if (twists) {
    if (twists->size() != povm.effects.size()) {
      throw ValidationError("detection_ops: twist count differs from effect count");
    }
    for (size_t g = 0; g < twists->size(); ++g) {
      const Matrix& u = (*twists)[g];
      if (u.rows() != povm.dim || u.cols() != povm.dim) {
        throw DimensionError("detection_ops: twist " + std::to_string(g) +
                             " has wrong dimensions");
      }
      const double res = unitarity_residual(u);
      if (res > kStateTol) {
        throw ValidationError("detection_ops: twist " + std::to_string(g) +
                              " is not unitary, residual " + std::to_string(res));
      }
    }
  }
  std::vector<Matrix> ops;
  ops.reserve(povm.effects.size());
  for (size_t g = 0; g < povm.effects.size(); ++g) {
    Matrix root = psd_sqrt(povm.effects[g]);
    ops.push_back(twists ? Matrix((*twists)[g] * root) : std::move(root));
  }
  MeasurementSet ms;
  ms.dim = povm.dim;
  ms.ops = std::move(ops);
  return ms;
}

std::vector<double> probabilities(const DensityMatrix& rho, const Povm& povm) {
  if (rho.dim() != povm.dim) {
    throw DimensionError("probabilities: state dim " + std::to_string(rho.dim()) +
                         " differs from POVM dim " + std::to_string(povm.dim));
  }
  std::vector<double> p;
  p.reserve(povm.effects.size());
  for (const Matrix& f : povm.effects) {
    const double value = (rho.matrix() * f).trace().real();
    p.push_back(std::max(value, 0.0));
  }
  return p;
}

PostMeasurement post_measurement(const DensityMatrix& rho, const MeasurementSet& ms) {
  if (rho.dim() != ms.dim) {
    throw DimensionError("post_measurement: state dim differs from operator dim");
  }
  Matrix out = Matrix::Zero(ms.dim, ms.dim);
  std::vector<DetectedState> detected;
  detected.reserve(ms.ops.size());
  for (const Matrix& m : ms.ops) {
    const Matrix term = m * rho.matrix() * m.adjoint();
    out += term;
    DetectedState d;
    d.probability = std::max(term.trace().real(), 0.0);
    if (d.probability >= kDetectedStateFloor) {
      d.state = DensityMatrix::unchecked(term / d.probability);
    }
    detected.push_back(std::move(d));
  }
  PostMeasurement result{DensityMatrix(std::move(out)), std::move(detected)};
  return result;
}

} // namespace povmdyn
