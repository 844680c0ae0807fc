#include "povmdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "povmdyn/errors.hpp"

namespace povmdyn {

namespace {

void check_spec(const ChainSpec& spec) {
  if (spec.n_levels < 1) {
    throw ValidationError("chain length must be at least 1");
  }
  if (static_cast<Index>(spec.omegas.size()) != spec.n_levels) {
    throw ValidationError("expected " + std::to_string(spec.n_levels) +
                          " couplings, got " + std::to_string(spec.omegas.size()));
  }
  for (double w : spec.omegas) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError("couplings must be positive and finite");
    }
  }
}

// Number of worker threads for a time sweep; POVM_DYN_THREADS caps it.
Index sweep_threads(Index n_jobs) {
  Index n = static_cast<Index>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("POVM_DYN_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || parsed < 1) {
      throw ValidationError("POVM_DYN_THREADS must be a positive integer, got \"" +
                            std::string(env) + "\"");
    }
    n = std::min(n, static_cast<Index>(parsed));
  }
  return std::max<Index>(1, std::min(n, n_jobs));
}

} // namespace

ChainSpec coupling_profile(const std::string& kind, Index n_levels, double omega0) {
  if (n_levels < 1) {
    throw ValidationError("chain length must be at least 1");
  }
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) {
    throw ValidationError("omega0 must be positive and finite");
  }
  ChainSpec spec;
  spec.n_levels = n_levels;
  spec.profile = kind;
  spec.omegas.resize(static_cast<size_t>(n_levels));
  if (kind == "uniform") {
    std::fill(spec.omegas.begin(), spec.omegas.end(), omega0);
  } else if (kind == "pst") {
    for (Index l = 0; l < n_levels; ++l) {
      spec.omegas[static_cast<size_t>(l)] =
          0.5 * omega0 *
          std::sqrt(static_cast<double>((l + 1) * (n_levels - l)));
    }
  } else {
    throw ValidationError("unknown coupling profile \"" + kind +
                          "\" (expected uniform or pst)");
  }
  return spec;
}

Matrix block_hamiltonian(const ChainSpec& spec) {
  check_spec(spec);
  Matrix h = Matrix::Zero(spec.n_levels + 1, spec.n_levels + 1);
  for (Index l = 0; l < spec.n_levels; ++l) {
    h(l, l + 1) = spec.omegas[static_cast<size_t>(l)];
    h(l + 1, l) = spec.omegas[static_cast<size_t>(l)];
  }
  return h;
}

Vector beta_row(const ChainSpec& spec, double t) {
  const HermEig eig = herm_eig(block_hamiltonian(spec));
  const Vector weights = eig.eigenvectors.row(0).adjoint();
  Vector phases(eig.eigenvalues.size());
  for (Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::exp(Complex(0.0, -eig.eigenvalues(k) * t)) * weights(k);
  }
  return eig.eigenvectors * phases;
}

EvolutionTrace beta_amplitudes(const ChainSpec& spec,
                               const std::vector<double>& times) {
  check_spec(spec);
  for (size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) {
      throw ValidationError("times must be finite");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ValidationError("times must be strictly increasing");
    }
  }

  const HermEig eig = herm_eig(block_hamiltonian(spec));
  const Vector weights = eig.eigenvectors.row(0).adjoint();

  EvolutionTrace trace;
  trace.times = times;
  trace.betas.resize(times.size());
  trace.p0.resize(times.size());
  trace.xi0_phase.resize(times.size());

  const auto compute = [&](size_t begin, size_t end) {
    Vector phases(eig.eigenvalues.size());
    for (size_t i = begin; i < end; ++i) {
      for (Index k = 0; k < phases.size(); ++k) {
        phases(k) =
            std::exp(Complex(0.0, -eig.eigenvalues(k) * times[i])) * weights(k);
      }
      trace.betas[i] = eig.eigenvectors * phases;
      trace.p0[i] = std::norm(trace.betas[i](0));
      trace.xi0_phase[i] = std::arg(trace.betas[i](0));
    }
  };

  const Index n_threads = sweep_threads(static_cast<Index>(times.size()));
  if (n_threads <= 1) {
    compute(0, times.size());
  } else {
    std::vector<std::thread> workers;
    const size_t chunk = (times.size() + static_cast<size_t>(n_threads) - 1) /
                         static_cast<size_t>(n_threads);
    for (Index k = 0; k < n_threads; ++k) {
      const size_t begin = static_cast<size_t>(k) * chunk;
      const size_t end = std::min(times.size(), begin + chunk);
      if (begin < end) workers.emplace_back(compute, begin, end);
    }
    for (std::thread& w : workers) w.join();
  }

  for (size_t i = 0; i < times.size(); ++i) {
    const double norm_residual = std::abs(trace.betas[i].squaredNorm() - 1.0);
    if (!(norm_residual <= 1e-9)) {
      throw NumericalError("amplitude norm residual " +
                           std::to_string(norm_residual) + " at t = " +
                           std::to_string(times[i]));
    }
  }
  return trace;
}

Matrix full_hamiltonian(const MeasurementSet& ms, const ChainSpec& spec) {
  check_spec(spec);
  const AncillaLayout layout{static_cast<Index>(ms.ops.size()), spec.n_levels};
  const Index n_a = layout.dim();
  const Index dim = ms.dim * n_a;
  if (dim > kMaxDim) {
    throw DimensionError("joint dimension " + std::to_string(dim) +
                         " exceeds maximum " + std::to_string(kMaxDim));
  }

  Matrix h = Matrix::Zero(dim, dim);
  Matrix theta = Matrix::Zero(n_a, n_a);
  for (Index g = 0; g < layout.n_gamma; ++g) {
    theta.setZero();
    theta(layout.index(g, 1), AncillaLayout::ready_index()) = spec.omegas[0];
    h += tensor(ms.ops[static_cast<size_t>(g)], theta);
  }
  for (Index g = 0; g < layout.n_gamma; ++g) {
    for (Index gp = 0; gp < layout.n_gamma; ++gp) {
      theta.setZero();
      bool nonzero = false;
      for (Index l = 1; l < spec.n_levels; ++l) {
        theta(layout.index(g, l), layout.index(gp, l + 1)) =
            spec.omegas[static_cast<size_t>(l)];
        nonzero = true;
      }
      if (nonzero) {
        h += tensor(Matrix(ms.ops[static_cast<size_t>(g)] *
                           ms.ops[static_cast<size_t>(gp)].adjoint()),
                    theta);
      }
    }
  }
  h += Matrix(h.adjoint());
  return h;
}

DensityMatrix evolve_joint(const DensityMatrix& rho, const MeasurementSet& ms,
                           const ChainSpec& spec, double t) {
  if (rho.dim() != ms.dim) {
    throw DimensionError("state dimension " + std::to_string(rho.dim()) +
                         " does not match measurement set dimension " +
                         std::to_string(ms.dim));
  }
  const AncillaLayout layout{static_cast<Index>(ms.ops.size()), spec.n_levels};
  const Vector psi0 = basis_vector(layout.dim(), AncillaLayout::ready_index());
  const Matrix joint0 = tensor(rho.matrix(), Matrix(psi0 * psi0.adjoint()));
  const Matrix u = evolve_unitary(full_hamiltonian(ms, spec), t);
  return DensityMatrix(u * joint0 * u.adjoint());
}

std::vector<Vector> pointer_states(Index n_gamma, const Vector& betas,
                                   const AncillaLayout& layout) {
  if (layout.n_gamma != n_gamma) {
    throw DimensionError("layout holds " + std::to_string(layout.n_gamma) +
                         " pointer labels, expected " + std::to_string(n_gamma));
  }
  if (betas.size() != layout.n_levels + 1) {
    throw DimensionError("expected " + std::to_string(layout.n_levels + 1) +
                         " amplitudes, got " + std::to_string(betas.size()));
  }
  const double p0 = std::norm(betas(0));
  if (std::sqrt(p0) >= 1.0 - 1e-12) {
    throw ValidationError("pointer states undefined: the excitation has not "
                          "left the ready state (|beta_0| = 1)");
  }
  const double scale = 1.0 / std::sqrt(1.0 - p0);
  std::vector<Vector> pointers;
  pointers.reserve(static_cast<size_t>(n_gamma));
  for (Index g = 0; g < n_gamma; ++g) {
    Vector a = Vector::Zero(layout.dim());
    for (Index l = 1; l <= layout.n_levels; ++l) {
      a(layout.index(g, l)) = scale * betas(l);
    }
    pointers.push_back(std::move(a));
  }
  return pointers;
}

DensityMatrix closed_form_joint(const DensityMatrix& rho, const MeasurementSet& ms,
                                const ChainSpec& spec, double t) {
  if (rho.dim() != ms.dim) {
    throw DimensionError("state dimension " + std::to_string(rho.dim()) +
                         " does not match measurement set dimension " +
                         std::to_string(ms.dim));
  }
  const AncillaLayout layout{static_cast<Index>(ms.ops.size()), spec.n_levels};
  const Index n_a = layout.dim();
  const Vector betas = beta_row(spec, t);
  const Complex beta0 = betas(0);
  const double abs_beta0 = std::abs(beta0);
  const Vector psi0 = basis_vector(n_a, AncillaLayout::ready_index());

  if (abs_beta0 >= 1.0 - 1e-12) {
    // Degenerate corner where the normalized pointer states are undefined:
    // expand the exact transfer operator instead of the three-term form.
    Matrix transfer = beta0 * tensor(Matrix::Identity(ms.dim, ms.dim),
                                     Matrix(psi0 * Vector::Ones(1).adjoint()));
    for (Index g = 0; g < layout.n_gamma; ++g) {
      Vector tail = Vector::Zero(n_a);
      for (Index l = 1; l <= layout.n_levels; ++l) {
        tail(layout.index(g, l)) = betas(l);
      }
      transfer += tensor(ms.ops[static_cast<size_t>(g)],
                         Matrix(tail * Vector::Ones(1).adjoint()));
    }
    return DensityMatrix(transfer * rho.matrix() * transfer.adjoint());
  }

  const double p0 = abs_beta0 * abs_beta0;
  const double xi0 = std::arg(beta0);
  const std::vector<Vector> pointers = pointer_states(layout.n_gamma, betas, layout);

  Matrix joint = p0 * tensor(rho.matrix(), Matrix(psi0 * psi0.adjoint()));

  Matrix delta = Matrix::Zero(ms.dim * n_a, ms.dim * n_a);
  const Complex phase = std::exp(Complex(0.0, -xi0)) * std::sqrt(1.0 - p0);
  for (Index g = 0; g < layout.n_gamma; ++g) {
    delta += phase * tensor(Matrix(ms.ops[static_cast<size_t>(g)] * rho.matrix()),
                            Matrix(pointers[static_cast<size_t>(g)] * psi0.adjoint()));
  }
  delta += Matrix(delta.adjoint());
  joint += abs_beta0 * delta;

  for (Index g = 0; g < layout.n_gamma; ++g) {
    for (Index gp = 0; gp < layout.n_gamma; ++gp) {
      joint += (1.0 - p0) *
               tensor(Matrix(ms.ops[static_cast<size_t>(g)] * rho.matrix() *
                             ms.ops[static_cast<size_t>(gp)].adjoint()),
                      Matrix(pointers[static_cast<size_t>(g)] *
                             pointers[static_cast<size_t>(gp)].adjoint()));
    }
  }
  return DensityMatrix(joint);
}

std::optional<PlateauWindow> plateau_window(const EvolutionTrace& trace,
                                            double epsilon) {
  if (trace.times.empty()) {
    throw ValidationError("trace is empty");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError("plateau threshold must lie in (0, 1)");
  }
  std::optional<PlateauWindow> best;
  size_t i = 0;
  while (i < trace.times.size()) {
    if (trace.p0[i] < epsilon) {
      size_t j = i;
      while (j + 1 < trace.times.size() && trace.p0[j + 1] < epsilon) ++j;
      const double length = trace.times[j] - trace.times[i];
      if (!best || length > best->t_end - best->t_start) {
        best = PlateauWindow{trace.times[i], trace.times[j]};
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  return best;
}

std::vector<double> revival_times(const EvolutionTrace& trace, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError("revival threshold must lie in (0, 1)");
  }
  std::vector<double> revivals;
  for (size_t i = 1; i < trace.times.size(); ++i) {
    if (trace.p0[i - 1] < epsilon && trace.p0[i] >= epsilon) {
      revivals.push_back(trace.times[i]);
    }
  }
  return revivals;
}

} // namespace povmdyn
