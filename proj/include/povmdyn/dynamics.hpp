#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "povmdyn/naimark.hpp"
#include "povmdyn/qmatrix.hpp"
#include "povmdyn/states.hpp"

namespace povmdyn {

// Hopping chain attached to the ancilla: omegas[l] couples level l to l+1
// (level 0 is the ready state |psi0>).
struct ChainSpec {
  Index n_levels = 1;          // n_L
  std::vector<double> omegas;  // size n_levels, all positive
  std::string profile = "custom";
};

ChainSpec coupling_profile(const std::string& kind, Index n_levels, double omega0);

// Real symmetric tridiagonal (n_L+1) x (n_L+1) matrix with omegas on the
// off-diagonals; iso-spectral to every per-j block of the full Hamiltonian.
Matrix block_hamiltonian(const ChainSpec& spec);

// Amplitudes beta_l(t) = <l| e^{-i t H_block} |0>, identical for every system
// index j, plus the derived occupation P0 = |beta_0|^2 and phase of beta_0.
struct EvolutionTrace {
  std::vector<double> times;
  std::vector<Vector> betas;
  std::vector<double> p0;
  std::vector<double> xi0_phase;
  std::vector<std::pair<double, DensityMatrix>> snapshots;
};

Vector beta_row(const ChainSpec& spec, double t);
EvolutionTrace beta_amplitudes(const ChainSpec& spec,
                               const std::vector<double>& times);

// Full system x ancilla Hamiltonian in the compact form
//   sum_g M^g x Theta^(g) + sum_gg' M^g M^g'^adj x Theta^(g,g') + h.c.
Matrix full_hamiltonian(const MeasurementSet& ms, const ChainSpec& spec);

// rho_SA(t) = U(t) (rho x |psi0><psi0|) U(t)^adj via the full matrix (oracle path).
DensityMatrix evolve_joint(const DensityMatrix& rho, const MeasurementSet& ms,
                           const ChainSpec& spec, double t);

// Normalized pointer states |A^g(t)> = (1-|b0|^2)^(-1/2) sum_l b_l |g,l>.
// Requires |beta_0| < 1 - 1e-12.
std::vector<Vector> pointer_states(Index n_gamma, const Vector& betas,
                                   const AncillaLayout& layout);

// Assembles the three-term closed form of rho_SA(t) from beta amplitudes and
// pointer states; agrees with evolve_joint to numerical precision.
DensityMatrix closed_form_joint(const DensityMatrix& rho, const MeasurementSet& ms,
                                const ChainSpec& spec, double t);

struct PlateauWindow {
  double t_start = 0.0; // reported as the decoherence time
  double t_end = 0.0;
};

// Longest contiguous recorded interval with P0 < epsilon, or nullopt.
std::optional<PlateauWindow> plateau_window(const EvolutionTrace& trace,
                                            double epsilon);

// Times of upward crossings of epsilon after P0 has been below it.
std::vector<double> revival_times(const EvolutionTrace& trace, double epsilon);

} // namespace povmdyn
