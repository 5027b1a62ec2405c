#pragma once

#include <vector>

#include "nheff/eigensystem.hpp"
#include "nheff/model.hpp"

namespace nheff {

// S matrix on a real-energy grid with per-node deviation from unitarity
// ||S^dag S - I|| and from symmetry ||S - S^T|| (Frobenius).
struct SMatrixScan {
  std::vector<double> energies;
  std::vector<Eigen::MatrixXcd> matrices;
  std::vector<double> unitarity_defect;
  std::vector<double> symmetry_defect;

  double max_unitarity_defect() const;
  double max_symmetry_defect() const;
};

// Eigenbasis of the effective Hamiltonian together with the channel
// couplings of each eigenstate: row k of couplings is
// gamma_k = Phi_k^T W (no conjugation, Phi_k c-normalized).
struct EigenExpansion {
  std::vector<ComplexEigenvalue> values;
  Eigen::MatrixXcd vectors;    // columns = eigenvectors
  Eigen::MatrixXcd couplings;  // N x C, row k = gamma_k
};

// One S-matrix pole: location, rank-one residue matrix, and the fixed-point
// iteration record (zero iterations for an energy-independent coupling).
struct Pole {
  Complex value{0.0, 0.0};
  Eigen::MatrixXcd residue;  // C x C
  int iterations = 0;
  bool converged = true;
};

struct PoleSet {
  std::vector<Pole> poles;
};

// Widths under a global coupling-strength scale alpha: for each alpha the
// widths -2 Im E_k sorted descending, their sum, and the trace identity
// value alpha^2 sum_kc w_kc^2 the sum must equal.
struct TrappingSweep {
  std::vector<double> alphas;
  std::vector<std::vector<double>> widths;  // per alpha, descending
  std::vector<double> width_sums;
  std::vector<double> coupling_sums;
};

// Deviation curve of the S matrix approaching a degenerate point:
// d(delta) = max over the energy grid of ||S(E; delta) - S(E; 0)||_F, where
// delta displaces the model parameters from `at` along (dlambda, domega).
struct SmoothnessCurve {
  std::vector<double> deltas;
  std::vector<double> deviations;
};

// S(E) = I - i W(E)^T (E - H_eff(E))^{-1} W(E) at real energy E, via an LU
// solve with a residual check at 1e-12 relative. Finite at degeneracies of
// H_eff as long as E itself is not a pole.
Eigen::MatrixXcd s_matrix(const EffectiveHamiltonianModel& m, double energy);

SMatrixScan scan_s_matrix(const EffectiveHamiltonianModel& m,
                          const std::vector<double>& energies);

// Diagonalizes H_eff(energy) and forms the eigenstate couplings. Throws
// numerical_error at a degeneracy (vanishing c-norm). The energy argument
// only matters for energy-dependent couplings.
EigenExpansion eigenbasis_expansion(const EffectiveHamiltonianModel& m,
                                    double energy = 0.0);

// Reconstruction I - i sum_k gamma_k gamma_k^T / (E - E_k) from a frozen
// expansion. Exact for energy-independent couplings.
Eigen::MatrixXcd expansion_s_matrix(const EigenExpansion& ex, double energy);

// Poles of S in the lower half plane. Energy-independent couplings: the
// eigenvalues of H_eff directly, residues -i gamma_k gamma_k^T. Energy
// dependent: per-level fixed point E* = Re E_k(E*) by plain iteration
// (relaxation 0.5 on oscillation, |dE| < 1e-12, at most 200 iterations),
// pole = E_k(E*), residue from the expansion evaluated at E*.
PoleSet find_poles(const EffectiveHamiltonianModel& m);

// Requires energy-independent couplings and a strictly ascending grid of
// alphas >= 0.
TrappingSweep trapping_sweep(const EffectiveHamiltonianModel& m,
                             const std::vector<double>& alphas);

// d(delta) for each delta in `deltas` (typically including 0, which maps to
// exactly 0) over the given real-energy grid.
SmoothnessCurve smoothness_curve(const TwoLevelModel& m, const ParameterPoint& at,
                                 double dlambda, double domega,
                                 const std::vector<double>& deltas,
                                 const std::vector<double>& energies);

}  // namespace nheff
