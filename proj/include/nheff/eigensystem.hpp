#pragma once

#include <utility>
#include <vector>

#include "nheff/model.hpp"

namespace nheff {

// Complex eigenvalue split as energy - (i/2) * width.
struct ComplexEigenvalue {
  double energy = 0.0;
  double width = 0.0;
  Complex value{0.0, 0.0};

  static ComplexEigenvalue from(Complex v) {
    return ComplexEigenvalue{v.real(), -2.0 * v.imag(), v};
  }
};

// Eigendecomposition of a complex-symmetric matrix with eigenvectors
// normalized by the bilinear c-product sum_j Phi_j^2 = 1 (the left
// eigenvector is the entrywise conjugate of the right one). a_metrics and
// b_metrics are the ordinary-inner-product overlaps A_k = <Phi_k|Phi_k> and
// B_k^l = |<Phi_k|Phi_l>| of the c-normalized vectors; both diverge toward a
// degeneracy. When a pre-normalization c-norm falls below the guard the
// degenerate vectors cannot be c-normalized: ep_flag is set and those columns
// stay at unit ordinary norm.
struct BiorthogonalEigensystem {
  std::vector<ComplexEigenvalue> values;
  Eigen::MatrixXcd vectors;   // columns = right eigenvectors
  Eigen::VectorXd a_metrics;  // A_k
  Eigen::MatrixXd b_metrics;  // B_k^l, zero on the diagonal
  bool ep_flag = false;
  double min_cnorm = 1.0;     // smallest |sum_j Phi_j^2| over unit-norm vectors
};

// Default guard on the pre-normalization c-norm of a unit-ordinary-norm
// eigenvector. Double-precision solvers land near sqrt(machine eps) ~ 1.5e-8
// at an exact degeneracy, so the guard sits well above that floor; legal
// continuation paths keep c-norms orders of magnitude higher still.
inline constexpr double kEpGuard = 1e-6;

// Bilinear c-product sum_j u_j v_j (no conjugation).
inline Complex cdot(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
  return (u.array() * v.array()).sum();
}

// Closed-form eigenvalues mean +- sqrt(F)/2 with
// mean = (e1+e2)/2 - (i/4)(gamma1+gamma2), ordered by ascending real part,
// ties broken by ascending imaginary part.
std::pair<ComplexEigenvalue, ComplexEigenvalue> eigenvalues_two_level(
    const TwoLevelModel& m, const ParameterPoint& p);

// Dense eigendecomposition for N <= 64. Requires h symmetric within 1e-12
// entrywise. Eigenvalues ordered ascending by (real, imaginary) part; each
// vector's overall sign is fixed so its largest-magnitude component has
// argument in (-pi/2, pi/2].
BiorthogonalEigensystem eig_complex_symmetric(const Eigen::MatrixXcd& h,
                                              double ep_guard = kEpGuard);

// Overlap metrics of c-normalized vectors: A_k = ||Phi_k||^2 (ordinary norm),
// B_k^l = |<Phi_k|Phi_l>| for k != l.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> overlap_metrics(
    const Eigen::MatrixXcd& vectors);

// a1 * Phi_1 + sign * i * a2 * Phi_2 for a two-column vector set.
Eigen::VectorXcd chiral_superposition(const Eigen::MatrixXcd& vectors,
                                      Complex a1, Complex a2, int sign);

}  // namespace nheff
