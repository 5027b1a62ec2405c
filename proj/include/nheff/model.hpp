#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace nheff {

using Complex = std::complex<double>;

// Thrown when an algorithm fails numerically at run time (non-convergence,
// lost branch continuation, singular resolvent). Distinct from
// std::invalid_argument, which signals a broken input contract.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A point in the two-dimensional external parameter plane.
struct ParameterPoint {
  double lambda = 0.0;
  double omega = 0.0;
};

// Affine unperturbed level e(lambda) = intercept + slope * lambda.
struct AffineLevel {
  double intercept = 0.0;
  double slope = 0.0;
  double operator()(double lambda) const { return intercept + slope * lambda; }
};

// Parametric 2x2 complex-symmetric family
//   H(lambda, omega) = [[e1(lambda) - i*gamma1/2, omega],
//                       [omega, e2(lambda) - i*gamma2/2]]
// with real coupling omega. The model's omega field is the default used when
// a path or operation does not vary omega itself.
struct TwoLevelModel {
  AffineLevel e1{0.0, 1.0};
  AffineLevel e2{0.0, -1.0};
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  double omega = 0.25;
};

// Discriminant F = F_R + i*F_I controlling the branch structure; the square
// of the eigenvalue splitting.
struct DiscriminantValue {
  Complex f{0.0, 0.0};
  double f_real = 0.0;
  double f_imag = 0.0;
};

// Per-channel scalar form factor g(E). Constant 1 by default; the rational
// kind is g(E) = E / (E + c), singular at E = -c.
struct FormFactor {
  enum class Kind { Constant, Rational };
  Kind kind = Kind::Constant;
  double c = 1.0;

  bool constant() const { return kind == Kind::Constant; }
  double operator()(double energy) const;
};

// N-level, C-channel effective Hamiltonian
//   H_eff(E) = h0 - (i/2) * W(E) * W(E)^T,  W(E)_{kc} = w_{kc} * g_c(E),
// with real symmetric internal h0 and real coupling matrix w. Constant form
// factors make H_eff energy independent.
struct EffectiveHamiltonianModel {
  Eigen::MatrixXd h0;                    // N x N, symmetric
  Eigen::MatrixXd w;                     // N x C
  std::vector<FormFactor> form_factors;  // size C, or empty for all-constant

  int n() const { return static_cast<int>(h0.rows()); }
  int channels() const { return static_cast<int>(w.cols()); }
  bool energy_dependent() const;
};

// Throws std::invalid_argument when a model violates its invariants.
void validate(const TwoLevelModel& m);
void validate(const EffectiveHamiltonianModel& m);

Eigen::Matrix2cd build_hamiltonian(const TwoLevelModel& m, const ParameterPoint& p);

DiscriminantValue discriminant(const TwoLevelModel& m, const ParameterPoint& p);

// W(E): coupling matrix with form factors applied column-wise.
Eigen::MatrixXd coupling_at(const EffectiveHamiltonianModel& m, double energy);

Eigen::MatrixXcd build_effective_hamiltonian(const EffectiveHamiltonianModel& m,
                                             double energy);

// Matrix-form realization of a TwoLevelModel at a parameter point:
// h0 = [[e1, omega], [omega, e2]], w = diag(sqrt(gamma1), sqrt(gamma2)),
// so that h0 - (i/2) w w^T reproduces build_hamiltonian exactly.
EffectiveHamiltonianModel to_effective(const TwoLevelModel& m, const ParameterPoint& p);

}  // namespace nheff
