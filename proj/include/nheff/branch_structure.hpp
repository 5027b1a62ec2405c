#pragma once

#include "nheff/eigensystem.hpp"
#include "nheff/model.hpp"

namespace nheff {

enum class Regime { Overcritical, DoublePole, Subcritical };

const char* to_string(Regime r);

// Coupling regime at the level-crossing parameter lambda^cr, decided by the
// sign of F_R there (F is purely real at the crossing for real omega).
struct CouplingRegime {
  Regime kind = Regime::Subcritical;
  double f_real_at_crossing = 0.0;
};

// One Newton iterate of the branch-point search.
struct BranchIterate {
  ParameterPoint p;
  double abs_f = 0.0;
};

// A root of F(lambda, omega) = 0: a square-root branch point of the
// eigenvalue surfaces where the two eigenvalues coalesce.
struct BranchPoint {
  ParameterPoint location;
  ComplexEigenvalue coalesced_value;
  double residual = 0.0;  // |F| at the last iterate
  bool converged = false;
  int iterations = 0;
};

// lambda with e1(lambda) = e2(lambda); throws std::invalid_argument when the
// levels are parallel (no crossing).
double crossing_lambda(const TwoLevelModel& m);

CouplingRegime classify(const TwoLevelModel& m, double omega);

// Damped Newton iteration on (F_R, F_I) in the unknowns (lambda, omega),
// with an SVD pseudo-inverse step (the Jacobian is rank-1 in the Hermitian
// case) and step halving on residual increase. Converged when |F| < 1e-20
// within 100 iterations.
// `history`, when given, receives one entry per iterate (initial point first).
BranchPoint find_branch_point(const TwoLevelModel& m, const ParameterPoint& initial,
                              std::vector<BranchIterate>* history = nullptr);

// The branch points of the model in closed form: (lambda^cr, +-|dgamma|/4).
// Empty when the levels are parallel.
std::vector<ParameterPoint> known_branch_points(const TwoLevelModel& m);

// Closed-form eigenvectors in the fixed analytic gauge: columns
// (cos tau, sin tau) and (-sin tau, cos tau) with tan 2tau = 2 omega / u,
// u = (e1 - e2) - (i/2)(gamma1 - gamma2), tau on the principal branch.
// Both columns are c-normalized by construction. This gauge is single-valued
// and jumps across lambda^cr in the overcritical regime (the state exchange);
// numerical continuation in the adiabatic-loop module is smooth instead.
Eigen::Matrix2cd two_level_eigenvectors_principal(const TwoLevelModel& m,
                                                  const ParameterPoint& p);

// Open segment through lambda^cr at fixed omega.
struct SegmentPath {
  double lambda_from = -0.5;
  double lambda_to = 0.5;
  double omega = 0.25;
  int steps = 200;
};

struct ExchangeReport {
  CouplingRegime regime;
  bool exchanged = false;       // tracked branches swap dominant components
  bool energies_cross = false;  // sign change of E_1 - E_2 along the path
  bool widths_cross = false;    // sign change of Gamma_1 - Gamma_2
  // Near a double pole the two states merge along the self-orthogonal ray
  // (1, +-i): dp_overlap = |<Phi_1(after)|Phi_2(before)>| / sqrt(A1 A2) -> 1
  // and dp_sign reports which sign of the +-i exchange is realized.
  double dp_overlap = 0.0;
  int dp_sign = 0;
};

// Continues the eigenvectors across lambda^cr (adiabatic-loop stepping) and
// reports the exchange behavior of the regime. The path must straddle
// lambda^cr.
ExchangeReport exchange_diagnostic(const TwoLevelModel& m, const SegmentPath& path);

}  // namespace nheff
