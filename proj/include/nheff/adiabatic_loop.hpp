#pragma once

#include <array>
#include <functional>
#include <vector>

#include "nheff/eigensystem.hpp"
#include "nheff/model.hpp"

namespace nheff {

// Phase bookkeeping convention for the monodromy matrix.
//  - CProductContinuity: numerical continuation; branches are paired step to
//    step by the largest |c-overlap| and signs fixed by c-product
//    sign-continuity, and the final vectors are re-expressed in the initial
//    basis through c-product projections.
//  - PaperExchangeRule: literal exchange bookkeeping; the matrix is the
//    ordered product of the +-i exchange factors collected at overcritical
//    lambda^cr crossings, while the numerical continuation still provides
//    the per-step trace. Two-level models only.
enum class Convention { CProductContinuity, PaperExchangeRule };

enum class Orientation { Positive, Negative };

const char* to_string(Convention c);
const char* to_string(Orientation o);

// Closed path in the (lambda, omega) plane, traversed `turns` times in
// `steps` uniform parameter steps per turn.
struct LoopPath {
  enum class Shape { Circle, Polyline };

  ParameterPoint center;
  Shape shape = Shape::Circle;
  double radius_lambda = 0.1;
  double radius_omega = 0.1;
  std::vector<ParameterPoint> waypoints;  // Polyline corners; closed implicitly
  int steps = 256;
  Orientation orientation = Orientation::Positive;
  int turns = 1;

  // Point at loop fraction t in [0, 1); t = 0 is the base point.
  ParameterPoint at(double t) const;
  void check() const;  // throws std::invalid_argument on invariant violations
};

struct ContinuationOptions {
  double overlap_threshold = 0.8;  // minimum |c-overlap| for a step pairing
  int max_bisection = 12;          // adaptive step-halving depth
  double delta_min = 1e-3;         // loop-to-branch-point exclusion distance
  double ep_guard = kEpGuard;
};

// State after each step of a continuation.
struct StepRecord {
  int step = 0;
  ParameterPoint p;
  std::array<ComplexEigenvalue, 2> values;
  std::array<double, 2> a{1.0, 1.0};
  double b12 = 0.0;
  std::array<double, 2> overlap{1.0, 1.0};  // |c-overlap| used for the pairing
  int bisections = 0;
};

struct MonodromyReport {
  std::array<int, 2> branch_permutation{0, 1};  // final branch k carries initial branch perm[k]
  Eigen::Matrix2cd phase_matrix;  // column k: c-coefficients of final vector k in the initial basis
  int period = 0;                 // smallest p <= max_turns with ||M^p - I|| < 1e-6; 0 = none found
  Convention convention = Convention::CProductContinuity;
  std::vector<StepRecord> trace;
};

// Tracked eigenvector frame along an open parameter path. vectors columns are
// c-normalized and sign-continuous from the start frame.
struct TrackedPath {
  std::vector<Eigen::Matrix2cd> frames;  // per path point, including endpoints
  std::vector<StepRecord> trace;
};

// Continues the two-level eigensystem along explicit path points (open path;
// no branch-point exclusion is applied — diagnostics deliberately approach
// them). Throws numerical_error when a branch cannot be followed.
TrackedPath continue_along(const TwoLevelModel& m,
                           const std::vector<ParameterPoint>& points,
                           const ContinuationOptions& opt = {});

// Continues the eigensystem around the closed loop and accumulates the
// monodromy matrix under the chosen convention. Throws numerical_error when
// the path passes within delta_min of a known branch point or a branch is
// lost.
MonodromyReport continue_eigensystem(const TwoLevelModel& m, const LoopPath& path,
                                     Convention convention,
                                     const ContinuationOptions& opt = {});

// Runs repeated turns accumulating the monodromy and returns the report with
// `period` = the smallest turn count p <= max_turns whose accumulated matrix
// is the identity within 1e-6 (0 when none is found).
MonodromyReport measure_period(const TwoLevelModel& m, const LoopPath& path,
                               Convention convention, int max_turns = 8,
                               const ContinuationOptions& opt = {});

}  // namespace nheff
