#include "nheff/adiabatic_loop.hpp"

#include <algorithm>
#include <cmath>

#include "nheff/branch_structure.hpp"

namespace nheff {

const char* to_string(Convention c) {
  return c == Convention::CProductContinuity ? "c_product" : "paper_rule";
}

const char* to_string(Orientation o) {
  return o == Orientation::Positive ? "positive" : "negative";
}

ParameterPoint LoopPath::at(double t) const {
  t -= std::floor(t);
  if (orientation == Orientation::Negative) t = 1.0 - t;
  if (shape == Shape::Circle) {
    double th = 2.0 * M_PI * t;
    return ParameterPoint{center.lambda + radius_lambda * std::cos(th),
                          center.omega + radius_omega * std::sin(th)};
  }
  const size_t nseg = waypoints.size() - 1;
  double s = t * static_cast<double>(nseg);
  size_t seg = std::min(static_cast<size_t>(s), nseg - 1);
  double frac = s - static_cast<double>(seg);
  const ParameterPoint& a = waypoints[seg];
  const ParameterPoint& b = waypoints[seg + 1];
  return ParameterPoint{a.lambda + frac * (b.lambda - a.lambda),
                        a.omega + frac * (b.omega - a.omega)};
}

void LoopPath::check() const {
  if (steps < 16) throw std::invalid_argument("loop needs steps >= 16");
  if (turns < 1) throw std::invalid_argument("loop needs turns >= 1");
  if (shape == Shape::Circle) {
    if (radius_lambda <= 0.0 || radius_omega <= 0.0) {
      throw std::invalid_argument("circle radii must be positive");
    }
  } else {
    if (waypoints.size() < 4) {
      throw std::invalid_argument("closed polyline needs at least 4 points");
    }
    const ParameterPoint& a = waypoints.front();
    const ParameterPoint& b = waypoints.back();
    if (a.lambda != b.lambda || a.omega != b.omega) {
      throw std::invalid_argument("polyline must be closed (first point = last point)");
    }
  }
}

namespace {

struct Frame {
  Eigen::Matrix2cd v;
  std::array<Complex, 2> e;
};

Frame initial_frame(const TwoLevelModel& m, const ParameterPoint& p, double ep_guard) {
  BiorthogonalEigensystem sys = eig_complex_symmetric(build_hamiltonian(m, p), ep_guard);
  if (sys.ep_flag) {
    throw numerical_error("path starts at a degeneracy (vanishing c-norm)");
  }
  Frame f;
  f.v = sys.vectors;
  f.e = {sys.values[0].value, sys.values[1].value};
  return f;
}

// One continuation step from the frame at t0 to the path point at t1, with
// adaptive bisection when the c-overlap pairing is ambiguous.
template <typename PointFn>
Frame advance(const TwoLevelModel& m, const Frame& from, const PointFn& point,
              double t0, double t1, int depth, const ContinuationOptions& opt,
              StepRecord& rec) {
  ParameterPoint p = point(t1);
  BiorthogonalEigensystem sys = eig_complex_symmetric(build_hamiltonian(m, p), opt.ep_guard);
  if (sys.ep_flag) {
    throw numerical_error("continuation reached an exceptional point (vanishing c-norm)");
  }

  Eigen::Matrix2cd o;
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < 2; ++j) {
      o(k, j) = cdot(from.v.col(k), sys.vectors.col(j));
    }
  }
  double keep = std::min(std::abs(o(0, 0)), std::abs(o(1, 1)));
  double swap = std::min(std::abs(o(0, 1)), std::abs(o(1, 0)));
  if (std::max(keep, swap) < opt.overlap_threshold) {
    if (depth >= opt.max_bisection) {
      throw numerical_error("branch continuation lost: c-overlap below threshold");
    }
    double tm = 0.5 * (t0 + t1);
    Frame mid = advance(m, from, point, t0, tm, depth + 1, opt, rec);
    rec.bisections += 1;
    return advance(m, mid, point, tm, t1, depth + 1, opt, rec);
  }

  std::array<int, 2> perm = keep >= swap ? std::array<int, 2>{0, 1}
                                         : std::array<int, 2>{1, 0};
  Frame next;
  for (int k = 0; k < 2; ++k) {
    int j = perm[k];
    Complex s = o(k, j);
    double sign = s.real() >= 0.0 ? 1.0 : -1.0;
    next.v.col(k) = sign * sys.vectors.col(j);
    next.e[k] = sys.values[static_cast<size_t>(j)].value;
    rec.overlap[k] = std::abs(s);
    rec.a[k] = sys.a_metrics(j);
  }
  rec.b12 = sys.b_metrics(0, 1);
  rec.p = p;
  rec.values = {ComplexEigenvalue::from(next.e[0]), ComplexEigenvalue::from(next.e[1])};
  return next;
}

// c-projection of the current frame onto the initial c-orthonormal basis:
// column k holds the coefficients of current vector k.
Eigen::Matrix2cd phase_matrix_of(const Frame& init, const Frame& current) {
  Eigen::Matrix2cd mm;
  for (int l = 0; l < 2; ++l) {
    for (int k = 0; k < 2; ++k) {
      mm(l, k) = cdot(init.v.col(l), current.v.col(k));
    }
  }
  return mm;
}

std::array<int, 2> permutation_of(const Eigen::Matrix2cd& mm) {
  std::array<int, 2> perm{};
  for (int k = 0; k < 2; ++k) {
    perm[k] = std::abs(mm(0, k)) >= std::abs(mm(1, k)) ? 0 : 1;
  }
  if (perm[0] == perm[1]) {
    throw numerical_error("monodromy matrix is not a permutation");
  }
  return perm;
}

int period_of_matrix(const Eigen::Matrix2cd& mm, int max_turns) {
  Eigen::Matrix2cd p = mm;
  for (int k = 1; k <= max_turns; ++k) {
    if ((p - Eigen::Matrix2cd::Identity()).norm() < 1e-6) return k;
    p = p * mm;
  }
  return 0;
}

// Exchange bookkeeping factors. A crossing where e1 - e2 turns positive
// maps {Phi_1, Phi_2} -> {-i Phi_2, +i Phi_1} (columns in the old basis);
// the opposite crossing direction applies the inverse map. Anchoring the
// factor to the crossing direction (not to traversal order) keeps repeated
// and reversed traversals consistent with each other.
Eigen::Matrix2cd paper_factor(bool forward) {
  Eigen::Matrix2cd p = Eigen::Matrix2cd::Zero();
  if (forward) {
    p(1, 0) = Complex(0, -1);
    p(0, 1) = Complex(0, 1);
  } else {
    p(1, 0) = Complex(0, 1);
    p(0, 1) = Complex(0, -1);
  }
  return p;
}

// Ordered product of exchange factors over the overcritical level crossings
// of the traversed path, detected from the sign changes of e1 - e2 at the
// step endpoints.
template <typename PointFn>
Eigen::Matrix2cd paper_rule_matrix(const TwoLevelModel& m, const PointFn& point,
                                   const std::vector<double>& ts) {
  std::vector<double> d(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    ParameterPoint p = point(ts[i]);
    d[i] = m.e1(p.lambda) - m.e2(p.lambda);
  }
  Eigen::Matrix2cd x = Eigen::Matrix2cd::Identity();
  double prev = 0.0;
  size_t prev_i = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) continue;
    if (prev != 0.0 && d[i] * prev < 0.0) {
      // crossing between ts[prev_i] and ts[i]; locate it linearly in d
      double frac = prev / (prev - d[i]);
      double tc = ts[prev_i] + frac * (ts[i] - ts[prev_i]);
      ParameterPoint pc = point(tc);
      if (classify(m, pc.omega).kind == Regime::Overcritical) {
        x = x * paper_factor(d[i] > prev);
      }
    }
    prev = d[i];
    prev_i = i;
  }
  return x;
}

void guard_branch_points(const TwoLevelModel& m, const LoopPath& path,
                         double delta_min) {
  std::vector<ParameterPoint> eps = known_branch_points(m);
  if (eps.empty()) return;
  const int samples = 4 * path.steps;
  for (int i = 0; i < samples; ++i) {
    ParameterPoint p = path.at(static_cast<double>(i) / samples);
    for (const auto& ep : eps) {
      double dl = p.lambda - ep.lambda;
      double dw = p.omega - ep.omega;
      if (std::sqrt(dl * dl + dw * dw) < delta_min) {
        throw numerical_error("loop passes within delta_min of a branch point");
      }
    }
  }
}

}  // namespace

TrackedPath continue_along(const TwoLevelModel& m,
                           const std::vector<ParameterPoint>& points,
                           const ContinuationOptions& opt) {
  validate(m);
  if (points.size() < 2) {
    throw std::invalid_argument("path needs at least 2 points");
  }
  TrackedPath out;
  Frame frame = initial_frame(m, points.front(), opt.ep_guard);
  out.frames.push_back(frame.v);
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    const ParameterPoint a = points[i];
    const ParameterPoint b = points[i + 1];
    auto seg = [&](double t) {
      return ParameterPoint{a.lambda + t * (b.lambda - a.lambda),
                            a.omega + t * (b.omega - a.omega)};
    };
    StepRecord rec;
    rec.step = static_cast<int>(i) + 1;
    frame = advance(m, frame, seg, 0.0, 1.0, 0, opt, rec);
    out.frames.push_back(frame.v);
    out.trace.push_back(rec);
  }
  return out;
}

namespace {

// Shared driver: advances whole turns, recording one StepRecord per step.
struct LoopRun {
  Frame init;
  Frame current;
  std::vector<StepRecord> trace;
  std::vector<double> ts;  // endpoint parameters traversed, starting at 0
};

LoopRun start_run(const TwoLevelModel& m, const LoopPath& path,
                  const ContinuationOptions& opt) {
  path.check();
  validate(m);
  guard_branch_points(m, path, opt.delta_min);
  LoopRun run;
  run.init = initial_frame(m, path.at(0.0), opt.ep_guard);
  run.current = run.init;
  run.ts.push_back(0.0);
  return run;
}

void advance_turn(const TwoLevelModel& m, const LoopPath& path,
                  const ContinuationOptions& opt, LoopRun& run, int turn) {
  auto point = [&](double t) { return path.at(t); };
  for (int i = 0; i < path.steps; ++i) {
    double t0 = turn + static_cast<double>(i) / path.steps;
    double t1 = turn + static_cast<double>(i + 1) / path.steps;
    StepRecord rec;
    rec.step = turn * path.steps + i + 1;
    run.current = advance(m, run.current, point, t0, t1, 0, opt, rec);
    run.trace.push_back(rec);
    run.ts.push_back(t1);
  }
}

}  // namespace

MonodromyReport continue_eigensystem(const TwoLevelModel& m, const LoopPath& path,
                                     Convention convention,
                                     const ContinuationOptions& opt) {
  LoopRun run = start_run(m, path, opt);
  for (int turn = 0; turn < path.turns; ++turn) {
    advance_turn(m, path, opt, run, turn);
  }
  MonodromyReport rep;
  rep.convention = convention;
  if (convention == Convention::CProductContinuity) {
    rep.phase_matrix = phase_matrix_of(run.init, run.current);
  } else {
    auto point = [&](double t) { return path.at(t); };
    rep.phase_matrix = paper_rule_matrix(m, point, run.ts);
  }
  rep.branch_permutation = permutation_of(rep.phase_matrix);
  rep.period = period_of_matrix(rep.phase_matrix, 8);
  rep.trace = std::move(run.trace);
  return rep;
}

MonodromyReport measure_period(const TwoLevelModel& m, const LoopPath& path,
                               Convention convention, int max_turns,
                               const ContinuationOptions& opt) {
  if (max_turns < 1) throw std::invalid_argument("max_turns must be >= 1");
  LoopRun run = start_run(m, path, opt);
  MonodromyReport rep;
  rep.convention = convention;
  rep.period = 0;
  auto point = [&](double t) { return path.at(t); };
  for (int turn = 0; turn < max_turns; ++turn) {
    advance_turn(m, path, opt, run, turn);
    Eigen::Matrix2cd acc;
    if (convention == Convention::CProductContinuity) {
      acc = phase_matrix_of(run.init, run.current);
    } else {
      acc = paper_rule_matrix(m, point, run.ts);
    }
    if (turn == 0) {
      rep.phase_matrix = acc;  // single-turn matrix
      rep.branch_permutation = permutation_of(acc);
    }
    if ((acc - Eigen::Matrix2cd::Identity()).norm() < 1e-6) {
      rep.period = turn + 1;
      break;
    }
  }
  rep.trace = std::move(run.trace);
  return rep;
}

}  // namespace nheff
