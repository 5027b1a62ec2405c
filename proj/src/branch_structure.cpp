#include "nheff/branch_structure.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "nheff/adiabatic_loop.hpp"

namespace nheff {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Overcritical: return "overcritical";
    case Regime::DoublePole: return "double_pole";
    case Regime::Subcritical: return "subcritical";
  }
  return "unknown";
}

double crossing_lambda(const TwoLevelModel& m) {
  double dslope = m.e1.slope - m.e2.slope;
  if (dslope == 0.0) {
    throw std::invalid_argument("parallel levels: e1 and e2 never cross");
  }
  return (m.e2.intercept - m.e1.intercept) / dslope;
}

// Energy scale of the model near the crossing, used to make regime and
// near-degeneracy tolerances dimensionally consistent (F carries energy^2).
static double model_scale(const TwoLevelModel& m, double omega) {
  double lam = crossing_lambda(m);
  return std::max({1.0, std::abs(m.e1(lam)), m.gamma1, m.gamma2, std::abs(omega)});
}

CouplingRegime classify(const TwoLevelModel& m, double omega) {
  validate(m);
  double lam = crossing_lambda(m);
  TwoLevelModel at = m;
  DiscriminantValue f = discriminant(at, ParameterPoint{lam, omega});
  double scale = model_scale(m, omega);
  double tol = 1e-12 * scale * scale;
  CouplingRegime r;
  r.f_real_at_crossing = f.f_real;
  if (f.f_real > tol) {
    r.kind = Regime::Overcritical;
  } else if (f.f_real < -tol) {
    r.kind = Regime::Subcritical;
  } else {
    r.kind = Regime::DoublePole;
  }
  return r;
}

BranchPoint find_branch_point(const TwoLevelModel& m, const ParameterPoint& initial,
                              std::vector<BranchIterate>* history) {
  validate(m);
  if (!std::isfinite(initial.lambda) || !std::isfinite(initial.omega)) {
    throw std::invalid_argument("initial guess must be finite");
  }
  const double da = m.e1.intercept - m.e2.intercept;
  const double db = m.e1.slope - m.e2.slope;
  const double dg = m.gamma1 - m.gamma2;

  auto f_at = [&](double lam, double om) {
    Complex u(da + db * lam, -0.5 * dg);
    return u * u + 4.0 * om * om;
  };

  double lam = initial.lambda;
  double om = initial.omega;
  Complex f = f_at(lam, om);
  if (history) {
    history->push_back(BranchIterate{ParameterPoint{lam, om}, std::abs(f)});
  }
  int it = 0;
  for (; it < 100 && std::abs(f) >= 1e-20; ++it) {
    Complex u(da + db * lam, -0.5 * dg);
    Complex dfdl = 2.0 * u * db;
    Eigen::Matrix2d jac;
    jac << dfdl.real(), 8.0 * om,
           dfdl.imag(), 0.0;
    Eigen::Vector2d resid(f.real(), f.imag());
    // pseudo-inverse step: tolerant of the rank-1 Jacobian at dgamma = 0
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-14);
    Eigen::Vector2d step = -svd.solve(resid);
    if (!step.allFinite()) break;
    // halve the step until the residual decreases
    double scale = 1.0;
    Complex f_next = f;
    for (int half = 0; half < 25; ++half) {
      f_next = f_at(lam + scale * step(0), om + scale * step(1));
      if (std::abs(f_next) < std::abs(f)) break;
      scale *= 0.5;
    }
    if (std::abs(f_next) >= std::abs(f)) break;  // stalled
    lam += scale * step(0);
    om += scale * step(1);
    f = f_next;
    if (history) {
      history->push_back(BranchIterate{ParameterPoint{lam, om}, std::abs(f)});
    }
  }

  BranchPoint bp;
  bp.location = ParameterPoint{lam, om};
  bp.residual = std::abs(f);
  bp.converged = bp.residual < 1e-20;
  bp.iterations = it;
  Complex mean(0.5 * (m.e1(lam) + m.e2(lam)), -0.25 * (m.gamma1 + m.gamma2));
  bp.coalesced_value = ComplexEigenvalue::from(mean);
  return bp;
}

std::vector<ParameterPoint> known_branch_points(const TwoLevelModel& m) {
  if (m.e1.slope == m.e2.slope) return {};
  double lam = crossing_lambda(m);
  double om = std::abs(m.gamma1 - m.gamma2) / 4.0;
  if (om == 0.0) return {ParameterPoint{lam, 0.0}};
  return {ParameterPoint{lam, om}, ParameterPoint{lam, -om}};
}

Eigen::Matrix2cd two_level_eigenvectors_principal(const TwoLevelModel& m,
                                                  const ParameterPoint& p) {
  Complex u(m.e1(p.lambda) - m.e2(p.lambda), -0.5 * (m.gamma1 - m.gamma2));
  if (u == Complex(0, 0) && p.omega == 0.0) {
    throw numerical_error("eigenvector gauge undefined at a full degeneracy");
  }
  // principal branch of tau = atan(2 omega / u) / 2; at u = 0 the argument is
  // infinite and 2 tau = pi/2 (principal limit)
  Complex two_tau;
  if (u == Complex(0, 0)) {
    two_tau = Complex(M_PI / 2.0, 0.0);
  } else {
    two_tau = std::atan(2.0 * p.omega / u);
  }
  Complex tau = 0.5 * two_tau;
  Eigen::Matrix2cd v;
  v(0, 0) = std::cos(tau);
  v(1, 0) = std::sin(tau);
  v(0, 1) = -std::sin(tau);
  v(1, 1) = std::cos(tau);
  return v;
}

ExchangeReport exchange_diagnostic(const TwoLevelModel& m, const SegmentPath& path) {
  validate(m);
  if (path.steps < 2) {
    throw std::invalid_argument("segment needs at least 2 steps");
  }
  double lam_cr = crossing_lambda(m);
  if ((path.lambda_from - lam_cr) * (path.lambda_to - lam_cr) >= 0.0) {
    throw std::invalid_argument("path must straddle lambda^cr");
  }

  ExchangeReport rep;
  rep.regime = classify(m, path.omega);

  std::vector<ParameterPoint> pts;
  pts.reserve(static_cast<size_t>(path.steps) + 1);
  for (int i = 0; i <= path.steps; ++i) {
    double t = static_cast<double>(i) / path.steps;
    pts.push_back(ParameterPoint{
        path.lambda_from + t * (path.lambda_to - path.lambda_from), path.omega});
  }
  TrackedPath tracked = continue_along(m, pts);

  const Eigen::Matrix2cd& first = tracked.frames.front();
  const Eigen::Matrix2cd& last = tracked.frames.back();

  // exchange: the dominant component of each tracked branch swaps
  auto dominant = [](const Eigen::Matrix2cd& v, int k) {
    return std::abs(v(0, k)) >= std::abs(v(1, k)) ? 0 : 1;
  };
  rep.exchanged = dominant(first, 0) != dominant(last, 0) &&
                  dominant(first, 1) != dominant(last, 1);

  const auto& t0 = tracked.trace.front();
  const auto& t1 = tracked.trace.back();
  double de0 = t0.values[0].energy - t0.values[1].energy;
  double de1 = t1.values[0].energy - t1.values[1].energy;
  double dw0 = t0.values[0].width - t0.values[1].width;
  double dw1 = t1.values[0].width - t1.values[1].width;
  rep.energies_cross = de0 * de1 < 0.0;
  rep.widths_cross = dw0 * dw1 < 0.0;

  // near a double pole both branches collapse onto the same self-orthogonal
  // ray; measure it through the metric-normalized ordinary overlap (the
  // c-product of distinct branches is identically zero)
  double scale = std::max({1.0, std::abs(m.e1(lam_cr)), m.gamma1, m.gamma2,
                           std::abs(path.omega)});
  bool near_dp = rep.regime.kind == Regime::DoublePole ||
                 std::abs(rep.regime.f_real_at_crossing) < 1e-5 * scale * scale;
  if (near_dp) {
    Eigen::VectorXcd after_1 = last.col(0);
    Eigen::VectorXcd before_2 = first.col(1);
    Complex o = after_1.dot(before_2) /
                std::sqrt(after_1.squaredNorm() * before_2.squaredNorm());
    rep.dp_overlap = std::abs(o);
    // Phi_1(after) ~ s * i * Phi_2(before) gives <Phi_1|Phi_2> ~ -s*i*|..|
    rep.dp_sign = o.imag() < 0.0 ? 1 : -1;
  }
  return rep;
}

}  // namespace nheff
