#include "nheff/model.hpp"

#include <cmath>

namespace nheff {

double FormFactor::operator()(double energy) const {
  if (kind == Kind::Constant) {
    return 1.0;
  }
  double denom = energy + c;
  if (denom == 0.0 || !std::isfinite(energy)) {
    throw std::invalid_argument("form factor evaluated outside its domain");
  }
  return energy / denom;
}

bool EffectiveHamiltonianModel::energy_dependent() const {
  for (const auto& g : form_factors) {
    if (!g.constant()) return true;
  }
  return false;
}

void validate(const TwoLevelModel& m) {
  if (m.gamma1 < 0.0 || m.gamma2 < 0.0) {
    throw std::invalid_argument("widths gamma1, gamma2 must be nonnegative");
  }
  for (double v : {m.e1.intercept, m.e1.slope, m.e2.intercept, m.e2.slope,
                   m.gamma1, m.gamma2, m.omega}) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("two-level model parameters must be finite");
    }
  }
}

void validate(const EffectiveHamiltonianModel& m) {
  const auto n = m.h0.rows();
  if (n < 1 || m.h0.cols() != n) {
    throw std::invalid_argument("h0 must be square with N >= 1");
  }
  if (n > 64) {
    throw std::invalid_argument("N <= 64 required");
  }
  if (m.w.rows() != n || m.w.cols() < 1) {
    throw std::invalid_argument("coupling matrix must be N x C with C >= 1");
  }
  if ((m.h0 - m.h0.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("h0 must equal its transpose");
  }
  if (!m.form_factors.empty() &&
      m.form_factors.size() != static_cast<size_t>(m.w.cols())) {
    throw std::invalid_argument("need one form factor per channel (or none)");
  }
}

Eigen::Matrix2cd build_hamiltonian(const TwoLevelModel& m, const ParameterPoint& p) {
  if (!std::isfinite(p.lambda) || !std::isfinite(p.omega)) {
    throw std::invalid_argument("parameter point must be finite");
  }
  Eigen::Matrix2cd h;
  h(0, 0) = Complex(m.e1(p.lambda), -0.5 * m.gamma1);
  h(1, 1) = Complex(m.e2(p.lambda), -0.5 * m.gamma2);
  h(0, 1) = h(1, 0) = Complex(p.omega, 0.0);
  return h;
}

DiscriminantValue discriminant(const TwoLevelModel& m, const ParameterPoint& p) {
  if (!std::isfinite(p.lambda) || !std::isfinite(p.omega)) {
    throw std::invalid_argument("parameter point must be finite");
  }
  Complex u(m.e1(p.lambda) - m.e2(p.lambda), -0.5 * (m.gamma1 - m.gamma2));
  Complex f = u * u + 4.0 * p.omega * p.omega;
  return DiscriminantValue{f, f.real(), f.imag()};
}

Eigen::MatrixXd coupling_at(const EffectiveHamiltonianModel& m, double energy) {
  Eigen::MatrixXd wf = m.w;
  for (size_t c = 0; c < m.form_factors.size(); ++c) {
    wf.col(static_cast<Eigen::Index>(c)) *= m.form_factors[c](energy);
  }
  return wf;
}

Eigen::MatrixXcd build_effective_hamiltonian(const EffectiveHamiltonianModel& m,
                                             double energy) {
  validate(m);
  if (!std::isfinite(energy)) {
    throw std::invalid_argument("energy must be finite");
  }
  Eigen::MatrixXd wf = coupling_at(m, energy);
  return m.h0.cast<Complex>() - Complex(0.0, 0.5) * (wf * wf.transpose()).cast<Complex>();
}

EffectiveHamiltonianModel to_effective(const TwoLevelModel& m, const ParameterPoint& p) {
  validate(m);
  EffectiveHamiltonianModel eff;
  eff.h0.setZero(2, 2);
  eff.h0(0, 0) = m.e1(p.lambda);
  eff.h0(1, 1) = m.e2(p.lambda);
  eff.h0(0, 1) = eff.h0(1, 0) = p.omega;
  eff.w.setZero(2, 2);
  eff.w(0, 0) = std::sqrt(m.gamma1);
  eff.w(1, 1) = std::sqrt(m.gamma2);
  return eff;
}

}  // namespace nheff
