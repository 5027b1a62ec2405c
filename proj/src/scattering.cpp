#include "nheff/scattering.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

namespace nheff {

namespace {

void require_real_energy(double energy) {
  if (!std::isfinite(energy)) {
    throw std::invalid_argument("energy must be finite (real-axis scans only)");
  }
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

double SMatrixScan::max_unitarity_defect() const { return max_of(unitarity_defect); }

double SMatrixScan::max_symmetry_defect() const { return max_of(symmetry_defect); }

Eigen::MatrixXcd s_matrix(const EffectiveHamiltonianModel& m, double energy) {
  validate(m);
  require_real_energy(energy);
  const Eigen::MatrixXcd w = coupling_at(m, energy).cast<Complex>();
  const Eigen::MatrixXcd a =
      energy * Eigen::MatrixXcd::Identity(m.n(), m.n()) -
      build_effective_hamiltonian(m, energy);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  Eigen::MatrixXcd x = lu.solve(w);
  double rel = (a * x - w).norm() / std::max(1.0, w.norm());
  if (!(rel < 1e-12)) {
    throw numerical_error("resolvent solve failed: relative residual above 1e-12");
  }
  const int c = m.channels();
  return Eigen::MatrixXcd::Identity(c, c) - Complex(0, 1) * w.transpose() * x;
}

SMatrixScan scan_s_matrix(const EffectiveHamiltonianModel& m,
                          const std::vector<double>& energies) {
  if (energies.empty()) throw std::invalid_argument("energy grid is empty");
  SMatrixScan scan;
  scan.energies = energies;
  const int c = m.channels();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(c, c);
  for (double e : energies) {
    Eigen::MatrixXcd s = s_matrix(m, e);
    scan.unitarity_defect.push_back((s.adjoint() * s - id).norm());
    scan.symmetry_defect.push_back((s - s.transpose()).norm());
    scan.matrices.push_back(std::move(s));
  }
  return scan;
}

EigenExpansion eigenbasis_expansion(const EffectiveHamiltonianModel& m,
                                    double energy) {
  validate(m);
  require_real_energy(energy);
  BiorthogonalEigensystem sys =
      eig_complex_symmetric(build_effective_hamiltonian(m, energy));
  if (sys.ep_flag) {
    throw numerical_error(
        "eigenbasis expansion breaks down at a double pole (vanishing c-norm)");
  }
  EigenExpansion ex;
  ex.values = sys.values;
  ex.couplings = sys.vectors.transpose() * coupling_at(m, energy).cast<Complex>();
  ex.vectors = std::move(sys.vectors);
  return ex;
}

Eigen::MatrixXcd expansion_s_matrix(const EigenExpansion& ex, double energy) {
  require_real_energy(energy);
  const int c = static_cast<int>(ex.couplings.cols());
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(c, c);
  for (size_t k = 0; k < ex.values.size(); ++k) {
    Complex denom = energy - ex.values[k].value;
    if (denom == Complex(0.0, 0.0)) {
      throw numerical_error("expansion evaluated exactly at a pole");
    }
    auto g = ex.couplings.row(static_cast<int>(k));
    s -= Complex(0, 1) * (g.transpose() * g) / denom;
  }
  return s;
}

namespace {

Pole fixed_point_pole(const EffectiveHamiltonianModel& m, int level) {
  const int n = m.n();
  Pole pole;
  Eigen::VectorXcd prev_vec = Eigen::VectorXcd::Zero(n);
  prev_vec(level) = 1.0;
  double e = m.h0(level, level);
  Complex branch_value{0.0, 0.0};
  int branch = level;
  double last_delta = 0.0;
  bool have_last = false;
  pole.converged = false;
  for (int it = 0; it < 200; ++it) {
    BiorthogonalEigensystem sys =
        eig_complex_symmetric(build_effective_hamiltonian(m, e));
    if (sys.ep_flag) {
      throw numerical_error("pole search hit a degeneracy of H_eff");
    }
    branch = 0;
    double best = -1.0;
    for (int j = 0; j < n; ++j) {
      double q = std::abs(cdot(prev_vec, sys.vectors.col(j)));
      if (q > best) {
        best = q;
        branch = j;
      }
    }
    prev_vec = sys.vectors.col(branch);
    branch_value = sys.values[static_cast<size_t>(branch)].value;
    double delta = branch_value.real() - e;
    pole.iterations = it + 1;
    if (std::abs(delta) < 1e-12) {
      pole.converged = true;
      break;
    }
    if (have_last && delta * last_delta < 0.0) {
      delta *= 0.5;  // relax when the iteration oscillates
    }
    e += delta;
    last_delta = delta;
    have_last = true;
  }
  pole.value = branch_value;
  EigenExpansion ex = eigenbasis_expansion(m, e);
  auto g = ex.couplings.row(branch);
  pole.residue = Complex(0, -1) * (g.transpose() * g);
  return pole;
}

}  // namespace

PoleSet find_poles(const EffectiveHamiltonianModel& m) {
  validate(m);
  PoleSet set;
  if (!m.energy_dependent()) {
    EigenExpansion ex = eigenbasis_expansion(m, 0.0);
    for (size_t k = 0; k < ex.values.size(); ++k) {
      Pole pole;
      pole.value = ex.values[k].value;
      auto g = ex.couplings.row(static_cast<int>(k));
      pole.residue = Complex(0, -1) * (g.transpose() * g);
      pole.iterations = 0;
      pole.converged = true;
      set.poles.push_back(std::move(pole));
    }
    return set;
  }
  for (int k = 0; k < m.n(); ++k) {
    set.poles.push_back(fixed_point_pole(m, k));
  }
  return set;
}

TrappingSweep trapping_sweep(const EffectiveHamiltonianModel& m,
                             const std::vector<double>& alphas) {
  validate(m);
  if (m.energy_dependent()) {
    throw std::invalid_argument("trapping sweep requires energy-independent couplings");
  }
  if (alphas.empty()) throw std::invalid_argument("alpha grid is empty");
  for (size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] < 0.0) throw std::invalid_argument("alphas must be >= 0");
    if (i > 0 && alphas[i] <= alphas[i - 1]) {
      throw std::invalid_argument("alphas must be strictly ascending");
    }
  }
  TrappingSweep sweep;
  sweep.alphas = alphas;
  const double w2 = m.w.squaredNorm();
  for (double alpha : alphas) {
    EffectiveHamiltonianModel scaled = m;
    scaled.w = alpha * m.w;
    BiorthogonalEigensystem sys =
        eig_complex_symmetric(build_effective_hamiltonian(scaled, 0.0));
    std::vector<double> widths;
    double sum = 0.0;
    for (const auto& v : sys.values) {
      widths.push_back(v.width);
      sum += v.width;
    }
    std::sort(widths.begin(), widths.end(), std::greater<double>());
    sweep.widths.push_back(std::move(widths));
    sweep.width_sums.push_back(sum);
    sweep.coupling_sums.push_back(alpha * alpha * w2);
  }
  return sweep;
}

SmoothnessCurve smoothness_curve(const TwoLevelModel& m, const ParameterPoint& at,
                                 double dlambda, double domega,
                                 const std::vector<double>& deltas,
                                 const std::vector<double>& energies) {
  validate(m);
  if (deltas.empty()) throw std::invalid_argument("delta grid is empty");
  if (energies.empty()) throw std::invalid_argument("energy grid is empty");
  if (dlambda == 0.0 && domega == 0.0) {
    throw std::invalid_argument("displacement direction is zero");
  }
  std::vector<Eigen::MatrixXcd> ref;
  {
    EffectiveHamiltonianModel base = to_effective(m, at);
    for (double e : energies) ref.push_back(s_matrix(base, e));
  }
  SmoothnessCurve curve;
  curve.deltas = deltas;
  for (double delta : deltas) {
    ParameterPoint p{at.lambda + delta * dlambda, at.omega + delta * domega};
    EffectiveHamiltonianModel shifted = to_effective(m, p);
    double worst = 0.0;
    for (size_t i = 0; i < energies.size(); ++i) {
      worst = std::max(worst, (s_matrix(shifted, energies[i]) - ref[i]).norm());
    }
    curve.deviations.push_back(worst);
  }
  return curve;
}

}  // namespace nheff
