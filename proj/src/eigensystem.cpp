#include "nheff/eigensystem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nheff {

std::pair<ComplexEigenvalue, ComplexEigenvalue> eigenvalues_two_level(
    const TwoLevelModel& m, const ParameterPoint& p) {
  Complex mean(0.5 * (m.e1(p.lambda) + m.e2(p.lambda)),
               -0.25 * (m.gamma1 + m.gamma2));
  Complex half_split = 0.5 * std::sqrt(discriminant(m, p).f);
  Complex lo = mean - half_split;
  Complex hi = mean + half_split;
  auto before = [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  };
  if (before(hi, lo)) std::swap(lo, hi);
  return {ComplexEigenvalue::from(lo), ComplexEigenvalue::from(hi)};
}

// Sign convention: largest-magnitude component gets argument in (-pi/2, pi/2].
static void fix_sign(Eigen::Ref<Eigen::VectorXcd> v) {
  Eigen::Index jmax = 0;
  v.cwiseAbs().maxCoeff(&jmax);
  Complex a = v(jmax);
  if (a.real() < 0.0 || (a.real() == 0.0 && a.imag() < 0.0)) v = -v;
}

BiorthogonalEigensystem eig_complex_symmetric(const Eigen::MatrixXcd& h,
                                              double ep_guard) {
  const Eigen::Index n = h.rows();
  if (n < 1 || h.cols() != n) {
    throw std::invalid_argument("matrix must be square");
  }
  if (n > 64) {
    throw std::invalid_argument("N <= 64 required");
  }
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("matrix must be complex symmetric within 1e-12");
  }

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h, true);
  if (solver.info() != Eigen::Success) {
    throw numerical_error("complex eigensolver failed to converge");
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = solver.eigenvalues();
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
    return ev(a).imag() < ev(b).imag();
  });

  BiorthogonalEigensystem sys;
  sys.vectors.resize(n, n);
  sys.values.reserve(static_cast<size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXcd v = solver.eigenvectors().col(order[static_cast<size_t>(k)]);
    v /= v.norm();  // unit ordinary norm before the c-norm guard
    Complex c = cdot(v, v);
    sys.min_cnorm = std::min(sys.min_cnorm, std::abs(c));
    if (std::abs(c) < ep_guard) {
      sys.ep_flag = true;  // near-degenerate vector; left unnormalized
    } else {
      v /= std::sqrt(c);
    }
    fix_sign(v);
    sys.vectors.col(k) = v;
    sys.values.push_back(
        ComplexEigenvalue::from(ev(order[static_cast<size_t>(k)])));
  }

  // residual guarantee ||h*v - e*v|| <= 1e-10 ||h|| per eigenpair
  double hnorm = h.norm();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXcd v = sys.vectors.col(k);
    double residual = (h * v - sys.values[static_cast<size_t>(k)].value * v).norm();
    if (residual > 1e-10 * std::max(1.0, hnorm) * v.norm()) {
      throw numerical_error("eigenpair residual exceeds tolerance");
    }
  }

  sys.a_metrics.resize(n);
  sys.b_metrics.setZero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    sys.a_metrics(k) = sys.vectors.col(k).squaredNorm();
    for (Eigen::Index l = 0; l < n; ++l) {
      if (l == k) continue;
      sys.b_metrics(k, l) = std::abs(sys.vectors.col(k).dot(sys.vectors.col(l)));
    }
  }
  return sys;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> overlap_metrics(
    const Eigen::MatrixXcd& vectors) {
  const Eigen::Index n = vectors.cols();
  for (Eigen::Index k = 0; k < n; ++k) {
    Complex c = cdot(vectors.col(k), vectors.col(k));
    if (std::abs(c - 1.0) > 1e-8) {
      throw std::invalid_argument("vectors must be c-normalized");
    }
  }
  Eigen::VectorXd a(n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    a(k) = vectors.col(k).squaredNorm();
    for (Eigen::Index l = 0; l < n; ++l) {
      if (l == k) continue;
      b(k, l) = std::abs(vectors.col(k).dot(vectors.col(l)));
    }
  }
  return {a, b};
}

Eigen::VectorXcd chiral_superposition(const Eigen::MatrixXcd& vectors,
                                      Complex a1, Complex a2, int sign) {
  if (vectors.cols() != 2) {
    throw std::invalid_argument("chiral superposition needs exactly two vectors");
  }
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("sign must be +1 or -1");
  }
  return a1 * vectors.col(0) +
         Complex(0.0, static_cast<double>(sign)) * a2 * vectors.col(1);
}

}  // namespace nheff
