#include <doctest.h>

#include <cmath>
#include <random>

#include "nheff/eigensystem.hpp"

using namespace nheff;

namespace {

// Platform-stable uniform in [0, 1): top 53 bits of the engine output.
double u01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

Eigen::MatrixXcd random_complex_symmetric(std::mt19937_64& eng, int n) {
  Eigen::MatrixXcd h(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Complex z(2.0 * u01(eng) - 1.0, 2.0 * u01(eng) - 1.0);
      h(i, j) = z;
      h(j, i) = z;
    }
  }
  return h;
}

}  // namespace

TEST_SUITE("eigensystem") {

TEST_CASE("closed-form eigenvalues in the three regimes") {
  TwoLevelModel m;

  // subcritical: purely imaginary splitting, widths differ
  auto [lo, hi] = eigenvalues_two_level(m, ParameterPoint{0.0, 0.2});
  CHECK(std::abs(lo.energy) < 1e-15);
  CHECK(std::abs(hi.energy) < 1e-15);
  CHECK(std::abs(lo.width - 0.8) < 1e-12);
  CHECK(std::abs(hi.width - 0.2) < 1e-12);

  // overcritical: real splitting sqrt(0.11), equal widths
  auto [lo2, hi2] = eigenvalues_two_level(m, ParameterPoint{0.0, 0.3});
  CHECK(std::abs(lo2.energy + 0.5 * std::sqrt(0.11)) < 1e-12);
  CHECK(std::abs(hi2.energy - 0.5 * std::sqrt(0.11)) < 1e-12);
  CHECK(std::abs(lo2.width - 0.5) < 1e-12);
  CHECK(std::abs(hi2.width - 0.5) < 1e-12);

  // exactly critical: both eigenvalues -i/4
  auto [lo3, hi3] = eigenvalues_two_level(m, ParameterPoint{0.0, 0.25});
  CHECK(std::abs(lo3.value - Complex(0.0, -0.25)) < 1e-15);
  CHECK(std::abs(hi3.value - Complex(0.0, -0.25)) < 1e-15);
}

TEST_CASE("closed form matches the dense solver") {
  TwoLevelModel m;
  std::mt19937_64 eng(11);
  for (int trial = 0; trial < 20; ++trial) {
    ParameterPoint p{u01(eng) - 0.5, 0.05 + 0.6 * u01(eng)};
    auto [lo, hi] = eigenvalues_two_level(m, p);
    BiorthogonalEigensystem sys = eig_complex_symmetric(build_hamiltonian(m, p));
    CHECK(std::abs(sys.values[0].value - lo.value) < 1e-12);
    CHECK(std::abs(sys.values[1].value - hi.value) < 1e-12);
    // trace conservation: widths sum to gamma1 + gamma2
    CHECK(std::abs(lo.width + hi.width - 1.0) < 1e-12);
  }
}

TEST_CASE("eigenvalue ordering is ascending by (real, imaginary)") {
  std::mt19937_64 eng(12);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + static_cast<int>(u01(eng) * 7);
    BiorthogonalEigensystem sys =
        eig_complex_symmetric(random_complex_symmetric(eng, n));
    for (size_t k = 1; k < sys.values.size(); ++k) {
      Complex a = sys.values[k - 1].value;
      Complex b = sys.values[k].value;
      bool ordered = a.real() < b.real() ||
                     (a.real() == b.real() && a.imag() <= b.imag());
      CHECK(ordered);
    }
  }
}

TEST_CASE("eigenpairs satisfy the residual bound") {
  std::mt19937_64 eng(13);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(u01(eng) * 7);
    Eigen::MatrixXcd h = random_complex_symmetric(eng, n);
    BiorthogonalEigensystem sys = eig_complex_symmetric(h);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXcd v = sys.vectors.col(k);
      double res = (h * v - sys.values[static_cast<size_t>(k)].value * v).norm();
      CHECK(res <= 1e-10 * std::max(1.0, h.norm()) * v.norm());
    }
  }
}

TEST_CASE("c-product gram matrix is the identity away from degeneracy") {
  std::mt19937_64 eng(14);
  int tested = 0;
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 + static_cast<int>(u01(eng) * 7);
    BiorthogonalEigensystem sys =
        eig_complex_symmetric(random_complex_symmetric(eng, n));
    if (sys.ep_flag) continue;  // randomly near-degenerate draw
    ++tested;
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        Complex g = cdot(sys.vectors.col(k), sys.vectors.col(l));
        double expect = k == l ? 1.0 : 0.0;
        CHECK(std::abs(g - expect) < 1e-10);
      }
    }
  }
  CHECK(tested >= 50);
}

TEST_CASE("a-metrics never drop below one") {
  std::mt19937_64 eng(15);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 + static_cast<int>(u01(eng) * 7);
    BiorthogonalEigensystem sys =
        eig_complex_symmetric(random_complex_symmetric(eng, n));
    if (sys.ep_flag) continue;
    for (int k = 0; k < n; ++k) {
      CHECK(sys.a_metrics(k) >= 1.0 - 1e-12);
    }
  }
}

TEST_CASE("two-level ordinary overlaps are purely imaginary") {
  // theorem for N = 2 only: |det G| = 1 with G = V^dag V forces
  // Re<Phi_1|Phi_2> = 0; for N >= 3 the analogue fails (see below)
  std::mt19937_64 eng(16);
  for (int trial = 0; trial < 200; ++trial) {
    BiorthogonalEigensystem sys =
        eig_complex_symmetric(random_complex_symmetric(eng, 2));
    if (sys.ep_flag || sys.min_cnorm < 1e-3) continue;
    Complex o = sys.vectors.col(0).dot(sys.vectors.col(1));
    CHECK(std::abs(o.real()) < 1e-10);
    // B_12 = B_21 = |<Phi_1|Phi_2>| and B^2 = A_1 A_2 - 1
    CHECK(sys.b_metrics(0, 1) == doctest::Approx(std::abs(o)));
    CHECK(sys.b_metrics(1, 0) == doctest::Approx(std::abs(o)));
    CHECK(std::abs(o) * std::abs(o) ==
          doctest::Approx(sys.a_metrics(0) * sys.a_metrics(1) - 1.0)
              .epsilon(1e-8));
  }
}

TEST_CASE("purely imaginary overlaps do not generalize past two levels") {
  // explicit c-orthonormal 4x4 counterexample: v1, v3 are c-orthogonal with
  // an O(1) real ordinary overlap
  double ch = std::cosh(1.0), sh = std::sinh(1.0);
  Eigen::VectorXcd v1(4), v3(4);
  v1 << Complex(ch, 0), Complex(0, sh), Complex(1, 0), Complex(0, 0);
  v3 << Complex(-ch, 0), Complex(0, -sh), Complex(1, 0), Complex(0, 0);
  v1 /= std::sqrt(Complex(2.0));
  v3 /= std::sqrt(Complex(2.0));
  CHECK(std::abs(cdot(v1, v1) - 1.0) < 1e-14);
  CHECK(std::abs(cdot(v3, v3) - 1.0) < 1e-14);
  CHECK(std::abs(cdot(v1, v3)) < 1e-14);
  CHECK(std::abs(v1.dot(v3).real()) > 1.0);
}

TEST_CASE("conjugate gram identity holds for every dimension") {
  // the true general-N invariant: G = V^dag V satisfies conj(G) G = I
  std::mt19937_64 eng(17);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + static_cast<int>(u01(eng) * 7);
    BiorthogonalEigensystem sys =
        eig_complex_symmetric(random_complex_symmetric(eng, n));
    if (sys.ep_flag || sys.min_cnorm < 1e-3) continue;
    Eigen::MatrixXcd g = sys.vectors.adjoint() * sys.vectors;
    Eigen::MatrixXcd prod = g.conjugate() * g;
    prod -= Eigen::MatrixXcd::Identity(n, n);
    CHECK(prod.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("a-metric ladder toward the critical coupling") {
  // at lambda = 0 and omega > omega_cr: A_1 = A_2 = 1/sqrt(1 - (omega_cr/omega)^2)
  TwoLevelModel m;
  double prev = 0.0;
  for (double omega : {0.3, 0.27, 0.26, 0.255, 0.252, 0.251}) {
    BiorthogonalEigensystem sys = eig_complex_symmetric(
        build_hamiltonian(m, ParameterPoint{0.0, omega}));
    double r = 0.25 / omega;
    double expect = 1.0 / std::sqrt(1.0 - r * r);
    CHECK(std::abs(sys.a_metrics(0) - expect) < 1e-9 * expect);
    CHECK(std::abs(sys.a_metrics(0) - sys.a_metrics(1)) < 1e-9 * expect);
    CHECK(sys.a_metrics(0) > prev);  // diverges toward omega_cr
    prev = sys.a_metrics(0);
  }
  // spot value: omega = 0.3 gives A = 6/sqrt(11)
  BiorthogonalEigensystem sys = eig_complex_symmetric(
      build_hamiltonian(m, ParameterPoint{0.0, 0.3}));
  CHECK(sys.a_metrics(0) == doctest::Approx(1.8090680674665818).epsilon(1e-10));
  CHECK(sys.b_metrics(0, 1) ==
        doctest::Approx(1.5075567228888178).epsilon(1e-8));
}

TEST_CASE("exact degeneracy raises the ep flag") {
  TwoLevelModel m;
  BiorthogonalEigensystem sys = eig_complex_symmetric(
      build_hamiltonian(m, ParameterPoint{0.0, 0.25}));
  CHECK(sys.ep_flag);
  CHECK(sys.min_cnorm <= kEpGuard);
  // flagged columns stay at unit ordinary norm
  CHECK(sys.vectors.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sys.vectors.col(1).norm() == doctest::Approx(1.0).epsilon(1e-12));
  // both eigenvalues at the coalesced value -i/4 up to solver noise
  CHECK(std::abs(sys.values[0].value - Complex(0.0, -0.25)) < 1e-6);
  CHECK(std::abs(sys.values[1].value - Complex(0.0, -0.25)) < 1e-6);
  // a permissive guard may be widened: still flags with a looser threshold
  CHECK(eig_complex_symmetric(build_hamiltonian(m, ParameterPoint{0.0, 0.25}),
                              1e-3)
            .ep_flag);
}

TEST_CASE("solver input contract") {
  Eigen::MatrixXcd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(eig_complex_symmetric(rect), std::invalid_argument);

  Eigen::MatrixXcd asym(2, 2);
  asym << Complex(0, 0), Complex(1, 0),
          Complex(0.5, 0), Complex(0, 0);
  CHECK_THROWS_AS(eig_complex_symmetric(asym), std::invalid_argument);

  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(65, 65);
  CHECK_THROWS_AS(eig_complex_symmetric(big), std::invalid_argument);
}

TEST_CASE("sign convention fixes the largest component") {
  std::mt19937_64 eng(18);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(u01(eng) * 7);
    BiorthogonalEigensystem sys =
        eig_complex_symmetric(random_complex_symmetric(eng, n));
    for (int k = 0; k < n; ++k) {
      Eigen::Index jmax = 0;
      sys.vectors.col(k).cwiseAbs().maxCoeff(&jmax);
      Complex a = sys.vectors(jmax, k);
      CHECK((a.real() > 0.0 || (a.real() == 0.0 && a.imag() >= 0.0)));
    }
  }
}

TEST_CASE("overlap metrics contract and values") {
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
  auto [a, b] = overlap_metrics(id);
  CHECK(a(0) == doctest::Approx(1.0));
  CHECK(a(1) == doctest::Approx(1.0));
  CHECK(b(0, 1) == doctest::Approx(0.0));

  CHECK_THROWS_AS(overlap_metrics(2.0 * id), std::invalid_argument);

  // agrees with the metrics computed inside the solver
  TwoLevelModel m;
  BiorthogonalEigensystem sys = eig_complex_symmetric(
      build_hamiltonian(m, ParameterPoint{0.1, 0.3}));
  auto [a2, b2] = overlap_metrics(sys.vectors);
  CHECK((a2 - sys.a_metrics).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b2 - sys.b_metrics).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("chiral superposition combines the two branches") {
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
  Eigen::VectorXcd plus = chiral_superposition(id, 1.0, 1.0, 1);
  CHECK(std::abs(plus(0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(plus(1) - Complex(0, 1)) < 1e-15);
  Eigen::VectorXcd minus = chiral_superposition(id, 1.0, 1.0, -1);
  CHECK(std::abs(minus(1) - Complex(0, -1)) < 1e-15);
  Eigen::VectorXcd weighted =
      chiral_superposition(id, Complex(0, 2), Complex(3, 0), 1);
  CHECK(std::abs(weighted(0) - Complex(0, 2)) < 1e-15);
  CHECK(std::abs(weighted(1) - Complex(0, 3)) < 1e-15);

  CHECK_THROWS_AS(chiral_superposition(id, 1.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(chiral_superposition(Eigen::MatrixXcd::Identity(3, 3), 1.0,
                                       1.0, 1),
                  std::invalid_argument);
}

}  // TEST_SUITE("eigensystem")
