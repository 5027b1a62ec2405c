#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "nheff/branch_structure.hpp"
#include "nheff/scattering.hpp"

using namespace nheff;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    g[static_cast<size_t>(i)] = a + (b - a) * i / (n - 1);
  }
  return g;
}

EffectiveHamiltonianModel breit_wigner() {
  EffectiveHamiltonianModel m;  // one level at 0.3 with gamma = w^2 = 0.5
  m.h0.resize(1, 1);
  m.h0 << 0.3;
  m.w.resize(1, 1);
  m.w << std::sqrt(0.5);
  return m;
}

EffectiveHamiltonianModel two_channel() {
  EffectiveHamiltonianModel m;
  m.h0.resize(2, 2);
  m.h0 << 0.0, 0.3,
          0.3, 0.0;
  m.w.resize(2, 2);
  m.w << 1.0, 0.2,
         0.1, 0.8;
  return m;
}

EffectiveHamiltonianModel trapping_model(double alpha = 1.0) {
  EffectiveHamiltonianModel m;
  m.h0.resize(2, 2);
  m.h0 << 1.0, 0.0,
          0.0, -1.0;
  m.w.resize(2, 1);
  m.w << alpha,
         alpha;
  return m;
}

EffectiveHamiltonianModel rational_pole_model() {
  EffectiveHamiltonianModel m;  // level at 1, gamma = 1e-3, g(E) = E/(E+1)
  m.h0.resize(1, 1);
  m.h0 << 1.0;
  m.w.resize(1, 1);
  m.w << std::sqrt(1e-3);
  m.form_factors.resize(1);
  m.form_factors[0].kind = FormFactor::Kind::Rational;
  return m;
}

}  // namespace

TEST_SUITE("scattering") {

TEST_CASE("breit-wigner single resonance") {
  EffectiveHamiltonianModel m = breit_wigner();
  // full reflection on resonance: S(e_0) = -1 for one open channel
  Eigen::MatrixXcd s = s_matrix(m, 0.3);
  CHECK(std::abs(s(0, 0) + 1.0) < 1e-12);

  SMatrixScan scan = scan_s_matrix(m, linspace(-2.0, 2.0, 101));
  CHECK(scan.max_unitarity_defect() < 1e-12);
  CHECK(scan.max_symmetry_defect() < 1e-12);
  REQUIRE(scan.matrices.size() == 101);
  CHECK(scan.energies.front() == doctest::Approx(-2.0));

  PoleSet poles = find_poles(m);
  REQUIRE(poles.poles.size() == 1);
  const Pole& p = poles.poles[0];
  CHECK(std::abs(p.value - Complex(0.3, -0.25)) < 1e-12);
  CHECK(std::abs(p.residue(0, 0) - Complex(0.0, -0.5)) < 1e-12);
  CHECK(p.iterations == 0);  // energy independent: direct diagonalization
  CHECK(p.converged);
}

TEST_CASE("unitarity and symmetry across regimes including the degeneracy") {
  TwoLevelModel tl;
  std::vector<double> grid = linspace(-3.0, 3.0, 201);
  for (double omega : {0.3, 0.2, 0.25}) {
    EffectiveHamiltonianModel eff = to_effective(tl, ParameterPoint{0.0, omega});
    SMatrixScan scan = scan_s_matrix(eff, grid);
    CHECK(scan.max_unitarity_defect() < 1e-10);
    CHECK(scan.max_symmetry_defect() < 1e-12);
  }
  // the S matrix stays finite and unitary at the branch-point parameters
  // even though the eigenbasis expansion breaks down there
  EffectiveHamiltonianModel at_ep = to_effective(tl, ParameterPoint{0.0, 0.25});
  CHECK_THROWS_AS(eigenbasis_expansion(at_ep), numerical_error);
}

TEST_CASE("eigenbasis expansion reconstructs the s matrix") {
  EffectiveHamiltonianModel m = two_channel();
  EigenExpansion ex = eigenbasis_expansion(m);
  REQUIRE(ex.values.size() == 2);
  CHECK(ex.couplings.rows() == 2);
  CHECK(ex.couplings.cols() == 2);
  // gamma_k = Phi_k^T W
  Eigen::MatrixXcd expect = ex.vectors.transpose() * m.w.cast<Complex>();
  CHECK((ex.couplings - expect).cwiseAbs().maxCoeff() < 1e-14);

  double dev = 0.0;
  for (double e : linspace(-2.7, 2.9, 25)) {
    Eigen::MatrixXcd direct = s_matrix(m, e);
    Eigen::MatrixXcd series = expansion_s_matrix(ex, e);
    dev = std::max(dev, (direct - series).cwiseAbs().maxCoeff());
  }
  CHECK(dev < 1e-8);  // exact for energy-independent couplings

  // a decoupled level leaves a pole on the real axis; evaluating the series
  // exactly there is rejected
  EffectiveHamiltonianModel decoupled;
  decoupled.h0.resize(1, 1);
  decoupled.h0 << 0.5;
  decoupled.w.resize(1, 1);
  decoupled.w << 0.0;
  EigenExpansion flat = eigenbasis_expansion(decoupled);
  CHECK_THROWS_AS(expansion_s_matrix(flat, 0.5), numerical_error);
  CHECK_THROWS_AS(expansion_s_matrix(flat, std::nan("")), std::invalid_argument);
}

TEST_CASE("poles of an energy-independent model are the eigenvalues") {
  EffectiveHamiltonianModel m = two_channel();
  EigenExpansion ex = eigenbasis_expansion(m);
  PoleSet poles = find_poles(m);
  REQUIRE(poles.poles.size() == 2);
  for (size_t k = 0; k < poles.poles.size(); ++k) {
    const Pole& p = poles.poles[k];
    CHECK(std::abs(p.value - ex.values[k].value) < 1e-12);
    // residue factorizes over the eigenstate couplings: R = -i g g^T
    Eigen::VectorXcd g = ex.couplings.row(static_cast<Eigen::Index>(k));
    Eigen::MatrixXcd expect = Complex(0, -1) * (g * g.transpose());
    double scale = std::max(1.0, expect.cwiseAbs().maxCoeff());
    CHECK((p.residue - expect).cwiseAbs().maxCoeff() < 1e-6 * scale);
    // rank one: second singular value vanishes relative to the first
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(p.residue);
    CHECK(svd.singularValues()(1) < 1e-6 * svd.singularValues()(0));
  }
}

TEST_CASE("fixed-point pole of an energy-dependent coupling") {
  EffectiveHamiltonianModel m = rational_pole_model();
  CHECK(m.energy_dependent());
  PoleSet poles = find_poles(m);
  REQUIRE(poles.poles.size() == 1);
  const Pole& p = poles.poles[0];
  CHECK(p.converged);
  CHECK(p.iterations >= 1);
  CHECK(p.iterations <= 200);
  // Re E(E) = 1 identically, so the fixed point is exact:
  // pole = 1 - (i/2) * 1e-3 * g(1)^2 = 1 - 1.25e-4 i
  CHECK(std::abs(p.value - Complex(1.0, -1.25e-4)) < 1e-10);
  CHECK(std::abs(p.residue(0, 0) - Complex(0.0, -2.5e-4)) < 1e-10);

  // on resonance the single channel still reflects fully
  Eigen::MatrixXcd s = s_matrix(m, 1.0);
  CHECK(std::abs(s(0, 0) + 1.0) < 1e-12);

  // |S| = 1 on a grid avoiding the form-factor singularity at E = -1
  SMatrixScan scan = scan_s_matrix(m, linspace(-0.9, 3.0, 79));
  CHECK(scan.max_unitarity_defect() < 1e-10);
}

TEST_CASE("width sum rule and resonance trapping") {
  EffectiveHamiltonianModel m = trapping_model();
  std::vector<double> alphas{0.5, 1.0, 2.0, 5.0, 10.0};
  TrappingSweep sweep = trapping_sweep(m, alphas);
  REQUIRE(sweep.alphas == alphas);
  REQUIRE(sweep.widths.size() == alphas.size());
  for (size_t i = 0; i < alphas.size(); ++i) {
    double a = alphas[i];
    // trace identity: sum of widths = alpha^2 * sum of squared couplings
    CHECK(sweep.coupling_sums[i] == doctest::Approx(2.0 * a * a));
    CHECK(std::abs(sweep.width_sums[i] - sweep.coupling_sums[i]) <=
          1e-12 * std::max(1.0, sweep.coupling_sums[i]));
    // widths reported in descending order
    CHECK(sweep.widths[i][0] >= sweep.widths[i][1]);
  }
  // trapping: stronger coupling narrows the narrow state
  CHECK(sweep.widths[4][1] < sweep.widths[1][1]);  // alpha 10 vs alpha 1
  CHECK(sweep.widths[4][1] == doctest::Approx(0.02000200040010309).epsilon(1e-10));
  CHECK(sweep.widths[4][0] == doctest::Approx(199.9799979996).epsilon(1e-8));
}

TEST_CASE("trapping sweep input contract") {
  EffectiveHamiltonianModel m = trapping_model();
  CHECK_THROWS_AS(trapping_sweep(m, {}), std::invalid_argument);
  CHECK_THROWS_AS(trapping_sweep(m, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(trapping_sweep(m, {-1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(trapping_sweep(rational_pole_model(), {0.5, 1.0}),
                  std::invalid_argument);  // energy dependent
}

TEST_CASE("isolated-resonance width relation degrades with coupling") {
  // |Gamma_k - sum_c gamma_kc^2| / Gamma_k: tiny for isolated resonances,
  // order one once the states overlap
  std::vector<double> devs;
  for (double alpha : {0.01, 0.1, 1.0, 5.0}) {
    EigenExpansion ex = eigenbasis_expansion(trapping_model(alpha));
    double worst = 0.0;
    for (size_t k = 0; k < ex.values.size(); ++k) {
      double gamma_k = ex.values[k].width;
      Complex sum = ex.couplings.row(static_cast<Eigen::Index>(k))
                        .unaryExpr([](Complex g) { return g * g; })
                        .sum();
      worst = std::max(worst, std::abs(gamma_k - sum) / gamma_k);
    }
    devs.push_back(worst);
  }
  CHECK(devs[0] < 1e-3);
  CHECK(devs[0] < devs[1]);
  CHECK(devs[1] < devs[2]);
  CHECK(devs[2] < devs[3]);
  CHECK(devs[3] > 0.1);
}

TEST_CASE("s matrix deviation shrinks toward the double pole") {
  TwoLevelModel m;
  std::vector<double> grid = linspace(-3.0, 3.0, 501);
  std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125, 0.0};
  SmoothnessCurve curve =
      smoothness_curve(m, ParameterPoint{0.0, 0.25}, 0.0, 1.0, deltas, grid);
  REQUIRE(curve.deviations.size() == 5);
  CHECK(curve.deviations[0] == doctest::Approx(0.9030826616491887).epsilon(1e-9));
  CHECK(curve.deviations[1] == doctest::Approx(0.48838193103615885).epsilon(1e-9));
  CHECK(curve.deviations[2] == doctest::Approx(0.2525813792142736).epsilon(1e-9));
  CHECK(curve.deviations[3] == doctest::Approx(0.12810859165933994).epsilon(1e-9));
  CHECK(curve.deviations[4] == 0.0);
  for (int i = 0; i + 2 < 5; ++i) {
    CHECK(curve.deviations[static_cast<size_t>(i)] >
          curve.deviations[static_cast<size_t>(i) + 1]);
  }
  // the approach is monotone along the other parameter direction too
  SmoothnessCurve lam =
      smoothness_curve(m, ParameterPoint{0.0, 0.25}, 1.0, 0.0, deltas, grid);
  for (int i = 0; i + 2 < 5; ++i) {
    CHECK(lam.deviations[static_cast<size_t>(i)] >
          lam.deviations[static_cast<size_t>(i) + 1]);
  }

  CHECK_THROWS_AS(
      smoothness_curve(m, ParameterPoint{0.0, 0.25}, 0.0, 0.0, deltas, grid),
      std::invalid_argument);  // zero direction
  CHECK_THROWS_AS(smoothness_curve(m, ParameterPoint{0.0, 0.25}, 0.0, 1.0,
                                   deltas, {}),
                  std::invalid_argument);  // empty grid
}

TEST_CASE("scattering input contracts") {
  EffectiveHamiltonianModel m = breit_wigner();
  CHECK_THROWS_AS(s_matrix(m, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(scan_s_matrix(m, {}), std::invalid_argument);

  // a decoupled channel puts a pole on the real axis: the resolvent solve
  // fails loudly instead of returning garbage
  EffectiveHamiltonianModel decoupled;
  decoupled.h0.resize(1, 1);
  decoupled.h0 << 0.5;
  decoupled.w.resize(1, 1);
  decoupled.w << 0.0;
  CHECK_THROWS_AS(s_matrix(decoupled, 0.5), numerical_error);
}

}  // TEST_SUITE("scattering")
