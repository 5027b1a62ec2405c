#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nheff/adiabatic_loop.hpp"
#include "nheff/branch_structure.hpp"
#include "nheff/eigensystem.hpp"
#include "nheff/experiment.hpp"
#include "nheff/model.hpp"
#include "nheff/scattering.hpp"

namespace py = pybind11;
using namespace nheff;

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Non-Hermitian effective-Hamiltonian toolkit: branch points, "
      "bi-orthogonal continuation, monodromy, and the resonance S matrix";

  py::register_exception<numerical_error>(m, "NumericalError", PyExc_RuntimeError);

  // ---- model ----
  py::class_<ParameterPoint>(m, "ParameterPoint")
      .def(py::init<>())
      .def(py::init([](double lam, double om) {
             return ParameterPoint{lam, om};
           }),
           py::arg("lam"), py::arg("omega"))
      .def_readwrite("lam", &ParameterPoint::lambda)
      .def_readwrite("omega", &ParameterPoint::omega)
      .def("__repr__", [](const ParameterPoint& p) {
        return "ParameterPoint(lam=" + std::to_string(p.lambda) +
               ", omega=" + std::to_string(p.omega) + ")";
      });

  py::class_<AffineLevel>(m, "AffineLevel")
      .def(py::init<>())
      .def(py::init([](double intercept, double slope) {
             return AffineLevel{intercept, slope};
           }),
           py::arg("intercept"), py::arg("slope"))
      .def_readwrite("intercept", &AffineLevel::intercept)
      .def_readwrite("slope", &AffineLevel::slope)
      .def("__call__", &AffineLevel::operator());

  py::class_<TwoLevelModel>(m, "TwoLevelModel")
      .def(py::init<>())
      .def_readwrite("e1", &TwoLevelModel::e1)
      .def_readwrite("e2", &TwoLevelModel::e2)
      .def_readwrite("gamma1", &TwoLevelModel::gamma1)
      .def_readwrite("gamma2", &TwoLevelModel::gamma2)
      .def_readwrite("omega", &TwoLevelModel::omega);

  py::class_<DiscriminantValue>(m, "DiscriminantValue")
      .def_readonly("f", &DiscriminantValue::f)
      .def_readonly("f_real", &DiscriminantValue::f_real)
      .def_readonly("f_imag", &DiscriminantValue::f_imag);

  py::enum_<FormFactor::Kind>(m, "FormFactorKind")
      .value("Constant", FormFactor::Kind::Constant)
      .value("Rational", FormFactor::Kind::Rational);

  py::class_<FormFactor>(m, "FormFactor")
      .def(py::init<>())
      .def_readwrite("kind", &FormFactor::kind)
      .def_readwrite("c", &FormFactor::c)
      .def("__call__", &FormFactor::operator());

  py::class_<EffectiveHamiltonianModel>(m, "EffectiveHamiltonianModel")
      .def(py::init<>())
      .def_readwrite("h0", &EffectiveHamiltonianModel::h0)
      .def_readwrite("w", &EffectiveHamiltonianModel::w)
      .def_readwrite("form_factors", &EffectiveHamiltonianModel::form_factors)
      .def_property_readonly("n", &EffectiveHamiltonianModel::n)
      .def_property_readonly("channels", &EffectiveHamiltonianModel::channels)
      .def_property_readonly("energy_dependent",
                             &EffectiveHamiltonianModel::energy_dependent);

  m.def("build_hamiltonian", &build_hamiltonian, py::arg("model"), py::arg("point"));
  m.def("discriminant", &discriminant, py::arg("model"), py::arg("point"));
  m.def("coupling_at", &coupling_at, py::arg("model"), py::arg("energy"));
  m.def("build_effective_hamiltonian", &build_effective_hamiltonian,
        py::arg("model"), py::arg("energy"));
  m.def("to_effective", &to_effective, py::arg("model"), py::arg("point"));

  // ---- eigensystem ----
  py::class_<ComplexEigenvalue>(m, "ComplexEigenvalue")
      .def_readonly("energy", &ComplexEigenvalue::energy)
      .def_readonly("width", &ComplexEigenvalue::width)
      .def_readonly("value", &ComplexEigenvalue::value)
      .def("__repr__", [](const ComplexEigenvalue& v) {
        return "ComplexEigenvalue(" + std::to_string(v.value.real()) +
               (v.value.imag() < 0 ? "-" : "+") +
               std::to_string(std::abs(v.value.imag())) + "j)";
      });

  py::class_<BiorthogonalEigensystem>(m, "BiorthogonalEigensystem")
      .def_readonly("values", &BiorthogonalEigensystem::values)
      .def_readonly("vectors", &BiorthogonalEigensystem::vectors)
      .def_readonly("a_metrics", &BiorthogonalEigensystem::a_metrics)
      .def_readonly("b_metrics", &BiorthogonalEigensystem::b_metrics)
      .def_readonly("ep_flag", &BiorthogonalEigensystem::ep_flag)
      .def_readonly("min_cnorm", &BiorthogonalEigensystem::min_cnorm);

  m.def("eigenvalues_two_level", &eigenvalues_two_level, py::arg("model"),
        py::arg("point"));
  m.def("eig_complex_symmetric", &eig_complex_symmetric, py::arg("h"),
        py::arg("ep_guard") = kEpGuard);
  m.def("overlap_metrics", &overlap_metrics, py::arg("vectors"));
  m.def("chiral_superposition", &chiral_superposition, py::arg("vectors"),
        py::arg("a1"), py::arg("a2"), py::arg("sign"));
  m.def("cdot", &cdot, py::arg("u"), py::arg("v"),
        "Bilinear c-product sum_j u_j v_j (no conjugation)");
  m.attr("EP_GUARD") = kEpGuard;

  // ---- branch structure ----
  py::enum_<Regime>(m, "Regime")
      .value("Overcritical", Regime::Overcritical)
      .value("DoublePole", Regime::DoublePole)
      .value("Subcritical", Regime::Subcritical);

  py::class_<CouplingRegime>(m, "CouplingRegime")
      .def_readonly("kind", &CouplingRegime::kind)
      .def_readonly("f_real_at_crossing", &CouplingRegime::f_real_at_crossing);

  py::class_<BranchPoint>(m, "BranchPoint")
      .def_readonly("location", &BranchPoint::location)
      .def_readonly("coalesced_value", &BranchPoint::coalesced_value)
      .def_readonly("residual", &BranchPoint::residual)
      .def_readonly("converged", &BranchPoint::converged)
      .def_readonly("iterations", &BranchPoint::iterations);

  py::class_<SegmentPath>(m, "SegmentPath")
      .def(py::init<>())
      .def_readwrite("lambda_from", &SegmentPath::lambda_from)
      .def_readwrite("lambda_to", &SegmentPath::lambda_to)
      .def_readwrite("omega", &SegmentPath::omega)
      .def_readwrite("steps", &SegmentPath::steps);

  py::class_<ExchangeReport>(m, "ExchangeReport")
      .def_readonly("regime", &ExchangeReport::regime)
      .def_readonly("exchanged", &ExchangeReport::exchanged)
      .def_readonly("energies_cross", &ExchangeReport::energies_cross)
      .def_readonly("widths_cross", &ExchangeReport::widths_cross)
      .def_readonly("dp_overlap", &ExchangeReport::dp_overlap)
      .def_readonly("dp_sign", &ExchangeReport::dp_sign);

  m.def("crossing_lambda", &crossing_lambda, py::arg("model"));
  m.def("classify", &classify, py::arg("model"), py::arg("omega"));
  m.def(
      "find_branch_point",
      [](const TwoLevelModel& mm, const ParameterPoint& initial) {
        return find_branch_point(mm, initial);
      },
      py::arg("model"), py::arg("initial"));
  m.def("known_branch_points", &known_branch_points, py::arg("model"));
  m.def("two_level_eigenvectors_principal", &two_level_eigenvectors_principal,
        py::arg("model"), py::arg("point"));
  m.def("exchange_diagnostic", &exchange_diagnostic, py::arg("model"),
        py::arg("path"));

  // ---- adiabatic loop ----
  py::enum_<Convention>(m, "Convention")
      .value("CProductContinuity", Convention::CProductContinuity)
      .value("PaperExchangeRule", Convention::PaperExchangeRule);

  py::enum_<Orientation>(m, "Orientation")
      .value("Positive", Orientation::Positive)
      .value("Negative", Orientation::Negative);

  py::enum_<LoopPath::Shape>(m, "LoopShape")
      .value("Circle", LoopPath::Shape::Circle)
      .value("Polyline", LoopPath::Shape::Polyline);

  py::class_<LoopPath>(m, "LoopPath")
      .def(py::init<>())
      .def_readwrite("center", &LoopPath::center)
      .def_readwrite("shape", &LoopPath::shape)
      .def_readwrite("radius_lambda", &LoopPath::radius_lambda)
      .def_readwrite("radius_omega", &LoopPath::radius_omega)
      .def_readwrite("waypoints", &LoopPath::waypoints)
      .def_readwrite("steps", &LoopPath::steps)
      .def_readwrite("orientation", &LoopPath::orientation)
      .def_readwrite("turns", &LoopPath::turns)
      .def("at", &LoopPath::at, py::arg("t"))
      .def("check", &LoopPath::check);

  py::class_<ContinuationOptions>(m, "ContinuationOptions")
      .def(py::init<>())
      .def_readwrite("overlap_threshold", &ContinuationOptions::overlap_threshold)
      .def_readwrite("max_bisection", &ContinuationOptions::max_bisection)
      .def_readwrite("delta_min", &ContinuationOptions::delta_min)
      .def_readwrite("ep_guard", &ContinuationOptions::ep_guard);

  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("step", &StepRecord::step)
      .def_readonly("p", &StepRecord::p)
      .def_readonly("values", &StepRecord::values)
      .def_readonly("a", &StepRecord::a)
      .def_readonly("b12", &StepRecord::b12)
      .def_readonly("overlap", &StepRecord::overlap)
      .def_readonly("bisections", &StepRecord::bisections);

  py::class_<MonodromyReport>(m, "MonodromyReport")
      .def_readonly("branch_permutation", &MonodromyReport::branch_permutation)
      .def_readonly("phase_matrix", &MonodromyReport::phase_matrix)
      .def_readonly("period", &MonodromyReport::period)
      .def_readonly("convention", &MonodromyReport::convention)
      .def_readonly("trace", &MonodromyReport::trace);

  py::class_<TrackedPath>(m, "TrackedPath")
      .def_readonly("frames", &TrackedPath::frames)
      .def_readonly("trace", &TrackedPath::trace);

  m.def("continue_along", &continue_along, py::arg("model"), py::arg("points"),
        py::arg("options") = ContinuationOptions{});
  m.def("continue_eigensystem", &continue_eigensystem, py::arg("model"),
        py::arg("path"), py::arg("convention"),
        py::arg("options") = ContinuationOptions{});
  m.def("measure_period", &measure_period, py::arg("model"), py::arg("path"),
        py::arg("convention"), py::arg("max_turns") = 8,
        py::arg("options") = ContinuationOptions{});

  // ---- scattering ----
  py::class_<SMatrixScan>(m, "SMatrixScan")
      .def_readonly("energies", &SMatrixScan::energies)
      .def_readonly("matrices", &SMatrixScan::matrices)
      .def_readonly("unitarity_defect", &SMatrixScan::unitarity_defect)
      .def_readonly("symmetry_defect", &SMatrixScan::symmetry_defect)
      .def_property_readonly("max_unitarity_defect",
                             &SMatrixScan::max_unitarity_defect)
      .def_property_readonly("max_symmetry_defect",
                             &SMatrixScan::max_symmetry_defect);

  py::class_<EigenExpansion>(m, "EigenExpansion")
      .def_readonly("values", &EigenExpansion::values)
      .def_readonly("vectors", &EigenExpansion::vectors)
      .def_readonly("couplings", &EigenExpansion::couplings);

  py::class_<Pole>(m, "Pole")
      .def_readonly("value", &Pole::value)
      .def_readonly("residue", &Pole::residue)
      .def_readonly("iterations", &Pole::iterations)
      .def_readonly("converged", &Pole::converged);

  py::class_<PoleSet>(m, "PoleSet").def_readonly("poles", &PoleSet::poles);

  py::class_<TrappingSweep>(m, "TrappingSweep")
      .def_readonly("alphas", &TrappingSweep::alphas)
      .def_readonly("widths", &TrappingSweep::widths)
      .def_readonly("width_sums", &TrappingSweep::width_sums)
      .def_readonly("coupling_sums", &TrappingSweep::coupling_sums);

  py::class_<SmoothnessCurve>(m, "SmoothnessCurve")
      .def_readonly("deltas", &SmoothnessCurve::deltas)
      .def_readonly("deviations", &SmoothnessCurve::deviations);

  m.def("s_matrix", &s_matrix, py::arg("model"), py::arg("energy"));
  m.def("scan_s_matrix", &scan_s_matrix, py::arg("model"), py::arg("energies"));
  m.def("eigenbasis_expansion", &eigenbasis_expansion, py::arg("model"),
        py::arg("energy") = 0.0);
  m.def("expansion_s_matrix", &expansion_s_matrix, py::arg("expansion"),
        py::arg("energy"));
  m.def("find_poles", &find_poles, py::arg("model"));
  m.def("trapping_sweep", &trapping_sweep, py::arg("model"), py::arg("alphas"));
  m.def("smoothness_curve", &smoothness_curve, py::arg("model"), py::arg("at"),
        py::arg("dlambda"), py::arg("domega"), py::arg("deltas"),
        py::arg("energies"));

  // ---- experiment runner ----
  m.def(
      "run_config",
      [](const std::string& config_text, unsigned long long seed) {
        Json config = Json::parse(config_text);
        RunOutputs out = run_experiment(config, seed);
        return py::make_tuple(out.result.dump(2) + "\n", out.trace_csv,
                              out.summary);
      },
      py::arg("config_text"), py::arg("seed") = 0,
      "Run an experiment config given as JSON text; returns "
      "(result_json, trace_csv, summary)");
  m.def(
      "validate_config",
      [](const std::string& config_text) {
        Json config = Json::parse(config_text);
        ValidationReport rep = validate_config(config);
        py::list violations;
        py::list warnings;
        for (const auto& v : rep.violations) {
          violations.append(py::make_tuple(v.path, v.message));
        }
        for (const auto& w : rep.warnings) {
          warnings.append(py::make_tuple(w.path, w.message));
        }
        return py::make_tuple(violations, warnings);
      },
      py::arg("config_text"),
      "Validate a config given as JSON text; returns (violations, warnings) "
      "as lists of (json_pointer, message) pairs");
}
