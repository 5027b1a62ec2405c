#include "nheff/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "nheff/adiabatic_loop.hpp"
#include "nheff/branch_structure.hpp"
#include "nheff/eigensystem.hpp"
#include "nheff/scattering.hpp"

namespace nheff {

namespace {

constexpr const char* kValidExperiments =
    "sweep, surface, classify, find_ep, loop, period, smatrix, poles, "
    "trapping, smoothness";

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

std::string fmt(long long x) { return std::to_string(x); }

Json cpair(Complex z) { return Json::array({z.real(), z.imag()}); }

Json cmatrix(const Eigen::MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(cpair(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// CSV table with a fixed column set; floats carry 17 significant digits and
// a '.' decimal separator regardless of locale.
struct CsvTable {
  std::string text;
  int rows = 0;

  explicit CsvTable(const std::vector<std::string>& columns) {
    for (size_t i = 0; i < columns.size(); ++i) {
      if (i) text += ',';
      text += columns[i];
    }
    text += '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) text += ',';
      text += cells[i];
    }
    text += '\n';
    ++rows;
  }
};

std::vector<double> linear_grid(double from, double to, int steps) {
  std::vector<double> g;
  g.reserve(static_cast<size_t>(steps));
  if (steps == 1) {
    g.push_back(from);
    return g;
  }
  for (int i = 0; i < steps; ++i) {
    g.push_back(from + (to - from) * static_cast<double>(i) / (steps - 1));
  }
  return g;
}

// ---------------------------------------------------------------------------
// validation

struct Checker {
  ValidationReport rep;

  void violation(const std::string& path, const std::string& msg) {
    rep.violations.push_back(ValidationIssue{path, msg});
  }
  void warning(const std::string& path, const std::string& msg) {
    rep.warnings.push_back(ValidationIssue{path, msg});
  }

  // Checks an (optionally required) finite number field.
  bool number(const Json& parent, const char* key, const std::string& path,
              bool required) {
    if (!parent.contains(key)) {
      if (required) violation(path, "required number is missing");
      return false;
    }
    if (!parent[key].is_number()) {
      violation(path, "must be a number");
      return false;
    }
    if (!std::isfinite(parent[key].get<double>())) {
      violation(path, "must be finite");
      return false;
    }
    return true;
  }

  bool integer(const Json& parent, const char* key, const std::string& path,
               bool required, long long min_value) {
    if (!parent.contains(key)) {
      if (required) violation(path, "required integer is missing");
      return false;
    }
    if (!parent[key].is_number_integer()) {
      violation(path, "must be an integer");
      return false;
    }
    if (parent[key].get<long long>() < min_value) {
      violation(path, "must be >= " + std::to_string(min_value));
      return false;
    }
    return true;
  }

  bool point(const Json& parent, const char* key, const std::string& path,
             bool required) {
    if (!parent.contains(key)) {
      if (required) violation(path, "required object is missing");
      return false;
    }
    if (!parent[key].is_object()) {
      violation(path, "must be an object with lambda and omega");
      return false;
    }
    bool ok = number(parent[key], "lambda", path + "/lambda", true);
    ok = number(parent[key], "omega", path + "/omega", true) && ok;
    return ok;
  }

  // Rectangular matrix of finite numbers; reports dimensions through
  // rows/cols on success.
  bool matrix(const Json& j, const std::string& path, int* rows, int* cols) {
    if (!j.is_array() || j.empty()) {
      violation(path, "must be a non-empty array of rows");
      return false;
    }
    int cc = -1;
    for (size_t i = 0; i < j.size(); ++i) {
      const Json& row = j[i];
      std::string rpath = path + "/" + std::to_string(i);
      if (!row.is_array() || row.empty()) {
        violation(rpath, "must be a non-empty array of numbers");
        return false;
      }
      if (cc < 0) {
        cc = static_cast<int>(row.size());
      } else if (static_cast<int>(row.size()) != cc) {
        violation(rpath, "row length differs from the first row");
        return false;
      }
      for (size_t k = 0; k < row.size(); ++k) {
        if (!row[k].is_number() || !std::isfinite(row[k].get<double>())) {
          violation(rpath + "/" + std::to_string(k), "must be a finite number");
          return false;
        }
      }
    }
    *rows = static_cast<int>(j.size());
    *cols = cc;
    return true;
  }
};

void check_two_level(Checker& c, const Json& jm) {
  for (const char* lvl : {"e1", "e2"}) {
    if (!jm.contains(lvl)) continue;
    std::string base = std::string("/model/") + lvl;
    if (!jm[lvl].is_object()) {
      c.violation(base, "must be an object with intercept and slope");
      continue;
    }
    c.number(jm[lvl], "intercept", base + "/intercept", false);
    c.number(jm[lvl], "slope", base + "/slope", false);
  }
  for (const char* g : {"gamma1", "gamma2"}) {
    std::string path = std::string("/model/") + g;
    if (c.number(jm, g, path, false) && jm[g].get<double>() < 0.0) {
      c.violation(path, "width must be >= 0");
    }
  }
  c.number(jm, "omega", "/model/omega", false);
}

void check_effective(Checker& c, const Json& jm) {
  int n = 0, nc = 0, wr = 0, wc = 0;
  bool okh = false;
  if (!jm.contains("h0")) {
    c.violation("/model/h0", "required matrix is missing");
  } else if (c.matrix(jm["h0"], "/model/h0", &n, &nc)) {
    if (n != nc) {
      c.violation("/model/h0", "must be square");
    } else {
      okh = true;
      for (int i = 0; i < n && okh; ++i) {
        for (int j = i + 1; j < n; ++j) {
          double a = jm["h0"][i][j].get<double>();
          double b = jm["h0"][j][i].get<double>();
          if (std::abs(a - b) > 1e-12) {
            c.violation("/model/h0", "must be symmetric");
            okh = false;
            break;
          }
        }
      }
    }
  }
  bool okw = false;
  if (!jm.contains("w")) {
    c.violation("/model/w", "required matrix is missing");
  } else {
    okw = c.matrix(jm["w"], "/model/w", &wr, &wc);
  }
  if (okh && okw && wr != n) {
    c.violation("/model/w", "row count must match h0");
  }
  if (jm.contains("form_factors")) {
    const Json& ff = jm["form_factors"];
    if (!ff.is_array()) {
      c.violation("/model/form_factors", "must be an array");
    } else {
      if (okw && !ff.empty() && static_cast<int>(ff.size()) != wc) {
        c.violation("/model/form_factors", "size must match the channel count");
      }
      for (size_t i = 0; i < ff.size(); ++i) {
        std::string base = "/model/form_factors/" + std::to_string(i);
        if (!ff[i].is_object()) {
          c.violation(base, "must be an object");
          continue;
        }
        std::string kind = ff[i].value("kind", std::string("constant"));
        if (kind != "constant" && kind != "rational") {
          c.violation(base + "/kind", "must be \"constant\" or \"rational\"");
        }
        if (c.number(ff[i], "c", base + "/c", false) &&
            kind == "rational" && ff[i]["c"].get<double>() == 0.0) {
          c.violation(base + "/c", "rational form factor needs c != 0");
        }
      }
    }
  }
}

TwoLevelModel parse_two_level(const Json& jm) {
  TwoLevelModel m;
  if (jm.contains("e1")) {
    m.e1.intercept = jm["e1"].value("intercept", m.e1.intercept);
    m.e1.slope = jm["e1"].value("slope", m.e1.slope);
  }
  if (jm.contains("e2")) {
    m.e2.intercept = jm["e2"].value("intercept", m.e2.intercept);
    m.e2.slope = jm["e2"].value("slope", m.e2.slope);
  }
  m.gamma1 = jm.value("gamma1", m.gamma1);
  m.gamma2 = jm.value("gamma2", m.gamma2);
  m.omega = jm.value("omega", m.omega);
  return m;
}

EffectiveHamiltonianModel parse_effective(const Json& jm) {
  EffectiveHamiltonianModel m;
  const Json& jh = jm["h0"];
  const Json& jw = jm["w"];
  const int n = static_cast<int>(jh.size());
  const int c = static_cast<int>(jw[0].size());
  m.h0.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m.h0(i, j) = jh[i][j].get<double>();
  }
  m.w.resize(n, c);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < c; ++j) m.w(i, j) = jw[i][j].get<double>();
  }
  if (jm.contains("form_factors")) {
    for (const Json& jf : jm["form_factors"]) {
      FormFactor f;
      f.kind = jf.value("kind", std::string("constant")) == "rational"
                   ? FormFactor::Kind::Rational
                   : FormFactor::Kind::Constant;
      f.c = jf.value("c", f.c);
      m.form_factors.push_back(f);
    }
  }
  return m;
}

LoopPath parse_loop_path(const Json& je) {
  LoopPath path;
  if (je.value("shape", std::string("circle")) == "polyline") {
    path.shape = LoopPath::Shape::Polyline;
    for (const Json& wp : je["waypoints"]) {
      path.waypoints.push_back(
          ParameterPoint{wp[0].get<double>(), wp[1].get<double>()});
    }
  } else {
    path.center = ParameterPoint{je["center"]["lambda"].get<double>(),
                                 je["center"]["omega"].get<double>()};
    path.radius_lambda = je.value("radius_lambda", path.radius_lambda);
    path.radius_omega = je.value("radius_omega", path.radius_omega);
  }
  path.steps = je.value("steps", path.steps);
  path.turns = je.value("turns", path.turns);
  if (je.value("orientation", std::string("positive")) == "negative") {
    path.orientation = Orientation::Negative;
  }
  return path;
}

Convention parse_convention(const Json& je) {
  return je.value("convention", std::string("c_product")) == "paper_rule"
             ? Convention::PaperExchangeRule
             : Convention::CProductContinuity;
}

void check_loop_experiment(Checker& c, const Json& je, const Json& jm,
                           bool two_level_model) {
  std::string shape = je.value("shape", std::string("circle"));
  if (je.contains("shape") && !je["shape"].is_string()) {
    c.violation("/experiment/shape", "must be a string");
    return;
  }
  if (shape != "circle" && shape != "polyline") {
    c.violation("/experiment/shape", "must be \"circle\" or \"polyline\"");
    return;
  }
  bool geometry_ok = true;
  if (shape == "circle") {
    geometry_ok = c.point(je, "center", "/experiment/center", true);
    for (const char* r : {"radius_lambda", "radius_omega"}) {
      std::string path = std::string("/experiment/") + r;
      if (c.number(je, r, path, false) && je[r].get<double>() <= 0.0) {
        c.violation(path, "must be > 0");
        geometry_ok = false;
      }
    }
  } else {
    const Json* wps = je.contains("waypoints") ? &je["waypoints"] : nullptr;
    if (!wps || !wps->is_array() || wps->size() < 4) {
      c.violation("/experiment/waypoints",
                  "closed polyline needs at least 4 [lambda, omega] pairs");
      geometry_ok = false;
    } else {
      for (size_t i = 0; i < wps->size(); ++i) {
        const Json& wp = (*wps)[i];
        if (!wp.is_array() || wp.size() != 2 || !wp[0].is_number() ||
            !wp[1].is_number()) {
          c.violation("/experiment/waypoints/" + std::to_string(i),
                      "must be a [lambda, omega] pair");
          geometry_ok = false;
        }
      }
      if (geometry_ok) {
        const Json& a = (*wps)[0];
        const Json& b = (*wps)[wps->size() - 1];
        if (a[0].get<double>() != b[0].get<double>() ||
            a[1].get<double>() != b[1].get<double>()) {
          c.violation("/experiment/waypoints",
                      "polyline must be closed (first point = last point)");
          geometry_ok = false;
        }
      }
    }
  }
  bool steps_ok = true;
  if (je.contains("steps")) steps_ok = c.integer(je, "steps", "/experiment/steps", false, 16);
  if (je.contains("turns")) c.integer(je, "turns", "/experiment/turns", false, 1);
  if (je.contains("orientation")) {
    std::string o = je["orientation"].is_string()
                        ? je["orientation"].get<std::string>()
                        : std::string();
    if (o != "positive" && o != "negative") {
      c.violation("/experiment/orientation", "must be \"positive\" or \"negative\"");
    }
  }
  if (je.contains("convention")) {
    std::string v = je["convention"].is_string()
                        ? je["convention"].get<std::string>()
                        : std::string();
    if (v != "c_product" && v != "paper_rule") {
      c.violation("/experiment/convention", "must be \"c_product\" or \"paper_rule\"");
    }
  }
  // advisory proximity check: a loop skimming a branch point will likely
  // fail at run time, but it is not a contract violation
  if (two_level_model && geometry_ok && steps_ok) {
    try {
      TwoLevelModel m = parse_two_level(jm);
      validate(m);
      LoopPath path = parse_loop_path(je);
      path.check();
      double dmin = std::numeric_limits<double>::infinity();
      const int samples = 4 * path.steps;
      for (const ParameterPoint& ep : known_branch_points(m)) {
        for (int i = 0; i < samples; ++i) {
          ParameterPoint p = path.at(static_cast<double>(i) / samples);
          double dl = p.lambda - ep.lambda;
          double dw = p.omega - ep.omega;
          dmin = std::min(dmin, std::sqrt(dl * dl + dw * dw));
        }
      }
      if (dmin < 1e-3) {
        c.warning("/experiment",
                  "loop passes within 1e-3 of a branch point; continuation may fail");
      }
    } catch (const std::exception&) {
      // geometry problems already reported above
    }
  }
}

void check_experiment(Checker& c, const Json& je, const Json& jm,
                      const std::string& type, const std::string& model_type) {
  const bool two_level = model_type == "two_level";
  auto require_model = [&](const char* wanted) {
    if (model_type != wanted) {
      c.violation("/experiment/type",
                  "experiment '" + type + "' requires a " + wanted + " model");
    }
  };
  if (type == "sweep") {
    require_model("two_level");
    c.number(je, "lambda_from", "/experiment/lambda_from", true);
    c.number(je, "lambda_to", "/experiment/lambda_to", true);
    c.integer(je, "steps", "/experiment/steps", true, 1);
    c.number(je, "omega", "/experiment/omega", false);
  } else if (type == "surface") {
    require_model("two_level");
    c.number(je, "lambda_from", "/experiment/lambda_from", true);
    c.number(je, "lambda_to", "/experiment/lambda_to", true);
    c.integer(je, "lambda_steps", "/experiment/lambda_steps", true, 1);
    c.number(je, "omega_from", "/experiment/omega_from", true);
    c.number(je, "omega_to", "/experiment/omega_to", true);
    c.integer(je, "omega_steps", "/experiment/omega_steps", true, 1);
  } else if (type == "classify") {
    require_model("two_level");
    if (!je.contains("omegas") || !je["omegas"].is_array() || je["omegas"].empty()) {
      c.violation("/experiment/omegas", "required non-empty array of numbers");
    } else {
      for (size_t i = 0; i < je["omegas"].size(); ++i) {
        if (!je["omegas"][i].is_number() ||
            !std::isfinite(je["omegas"][i].get<double>())) {
          c.violation("/experiment/omegas/" + std::to_string(i),
                      "must be a finite number");
        }
      }
    }
  } else if (type == "find_ep") {
    require_model("two_level");
    if (je.contains("initial")) c.point(je, "initial", "/experiment/initial", false);
  } else if (type == "loop" || type == "period") {
    require_model("two_level");
    check_loop_experiment(c, je, jm, two_level);
    if (type == "period" && je.contains("max_turns")) {
      c.integer(je, "max_turns", "/experiment/max_turns", false, 1);
    }
  } else if (type == "smatrix") {
    require_model("effective");
    c.number(je, "energy_from", "/experiment/energy_from", true);
    c.number(je, "energy_to", "/experiment/energy_to", true);
    c.integer(je, "steps", "/experiment/steps", true, 1);
  } else if (type == "poles") {
    require_model("effective");
  } else if (type == "trapping") {
    require_model("effective");
    if (!je.contains("alphas") || !je["alphas"].is_array() || je["alphas"].empty()) {
      c.violation("/experiment/alphas", "required non-empty array of numbers");
    } else {
      double prev = -1.0;
      for (size_t i = 0; i < je["alphas"].size(); ++i) {
        std::string path = "/experiment/alphas/" + std::to_string(i);
        if (!je["alphas"][i].is_number() ||
            !std::isfinite(je["alphas"][i].get<double>())) {
          c.violation(path, "must be a finite number");
          break;
        }
        double a = je["alphas"][i].get<double>();
        if (a < 0.0) c.violation(path, "must be >= 0");
        if (i > 0 && a <= prev) c.violation(path, "must be strictly ascending");
        prev = a;
      }
    }
  } else if (type == "smoothness") {
    require_model("two_level");
    if (je.contains("at")) {
      c.point(je, "at", "/experiment/at", false);
    } else if (two_level && jm.is_object()) {
      // the default target is the closed-form branch point, which needs
      // non-parallel levels
      try {
        TwoLevelModel m = parse_two_level(jm);
        if (m.e1.slope == m.e2.slope) {
          c.violation("/experiment/at",
                      "required: parallel levels have no default branch point");
        }
      } catch (const std::exception&) {
        // model field problems already reported by check_two_level
      }
    }
    if (je.contains("direction")) {
      if (!je["direction"].is_object()) {
        c.violation("/experiment/direction", "must be an object");
      } else {
        c.number(je["direction"], "dlambda", "/experiment/direction/dlambda", false);
        c.number(je["direction"], "domega", "/experiment/direction/domega", false);
        if (je["direction"].value("dlambda", 0.0) == 0.0 &&
            je["direction"].value("domega", 0.0) == 0.0) {
          c.violation("/experiment/direction", "must not be the zero vector");
        }
      }
    }
    if (!je.contains("deltas") || !je["deltas"].is_array() || je["deltas"].empty()) {
      c.violation("/experiment/deltas", "required non-empty array of numbers");
    } else {
      for (size_t i = 0; i < je["deltas"].size(); ++i) {
        if (!je["deltas"][i].is_number() ||
            !std::isfinite(je["deltas"][i].get<double>()) ||
            je["deltas"][i].get<double>() < 0.0) {
          c.violation("/experiment/deltas/" + std::to_string(i),
                      "must be a number >= 0");
        }
      }
    }
    c.number(je, "energy_from", "/experiment/energy_from", true);
    c.number(je, "energy_to", "/experiment/energy_to", true);
    c.integer(je, "energy_steps", "/experiment/energy_steps", true, 1);
  } else {
    c.violation("/experiment/type",
                "unknown experiment '" + type + "' (valid: " + kValidExperiments + ")");
  }
}

// ---------------------------------------------------------------------------
// runners

struct Partial {
  Json results = Json::object();
  std::string trace;
  std::string summary;
};

Partial run_sweep(const TwoLevelModel& m, const Json& je) {
  const double from = je["lambda_from"].get<double>();
  const double to = je["lambda_to"].get<double>();
  const int steps = je["steps"].get<int>();
  const double omega = je.value("omega", m.omega);
  CsvTable t({"step", "lambda", "omega", "energy1", "width1", "energy2",
              "width2", "a1", "a2", "b12", "f_re", "f_im"});
  double min_gap = std::numeric_limits<double>::infinity();
  double min_gap_lambda = from;
  double max_a = 0.0;
  double max_a_lambda = from;
  long long ep_nodes = 0;
  long long i = 1;
  for (double lam : linear_grid(from, to, steps)) {
    ParameterPoint p{lam, omega};
    BiorthogonalEigensystem sys = eig_complex_symmetric(build_hamiltonian(m, p));
    DiscriminantValue f = discriminant(m, p);
    if (sys.ep_flag) ++ep_nodes;
    double gap = std::abs(sys.values[0].value - sys.values[1].value);
    if (gap < min_gap) {
      min_gap = gap;
      min_gap_lambda = lam;
    }
    double a = std::max(sys.a_metrics(0), sys.a_metrics(1));
    if (a > max_a) {
      max_a = a;
      max_a_lambda = lam;
    }
    t.row({fmt(i), fmt(lam), fmt(omega), fmt(sys.values[0].energy),
           fmt(sys.values[0].width), fmt(sys.values[1].energy),
           fmt(sys.values[1].width), fmt(sys.a_metrics(0)), fmt(sys.a_metrics(1)),
           fmt(sys.b_metrics(0, 1)), fmt(f.f_real), fmt(f.f_imag)});
    ++i;
  }
  Partial out;
  out.results["nodes"] = steps;
  out.results["omega"] = omega;
  out.results["min_splitting"] = min_gap;
  out.results["min_splitting_lambda"] = min_gap_lambda;
  out.results["max_a_metric"] = max_a;
  out.results["max_a_lambda"] = max_a_lambda;
  out.results["ep_nodes"] = ep_nodes;
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "eigenvalue sweep: " << steps << " nodes, lambda in [" << from << ", "
    << to << "] at omega = " << omega << "\n"
    << "min |E1 - E2| = " << min_gap << " at lambda = " << min_gap_lambda << "\n"
    << "max A_k = " << max_a << " at lambda = " << max_a_lambda << "\n";
  out.summary = s.str();
  return out;
}

Partial run_surface(const TwoLevelModel& m, const Json& je) {
  const std::vector<double> lambdas = linear_grid(
      je["lambda_from"].get<double>(), je["lambda_to"].get<double>(),
      je["lambda_steps"].get<int>());
  const std::vector<double> omegas = linear_grid(
      je["omega_from"].get<double>(), je["omega_to"].get<double>(),
      je["omega_steps"].get<int>());
  CsvTable t({"step", "lambda", "omega", "f_re", "f_im", "regime"});
  long long over = 0, dp = 0, sub = 0;
  long long i = 1;
  for (double lam : lambdas) {
    for (double om : omegas) {
      DiscriminantValue f = discriminant(m, ParameterPoint{lam, om});
      CouplingRegime reg = classify(m, om);
      switch (reg.kind) {
        case Regime::Overcritical: ++over; break;
        case Regime::DoublePole: ++dp; break;
        case Regime::Subcritical: ++sub; break;
      }
      t.row({fmt(i), fmt(lam), fmt(om), fmt(f.f_real), fmt(f.f_imag),
             to_string(reg.kind)});
      ++i;
    }
  }
  Partial out;
  out.results["rows"] = t.rows;
  out.results["regime_counts"] =
      Json{{"overcritical", over}, {"double_pole", dp}, {"subcritical", sub}};
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "discriminant surface: " << t.rows << " nodes\n"
    << "regimes: " << over << " overcritical, " << dp << " double_pole, " << sub
    << " subcritical\n";
  out.summary = s.str();
  return out;
}

Partial run_classify(const TwoLevelModel& m, const Json& je) {
  CsvTable t({"step", "omega", "f_real_at_crossing", "regime"});
  Json entries = Json::array();
  long long i = 1;
  for (const Json& jo : je["omegas"]) {
    double om = jo.get<double>();
    CouplingRegime reg = classify(m, om);
    entries.push_back(Json{{"omega", om},
                           {"regime", to_string(reg.kind)},
                           {"f_real_at_crossing", reg.f_real_at_crossing}});
    t.row({fmt(i), fmt(om), fmt(reg.f_real_at_crossing), to_string(reg.kind)});
    ++i;
  }
  Partial out;
  out.results["entries"] = std::move(entries);
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "classified " << (i - 1) << " coupling values at the level crossing\n";
  out.summary = s.str();
  return out;
}

Partial run_find_ep(const TwoLevelModel& m, const Json& je,
                    unsigned long long seed) {
  ParameterPoint init;
  if (je.contains("initial")) {
    init.lambda = je["initial"]["lambda"].get<double>();
    init.omega = je["initial"]["omega"].get<double>();
  } else {
    // seeded uniform draws; the bit arithmetic keeps the mapping exact and
    // platform independent
    std::mt19937_64 eng(seed);
    auto u01 = [&eng] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    init.lambda = -0.5 + u01();
    init.omega = 1.0 - u01();  // in (0, 1]
  }
  std::vector<BranchIterate> history;
  BranchPoint bp = find_branch_point(m, init, &history);
  CsvTable t({"step", "lambda", "omega", "abs_f"});
  for (size_t k = 0; k < history.size(); ++k) {
    t.row({fmt(static_cast<long long>(k + 1)), fmt(history[k].p.lambda),
           fmt(history[k].p.omega), fmt(history[k].abs_f)});
  }
  Partial out;
  out.results["lambda_cr"] = bp.location.lambda;
  out.results["omega_cr"] = bp.location.omega;
  out.results["coalesced"] = cpair(bp.coalesced_value.value);
  out.results["energy"] = bp.coalesced_value.energy;
  out.results["width"] = bp.coalesced_value.width;
  out.results["residual"] = bp.residual;
  out.results["converged"] = bp.converged;
  out.results["iterations"] = bp.iterations;
  out.results["initial"] = Json::array({init.lambda, init.omega});
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "branch point search from (" << init.lambda << ", " << init.omega << ")\n"
    << (bp.converged ? "converged" : "did not converge") << " to ("
    << bp.location.lambda << ", " << bp.location.omega << ") with |F| = "
    << bp.residual << " after " << bp.iterations << " iterations\n";
  out.summary = s.str();
  return out;
}

void loop_trace(CsvTable& t, const std::vector<StepRecord>& trace) {
  for (const StepRecord& r : trace) {
    t.row({fmt(static_cast<long long>(r.step)), fmt(r.p.lambda), fmt(r.p.omega),
           fmt(r.values[0].energy), fmt(r.values[0].width), fmt(r.values[1].energy),
           fmt(r.values[1].width), fmt(r.a[0]), fmt(r.a[1]), fmt(r.b12),
           fmt(r.overlap[0]), fmt(r.overlap[1]),
           fmt(static_cast<long long>(r.bisections))});
  }
}

const std::vector<std::string> kLoopColumns = {
    "step", "lambda", "omega", "energy1", "width1", "energy2", "width2",
    "a1",   "a2",     "b12",   "overlap1", "overlap2", "bisections"};

Partial run_loop(const TwoLevelModel& m, const Json& je) {
  LoopPath path = parse_loop_path(je);
  Convention conv = parse_convention(je);
  MonodromyReport rep = continue_eigensystem(m, path, conv);
  CsvTable t(kLoopColumns);
  loop_trace(t, rep.trace);
  Partial out;
  out.results["convention"] = to_string(rep.convention);
  out.results["monodromy"] = cmatrix(rep.phase_matrix);
  out.results["branch_permutation"] =
      Json::array({rep.branch_permutation[0], rep.branch_permutation[1]});
  out.results["period"] = rep.period;
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "loop of " << path.steps << " steps x " << path.turns << " turn(s), "
    << to_string(path.orientation) << " orientation, convention "
    << to_string(rep.convention) << "\n"
    << "branch permutation [" << rep.branch_permutation[0] << ", "
    << rep.branch_permutation[1] << "], period "
    << rep.period << (rep.period == 0 ? " (none found within 8 turns)" : "")
    << "\n";
  out.summary = s.str();
  return out;
}

Partial run_period(const TwoLevelModel& m, const Json& je) {
  LoopPath path = parse_loop_path(je);
  Convention conv = parse_convention(je);
  int max_turns = je.value("max_turns", 8);
  MonodromyReport rep = measure_period(m, path, conv, max_turns);
  CsvTable t(kLoopColumns);
  loop_trace(t, rep.trace);
  Partial out;
  out.results["convention"] = to_string(rep.convention);
  out.results["period"] = rep.period;
  out.results["max_turns"] = max_turns;
  out.results["monodromy"] = cmatrix(rep.phase_matrix);
  out.results["branch_permutation"] =
      Json::array({rep.branch_permutation[0], rep.branch_permutation[1]});
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "period measurement, convention " << to_string(rep.convention) << "\n";
  if (rep.period > 0) {
    s << "loop restores the eigenvector frame after " << rep.period << " turn(s)\n";
  } else {
    s << "no restoring power found within " << max_turns << " turns\n";
  }
  out.summary = s.str();
  return out;
}

Partial run_smatrix(const EffectiveHamiltonianModel& m, const Json& je) {
  const std::vector<double> energies =
      linear_grid(je["energy_from"].get<double>(), je["energy_to"].get<double>(),
                  je["steps"].get<int>());
  SMatrixScan scan = scan_s_matrix(m, energies);
  std::vector<std::string> cols = {"step", "energy", "unitarity_defect",
                                   "symmetry_defect"};
  const int c = m.channels();
  for (int a = 1; a <= c; ++a) {
    for (int b = 1; b <= c; ++b) {
      cols.push_back("s" + std::to_string(a) + std::to_string(b) + "_re");
      cols.push_back("s" + std::to_string(a) + std::to_string(b) + "_im");
    }
  }
  CsvTable t(cols);
  for (size_t i = 0; i < scan.energies.size(); ++i) {
    std::vector<std::string> cells = {
        fmt(static_cast<long long>(i + 1)), fmt(scan.energies[i]),
        fmt(scan.unitarity_defect[i]), fmt(scan.symmetry_defect[i])};
    for (int a = 0; a < c; ++a) {
      for (int b = 0; b < c; ++b) {
        cells.push_back(fmt(scan.matrices[i](a, b).real()));
        cells.push_back(fmt(scan.matrices[i](a, b).imag()));
      }
    }
    t.row(cells);
  }
  Partial out;
  out.results["nodes"] = static_cast<long long>(scan.energies.size());
  out.results["channels"] = c;
  out.results["max_unitarity_defect"] = scan.max_unitarity_defect();
  out.results["max_symmetry_defect"] = scan.max_symmetry_defect();
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "S-matrix scan: " << scan.energies.size() << " energies, " << c
    << " channel(s)\n"
    << "max ||S^dag S - I|| = " << scan.max_unitarity_defect() << "\n"
    << "max ||S - S^T|| = " << scan.max_symmetry_defect() << "\n";
  out.summary = s.str();
  return out;
}

Partial run_poles(const EffectiveHamiltonianModel& m, const Json&) {
  PoleSet set = find_poles(m);
  CsvTable t({"step", "energy", "width", "iterations", "converged"});
  Json poles = Json::array();
  long long i = 1;
  for (const Pole& p : set.poles) {
    ComplexEigenvalue v = ComplexEigenvalue::from(p.value);
    t.row({fmt(i), fmt(v.energy), fmt(v.width),
           fmt(static_cast<long long>(p.iterations)),
           fmt(static_cast<long long>(p.converged ? 1 : 0))});
    poles.push_back(Json{{"value", cpair(p.value)},
                         {"energy", v.energy},
                         {"width", v.width},
                         {"iterations", p.iterations},
                         {"converged", p.converged},
                         {"residue", cmatrix(p.residue)}});
    ++i;
  }
  Partial out;
  out.results["poles"] = std::move(poles);
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "located " << set.poles.size() << " S-matrix pole(s)\n";
  for (const Pole& p : set.poles) {
    s << "  E = " << p.value.real() << (p.value.imag() < 0 ? " - " : " + ")
      << std::abs(p.value.imag()) << "i  (" << p.iterations << " iterations)\n";
  }
  out.summary = s.str();
  return out;
}

Partial run_trapping(const EffectiveHamiltonianModel& m, const Json& je) {
  std::vector<double> alphas;
  for (const Json& ja : je["alphas"]) alphas.push_back(ja.get<double>());
  TrappingSweep sweep = trapping_sweep(m, alphas);
  std::vector<std::string> cols = {"step", "alpha", "coupling_sum", "width_sum"};
  for (int k = 1; k <= m.n(); ++k) cols.push_back("width" + std::to_string(k));
  CsvTable t(cols);
  Json widths = Json::array();
  Json min_widths = Json::array();
  for (size_t i = 0; i < sweep.alphas.size(); ++i) {
    std::vector<std::string> cells = {
        fmt(static_cast<long long>(i + 1)), fmt(sweep.alphas[i]),
        fmt(sweep.coupling_sums[i]), fmt(sweep.width_sums[i])};
    Json row = Json::array();
    for (double w : sweep.widths[i]) {
      cells.push_back(fmt(w));
      row.push_back(w);
    }
    widths.push_back(std::move(row));
    min_widths.push_back(sweep.widths[i].back());
    t.row(cells);
  }
  Partial out;
  out.results["alphas"] = sweep.alphas;
  out.results["coupling_sums"] = sweep.coupling_sums;
  out.results["width_sums"] = sweep.width_sums;
  out.results["widths"] = std::move(widths);
  out.results["min_widths"] = std::move(min_widths);
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "trapping sweep over " << sweep.alphas.size() << " coupling strengths\n"
    << "smallest width: " << sweep.widths.front().back() << " at alpha = "
    << sweep.alphas.front() << " -> " << sweep.widths.back().back()
    << " at alpha = " << sweep.alphas.back() << "\n";
  out.summary = s.str();
  return out;
}

Partial run_smoothness(const TwoLevelModel& m, const Json& je) {
  ParameterPoint at;
  if (je.contains("at")) {
    at.lambda = je["at"]["lambda"].get<double>();
    at.omega = je["at"]["omega"].get<double>();
  } else {
    std::vector<ParameterPoint> eps = known_branch_points(m);
    if (eps.empty()) {
      throw std::invalid_argument("model has no branch point to default to");
    }
    at = eps.front();
    for (const ParameterPoint& p : eps) {
      if (p.omega > at.omega) at = p;
    }
  }
  double dl = 0.0, dw = 1.0;
  if (je.contains("direction")) {
    dl = je["direction"].value("dlambda", 0.0);
    dw = je["direction"].value("domega", 0.0);
  }
  std::vector<double> deltas;
  for (const Json& jd : je["deltas"]) deltas.push_back(jd.get<double>());
  const std::vector<double> energies =
      linear_grid(je["energy_from"].get<double>(), je["energy_to"].get<double>(),
                  je["energy_steps"].get<int>());
  SmoothnessCurve curve = smoothness_curve(m, at, dl, dw, deltas, energies);
  CsvTable t({"step", "delta", "deviation"});
  bool decreasing = true;
  for (size_t i = 0; i < curve.deltas.size(); ++i) {
    t.row({fmt(static_cast<long long>(i + 1)), fmt(curve.deltas[i]),
           fmt(curve.deviations[i])});
    if (curve.deltas[i] == 0.0 && curve.deviations[i] != 0.0) decreasing = false;
    if (i > 0 && curve.deltas[i] < curve.deltas[i - 1] && curve.deltas[i] > 0.0 &&
        !(curve.deviations[i] < curve.deviations[i - 1])) {
      decreasing = false;
    }
  }
  Partial out;
  out.results["at"] = Json{{"lambda", at.lambda}, {"omega", at.omega}};
  out.results["direction"] = Json{{"dlambda", dl}, {"domega", dw}};
  out.results["deltas"] = curve.deltas;
  out.results["deviations"] = curve.deviations;
  out.results["decreasing"] = decreasing;
  out.trace = std::move(t.text);
  std::ostringstream s;
  s << "S-matrix smoothness toward (" << at.lambda << ", " << at.omega << ")\n"
    << "deviation " << curve.deviations.front() << " at delta = "
    << curve.deltas.front() << " down to " << curve.deviations.back()
    << " at delta = " << curve.deltas.back() << "\n";
  out.summary = s.str();
  return out;
}

}  // namespace

ValidationReport validate_config(const Json& config) {
  Checker c;
  if (!config.is_object()) {
    c.violation("", "config must be a JSON object");
    return c.rep;
  }
  std::string model_type;
  if (!config.contains("model") || !config["model"].is_object()) {
    c.violation("/model", "required object is missing");
  } else {
    const Json& jm = config["model"];
    if (!jm.contains("type") || !jm["type"].is_string()) {
      c.violation("/model/type", "required string: \"two_level\" or \"effective\"");
    } else {
      model_type = jm["type"].get<std::string>();
      if (model_type == "two_level") {
        check_two_level(c, jm);
      } else if (model_type == "effective") {
        check_effective(c, jm);
      } else {
        c.violation("/model/type", "must be \"two_level\" or \"effective\"");
        model_type.clear();
      }
    }
  }
  if (!config.contains("experiment") || !config["experiment"].is_object()) {
    c.violation("/experiment", "required object is missing");
  } else {
    const Json& je = config["experiment"];
    if (!je.contains("type") || !je["type"].is_string()) {
      c.violation("/experiment/type",
                  std::string("required string (valid: ") + kValidExperiments + ")");
    } else if (!model_type.empty()) {
      check_experiment(c, je, config["model"], je["type"].get<std::string>(),
                       model_type);
    }
  }
  if (config.contains("output")) {
    if (!config["output"].is_object()) {
      c.violation("/output", "must be an object");
    } else if (config["output"].contains("directory") &&
               !config["output"]["directory"].is_string()) {
      c.violation("/output/directory", "must be a string");
    }
  }
  return c.rep;
}

RunOutputs run_experiment(const Json& config, unsigned long long seed) {
  ValidationReport rep = validate_config(config);
  if (!rep.ok()) {
    std::string msg = "invalid config: " + rep.violations[0].path + ": " +
                      rep.violations[0].message;
    if (rep.violations.size() > 1) {
      msg += " (+" + std::to_string(rep.violations.size() - 1) + " more)";
    }
    throw std::invalid_argument(msg);
  }
  const Json& jm = config["model"];
  const Json& je = config["experiment"];
  const std::string type = je["type"].get<std::string>();

  Partial part;
  if (jm["type"].get<std::string>() == "two_level") {
    TwoLevelModel m = parse_two_level(jm);
    validate(m);
    if (type == "sweep") part = run_sweep(m, je);
    else if (type == "surface") part = run_surface(m, je);
    else if (type == "classify") part = run_classify(m, je);
    else if (type == "find_ep") part = run_find_ep(m, je, seed);
    else if (type == "loop") part = run_loop(m, je);
    else if (type == "period") part = run_period(m, je);
    else part = run_smoothness(m, je);
  } else {
    EffectiveHamiltonianModel m = parse_effective(jm);
    validate(m);
    if (type == "smatrix") part = run_smatrix(m, je);
    else if (type == "poles") part = run_poles(m, je);
    else part = run_trapping(m, je);
  }

  RunOutputs out;
  out.result = Json::object();
  out.result["experiment"] = type;
  out.result["model"] = jm;
  out.result["seed"] = seed;
  out.result["results"] = std::move(part.results);
  out.result["outputs"] =
      Json{{"trace_csv", "trace.csv"}, {"summary", "summary.txt"}};
  out.trace_csv = std::move(part.trace);
  out.summary = std::move(part.summary);
  return out;
}

std::string write_outputs(const RunOutputs& outputs, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto write_file = [&](const char* name, const std::string& content) {
    fs::path path = fs::path(directory) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return path.string();
  };
  write_file("trace.csv", outputs.trace_csv);
  write_file("summary.txt", outputs.summary);
  return write_file("result.json", outputs.result.dump(2) + "\n");
}

}  // namespace nheff
