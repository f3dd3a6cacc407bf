#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mdkit/averaging.hpp"
#include "mdkit/errors.hpp"
#include "mdkit/floquet_chart.hpp"
#include "mdkit/orbit.hpp"
#include "mdkit/two_timing.hpp"

namespace mdkit::cli {

using nlohmann::json;

namespace {

// --- config parsing ----------------------------------------------------------

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void read_axis(const json& obj, const char* key, floquet::Axis& axis, const std::string& where) {
  if (!obj.contains(key)) return;
  const std::string w = where + "." + key;
  const json& a = obj.at(key);
  check_keys(a, {"min", "max", "count"}, w);
  read(a, "min", axis.min, w);
  read(a, "max", axis.max, w);
  read(a, "count", axis.count, w);
}

State read_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(where + ": expected [number, number]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

json axis_json(const floquet::Axis& a) { return {{"min", a.min}, {"max", a.max}, {"count", a.count}}; }

json pair_json(State s) { return json::array({s.x, s.y}); }

json mat_json(const Mat2& m) { return json::array({json::array({m.m11, m.m12}), json::array({m.m21, m.m22})}); }

// Non-finite values are not representable in JSON.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// --- output -------------------------------------------------------------------

struct OutputFile {
  std::string name;
  std::string content;
  bool primary = false;
};

struct CommandResult {
  std::vector<OutputFile> files;
  std::vector<std::string> warnings;
  int code = kOk;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) os_ << ',';
      os_ << h;
      first = false;
    }
    os_ << '\n';
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }

  [[nodiscard]] std::string str() const { return os_.str(); }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

  std::ostringstream os_;
};

void require_resonant(const ModelParams& p, const char* command) {
  if (!p.is_resonant()) {
    throw InvalidArgument(std::string(command) + " requires the resonant case omega_n == omega_p");
  }
}

const char* kSignNote =
    "Candidate zeros with positive and negated real cube roots are both scored by |f1|; "
    "the reported point is the one with the smaller residual.";

// --- commands -------------------------------------------------------------------

CommandResult cmd_predict(const RunConfig& cfg, bool seed_check) {
  const ModelParams& p = cfg.model;
  p.validate();
  require_resonant(p, "predict");
  const double w = p.omega_n;
  const double a1 = cfg.forcing.a_n(1);
  const double b1 = cfg.forcing.b_n(1);
  const averaging::AveragingPrediction pred = averaging::predict(w, p.alpha, a1, b1, cfg.predict.residual_tol);
  const two_timing::ResonantEquilibrium eq = two_timing::resonant_equilibrium(w, p.alpha, a1, b1);

  json j;
  j["command"] = "predict";
  j["x0_star"] = pred.x0_star;
  j["y0_star"] = pred.y0_star;
  j["det_jacobian"] = pred.det_jacobian;
  j["residual_norm"] = pred.residual_norm;
  j["verified"] = pred.verified;
  j["nondegenerate"] = pred.nondegenerate;
  j["sign_convention"] = {{"chosen", averaging::to_string(pred.signs.chosen)},
                          {"residual_positive", pred.signs.residual_positive},
                          {"residual_negative", pred.signs.residual_negative},
                          {"note", kSignNote}};
  j["slow_flow_equilibrium"] = {{"amplitude", eq.amplitude}, {"psi", eq.psi}};
  if (seed_check) {
    const State pos = pred.signs.chosen == averaging::SignConvention::positive ? pred.signs.point
                                                                                : -1.0 * pred.signs.point;
    j["seed_check"] = {
        {"positive", {{"x0", pos.x}, {"y0", pos.y}, {"residual", pred.signs.residual_positive}}},
        {"negative", {{"x0", -pos.x}, {"y0", -pos.y}, {"residual", pred.signs.residual_negative}}},
    };
  }
  j["config"] = to_json(cfg);

  CommandResult r;
  r.files.push_back({"predict.json", dump(j), true});
  if (seed_check) {
    std::ostringstream w_msg;
    w_msg << "seed-check: residual(+) = " << format_double(pred.signs.residual_positive)
          << ", residual(-) = " << format_double(pred.signs.residual_negative);
    r.warnings.push_back(w_msg.str());
  }
  return r;
}

std::vector<double> axis_values(const floquet::Axis& a, const char* name) {
  a.validate(name);
  std::vector<double> v(static_cast<std::size_t>(a.count));
  for (int i = 0; i < a.count; ++i) v[static_cast<std::size_t>(i)] = a.at(i);
  return v;
}

// Grid axes may collapse to a single point for one-cell evaluations.
std::vector<double> grid_values(const floquet::Axis& a, const char* name) {
  if (a.count == 1) {
    if (!std::isfinite(a.min)) throw InvalidArgument(std::string(name) + " axis bounds must be finite");
    return {a.min};
  }
  return axis_values(a, name);
}

CommandResult cmd_bifurcation(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  p.validate();
  require_resonant(p, "bifurcation");
  const std::vector<double> xs = grid_values(cfg.bifurcation.x0, "x0");
  const std::vector<double> ys = grid_values(cfg.bifurcation.y0, "y0");
  const auto rows = averaging::bifurcation_grid(p, cfg.forcing, xs, ys, cfg.bifurcation.quad_points);

  Csv csv{"x0", "y0", "f11", "f21", "f11_quad", "f21_quad", "abs_diff"};
  double worst = 0.0;
  for (const auto& row : rows) {
    csv.row(row.x0, row.y0, row.closed.f11, row.closed.f21, row.quadrature.f11, row.quadrature.f21, row.abs_diff());
    worst = std::max(worst, row.abs_diff());
  }
  json meta{{"command", "bifurcation"}, {"rows", rows.size()}, {"max_abs_diff", worst}, {"config", to_json(cfg)}};
  CommandResult r;
  r.files.push_back({"bifurcation.csv", csv.str(), true});
  r.files.push_back({"bifurcation.meta.json", dump(meta), false});
  return r;
}

CommandResult cmd_shoot(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  p.validate();
  require_resonant(p, "shoot");
  if (p.epsilon == 0.0) throw InvalidArgument("shoot requires epsilon != 0");
  const IntegratorOptions integ = integrator_for(cfg, "shoot");
  const double w = p.omega_n;
  const double a1 = cfg.forcing.a_n(1);
  const double b1 = cfg.forcing.b_n(1);

  std::optional<State> z_pred;
  std::optional<two_timing::ResonantEquilibrium> eq;
  if (cfg.shoot.initial && (p.alpha == 0.0 || !cfg.forcing.has_first_harmonic())) {
    // No prediction available; shoot from the given point only.
  } else {
    z_pred = averaging::predicted_zero(w, p.alpha, a1, b1);
    eq = two_timing::resonant_equilibrium(w, p.alpha, a1, b1);
  }
  const State z_init = cfg.shoot.initial ? *cfg.shoot.initial : *z_pred;

  orbit::ShootOptions so;
  so.tol = cfg.shoot.tol;
  so.max_iter = cfg.shoot.max_iter;
  so.integrator = integ;

  json j;
  j["command"] = "shoot";
  j["initial"] = pair_json(z_init);
  CommandResult r;
  try {
    const orbit::PeriodicOrbit o = orbit::shoot_refine(p, cfg.forcing, z_init, so);
    j["status"] = "converged";
    j["z_star"] = pair_json(o.z_star);
    j["period"] = o.period;
    j["residual"] = o.residual;
    j["iterations"] = o.iterations;
    j["monodromy"] = mat_json(o.monodromy);
    j["det_monodromy"] = o.monodromy.det();
    j["multipliers"] = json::array({{{"re", o.multipliers.first.real()}, {"im", o.multipliers.first.imag()}},
                                    {{"re", o.multipliers.second.real()}, {"im", o.multipliers.second.imag()}}});
    j["reclose_periods"] = cfg.shoot.reclose_periods;
    j["reclosure_error"] = orbit::reclosure_error(o, p, cfg.forcing, cfg.shoot.reclose_periods, integ);
    if (z_pred) {
      j["z_pred"] = pair_json(*z_pred);
      j["distance_to_prediction"] = (o.z_star - *z_pred).norm();
      j["two_timing_max_deviation"] = orbit::compare_two_timing(o, p, cfg.forcing, *eq, cfg.shoot.samples, integ);
    }
  } catch (const NoConvergence& e) {
    j["status"] = "no_convergence";
    j["message"] = e.what();
    j["best_iterate"] = pair_json(e.best_iterate());
    j["best_residual"] = num(e.best_residual());
    j["iterations"] = e.iterations();
    r.code = kNonConvergence;
    r.warnings.push_back(e.what());
  }
  j["config"] = to_json(cfg);
  r.files.push_back({"shoot.json", dump(j), true});
  return r;
}

CommandResult cmd_converge(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  p.validate();
  require_resonant(p, "converge");
  orbit::ShootOptions so;
  so.tol = cfg.shoot.tol;
  so.max_iter = cfg.shoot.max_iter;
  so.integrator = integrator_for(cfg, "converge");
  const orbit::ConvergenceStudy study = orbit::convergence_study(p, cfg.forcing, cfg.converge.eps_list, so);

  CommandResult r;
  Csv csv{"epsilon", "error", "slope"};
  json rows = json::array();
  for (const auto& row : study.rows) {
    csv.row(row.epsilon, row.error, row.slope);
    rows.push_back({{"epsilon", row.epsilon},
                    {"ok", row.ok},
                    {"error", num(row.error)},
                    {"z_star", pair_json(row.z_star)},
                    {"residual", num(row.residual)},
                    {"failure", row.failure}});
    if (!row.ok) r.warnings.push_back("epsilon " + format_double(row.epsilon) + ": " + row.failure);
  }
  if (!study.slope) r.warnings.push_back("slope undefined: fewer than two successful epsilon values");
  json meta{{"command", "converge"},
            {"z_pred", pair_json(study.z_pred)},
            {"slope", study.slope ? json(*study.slope) : json(nullptr)},
            {"rows", rows},
            {"config", to_json(cfg)}};
  r.files.push_back({"converge.csv", csv.str(), true});
  r.files.push_back({"converge.meta.json", dump(meta), false});
  return r;
}

const char* kChartConvention =
    "axes: delta = omega_n^2 (fast index), epsilon (row index); linear Mathieu equation "
    "x'' + (delta + epsilon cos(omega_p t)) x = 0, monodromy over T = 2 pi / omega_p";

CommandResult cmd_chart(const RunConfig& cfg) {
  floquet::ChartSpec spec;
  spec.delta = cfg.chart.delta;
  spec.epsilon = cfg.chart.epsilon;
  spec.omega_p = cfg.model.omega_p;
  spec.margin = cfg.chart.margin;
  spec.integrator = integrator_for(cfg, "chart");
  const floquet::ChartGrid grid = floquet::sweep_chart(spec);

  Csv csv{"delta", "epsilon", "trace", "verdict"};
  std::size_t stable = 0, unstable = 0, boundary = 0, failed = 0, det_flagged = 0;
  double worst_det = 0.0;
  for (const auto& c : grid.cells) {
    csv.row(c.delta, c.epsilon, c.trace, floquet::to_string(c.verdict));
    switch (c.verdict) {
      case floquet::Verdict::stable: ++stable; break;
      case floquet::Verdict::unstable: ++unstable; break;
      case floquet::Verdict::boundary: ++boundary; break;
      case floquet::Verdict::failed: ++failed; break;
    }
    if (c.verdict != floquet::Verdict::failed) {
      worst_det = std::max(worst_det, std::abs(c.det - 1.0));
      if (!c.det_ok) ++det_flagged;
    }
  }
  json meta{{"command", "chart"},
            {"convention", kChartConvention},
            {"omega_p", spec.omega_p},
            {"cells", grid.cells.size()},
            {"counts", {{"stable", stable}, {"unstable", unstable}, {"boundary", boundary}, {"failed", failed}}},
            {"max_abs_det_minus_one", worst_det},
            {"det_quality_flagged", det_flagged},
            {"config", to_json(cfg)}};
  CommandResult r;
  if (failed > 0) r.warnings.push_back(std::to_string(failed) + " chart cells failed to integrate");
  r.files.push_back({"chart.csv", csv.str(), true});
  r.files.push_back({"chart.meta.json", dump(meta), false});
  return r;
}

CommandResult cmd_transition(const RunConfig& cfg) {
  const double wp = cfg.model.omega_p;
  const std::vector<double> eps = grid_values(cfg.transition.epsilon, "epsilon");
  Csv curves{"epsilon", "delta_minus", "delta_plus"};
  for (double e : eps) {
    const auto c = two_timing::transition_curves(wp, e);
    curves.row(e, c.delta_minus, c.delta_plus);
  }
  CommandResult r;
  r.files.push_back({"transition.csv", curves.str(), true});
  if (cfg.transition.bisect) {
    floquet::BisectOptions bo;
    bo.tol = cfg.transition.bisect_tol;
    bo.integrator = integrator_for(cfg, "transition");
    Csv numeric{"epsilon", "delta_minus", "delta_plus"};
    for (double e : eps) {
      const auto b = floquet::first_tongue_boundaries(e, wp, bo);
      numeric.row(e, b.delta_minus, b.delta_plus);
    }
    r.files.push_back({"transition_bisected.csv", numeric.str(), false});
  }
  json meta{{"command", "transition"}, {"convention", kChartConvention}, {"config", to_json(cfg)}};
  r.files.push_back({"transition.meta.json", dump(meta), false});
  return r;
}

json report_json(const two_timing::EquilibriumReport& rep) {
  json entries = json::array();
  for (const auto& e : rep.equilibria) {
    entries.push_back({{"name", e.name},
                       {"M", e.point.m},
                       {"N", e.point.n},
                       {"det_j", e.det_j},
                       {"det_j_reference", e.det_j_reference},
                       {"trace_j", e.trace_j},
                       {"classification", two_timing::to_string(e.classification)}});
  }
  return {{"omega_1", rep.params.omega_1},
          {"regime", rep.regime},
          {"degenerate_boundary", rep.degenerate_boundary},
          {"mirrored_convention", rep.mirrored_convention},
          {"count", rep.equilibria.size()},
          {"equilibria", entries}};
}

CommandResult cmd_slowflow(const RunConfig& cfg) {
  two_timing::TongueParams tp;
  tp.omega_p = cfg.model.omega_p;
  tp.omega_1 = cfg.slowflow.omega_1;
  tp.alpha = cfg.model.alpha;
  tp.epsilon = cfg.model.epsilon;
  const two_timing::EquilibriumReport rep = two_timing::tongue_equilibria(tp);

  const std::vector<double> sweep = axis_values(cfg.slowflow.sweep, "sweep");
  const auto events = two_timing::bifurcation_scan(tp, sweep);
  json ev = json::array();
  for (const auto& e : events) {
    ev.push_back({{"omega_1", e.omega_1},
                  {"kind", two_timing::to_string(e.kind)},
                  {"count_before", e.count_before},
                  {"count_after", e.count_after},
                  {"origin_before", two_timing::to_string(e.origin_before)},
                  {"origin_after", two_timing::to_string(e.origin_after)},
                  {"born", two_timing::to_string(e.born)}});
  }
  json j{{"command", "slowflow"}, {"census", report_json(rep)}, {"events", ev}, {"config", to_json(cfg)}};

  CommandResult r;
  r.files.push_back({"slowflow.json", dump(j), true});
  if (cfg.slowflow.trajectory) {
    const TrajectorySection& ts = *cfg.slowflow.trajectory;
    IntegratorOptions opt = integrator_for(cfg, "slowflow");
    opt.period = kTwoPi / tp.omega_p;
    const auto samples = two_timing::sample_cartesian(tp, {ts.m0, ts.n0}, ts.t_end, ts.samples, opt);
    Csv csv{"t", "M", "N"};
    for (const auto& s : samples) csv.row(s.t, s.point.m, s.point.n);
    r.files.push_back({"slowflow_trajectory.csv", csv.str(), false});
  }
  if (rep.degenerate_boundary) r.warnings.push_back("omega_1 on a transition boundary: census degenerate");
  return r;
}

}  // namespace

// --- public helpers ---------------------------------------------------------------

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  check_keys(doc, {"model", "forcing", "integrator", "predict", "bifurcation", "shoot", "converge", "chart",
                   "transition", "slowflow"},
             "config");
  if (doc.contains("model")) {
    const json& m = doc.at("model");
    check_keys(m, {"omega_n", "omega_p", "epsilon", "alpha"}, "model");
    read(m, "omega_n", cfg.model.omega_n, "model");
    read(m, "omega_p", cfg.model.omega_p, "model");
    read(m, "epsilon", cfg.model.epsilon, "model");
    read(m, "alpha", cfg.model.alpha, "model");
  }
  if (doc.contains("forcing")) {
    const json& f = doc.at("forcing");
    check_keys(f, {"a", "b"}, "forcing");
    cfg.forcing = {};
    read(f, "a", cfg.forcing.a, "forcing");
    read(f, "b", cfg.forcing.b, "forcing");
  }
  if (doc.contains("integrator")) {
    const json& s = doc.at("integrator");
    check_keys(s, {"abs_tol", "rel_tol", "steps_per_period", "fixed_step"}, "integrator");
    read(s, "abs_tol", cfg.integrator.abs_tol, "integrator");
    read(s, "rel_tol", cfg.integrator.rel_tol, "integrator");
    read(s, "steps_per_period", cfg.integrator.steps_per_period, "integrator");
    if (s.contains("fixed_step") && !s.at("fixed_step").is_null()) {
      bool v = false;
      read(s, "fixed_step", v, "integrator");
      cfg.integrator.fixed_step = v;
    }
  }
  if (doc.contains("predict")) {
    const json& s = doc.at("predict");
    check_keys(s, {"residual_tol"}, "predict");
    read(s, "residual_tol", cfg.predict.residual_tol, "predict");
  }
  if (doc.contains("bifurcation")) {
    const json& s = doc.at("bifurcation");
    check_keys(s, {"x0", "y0", "quad_points"}, "bifurcation");
    read_axis(s, "x0", cfg.bifurcation.x0, "bifurcation");
    read_axis(s, "y0", cfg.bifurcation.y0, "bifurcation");
    read(s, "quad_points", cfg.bifurcation.quad_points, "bifurcation");
  }
  if (doc.contains("shoot")) {
    const json& s = doc.at("shoot");
    check_keys(s, {"tol", "max_iter", "initial", "reclose_periods", "samples"}, "shoot");
    read(s, "tol", cfg.shoot.tol, "shoot");
    read(s, "max_iter", cfg.shoot.max_iter, "shoot");
    if (s.contains("initial") && !s.at("initial").is_null()) cfg.shoot.initial = read_pair(s.at("initial"), "shoot.initial");
    read(s, "reclose_periods", cfg.shoot.reclose_periods, "shoot");
    read(s, "samples", cfg.shoot.samples, "shoot");
  }
  if (doc.contains("converge")) {
    const json& s = doc.at("converge");
    check_keys(s, {"eps_list"}, "converge");
    read(s, "eps_list", cfg.converge.eps_list, "converge");
  }
  if (doc.contains("chart")) {
    const json& s = doc.at("chart");
    check_keys(s, {"delta", "epsilon", "margin"}, "chart");
    read_axis(s, "delta", cfg.chart.delta, "chart");
    read_axis(s, "epsilon", cfg.chart.epsilon, "chart");
    read(s, "margin", cfg.chart.margin, "chart");
  }
  if (doc.contains("transition")) {
    const json& s = doc.at("transition");
    check_keys(s, {"epsilon", "bisect", "bisect_tol"}, "transition");
    read_axis(s, "epsilon", cfg.transition.epsilon, "transition");
    read(s, "bisect", cfg.transition.bisect, "transition");
    read(s, "bisect_tol", cfg.transition.bisect_tol, "transition");
  }
  if (doc.contains("slowflow")) {
    const json& s = doc.at("slowflow");
    check_keys(s, {"omega_1", "sweep", "trajectory"}, "slowflow");
    read(s, "omega_1", cfg.slowflow.omega_1, "slowflow");
    read_axis(s, "sweep", cfg.slowflow.sweep, "slowflow");
    if (s.contains("trajectory") && !s.at("trajectory").is_null()) {
      const json& t = s.at("trajectory");
      check_keys(t, {"initial", "t_end", "samples"}, "slowflow.trajectory");
      TrajectorySection ts;
      if (t.contains("initial")) {
        const State c = read_pair(t.at("initial"), "slowflow.trajectory.initial");
        ts.m0 = c.x;
        ts.n0 = c.y;
      }
      read(t, "t_end", ts.t_end, "slowflow.trajectory");
      read(t, "samples", ts.samples, "slowflow.trajectory");
      cfg.slowflow.trajectory = ts;
    }
  }

  // Scalar preconditions that no module checks before doing work.
  if (!(cfg.integrator.abs_tol > 0.0) || !(cfg.integrator.rel_tol > 0.0)) {
    throw ConfigError("integrator tolerances must be > 0");
  }
  if (cfg.integrator.steps_per_period < 1) throw ConfigError("integrator.steps_per_period must be >= 1");
  if (!(cfg.shoot.tol > 0.0) || cfg.shoot.max_iter < 1) throw ConfigError("shoot.tol > 0 and shoot.max_iter >= 1 required");
  if (cfg.shoot.reclose_periods < 1 || cfg.shoot.samples < 2) {
    throw ConfigError("shoot.reclose_periods >= 1 and shoot.samples >= 2 required");
  }
  if (!(cfg.chart.margin >= 0.0)) throw ConfigError("chart.margin must be >= 0");
  if (!(cfg.transition.bisect_tol > 0.0)) throw ConfigError("transition.bisect_tol must be > 0");
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json traj = nullptr;
  if (cfg.slowflow.trajectory) {
    const auto& t = *cfg.slowflow.trajectory;
    traj = {{"initial", json::array({t.m0, t.n0})}, {"t_end", t.t_end}, {"samples", t.samples}};
  }
  return {
      {"model",
       {{"omega_n", cfg.model.omega_n},
        {"omega_p", cfg.model.omega_p},
        {"epsilon", cfg.model.epsilon},
        {"alpha", cfg.model.alpha}}},
      {"forcing", {{"a", cfg.forcing.a}, {"b", cfg.forcing.b}}},
      {"integrator",
       {{"abs_tol", cfg.integrator.abs_tol},
        {"rel_tol", cfg.integrator.rel_tol},
        {"steps_per_period", cfg.integrator.steps_per_period},
        {"fixed_step", cfg.integrator.fixed_step ? json(*cfg.integrator.fixed_step) : json(nullptr)}}},
      {"predict", {{"residual_tol", cfg.predict.residual_tol}}},
      {"bifurcation",
       {{"x0", axis_json(cfg.bifurcation.x0)},
        {"y0", axis_json(cfg.bifurcation.y0)},
        {"quad_points", cfg.bifurcation.quad_points}}},
      {"shoot",
       {{"tol", cfg.shoot.tol},
        {"max_iter", cfg.shoot.max_iter},
        {"initial", cfg.shoot.initial ? pair_json(*cfg.shoot.initial) : json(nullptr)},
        {"reclose_periods", cfg.shoot.reclose_periods},
        {"samples", cfg.shoot.samples}}},
      {"converge", {{"eps_list", cfg.converge.eps_list}}},
      {"chart",
       {{"delta", axis_json(cfg.chart.delta)},
        {"epsilon", axis_json(cfg.chart.epsilon)},
        {"margin", cfg.chart.margin}}},
      {"transition",
       {{"epsilon", axis_json(cfg.transition.epsilon)},
        {"bisect", cfg.transition.bisect},
        {"bisect_tol", cfg.transition.bisect_tol}}},
      {"slowflow",
       {{"omega_1", cfg.slowflow.omega_1}, {"sweep", axis_json(cfg.slowflow.sweep)}, {"trajectory", traj}}},
  };
}

IntegratorOptions integrator_for(const RunConfig& cfg, const std::string& command) {
  const bool fixed = cfg.integrator.fixed_step.value_or(command == "chart" || command == "transition");
  IntegratorOptions o;
  o.method = fixed ? StepMethod::rk4_fixed : StepMethod::dormand_prince;
  o.abs_tol = cfg.integrator.abs_tol;
  o.rel_tol = cfg.integrator.rel_tol;
  o.steps_per_period = cfg.integrator.steps_per_period;
  o.period = cfg.model.omega_p > 0.0 ? kTwoPi / cfg.model.omega_p : kTwoPi;
  return o;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forced Mathieu-Duffing periodic-solution and stability toolkit", "mdkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  bool fixed_step = false;
  bool quiet = false;
  bool seed_check = false;
  app.add_option("--config", config_path, "JSON configuration document");
  app.add_option("--out", out_dir, "output directory (default: primary output to stdout)");
  app.add_flag("--fixed-step", fixed_step, "force fixed-step RK4 integration");
  app.add_flag("--quiet", quiet, "suppress warnings");

  CLI::App* predict = app.add_subcommand("predict", "averaging prediction of the T-periodic orbit");
  predict->add_flag("--seed-check", seed_check, "report residuals of both cube-root sign conventions");
  app.add_subcommand("bifurcation", "bifurcation function over an (x0, y0) grid, closed form vs quadrature");
  app.add_subcommand("shoot", "refine the prediction into a periodic orbit by shooting");
  app.add_subcommand("converge", "orbit-to-prediction distance over a list of epsilon");
  app.add_subcommand("chart", "Ince-Strutt stability chart of the linear Mathieu equation");
  app.add_subcommand("transition", "first-tongue transition curves (analytic, optionally bisected)");
  app.add_subcommand("slowflow", "first-tongue slow-flow equilibria and pitchfork events");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  auto warn = [&](const std::string& msg) {
    if (!quiet) err << "warning: " << msg << "\n";
  };

  try {
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    RunConfig cfg = parse_config(doc);
    if (fixed_step) cfg.integrator.fixed_step = true;
    if (!cfg.integrator.fixed_step) cfg.integrator.fixed_step = command == "chart" || command == "transition";

    CommandResult result;
    if (command == "predict") result = cmd_predict(cfg, seed_check);
    else if (command == "bifurcation") result = cmd_bifurcation(cfg);
    else if (command == "shoot") result = cmd_shoot(cfg);
    else if (command == "converge") result = cmd_converge(cfg);
    else if (command == "chart") result = cmd_chart(cfg);
    else if (command == "transition") result = cmd_transition(cfg);
    else result = cmd_slowflow(cfg);

    for (const auto& w : result.warnings) warn(w);
    if (out_dir.empty()) {
      for (const auto& f : result.files) {
        if (f.primary) out << f.content;
      }
    } else {
      std::filesystem::create_directories(out_dir);
      for (const auto& f : result.files) {
        const auto path = std::filesystem::path(out_dir) / f.name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw ConfigError("cannot write '" + path.string() + "'");
        os << f.content;
      }
    }
    return result.code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const HypothesisViolation& e) {
    err << "hypothesis violated: " << e.what() << "\n";
    return kHypothesisViolation;
  } catch (const InvalidArgument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kConfigError;
  } catch (const NoConvergence& e) {
    err << "no convergence: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const IntegrationError& e) {
    err << "integration failed: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace mdkit::cli
