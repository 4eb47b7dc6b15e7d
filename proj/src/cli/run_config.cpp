#include "fracgeo/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <initializer_list>

namespace fracgeo {

namespace {

const std::vector<std::string> kChartVars{"x1", "x2", "v", "y4"};
const std::vector<std::string> kHVars{"x1", "x2"};

class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  std::string where(const YAML::Node& n) const {
    const YAML::Mark m = n.Mark();
    if (m.is_null()) return file_;
    return file_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
  }

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const { throw ConfigError(where(n) + ": " + msg); }

  void require_map(const YAML::Node& n, const std::string& what) const {
    if (!n.IsMap()) fail(n, what + " must be a mapping");
  }

  /// Rejects keys outside `allowed`.
  void keys(const YAML::Node& n, std::initializer_list<const char*> allowed, const std::string& what) const {
    require_map(n, what);
    for (const auto& kv : n) {
      const std::string k = kv.first.as<std::string>();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
        fail(kv.first, "unknown key '" + k + "' in " + what);
      }
    }
  }

  template <class T>
  T scalar(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "'" + key + "' has an invalid value '" + n.Scalar() + "'");
    }
  }

  template <class T>
  T get(const YAML::Node& parent, const char* key, T fallback) const {
    const YAML::Node n = parent[key];
    return n ? scalar<T>(n, key) : fallback;
  }

  template <class T>
  T need(const YAML::Node& parent, const char* key, const std::string& what) const {
    const YAML::Node n = parent[key];
    if (!n) fail(parent, "missing '" + std::string(key) + "' in " + what);
    return scalar<T>(n, key);
  }

  double positive(const YAML::Node& parent, const char* key, double fallback) const {
    const double v = get<double>(parent, key, fallback);
    if (!(v > 0.0)) fail(parent[key] ? parent[key] : parent, "'" + std::string(key) + "' must be positive");
    return v;
  }

  ExprField expr(const YAML::Node& n, const std::string& key, const std::vector<std::string>& vars,
                 std::optional<double> alpha = std::nullopt) const {
    const std::string text = scalar<std::string>(n, key);
    try {
      return {Expression::parse(text, vars, alpha), where(n)};
    } catch (const ParseError& e) {
      fail(n, "in '" + key + "': " + e.what());
    }
  }

  std::optional<ExprField> opt_expr(const YAML::Node& parent, const char* key, const std::vector<std::string>& vars,
                                    std::optional<double> alpha = std::nullopt) const {
    const YAML::Node n = parent[key];
    if (!n) return std::nullopt;
    return expr(n, key, vars, alpha);
  }

  Grid1D grid(const YAML::Node& n, const std::string& what) const {
    const double lo = need<double>(n, "lower", what);
    const double hi = need<double>(n, "upper", what);
    const auto nodes = need<long>(n, "nodes", what);
    if (nodes < 3) fail(n["nodes"], "'nodes' must be at least 3 in " + what);
    if (!(hi > lo)) fail(n, "'upper' must exceed 'lower' in " + what);
    return Grid1D::uniform(lo, hi, static_cast<std::size_t>(nodes));
  }

  double alpha(const YAML::Node& parent, double fallback) const {
    const double a = get<double>(parent, "alpha", fallback);
    if (!(a > 0.0 && a <= 1.0)) fail(parent["alpha"], "'alpha' must lie in (0, 1]");
    return a;
  }

  AxisConfig axis(const YAML::Node& n, const std::string& name) const {
    const std::string what = "grid." + name;
    keys(n, {"lower", "upper", "nodes", "alpha", "value"}, what);
    AxisConfig a;
    if (n["nodes"]) {
      a.grid = grid(n, what);
      a.alpha = alpha(n, 1.0);
    } else {
      if (n["lower"] || n["upper"] || n["alpha"]) fail(n, what + " without 'nodes' is ignorable and takes only 'value'");
      a.value = get<double>(n, "value", 0.0);
    }
    return a;
  }

  ChartConfig chart(const YAML::Node& root) const {
    const YAML::Node g = root["grid"];
    if (!g) fail(root, "missing 'grid' section");
    keys(g, {"x1", "x2", "v", "y4"}, "grid");
    ChartConfig c;
    const char* names[] = {"x1", "x2", "v", "y4"};
    for (std::size_t k = 0; k < kDim; ++k) {
      if (!g[names[k]]) {
        if (k == kY4) continue;  // ignorable by default
        fail(g, "missing axis '" + std::string(names[k]) + "' in grid");
      }
      c.axes[k] = axis(g[names[k]], names[k]);
    }
    return c;
  }

  BlockMetric metric(const YAML::Node& n) const {
    if (!n) return {};
    if (!n.IsSequence() || n.size() != 3) fail(n, "'metric' must be a list [g11, g12, g22]");
    BlockMetric m{scalar<double>(n[0], "metric"), scalar<double>(n[1], "metric"), scalar<double>(n[2], "metric")};
    if (m.g11 * m.g22 - m.g12 * m.g12 == 0.0) fail(n, "block metric is degenerate");
    return m;
  }

  CurveConfig curve(const YAML::Node& n, const std::string& what, const std::filesystem::path& base) const {
    keys(n, {"type", "radius", "a", "b", "eps", "k", "samples", "center", "path", "period", "closed", "metric"}, what);
    CurveConfig c;
    c.type = get<std::string>(n, "type", "circle");
    static const char* types[] = {"circle", "ellipse", "perturbed_circle", "constant", "csv"};
    if (std::none_of(std::begin(types), std::end(types), [&](const char* t) { return c.type == t; })) {
      fail(n["type"], "unknown curve type '" + c.type + "'");
    }
    c.radius = positive(n, "radius", 1.0);
    c.a = positive(n, "a", 2.0);
    c.b = positive(n, "b", 1.0);
    c.eps = get<double>(n, "eps", 0.1);
    c.k = get<int>(n, "k", 3);
    if (c.type == "perturbed_circle" && c.k < 2) fail(n["k"], "'k' must be at least 2");
    const long samples = get<long>(n, "samples", 128);
    if (samples < 5) fail(n["samples"], "'samples' must be at least 5");
    c.samples = static_cast<std::size_t>(samples);
    if (const YAML::Node ce = n["center"]) {
      if (!ce.IsSequence() || ce.size() != 2) fail(ce, "'center' must be a list [c1, c2]");
      c.center = {scalar<double>(ce[0], "center"), scalar<double>(ce[1], "center")};
    }
    if (c.type == "csv") {
      const std::string p = need<std::string>(n, "path", what);
      c.csv_path = (base / p).string();
      c.period = positive(n, "period", 1.0);
      if (!n["period"]) fail(n, "csv curves need 'period'");
      c.closed = get<bool>(n, "closed", true);
    }
    c.metric = metric(n["metric"]);
    return c;
  }

 private:
  std::string file_;
};

FracopsConfig read_fracops(const Reader& r, const YAML::Node& s) {
  r.keys(s, {"f", "lower", "upper", "nodes", "alpha", "exact", "tolerances"}, "fracops");
  FracopsConfig c;
  c.alpha = r.alpha(s, 0.5);
  c.grid = r.grid(s, "fracops");
  if (!s["f"]) r.fail(s, "missing 'f' in fracops");
  c.f = r.expr(s["f"], "f", {"x"}, c.alpha);
  c.exact = r.opt_expr(s, "exact", {"x"}, c.alpha);
  if (const YAML::Node t = s["tolerances"]) {
    r.keys(t, {"fundamental", "eigen", "exact"}, "fracops.tolerances");
    c.fundamental_tolerance = r.positive(t, "fundamental", c.fundamental_tolerance);
    c.eigen_tolerance = r.positive(t, "eigen", c.eigen_tolerance);
    c.exact_tolerance = r.positive(t, "exact", c.exact_tolerance);
  }
  return c;
}

GeometryConfig read_geometry(const Reader& r, const YAML::Node& root, const YAML::Node& s) {
  r.keys(s, {"metric", "nconnection", "det_floor", "test_functions", "tolerances"}, "geometry");
  GeometryConfig c;
  c.chart = r.chart(root);
  const YAML::Node m = s["metric"];
  if (!m) r.fail(s, "missing 'metric' in geometry");
  r.keys(m, {"g11", "g12", "g22", "h33", "h34", "h44"}, "geometry.metric");
  for (const char* k : {"g11", "g22", "h33", "h44"}) {
    if (!m[k]) r.fail(m, "missing '" + std::string(k) + "' in geometry.metric");
  }
  c.h[0][0] = r.opt_expr(m, "g11", kChartVars);
  c.h[0][1] = c.h[1][0] = r.opt_expr(m, "g12", kChartVars);
  c.h[1][1] = r.opt_expr(m, "g22", kChartVars);
  c.v[0][0] = r.opt_expr(m, "h33", kChartVars);
  c.v[0][1] = c.v[1][0] = r.opt_expr(m, "h34", kChartVars);
  c.v[1][1] = r.opt_expr(m, "h44", kChartVars);
  if (const YAML::Node n = s["nconnection"]) {
    r.keys(n, {"N3_1", "N3_2", "N4_1", "N4_2"}, "geometry.nconnection");
    c.n[0][0] = r.opt_expr(n, "N3_1", kChartVars);
    c.n[0][1] = r.opt_expr(n, "N3_2", kChartVars);
    c.n[1][0] = r.opt_expr(n, "N4_1", kChartVars);
    c.n[1][1] = r.opt_expr(n, "N4_2", kChartVars);
  }
  c.det_floor = r.positive(s, "det_floor", c.det_floor);
  if (const YAML::Node t = s["test_functions"]) {
    if (!t.IsSequence() || t.size() == 0) r.fail(t, "'test_functions' must be a nonempty list");
    for (const auto& e : t) c.test_functions.push_back(r.expr(e, "test_functions", kChartVars));
  } else {
    for (const char* e : {"sin(x1) * v", "x1 * x2 + v^2", "exp(0.3 * x2) * cos(v)", "x1^2 * (1 + y4)",
                          "sin(x1 + x2 + v)"}) {
      c.test_functions.push_back({Expression::parse(e, kChartVars), "default"});
    }
  }
  if (const YAML::Node t = s["tolerances"]) {
    r.keys(t, {"compatibility", "torsion", "commutator"}, "geometry.tolerances");
    c.compatibility_tolerance = r.positive(t, "compatibility", c.compatibility_tolerance);
    c.torsion_tolerance = r.positive(t, "torsion", c.torsion_tolerance);
    c.commutator_tolerance = r.positive(t, "commutator", c.commutator_tolerance);
  }
  return c;
}

GenerateConfig read_generate(const Reader& r, const YAML::Node& root, const YAML::Node& s) {
  r.keys(s,
         {"phi", "upsilon2", "upsilon4", "h4_0", "n1", "n2", "sign_h3", "sign_h4", "formula", "psi", "omega",
          "omega_y4", "tolerances"},
         "generate");
  GenerateConfig c;
  c.chart = r.chart(root);
  for (std::size_t k : {kX1, kX2, kV}) {
    if (!c.chart.axes[k].grid) r.fail(root["grid"], "generate needs sampled x1, x2 and v axes");
  }
  if (c.chart.axes[kY4].grid) r.fail(root["grid"]["y4"], "generate keeps y4 ignorable; sample it through 'omega_y4'");
  const std::vector<std::string> xv{"x1", "x2", "v"};
  if (!s["phi"]) r.fail(s, "missing 'phi' in generate");
  c.phi = r.expr(s["phi"], "phi", xv);
  if (c.phi->expr.is_constant()) r.fail(s["phi"], "phi must be nonconstant");
  c.upsilon2 = r.opt_expr(s, "upsilon2", xv);
  if (!c.upsilon2) r.fail(s, "missing 'upsilon2' in generate");
  c.upsilon4 = r.opt_expr(s, "upsilon4", kHVars);
  if (!c.upsilon4) r.fail(s, "missing 'upsilon4' in generate");
  c.h4_0 = r.opt_expr(s, "h4_0", kHVars);
  for (const char* key : {"n1", "n2"}) {
    const YAML::Node n = s[key];
    if (!n) continue;
    if (!n.IsSequence() || n.size() != 2) r.fail(n, "'" + std::string(key) + "' must be a list of two expressions");
    auto& dst = std::string(key) == "n1" ? c.n1 : c.n2;
    for (std::size_t i = 0; i < 2; ++i) dst[i] = r.expr(n[i], key, kHVars);
  }
  c.sign_h3 = r.get<int>(s, "sign_h3", 1);
  c.sign_h4 = r.get<int>(s, "sign_h4", 1);
  if (std::abs(c.sign_h3) != 1) r.fail(s["sign_h3"], "'sign_h3' must be 1 or -1");
  if (std::abs(c.sign_h4) != 1) r.fail(s["sign_h4"], "'sign_h4' must be 1 or -1");
  const std::string formula = r.get<std::string>(s, "formula", "field_consistent");
  if (formula == "field_consistent") {
    c.formula = HFormula::field_consistent;
  } else if (formula == "as_printed") {
    c.formula = HFormula::as_printed;
  } else {
    r.fail(s["formula"], "unknown formula '" + formula + "' (field_consistent | as_printed)");
  }
  if (const YAML::Node p = s["psi"]) {
    r.keys(p, {"equation", "rhs_factor", "boundary", "tolerance", "max_iterations", "relaxation"}, "generate.psi");
    const std::string eq = r.get<std::string>(p, "equation", "linear");
    if (eq == "linear") {
      c.psi.equation = PsiEquation::linear;
    } else if (eq == "conformal") {
      c.psi.equation = PsiEquation::conformal;
    } else {
      r.fail(p["equation"], "unknown psi equation '" + eq + "' (linear | conformal)");
    }
    c.psi.rhs_factor = r.get<double>(p, "rhs_factor", c.psi.rhs_factor);
    c.psi_boundary = r.opt_expr(p, "boundary", kHVars);
    c.psi.tolerance = r.positive(p, "tolerance", c.psi.tolerance);
    c.psi.max_iterations = r.get<int>(p, "max_iterations", c.psi.max_iterations);
    if (c.psi.max_iterations < 1) r.fail(p["max_iterations"], "'max_iterations' must be positive");
    c.psi.relaxation = r.get<double>(p, "relaxation", 0.0);
    if (c.psi.relaxation < 0.0 || c.psi.relaxation >= 2.0) r.fail(p["relaxation"], "'relaxation' must lie in [0, 2)");
  }
  c.omega = r.opt_expr(s, "omega", kChartVars);
  if (const YAML::Node y = s["omega_y4"]) {
    c.omega_y4 = r.axis(y, "omega_y4");
    if (!c.omega_y4->grid) r.fail(y, "'omega_y4' must be sampled");
  }
  if (c.omega && !c.omega_y4) r.fail(s["omega"], "'omega' needs an 'omega_y4' axis");
  if (const YAML::Node t = s["tolerances"]) {
    r.keys(t, {"lc", "field", "omega"}, "generate.tolerances");
    c.lc_tolerance = r.positive(t, "lc", c.lc_tolerance);
    c.field_tolerance = r.positive(t, "field", c.field_tolerance);
    c.omega_tolerance = r.positive(t, "omega", c.omega_tolerance);
  }
  return c;
}

SolitonConfig read_soliton(const Reader& r, const YAML::Node& s, const std::filesystem::path& base) {
  r.keys(s,
         {"flow", "curve", "v_curve", "tau_end", "dt", "step_constant", "enforce_step_limit", "mode", "blowup_drift",
          "observe_every", "flow0", "y_direction", "minus1_expected", "tolerances"},
         "soliton");
  SolitonConfig c;
  c.flow = r.get<int>(s, "flow", 1);
  if (c.flow < -1 || c.flow > 1) r.fail(s["flow"], "'flow' must be 0, 1 or -1");
  if (!s["curve"]) r.fail(s, "missing 'curve' in soliton");
  c.h = r.curve(s["curve"], "soliton.curve", base);
  if (const YAML::Node v = s["v_curve"]) c.v = r.curve(v, "soliton.v_curve", base);
  c.tau_end = r.get<double>(s, "tau_end", 1.0);
  if (c.tau_end < 0.0) r.fail(s["tau_end"], "'tau_end' must be nonnegative");
  c.flow1.dt = r.positive(s, "dt", 1e-5);
  c.flow1.step_constant = r.positive(s, "step_constant", c.flow1.step_constant);
  c.flow1.enforce_step_limit = r.get<bool>(s, "enforce_step_limit", true);
  c.flow1.blowup_drift = r.positive(s, "blowup_drift", c.flow1.blowup_drift);
  if (const YAML::Node m = s["mode"]) {
    r.keys(m, {"alpha", "window"}, "soliton.mode");
    c.flow1.mode.alpha = r.alpha(m, 1.0);
    const long w = r.get<long>(m, "window", 16);
    if (w < 2) r.fail(m["window"], "'window' must be at least 2");
    c.flow1.mode.window = static_cast<std::size_t>(w);
  }
  const long every = r.get<long>(s, "observe_every", 0);
  if (every < 0) r.fail(s["observe_every"], "'observe_every' must be nonnegative");
  c.observe_every = static_cast<std::size_t>(every);
  if (const YAML::Node f = s["flow0"]) {
    r.keys(f, {"method", "dt", "cfl"}, "soliton.flow0");
    const std::string m = r.get<std::string>(f, "method", "spectral");
    if (m == "spectral") {
      c.flow0_method = Flow0Method::spectral;
    } else if (m == "upwind") {
      c.flow0_method = Flow0Method::upwind;
    } else {
      r.fail(f["method"], "unknown 0-flow method '" + m + "' (spectral | upwind)");
    }
    c.flow0_dt = r.get<double>(f, "dt", 0.0);
    c.flow0_cfl = r.positive(f, "cfl", 1.0);
  }
  c.y_direction = r.get<std::string>(s, "y_direction", "tangent");
  if (c.y_direction != "tangent" && c.y_direction != "zero") {
    r.fail(s["y_direction"], "'y_direction' must be tangent or zero");
  }
  if (s["minus1_expected"]) c.minus1_expected = r.get<double>(s, "minus1_expected", 0.0);
  if (const YAML::Node t = s["tolerances"]) {
    r.keys(t, {"drift", "radius", "return", "minus1"}, "soliton.tolerances");
    c.drift_tolerance = r.positive(t, "drift", c.drift_tolerance);
    c.radius_tolerance = r.positive(t, "radius", c.radius_tolerance);
    c.return_tolerance = r.positive(t, "return", c.return_tolerance);
    c.minus1_tolerance = r.positive(t, "minus1", c.minus1_tolerance);
  }
  return c;
}

}  // namespace

Chart ChartConfig::chart() const {
  return Chart({axes[0].spec(), axes[1].spec(), axes[2].spec(), axes[3].spec()});
}

RunConfig load_config(const std::string& path, const std::string& command) {
  const std::filesystem::path p(path);
  Reader r(p.filename().string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(path + ": cannot open config file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(p.filename().string() + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root || !root.IsMap()) throw ConfigError(p.filename().string() + ": config must be a mapping");
  r.keys(root, {"command", "refine_levels", "grid", "fracops", "geometry", "generate", "soliton"}, "config");

  RunConfig c;
  c.command = command;
  c.name = p.filename().string();
  if (root["command"]) {
    const std::string declared = r.scalar<std::string>(root["command"], "command");
    if (declared != command) r.fail(root["command"], "config is for '" + declared + "', not '" + command + "'");
  }
  c.refine_levels = r.get<int>(root, "refine_levels", 3);
  if (c.refine_levels < 2) r.fail(root["refine_levels"], "'refine_levels' must be at least 2");

  const YAML::Node section = root[command];
  if (!section) r.fail(root, "missing '" + command + "' section");
  try {
    if (command == "fracops") {
      c.fracops = read_fracops(r, section);
    } else if (command == "geometry") {
      c.geometry = read_geometry(r, root, section);
    } else if (command == "generate") {
      c.generate = read_generate(r, root, section);
    } else if (command == "soliton") {
      c.soliton = read_soliton(r, section, p.parent_path());
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
  } catch (const DomainError& e) {
    throw ConfigError(c.name + ": " + e.what());
  }
  return c;
}

}  // namespace fracgeo
