#include "fracgeo/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fracgeo/errors.hpp"
#include "fracgeo/fractional_ops.hpp"
#include "json.hpp"

namespace fracgeo {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Residuals at or below this count as converged when judging refinement.
constexpr double kRoundoffFloor = 1e-12;

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::exception& cause)
      : std::runtime_error(cause.what()), stage_(std::move(stage)) {
    if (const auto* g = dynamic_cast<const GenerationError*>(&cause)) {
      node_ = g->node();
    } else if (const auto* s = dynamic_cast<const SingularMetricError*>(&cause)) {
      node_ = s->node();
    } else if (const auto* c = dynamic_cast<const ConvergenceError*>(&cause)) {
      last_residual_ = c->last_residual();
    } else if (const auto* i = dynamic_cast<const InstabilityError*>(&cause)) {
      last_tau_ = i->last_stable().tau;
    }
  }
  const std::string& stage() const { return stage_; }
  json details() const {
    json j = {{"stage", stage_}, {"message", what()}};
    if (!node_.empty()) j["node"] = node_;
    if (last_residual_) j["last_residual"] = *last_residual_;
    if (last_tau_) j["last_stable_tau"] = *last_tau_;
    return j;
  }

 private:
  std::string stage_;
  std::vector<std::size_t> node_;
  std::optional<double> last_residual_;
  std::optional<double> last_tau_;
};

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e);
  }
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : f_(path) {
    if (!f_) throw std::runtime_error("cannot write " + path.string());
    f_ << std::setprecision(17);
    for (std::size_t k = 0; k < header.size(); ++k) f_ << (k ? "," : "") << header[k];
    f_ << '\n';
  }
  void row(const std::vector<double>& v) {
    for (std::size_t k = 0; k < v.size(); ++k) f_ << (k ? "," : "") << v[k];
    f_ << '\n';
  }
  void row(const std::string& tag, const std::vector<double>& v) {
    f_ << tag;
    for (double x : v) f_ << ',' << x;
    f_ << '\n';
  }

 private:
  std::ofstream f_;
};

class Report {
 public:
  explicit Report(const RunConfig& cfg) {
    j_["command"] = cfg.command;
    j_["config"] = cfg.name;
    j_["checks"] = json::array();
  }

  json& operator[](const char* key) { return j_[key]; }

  void check(const std::string& name, double residual, double tolerance) {
    const bool pass = std::isfinite(residual) && residual <= tolerance;
    all_pass_ = all_pass_ && pass;
    j_["checks"].push_back({{"name", name}, {"residual", residual}, {"tolerance", tolerance}, {"pass", pass}});
  }

  /// Pass/fail entry without a residual (e.g. a monotonicity test).
  void flag(const std::string& name, bool pass, json detail) {
    all_pass_ = all_pass_ && pass;
    json e = {{"name", name}, {"pass", pass}};
    e["detail"] = std::move(detail);
    j_["checks"].push_back(std::move(e));
  }

  void fail_stage(const StageError& e) {
    all_pass_ = false;
    j_["error"] = e.details();
  }

  int finish(const fs::path& out_dir, std::ostream& out) {
    j_["status"] = all_pass_ ? "pass" : "fail";
    std::ofstream f(out_dir / "report.json");
    f << j_.dump(2) << '\n';
    for (const auto& c : j_["checks"]) {
      out << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>();
      if (c.contains("residual")) {
        std::ostringstream s;
        s << std::setprecision(6) << "  residual=" << c["residual"].get<double>()
          << "  tolerance=" << c["tolerance"].get<double>();
        out << s.str();
      }
      out << '\n';
    }
    if (j_.contains("error")) {
      out << "ERROR in stage '" << j_["error"]["stage"].get<std::string>()
          << "': " << j_["error"]["message"].get<std::string>() << '\n';
    }
    out << "status: " << j_["status"].get<std::string>() << '\n';
    return all_pass_ ? kExitPass : kExitCheckFailed;
  }

 private:
  json j_;
  bool all_pass_ = true;
};

json grid_json(const Grid1D& g) {
  return {{"lower", g.lower()}, {"upper", g.upper()}, {"nodes", g.size()}, {"spacing", g.spacing()}};
}

json chart_json(const Chart& c) {
  static const char* names[] = {"x1", "x2", "v", "y4"};
  json j;
  for (std::size_t k = 0; k < kDim; ++k) {
    if (c.sampled(k)) {
      json a = grid_json(*c.axis(k).grid);
      a["alpha"] = c.order(k).alpha();
      j[names[k]] = a;
    } else {
      j[names[k]] = {{"ignorable", true}, {"value", c.axis(k).fixed_value}};
    }
  }
  return j;
}

/// Observed orders log2(r_k / r_{k+1}) for a halving sequence.
json orders(const std::vector<double>& r) {
  json j = json::array();
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    if (r[k] > 0.0 && r[k + 1] > 0.0) {
      j.push_back(std::log2(r[k] / r[k + 1]));
    } else {
      j.push_back(nullptr);
    }
  }
  return j;
}

/// Strict decrease at every level, or a pair sitting at the round-off floor.
bool decreasing(const std::vector<double>& r, double floor = kRoundoffFloor) {
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    if (r[k + 1] <= floor && r[k] <= floor) continue;
    if (!(r[k + 1] < r[k])) return false;
  }
  return true;
}

void refinement_checks(Report& rep, const std::string& quantity, const std::vector<double>& r, json& table,
                       double floor = kRoundoffFloor) {
  table[quantity] = {{"residuals", r}, {"observed_orders", orders(r)}};
  rep.flag("refinement: " + quantity + " decreases", decreasing(r, floor), table[quantity]);
}

GridFunction sample_chart(const Chart& c, const std::optional<ExprField>& e) {
  if (!e) return {};
  return c.sample([&](const std::array<double, kDim>& u) { return e->expr.evaluate(u); });
}

GridFunction sample_h(const TensorGrid& hg, const std::optional<ExprField>& e, double fallback) {
  if (!e) return GridFunction::constant(hg, fallback);
  return GridFunction::sample(hg, [&](std::span<const double> x) { return e->expr.evaluate(x); });
}

void require_finite(const GridFunction& f, const std::string& what) {
  if (f.size()) f.require_finite(what.c_str());
}

// ---------------------------------------------------------------- fracops

struct FracopsLevel {
  FundamentalResiduals fund;
  double eigen = 0.0;
  std::optional<double> exact_error;
};

FracopsLevel fracops_level(const FracopsConfig& c, const Grid1D& grid, Csv* csv) {
  const FracOrder ord(c.alpha);
  const GridFunction f = GridFunction::sample(grid, [&](double x) { return c.f->expr.evaluate({&x, 1}); });
  require_finite(f, "f");
  FracopsLevel lv;
  stage("operators", [&] {
    const GridFunction dl = caputo_left(f, ord);
    const GridFunction dr = caputo_right(f, ord);
    const GridFunction in = rl_integral(f, ord);
    const GridFunction di = caputo_left(in, ord);
    const GridFunction id = rl_integral(dl, ord);
    lv.fund = check_fundamental(f, ord);
    lv.eigen = ml_eigen_check(c.alpha, grid);
    GridFunction ex;
    if (c.exact) {
      ex = GridFunction::sample(grid, [&](double x) { return c.exact->expr.evaluate({&x, 1}); });
      require_finite(ex, "exact");
      // Node 0 carries the empty-history value; compare from node 1.
      double e = 0.0;
      for (std::size_t k = 1; k < grid.size(); ++k) e = std::max(e, std::abs(dl[k] - ex[k]));
      lv.exact_error = e;
    }
    if (csv) {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> row{grid.node(k), f[k], dl[k], dr[k], in[k], di[k], id[k]};
        if (c.exact) {
          row.push_back(ex[k]);
          row.push_back(dl[k] - ex[k]);
        }
        csv->row(row);
      }
    }
    return 0;
  });
  return lv;
}

void run_fracops(const RunConfig& cfg, bool refine, const fs::path& out, Report& rep) {
  const FracopsConfig& c = *cfg.fracops;
  rep["grid"] = grid_json(c.grid);
  rep["alpha"] = c.alpha;
  rep["f"] = c.f->expr.text();
  std::vector<std::string> header{"x", "f", "caputo_left", "caputo_right", "rl_integral", "caputo_of_integral",
                                  "integral_of_caputo"};
  if (c.exact) {
    header.push_back("exact");
    header.push_back("error");
  }
  Csv csv(out / "fracops.csv", header);
  const FracopsLevel lv = fracops_level(c, c.grid, &csv);
  rep.check("fundamental: caputo of integral equals f", lv.fund.residual_a, c.fundamental_tolerance);
  rep.check("fundamental: integral of caputo equals f - f(lower)", lv.fund.residual_b, c.fundamental_tolerance);
  rep.check("Mittag-Leffler eigenfunction", lv.eigen, c.eigen_tolerance);
  if (lv.exact_error) rep.check("caputo_left vs exact", *lv.exact_error, c.exact_tolerance);
  if (!refine) return;
  std::vector<double> ra, rb, re, rx;
  json table;
  Grid1D g = c.grid;
  json grids = json::array();
  for (int l = 0; l < cfg.refine_levels; ++l) {
    const FracopsLevel r = l == 0 ? lv : fracops_level(c, g, nullptr);
    grids.push_back(g.size());
    ra.push_back(r.fund.residual_a);
    rb.push_back(r.fund.residual_b);
    re.push_back(r.eigen);
    if (r.exact_error) rx.push_back(*r.exact_error);
    g = g.refined();
  }
  table["nodes"] = grids;
  refinement_checks(rep, "fundamental residual a", ra, table);
  refinement_checks(rep, "fundamental residual b", rb, table);
  refinement_checks(rep, "Mittag-Leffler eigen residual", re, table);
  if (!rx.empty()) refinement_checks(rep, "exact error", rx, table);
  rep["refinement"] = table;
}

// ---------------------------------------------------------------- geometry

struct GeometryLevel {
  double compatibility = 0.0;
  double torsion_h = 0.0;
  double torsion_v = 0.0;
  double commutator = 0.0;
  ConstraintReport lc;
};

GeometryLevel geometry_level(const GeometryConfig& c, const Chart& chart, Csv* csv) {
  DMetric g;
  NConnectionField n;
  stage("inputs", [&] {
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        g.h[i][j] = sample_chart(chart, c.h[i][j]);
        g.v[i][j] = sample_chart(chart, c.v[i][j]);
        n.N[i][j] = sample_chart(chart, c.n[i][j]);
        require_finite(g.h[i][j], "metric");
        require_finite(g.v[i][j], "metric");
        require_finite(n.N[i][j], "N-connection");
      }
    }
    return 0;
  });
  const GeometryStack st = stage("geometry", [&] { return compute_stack(chart, g, n, c.det_floor); });
  GeometryLevel lv;
  stage("checks", [&] {
    const FrameField frames(chart, n);
    lv.compatibility = metric_compatibility_residual(st.connection, g, frames);
    for (std::size_t t = 0; t < kDim; ++t) {
      for (std::size_t b = 0; b < kDim; ++b) {
        for (std::size_t d = 0; d < kDim; ++d) {
          const double r = max_norm(st.torsion(t, b, d));
          if (is_h(t) && is_h(b) && is_h(d)) lv.torsion_h = std::max(lv.torsion_h, r);
          if (!is_h(t) && !is_h(b) && !is_h(d)) lv.torsion_v = std::max(lv.torsion_v, r);
        }
      }
    }
    for (const ExprField& f : c.test_functions) {
      const GridFunction s = sample_chart(chart, f);
      require_finite(s, "test function");
      lv.commutator = std::max(lv.commutator, commutator_residual(frames, st.nonholonomy, s));
    }
    lv.lc = check_lc_constraints(st.connection, st.nonholonomy, frames, 1e-8);
    return 0;
  });
  if (csv) {
    const Tensor2 mixed = raise_first(st.einstein, st.ginv, chart.grid());
    for (std::size_t p = 0; p < chart.grid().size(); ++p) {
      const auto x = chart.point(p);
      std::vector<double> row{x[0], x[1], x[2], x[3]};
      for (const GridFunction* f : {&st.scalar.h_trace, &st.scalar.v_trace, &st.scalar.total}) {
        row.push_back(is_zero(*f) ? 0.0 : (*f)[p]);
      }
      for (std::size_t a = 0; a < kDim; ++a) {
        for (std::size_t b = 0; b < kDim; ++b) row.push_back(is_zero(mixed(a, b)) ? 0.0 : mixed(a, b)[p]);
      }
      csv->row(row);
    }
  }
  return lv;
}

void run_geometry(const RunConfig& cfg, bool refine, const fs::path& out, Report& rep) {
  const GeometryConfig& c = *cfg.geometry;
  const Chart chart = c.chart.chart();
  rep["grid"] = chart_json(chart);
  std::vector<std::string> header{"x1", "x2", "v", "y4", "scalar_h", "scalar_v", "scalar"};
  for (int a = 1; a <= 4; ++a) {
    for (int b = 1; b <= 4; ++b) header.push_back("G^" + std::to_string(a) + "_" + std::to_string(b));
  }
  Csv csv(out / "geometry.csv", header);
  const GeometryLevel lv = geometry_level(c, chart, &csv);
  rep.check("metric compatibility", lv.compatibility, c.compatibility_tolerance);
  rep.check("torsion T^i_jk", lv.torsion_h, c.torsion_tolerance);
  rep.check("torsion T^a_bc", lv.torsion_v, c.torsion_tolerance);
  rep.check("commutator [e_a, e_b] = W e", lv.commutator, c.commutator_tolerance);
  json lc = json::array();
  for (const auto& f : lv.lc.families) lc.push_back({{"name", f.name}, {"residual", f.residual}});
  rep["levi_civita_families"] = lc;
  if (!refine) return;
  std::vector<double> rc, rh, rv, rm;
  json table, grids = json::array();
  Chart ch = chart;
  for (int l = 0; l < cfg.refine_levels; ++l) {
    const GeometryLevel r = l == 0 ? lv : geometry_level(c, ch, nullptr);
    grids.push_back(chart_json(ch));
    rc.push_back(r.compatibility);
    rh.push_back(r.torsion_h);
    rv.push_back(r.torsion_v);
    rm.push_back(r.commutator);
    ch = ch.refined();
  }
  table["grids"] = grids;
  refinement_checks(rep, "metric compatibility", rc, table);
  refinement_checks(rep, "torsion T^i_jk", rh, table);
  refinement_checks(rep, "torsion T^a_bc", rv, table);
  refinement_checks(rep, "commutator", rm, table);
  rep["refinement"] = table;
}

// ---------------------------------------------------------------- generate

struct GenerateLevel {
  double psi_residual = 0.0;
  ConstraintReport lc;
  std::optional<double> omega_residual;
  FieldEquationReport field;
};

GenerateLevel generate_level(const GenerateConfig& c, const Chart& chart, const fs::path* out) {
  const TensorGrid hg = h_grid(chart);
  SourceSpec src;
  GeneratingData gd;
  stage("inputs", [&] {
    gd.phi = sample_chart(chart, c.phi);
    src.upsilon2 = sample_chart(chart, c.upsilon2);
    src.upsilon4 = sample_h(hg, c.upsilon4, 0.0);
    require_finite(gd.phi, "phi");
    require_finite(src.upsilon2, "Upsilon2");
    require_finite(src.upsilon4, "Upsilon4");
    if (c.h4_0) gd.h4_0 = sample_h(hg, c.h4_0, 1.0);
    for (std::size_t i = 0; i < 2; ++i) {
      if (c.n1[i]) gd.n1[i] = sample_h(hg, c.n1[i], 0.0);
      if (c.n2[i]) gd.n2[i] = sample_h(hg, c.n2[i], 0.0);
    }
    gd.sign_h3 = c.sign_h3;
    gd.sign_h4 = c.sign_h4;
    gd.formula = c.formula;
    gd.psi_options = c.psi;
    if (c.psi_boundary) {
      const Expression e = c.psi_boundary->expr;
      gd.psi_options.boundary = [e](double x1, double x2) {
        const double v[] = {x1, x2};
        return e.evaluate(v);
      };
    }
    return 0;
  });
  gd.psi = stage("psi", [&] { return solve_psi(src.upsilon4, chart, gd.psi_options).psi; });
  SolutionBundle sol = stage("coefficients", [&] { return generate_solution(gd, src, chart); });
  GenerateLevel lv;
  lv.psi_residual = sol.psi_residual;
  lv.lc = stage("constraints", [&] { return check_lc_solution(sol, c.lc_tolerance); });
  if (c.omega) {
    sol = stage("omega", [&] {
      const Chart oc = sol.chart.with_axis(kY4, c.omega_y4->spec());
      const GridFunction om = sample_chart(oc, c.omega);
      require_finite(om, "omega");
      return apply_omega(sol, oc, om);
    });
    lv.omega_residual = sol.omega_residual;
  }
  lv.field = stage("field_equations", [&] { return verify_field_equations(sol, src); });

  if (out) {
    const Chart& sc = sol.chart;
    Csv coeff(*out / "coefficients.csv",
              {"x1", "x2", "v", "g1", "g2", "h3", "h4", "w1", "w2", "n1", "n2", "phi", "phi_reconstructed"});
    for (std::size_t p = 0; p < sc.grid().size(); ++p) {
      const auto x = sc.point(p);
      coeff.row({x[0], x[1], x[2], sol.g1[p], sol.g2[p], sol.h3[p], sol.h4[p], sol.w[0][p], sol.w[1][p], sol.n[0][p],
                 sol.n[1][p], sol.phi[p], sol.aux_phi[p]});
    }
    Csv psi(*out / "psi.csv", {"x1", "x2", "psi"});
    for (std::size_t p = 0; p < hg.size(); ++p) psi.row({hg.coordinate(p, 0), hg.coordinate(p, 1), sol.psi[p]});
  }
  return lv;
}

void run_generate(const RunConfig& cfg, bool refine, const fs::path& out, Report& rep) {
  const GenerateConfig& c = *cfg.generate;
  const Chart chart = c.chart.chart();
  rep["grid"] = chart_json(chart);
  rep["formula"] = to_string(c.formula);
  const GenerateLevel lv = generate_level(c, chart, &out);
  rep.check("psi equation", lv.psi_residual, c.psi.tolerance);
  for (const auto& f : lv.lc.families) rep.check("constraint: " + f.name, f.residual, c.lc_tolerance);
  if (lv.omega_residual) rep.check("omega: e_k omega = 0", *lv.omega_residual, c.omega_tolerance);
  json comps = json::object();
  for (const auto& e : lv.field.components) comps[e.name] = e.value;
  rep["field_equation_components"] = comps;
  rep.check("field equations G - Upsilon", lv.field.max_total, c.field_tolerance);
  if (!refine) return;
  std::vector<double> r;
  json table, grids = json::array();
  Chart ch = chart;
  for (int l = 0; l < cfg.refine_levels; ++l) {
    const GenerateLevel x = l == 0 ? lv : generate_level(c, ch, nullptr);
    grids.push_back(chart_json(ch));
    r.push_back(x.field.max_total);
    ch = ch.refined();
  }
  table["grids"] = grids;
  refinement_checks(rep, "field equation residual", r, table);
  rep["refinement"] = table;
}

// ---------------------------------------------------------------- soliton

std::vector<Vec2> read_curve_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot open curve file " + path);
  std::vector<Vec2> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream s(line);
    double l, a, b;
    if (!(s >> l >> a >> b)) {
      if (pts.empty() && lineno == 1) continue;  // header
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected 'l, c1, c2'");
    }
    pts.push_back({a, b});
  }
  return pts;
}

struct BuiltCurve {
  std::vector<Vec2> points;
  double period = 0.0;
  bool closed = true;
};

BuiltCurve build_curve(const CurveConfig& c, std::size_t samples) {
  BuiltCurve b;
  if (c.type == "circle") {
    b.points = circle_points(c.radius, samples, c.center);
    b.period = 2.0 * std::numbers::pi * c.radius;
  } else if (c.type == "ellipse") {
    b.points = ellipse_points(c.a, c.b, samples, &b.period);
  } else if (c.type == "perturbed_circle") {
    b.points = perturbed_circle_points(c.eps, c.k, samples);
    b.period = 2.0 * std::numbers::pi;
  } else if (c.type == "constant") {
    b.points.assign(samples, c.center);
    b.period = c.period > 0.0 ? c.period : 2.0 * std::numbers::pi;
  } else {
    b.points = read_curve_csv(c.csv_path);
    b.period = c.period;
    b.closed = c.closed;
  }
  if (c.type == "ellipse" || c.type == "perturbed_circle") {
    for (Vec2& p : b.points) {
      p[0] += c.center[0];
      p[1] += c.center[1];
    }
  }
  return b;
}

std::vector<Vec2> unit_tangent(const CurveBlock& b, double h, bool closed) {
  std::vector<Vec2> t = l_derivative(b.points, h, closed);
  for (Vec2& v : t) {
    const double s = b.metric.norm(v);
    v = s > 0.0 ? Vec2{v[0] / s, v[1] / s} : Vec2{0.0, 0.0};
  }
  return t;
}

struct SolitonLevel {
  FlowCurve initial, final;
  NonstretchStats stats;
  std::optional<double> radius_drift;
  std::optional<double> return_distance;
  std::optional<Minus1Residual> minus1;
};

double max_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double e = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::hypot(a[k][0] - b[k][0], a[k][1] - b[k][1]));
  return e;
}

SolitonLevel soliton_level(const SolitonConfig& c, std::size_t scale, const fs::path* out) {
  SolitonLevel lv;
  lv.initial = stage("curve", [&] {
    const BuiltCurve h = build_curve(c.h, c.h.samples * scale);
    std::optional<std::vector<Vec2>> v;
    if (c.v) {
      BuiltCurve bv = build_curve(*c.v, h.points.size());
      v = std::move(bv.points);
    }
    return make_curve(h.period, h.closed, h.points, c.h.metric, v, c.v ? c.v->metric : BlockMetric{});
  });
  const FlowCurve& c0 = lv.initial;
  const RadiusStats r0 = radius_stats(c0.h);

  std::optional<Csv> traj, inv;
  if (out) {
    traj.emplace(*out / "trajectory.csv", std::vector<std::string>{"tau", "block", "k", "l", "c1", "c2"});
    inv.emplace(*out / "invariants.csv", std::vector<std::string>{"tau", "speed_min", "speed_max", "drift",
                                                                    "radius_min", "radius_max"});
  }
  auto observe = [&](const FlowCurve& s) {
    if (!out) return;
    for (std::size_t k = 0; k < s.size(); ++k) {
      traj->row({s.tau, 0.0, static_cast<double>(k), s.parameter(k), s.h.points[k][0], s.h.points[k][1]});
    }
    if (s.v) {
      for (std::size_t k = 0; k < s.size(); ++k) {
        traj->row({s.tau, 1.0, static_cast<double>(k), s.parameter(k), s.v->points[k][0], s.v->points[k][1]});
      }
    }
    const NonstretchStats st = nonstretch_invariant(s);
    const RadiusStats rs = radius_stats(s.h);
    inv->row({s.tau, st.min, st.max, st.drift, rs.min, rs.max});
  };

  if (c.flow == 0) {
    lv.final = stage("flow0", [&] {
      return flow0_integrate(c0, c.tau_end, {c.flow0_method, c.flow0_dt / static_cast<double>(scale), c.flow0_cfl});
    });
    observe(c0);
    observe(lv.final);
    const double periods = c.tau_end / c0.period;
    if (periods >= 1.0 && std::abs(periods - std::round(periods)) < 1e-12) {
      lv.return_distance = max_distance(lv.final.h.points, c0.h.points);
      if (c0.v) lv.return_distance = std::max(*lv.return_distance, max_distance(lv.final.v->points, c0.v->points));
    }
  } else if (c.flow == 1) {
    Flow1Options opt = c.flow1;
    const double s3 = static_cast<double>(scale * scale * scale);
    opt.dt = c.flow1.dt / s3;
    opt.observe_every = c.observe_every * scale * scale * scale;
    if (out) opt.observer = observe;
    lv.final = stage("flow+1", [&] { return flow_plus1_integrate(c0, c.tau_end, opt); });
  } else {
    lv.final = c0;
    observe(c0);
    lv.minus1 = stage("flow-1", [&] {
      const double h = c0.spacing();
      const bool tangent = c.y_direction == "tangent";
      const std::vector<Vec2> zero(c0.size(), Vec2{0.0, 0.0});
      const std::vector<Vec2> yh = tangent ? unit_tangent(c0.h, h, c0.closed) : zero;
      std::optional<std::vector<Vec2>> yv;
      if (c0.v) yv = tangent ? unit_tangent(*c0.v, h, c0.closed) : zero;
      return flow_minus1_residual(c0, yh, yv);
    });
  }
  lv.stats = nonstretch_invariant(lv.final);
  if (c.h.type == "circle") {
    const RadiusStats r = radius_stats(lv.final.h);
    lv.radius_drift = std::max(std::abs(r.max - r0.max), std::abs(r.min - r0.min)) / c.h.radius;
  }
  return lv;
}

void run_soliton(const RunConfig& cfg, bool refine, const fs::path& out, Report& rep) {
  const SolitonConfig& c = *cfg.soliton;
  rep["flow"] = c.flow;
  rep["curve"] = c.h.type;
  rep["samples"] = c.h.samples;
  rep["tau_end"] = c.tau_end;
  if (c.flow == 1) rep["dt"] = c.flow1.dt;
  const SolitonLevel lv = soliton_level(c, 1, &out);
  rep["final_tau"] = lv.final.tau;
  rep["speed"] = {{"min", lv.stats.min}, {"max", lv.stats.max}};
  if (c.flow != -1) rep.check("non-stretching drift", lv.stats.drift, c.drift_tolerance);
  if (lv.radius_drift && c.flow != -1) rep.check("radius drift", *lv.radius_drift, c.radius_tolerance);
  if (lv.return_distance) rep.check("return after whole periods", *lv.return_distance, c.return_tolerance);
  if (lv.minus1) {
    const double expected = c.minus1_expected.value_or(0.0);
    rep["minus1_residual"] = {{"h", lv.minus1->h}, {"v", lv.minus1->v}, {"expected_h", expected}};
    rep.check("-1 flow residual (h) vs expected", std::abs(lv.minus1->h - expected), c.minus1_tolerance);
  }
  if (!refine) return;
  // Invariants sit at accumulated round-off; values three decades under
  // their tolerance count as converged.
  std::string quantity = "non-stretching drift";
  double floor = 1e-3 * c.drift_tolerance;
  if (c.flow == 0 && lv.return_distance) {
    quantity = "return distance";
    floor = 1e-3 * c.return_tolerance;
  } else if (c.flow == -1) {
    quantity = "-1 flow residual error";
    floor = 1e-3 * c.minus1_tolerance;
  }
  auto measure = [&](const SolitonLevel& x) {
    if (c.flow == 0 && x.return_distance) return *x.return_distance;
    if (c.flow == -1) return std::abs(x.minus1->h - c.minus1_expected.value_or(0.0));
    return x.stats.drift;
  };
  std::vector<double> r;
  json table, samples = json::array();
  for (int l = 0; l < cfg.refine_levels; ++l) {
    const std::size_t scale = std::size_t{1} << l;
    samples.push_back(c.h.samples * scale);
    r.push_back(l == 0 ? measure(lv) : measure(soliton_level(c, scale, nullptr)));
  }
  table["samples"] = samples;
  refinement_checks(rep, quantity, r, table, floor);
  rep["refinement"] = table;
}

}  // namespace

int run_command(const RunConfig& cfg, bool refine, const fs::path& out_dir, std::ostream& out) {
  fs::create_directories(out_dir);
  Report rep(cfg);
  rep["refine"] = refine;
  try {
    if (cfg.command == "fracops") {
      run_fracops(cfg, refine, out_dir, rep);
    } else if (cfg.command == "geometry") {
      run_geometry(cfg, refine, out_dir, rep);
    } else if (cfg.command == "generate") {
      run_generate(cfg, refine, out_dir, rep);
    } else {
      run_soliton(cfg, refine, out_dir, rep);
    }
  } catch (const StageError& e) {
    rep.fail_stage(e);
  }
  return rep.finish(out_dir, out);
}

}  // namespace fracgeo
