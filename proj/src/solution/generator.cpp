#include <algorithm>
#include <cmath>

#include "fracgeo/errors.hpp"
#include "fracgeo/fractional_ops.hpp"
#include "fracgeo/solution.hpp"

namespace fracgeo {

std::string to_string(HFormula f) { return f == HFormula::field_consistent ? "field_consistent" : "as_printed"; }

namespace {

GridFunction full(const GridFunction& f, const TensorGrid& g) { return is_zero(f) ? GridFunction(g) : f; }

template <class F>
GridFunction map1(const GridFunction& a, F f) {
  GridFunction out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f(a[k]);
  return out;
}

template <class F>
GridFunction map2(const GridFunction& a, const GridFunction& b, F f) {
  GridFunction out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f(a[k], b[k]);
  return out;
}

template <class F>
GridFunction map3(const GridFunction& a, const GridFunction& b, const GridFunction& c, F f) {
  GridFunction out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f(a[k], b[k], c[k]);
  return out;
}

/// Spreads an h-grid field over a chart grid.
GridFunction spread(const GridFunction& f, const Chart& chart) {
  const std::size_t map[] = {chart.grid_axis(kX1), chart.grid_axis(kX2)};
  return broadcast(f, chart.grid(), map);
}

GridFunction d(const Chart& c, const GridFunction& f, std::size_t coord) { return full(c.partial(f, coord), c.grid()); }

GridFunction trim(const GridFunction& f, const Chart& chart, std::size_t count) {
  return count ? drop_front(f, chart.grid_axis(kV), count) : f;
}

}  // namespace

SolutionBundle generate_solution(const GeneratingData& gen, const SourceSpec& src, const Chart& chart) {
  if (!chart.sampled(kX1) || !chart.sampled(kX2) || !chart.sampled(kV)) {
    throw DomainError("generation chart must sample x1, x2 and v");
  }
  if (chart.sampled(kY4)) throw DomainError("generation chart must keep y4 ignorable (Killing direction)");
  const TensorGrid& G = chart.grid();
  const TensorGrid hg = h_grid(chart);
  const std::size_t vax = chart.grid_axis(kV);
  if (!(gen.phi.grid() == G)) throw DomainError("phi must live on the chart grid");
  if (!(src.upsilon2.grid() == G)) throw DomainError("Upsilon2 must live on the chart grid");
  gen.phi.require_finite("phi");
  src.upsilon2.require_finite("Upsilon2");
  if (std::abs(gen.sign_h3) != 1 || std::abs(gen.sign_h4) != 1) throw DomainError("sign flags must be +1 or -1");

  const auto [lo, hi] = std::minmax_element(gen.phi.values().begin(), gen.phi.values().end());
  if (*lo == *hi) throw GenerationError("phi must be nonconstant", {});
  for (std::size_t k = 0; k < G.size(); ++k) {
    if (src.upsilon2[k] == 0.0) {
      throw GenerationError("Upsilon2 vanishes at node " + format_node(G.multi_index(k)), G.multi_index(k));
    }
  }

  const std::size_t trim_count = chart.order(kV).is_integer() ? 0 : 1;
  const FracOrder ov = chart.order(kV);
  SolutionBundle sol(trim_count ? chart.with_axis(kV, AxisSpec{chart.axis(kV).grid->drop_front(trim_count), ov, 0.0})
                                : chart);
  sol.formula = gen.formula;
  sol.v_trimmed = trim_count;

  // psi and the h-block.
  if (gen.psi) {
    if (!(gen.psi->grid() == hg)) throw DomainError("psi must live on the (x1, x2) grid");
    sol.psi = *gen.psi;
    sol.psi_residual = psi_residual(sol.psi, src.upsilon4, chart, gen.psi_options);
  } else {
    const PsiResult r = solve_psi(src.upsilon4, chart, gen.psi_options);
    sol.psi = r.psi;
    sol.psi_residual = r.residual;
    sol.psi_iterations = r.iterations;
  }
  const GridFunction epsi = spread(map1(sol.psi, [](double p) { return std::exp(p); }), chart);

  const GridFunction& phi = gen.phi;
  const GridFunction& y2 = src.upsilon2;
  const GridFunction phis = d(chart, phi, kV);
  for (std::size_t k = 0; k < G.size(); ++k) {
    if (G.index_along(k, vax) < trim_count) continue;
    if (phis[k] == 0.0) {
      throw GenerationError("phi* vanishes at node " + format_node(G.multi_index(k)), G.multi_index(k));
    }
  }

  const GridFunction e2 = map1(phi, [](double p) { return std::exp(2.0 * p); });
  const GridFunction e2s = d(chart, e2, kV);
  const GridFunction h40 = gen.h4_0 ? spread(*gen.h4_0, chart) : GridFunction::constant(G, 1.0);
  const double s3 = gen.sign_h3, s4 = gen.sign_h4;

  GridFunction h3, h4;
  if (gen.formula == HFormula::field_consistent) {
    const GridFunction integrand = map2(e2s, y2, [](double a, double u) { return a / (4.0 * u); });
    h4 = h40 + s4 * rl_integral_partial(integrand, vax, ov);
    h3 = GridFunction(G);
    for (std::size_t k = 0; k < G.size(); ++k) {
      h3[k] = s4 * e2s[k] * phis[k] / (8.0 * y2[k] * y2[k] * h4[k]);
    }
  } else {
    const GridFunction integrand = map2(e2s, y2, [](double a, double u) { return 2.0 * a / u; });
    h4 = h40 + s4 * rl_integral_partial(integrand, vax, ov);
    h3 = map2(phis, y2, [s3](double p, double u) { return s3 * std::abs(p) / u; });
  }

  // Sign and zero checks on the retained nodes.
  double h4_sign = 0.0;
  for (std::size_t k = 0; k < G.size(); ++k) {
    if (G.index_along(k, vax) < trim_count) continue;
    if (!std::isfinite(h3[k]) || !std::isfinite(h4[k])) {
      throw GenerationError("non-finite h3/h4 at node " + format_node(G.multi_index(k)), G.multi_index(k));
    }
    if (h4[k] == 0.0 || (h4_sign != 0.0 && std::signbit(h4[k]) != std::signbit(h4_sign))) {
      throw GenerationError("h4 vanishes or changes sign at node " + format_node(G.multi_index(k)),
                            G.multi_index(k));
    }
    h4_sign = h4[k];
    if (h3[k] == 0.0) {
      throw GenerationError("h3 vanishes at node " + format_node(G.multi_index(k)), G.multi_index(k));
    }
  }

  // N-connection.
  std::array<GridFunction, 2> w, n;
  const GridFunction ninteg = map2(h3, h4, [](double a, double b) { return a / std::pow(std::abs(b), 1.5); });
  const GridFunction nint = rl_integral_partial(ninteg, vax, ov);
  for (std::size_t i = 0; i < 2; ++i) {
    const GridFunction di = d(chart, phi, i);
    w[i] = map2(di, phis, [](double a, double b) { return b == 0.0 ? 0.0 : -a / b; });
    const GridFunction n1 = gen.n1[i] ? spread(*gen.n1[i], chart) : GridFunction(G);
    const GridFunction n2 = gen.n2[i] ? spread(*gen.n2[i], chart) : GridFunction(G);
    n[i] = map3(n1, n2, nint, [](double a, double b, double c) { return a + b * c; });
  }

  // Auxiliary quantities.
  const GridFunction h4s = d(chart, h4, kV);
  const GridFunction aux_phi =
      map3(h4s, h3, h4, [](double a, double b, double c) { return std::log(std::abs(a / std::sqrt(std::abs(b * c)))); });
  const GridFunction lg = map2(h4, h3, [](double a, double b) { return std::log(std::pow(std::abs(a), 1.5) / std::abs(b)); });
  // The log is undefined where h3 = 0 (dropped terminal node); zero it before differentiating.
  GridFunction lg_safe = lg;
  for (std::size_t k = 0; k < G.size(); ++k) {
    if (!std::isfinite(lg_safe[k])) lg_safe[k] = 0.0;
  }
  const GridFunction aux_gamma = d(chart, lg_safe, kV);
  const GridFunction aux_beta = map2(h4s, phis, [](double a, double b) { return a * b; });
  std::array<GridFunction, 2> aux_alpha;
  for (std::size_t i = 0; i < 2; ++i) {
    aux_alpha[i] = map2(h4s, d(chart, phi, i), [](double a, double b) { return a * b; });
  }

  // Drop the degenerate terminal slice when alpha_v < 1.
  auto T = [&](const GridFunction& f) { return trim(f, chart, trim_count); };
  sol.g1 = T(epsi);
  sol.g2 = sol.g1;
  sol.h3 = T(h3);
  sol.h4 = T(h4);
  for (std::size_t i = 0; i < 2; ++i) {
    sol.w[i] = T(w[i]);
    sol.n[i] = T(n[i]);
    sol.aux_alpha[i] = T(aux_alpha[i]);
  }
  sol.phi = T(phi);
  sol.phi_star = T(phis);
  sol.aux_phi = T(aux_phi);
  sol.aux_gamma = T(aux_gamma);
  sol.aux_beta = T(aux_beta);
  return sol;
}

ConstraintReport check_lc_solution(const SolutionBundle& sol, double tolerance) {
  const Chart& c = sol.chart;
  const TensorGrid& G = c.grid();
  ConstraintReport rep;
  rep.tolerance = tolerance;
  // e_k f = d_k f - w_k f* - n_k d_y4 f; y4 is ignorable here.
  auto e = [&](std::size_t k, const GridFunction& f) {
    GridFunction out = d(c, f, k);
    const GridFunction fs = d(c, f, kV);
    for (std::size_t m = 0; m < G.size(); ++m) out[m] -= sol.w[k][m] * fs[m];
    return out;
  };
  const GridFunction lnh4 = map1(sol.h4, [](double h) { return std::log(std::abs(h)); });
  double r1 = 0.0, r3 = 0.0, r4 = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    r1 = std::max(r1, max_abs_diff(d(c, sol.w[i], kV), e(i, lnh4)));
    r3 = std::max(r3, d(c, sol.n[i], kV).max_abs());
  }
  const double r2 = max_abs_diff(e(0, sol.w[1]), e(1, sol.w[0]));
  r4 = max_abs_diff(d(c, sol.n[1], kX1), d(c, sol.n[0], kX2));
  rep.families.push_back({"w_i* = e_i ln|h4|", r1, r1 <= tolerance});
  rep.families.push_back({"e_k w_i = e_i w_k", r2, r2 <= tolerance});
  rep.families.push_back({"n_i* = 0", r3, r3 <= tolerance});
  rep.families.push_back({"d_i n_k = d_k n_i", r4, r4 <= tolerance});
  return rep;
}

SolutionBundle apply_omega(const SolutionBundle& sol, const Chart& oc, const GridFunction& omega) {
  if (!oc.sampled(kY4)) throw DomainError("omega chart must sample y4");
  for (std::size_t c = 0; c < kY4; ++c) {
    if (!oc.sampled(c) || !(*oc.axis(c).grid == *sol.chart.axis(c).grid)) {
      throw DomainError("omega chart must match the bundle chart on x1, x2, v");
    }
  }
  if (!(omega.grid() == oc.grid())) throw DomainError("omega must live on the omega chart grid");
  omega.require_finite("omega");
  for (double v : omega.values()) {
    if (!(v > 0.0)) throw DomainError("omega must be positive everywhere");
  }
  SolutionBundle out = sol;
  out.omega_chart = oc;
  out.omega = omega;
  const std::size_t map[] = {oc.grid_axis(kX1), oc.grid_axis(kX2), oc.grid_axis(kV)};
  const GridFunction os = d(oc, omega, kV);
  const GridFunction o4 = d(oc, omega, kY4);
  double r = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const GridFunction wk = broadcast(sol.w[k], oc.grid(), map);
    const GridFunction nk = broadcast(sol.n[k], oc.grid(), map);
    const GridFunction ok = d(oc, omega, k);
    for (std::size_t m = 0; m < oc.grid().size(); ++m) {
      r = std::max(r, std::abs(ok[m] + wk[m] * os[m] + nk[m] * o4[m]));
    }
  }
  out.omega_residual = r;
  return out;
}

const Chart& bundle_chart(const SolutionBundle& sol) { return sol.omega ? *sol.omega_chart : sol.chart; }

namespace {

GridFunction lift(const SolutionBundle& sol, const GridFunction& f) {
  if (!sol.omega) return f;
  const Chart& oc = *sol.omega_chart;
  const std::size_t map[] = {oc.grid_axis(kX1), oc.grid_axis(kX2), oc.grid_axis(kV)};
  return broadcast(f, oc.grid(), map);
}

}  // namespace

DMetric bundle_metric(const SolutionBundle& sol) {
  GridFunction h3 = lift(sol, sol.h3), h4 = lift(sol, sol.h4);
  if (sol.omega) {
    for (std::size_t k = 0; k < h3.size(); ++k) {
      const double o2 = (*sol.omega)[k] * (*sol.omega)[k];
      h3[k] *= o2;
      h4[k] *= o2;
    }
  }
  return DMetric::diagonal(lift(sol, sol.g1), lift(sol, sol.g2), std::move(h3), std::move(h4));
}

NConnectionField bundle_nconnection(const SolutionBundle& sol) {
  NConnectionField n;
  for (std::size_t i = 0; i < 2; ++i) {
    n.N[0][i] = lift(sol, sol.w[i]);
    n.N[1][i] = lift(sol, sol.n[i]);
  }
  return n;
}

FieldEquationReport verify_field_equations(const SolutionBundle& sol, const SourceSpec& src, double det_floor) {
  const Chart& c = bundle_chart(sol);
  const DMetric g = bundle_metric(sol);
  const NConnectionField n = bundle_nconnection(sol);
  const GeometryStack s = compute_stack(c, g, n, det_floor);
  const Tensor2 mixed = raise_first(s.einstein, s.ginv, c.grid());

  GridFunction y2 = src.upsilon2;
  if (sol.v_trimmed) y2 = drop_front(y2, sol.chart.grid_axis(kV) , sol.v_trimmed);
  y2 = lift(sol, y2);
  const GridFunction y4 = lift(sol, spread(src.upsilon4, sol.chart));

  static const char* label[] = {"1", "2", "3", "4"};
  FieldEquationReport rep;
  for (std::size_t a = 0; a < kDim; ++a) {
    for (std::size_t b = 0; b < kDim; ++b) {
      GridFunction r = full(mixed(a, b), c.grid());
      if (a == b) r -= (is_h(a) ? y2 : y4);
      const double v = r.max_abs();
      rep.components.push_back({std::string("G^") + label[a] + "_" + label[b], v});
      if (a == b) {
        rep.max_diagonal = std::max(rep.max_diagonal, v);
      } else {
        rep.max_off_diagonal = std::max(rep.max_off_diagonal, v);
      }
    }
  }
  rep.max_total = std::max(rep.max_diagonal, rep.max_off_diagonal);
  return rep;
}

}  // namespace fracgeo
