#include "fracgeo/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "field_ops.hpp"
#include "fracgeo/errors.hpp"
#include "fracgeo/fractional_ops.hpp"

namespace fracgeo {

using fields::add_product;
using fields::add_product3;
using fields::axpy;
using fields::compact;

namespace {

const GridFunction& zero_field() {
  static const GridFunction z;
  return z;
}

}  // namespace

double max_norm(const GridFunction& f) { return is_zero(f) ? 0.0 : f.max_abs(); }

// ---------------------------------------------------------------- Chart

Chart::Chart(std::array<AxisSpec, kDim> axes) : axes_(std::move(axes)) {
  std::vector<Grid1D> g;
  for (std::size_t c = 0; c < kDim; ++c) {
    grid_axis_[c] = g.size();
    if (axes_[c].grid) g.push_back(*axes_[c].grid);
  }
  if (g.empty()) throw DomainError("chart needs at least one sampled coordinate");
  grid_ = TensorGrid(std::move(g));
}

std::size_t Chart::grid_axis(std::size_t coord) const {
  if (!sampled(coord)) throw DomainError("coordinate " + std::to_string(coord) + " is not sampled");
  return grid_axis_[coord];
}

GridFunction Chart::partial(const GridFunction& f, std::size_t coord) const {
  if (is_zero(f) || !sampled(coord)) return GridFunction();
  return compact(caputo_partial(f, grid_axis_[coord], axes_[coord].order));
}

std::array<double, kDim> Chart::point(std::size_t flat) const {
  std::array<double, kDim> x{};
  for (std::size_t c = 0; c < kDim; ++c) {
    x[c] = sampled(c) ? grid_.coordinate(flat, grid_axis_[c]) : axes_[c].fixed_value;
  }
  return x;
}

GridFunction Chart::sample(const std::function<double(const std::array<double, kDim>&)>& f) const {
  GridFunction out(grid_);
  for (std::size_t k = 0; k < grid_.size(); ++k) out[k] = f(point(k));
  return out;
}

Chart Chart::refined() const {
  std::array<AxisSpec, kDim> a = axes_;
  for (auto& s : a) {
    if (s.grid) s.grid = s.grid->refined();
  }
  return Chart(a);
}

Chart Chart::with_axis(std::size_t coord, AxisSpec spec) const {
  std::array<AxisSpec, kDim> a = axes_;
  a[coord] = std::move(spec);
  return Chart(a);
}

// ---------------------------------------------------------------- metric

const GridFunction& DMetric::operator()(std::size_t a, std::size_t b) const {
  if (is_h(a) && is_h(b)) return h[a][b];
  if (!is_h(a) && !is_h(b)) return v[a - kNh][b - kNh];
  return zero_field();
}

const GridFunction& InverseDMetric::operator()(std::size_t a, std::size_t b) const {
  if (is_h(a) && is_h(b)) return h[a][b];
  if (!is_h(a) && !is_h(b)) return v[a - kNh][b - kNh];
  return zero_field();
}

DMetric DMetric::diagonal(GridFunction g1, GridFunction g2, GridFunction h3, GridFunction h4) {
  DMetric g;
  g.h[0][0] = std::move(g1);
  g.h[1][1] = std::move(g2);
  g.v[0][0] = std::move(h3);
  g.v[1][1] = std::move(h4);
  return g;
}

void DMetric::validate(double det_floor) const {
  for (const auto* blk : {&h, &v}) {
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const GridFunction& f = (*blk)[i][j];
        if (!is_zero(f)) f.require_finite("metric component");
      }
    }
  }
  if (!(det_floor > 0.0)) throw DomainError("determinant floor must be positive");
}

std::string block_signature(double g00, double g01, double g11) {
  const double det = g00 * g11 - g01 * g01;
  if (det < 0.0) return "+-";
  return g00 > 0.0 ? "++" : "--";
}

namespace {

double at(const GridFunction& f, std::size_t k) { return is_zero(f) ? 0.0 : f[k]; }

std::array<std::array<GridFunction, 2>, 2> invert_block(const std::array<std::array<GridFunction, 2>, 2>& b,
                                                        const TensorGrid& grid, double floor,
                                                        const char* name) {
  std::array<std::array<GridFunction, 2>, 2> inv;
  const bool offdiag = !is_zero(b[0][1]);
  inv[0][0] = GridFunction(grid);
  inv[1][1] = GridFunction(grid);
  if (offdiag) inv[0][1] = GridFunction(grid);
  std::string sig0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double a = at(b[0][0], k), c = at(b[0][1], k), d = at(b[1][1], k);
    const double det = a * d - c * c;
    if (!(std::abs(det) >= floor)) {
      throw SingularMetricError(std::string(name) + " block determinant below floor at node " +
                                    format_node(grid.multi_index(k)),
                                grid.multi_index(k));
    }
    const std::string sig = block_signature(a, c, d);
    if (k == 0) {
      sig0 = sig;
    } else if (sig != sig0) {
      throw SingularMetricError(std::string(name) + " block changes signature at node " +
                                    format_node(grid.multi_index(k)),
                                grid.multi_index(k));
    }
    inv[0][0][k] = d / det;
    inv[1][1][k] = a / det;
    if (offdiag) inv[0][1][k] = -c / det;
  }
  inv[1][0] = inv[0][1];
  return inv;
}

}  // namespace

InverseDMetric invert(const DMetric& g, const TensorGrid& grid, double det_floor) {
  g.validate(det_floor);
  InverseDMetric inv;
  inv.h = invert_block(g.h, grid, det_floor, "h");
  inv.v = invert_block(g.v, grid, det_floor, "v");
  return inv;
}

// ---------------------------------------------------------------- frames

GridFunction FrameField::apply(std::size_t beta, const std::array<GridFunction, kDim>& d) const {
  GridFunction out = d[beta];
  if (is_h(beta)) {
    for (std::size_t a = kNh; a < kDim; ++a) add_product(out, -1.0, (*n_)(a, beta), d[a]);
  }
  return out;
}

GridFunction FrameField::apply(std::size_t beta, const GridFunction& f) const {
  std::array<GridFunction, kDim> d;
  d[beta] = chart_->partial(f, beta);
  if (is_h(beta)) {
    for (std::size_t a = kNh; a < kDim; ++a) {
      if (!is_zero((*n_)(a, beta))) d[a] = chart_->partial(f, a);
    }
  }
  return apply(beta, d);
}

std::array<std::array<double, kDim>, kDim> FrameField::frame_at(std::size_t node) const {
  std::array<std::array<double, kDim>, kDim> e{};
  for (std::size_t b = 0; b < kDim; ++b) e[b][b] = 1.0;
  for (std::size_t i = 0; i < kNh; ++i) {
    for (std::size_t a = kNh; a < kDim; ++a) e[i][a] = -at((*n_)(a, i), node);
  }
  return e;
}

std::array<std::array<double, kDim>, kDim> FrameField::coframe_at(std::size_t node) const {
  std::array<std::array<double, kDim>, kDim> c{};
  for (std::size_t b = 0; b < kDim; ++b) c[b][b] = 1.0;
  for (std::size_t a = kNh; a < kDim; ++a) {
    for (std::size_t i = 0; i < kNh; ++i) c[a][i] = at((*n_)(a, i), node);
  }
  return c;
}

double FrameField::duality_residual() const {
  double r = 0.0;
  for (std::size_t k = 0; k < chart_->grid().size(); ++k) {
    const auto e = frame_at(k);
    const auto c = coframe_at(k);
    for (std::size_t b = 0; b < kDim; ++b) {
      for (std::size_t g = 0; g < kDim; ++g) {
        double s = 0.0;
        for (std::size_t m = 0; m < kDim; ++m) s += c[b][m] * e[g][m];
        r = std::max(r, std::abs(s - (b == g ? 1.0 : 0.0)));
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------- nonholonomy

Nonholonomy nonholonomy(const FrameField& frames) {
  const Chart& chart = frames.chart();
  const NConnectionField& n = frames.n();
  Nonholonomy out;
  for (std::size_t a = kNh; a < kDim; ++a) {
    // e_i N^a_j for all i, j.
    std::array<std::array<GridFunction, 2>, 2> eN;
    for (std::size_t i = 0; i < kNh; ++i) {
      for (std::size_t j = 0; j < kNh; ++j) eN[i][j] = frames.apply(i, n(a, j));
    }
    for (std::size_t j = 0; j < kNh; ++j) {
      for (std::size_t i = 0; i < kNh; ++i) {
        GridFunction om;
        axpy(om, 1.0, eN[i][j]);
        axpy(om, -1.0, eN[j][i]);
        out.omega[a - kNh][j][i] = compact(std::move(om));
      }
    }
    for (std::size_t i = 0; i < kNh; ++i) {
      for (std::size_t j = 0; j < kNh; ++j) out.W(a, i, j) = out.omega[a - kNh][i][j];
      for (std::size_t b = kNh; b < kDim; ++b) {
        const GridFunction dn = chart.partial(n(a, i), b);
        out.W(a, i, b) = dn;
        GridFunction neg;
        axpy(neg, -1.0, dn);
        out.W(a, b, i) = std::move(neg);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- connection

DConnection canonical_dconnection(const DMetric& g, const InverseDMetric& gi, const FrameField& frames) {
  const Chart& chart = frames.chart();
  const NConnectionField& n = frames.n();

  // E[mu][alpha][beta] = e_mu g_{alpha beta} for in-block pairs.
  std::array<Tensor2, kDim> E;
  for (std::size_t al = 0; al < kDim; ++al) {
    for (std::size_t be = al; be < kDim; ++be) {
      if (is_h(al) != is_h(be) || is_zero(g(al, be))) continue;
      std::array<GridFunction, kDim> d;
      for (std::size_t m = 0; m < kDim; ++m) d[m] = chart.partial(g(al, be), m);
      for (std::size_t m = 0; m < kDim; ++m) {
        E[m](al, be) = frames.apply(m, d);
        E[m](be, al) = E[m](al, be);
      }
    }
  }
  // dN[b][a][k] = d_b N^a_k.
  Tensor3 dN;
  for (std::size_t b = kNh; b < kDim; ++b) {
    for (std::size_t a = kNh; a < kDim; ++a) {
      for (std::size_t k = 0; k < kNh; ++k) dN(b, a, k) = chart.partial(n(a, k), b);
    }
  }

  DConnection conn;
  Tensor3& G = conn.gamma;
  for (std::size_t i = 0; i < kNh; ++i) {
    for (std::size_t j = 0; j < kNh; ++j) {
      for (std::size_t k = 0; k < kNh; ++k) {
        GridFunction L;
        for (std::size_t r = 0; r < kNh; ++r) {
          add_product(L, 0.5, gi(i, r), E[k](j, r));
          add_product(L, 0.5, gi(i, r), E[j](k, r));
          add_product(L, -0.5, gi(i, r), E[r](j, k));
        }
        G(i, j, k) = compact(std::move(L));
      }
      for (std::size_t c = kNh; c < kDim; ++c) {
        GridFunction C;
        for (std::size_t k = 0; k < kNh; ++k) add_product(C, 0.5, gi(i, k), E[c](j, k));
        G(i, j, c) = compact(std::move(C));
      }
    }
  }
  for (std::size_t a = kNh; a < kDim; ++a) {
    for (std::size_t b = kNh; b < kDim; ++b) {
      for (std::size_t k = 0; k < kNh; ++k) {
        GridFunction L;
        axpy(L, 1.0, dN(b, a, k));
        for (std::size_t c = kNh; c < kDim; ++c) {
          add_product(L, 0.5, gi(a, c), E[k](b, c));
          for (std::size_t d = kNh; d < kDim; ++d) {
            add_product3(L, -0.5, gi(a, c), g(d, c), dN(b, d, k));
            add_product3(L, -0.5, gi(a, c), g(d, b), dN(c, d, k));
          }
        }
        G(a, b, k) = compact(std::move(L));
      }
      for (std::size_t c = kNh; c < kDim; ++c) {
        GridFunction C;
        for (std::size_t d = kNh; d < kDim; ++d) {
          add_product(C, 0.5, gi(a, d), E[c](b, d));
          add_product(C, 0.5, gi(a, d), E[b](c, d));
          add_product(C, -0.5, gi(a, d), E[d](b, c));
        }
        G(a, b, c) = compact(std::move(C));
      }
    }
  }
  return conn;
}

// ---------------------------------------------------------------- torsion / curvature

Tensor3 torsion(const DConnection& conn, const Nonholonomy& nh) {
  Tensor3 T;
  for (std::size_t t = 0; t < kDim; ++t) {
    for (std::size_t g = 0; g < kDim; ++g) {
      for (std::size_t d = 0; d < kDim; ++d) {
        GridFunction v;
        axpy(v, 1.0, conn.gamma(t, d, g));
        axpy(v, -1.0, conn.gamma(t, g, d));
        axpy(v, -1.0, nh.W(t, g, d));
        T(t, g, d) = compact(std::move(v));
      }
    }
  }
  return T;
}

Tensor4 curvature(const DConnection& conn, const FrameField& frames, const Nonholonomy& nh) {
  const Chart& chart = frames.chart();
  const Tensor3& G = conn.gamma;
  std::array<Tensor3, kDim> dG;
  for (std::size_t idx = 0; idx < 64; ++idx) {
    if (is_zero(G.c[idx])) continue;
    std::array<GridFunction, kDim> d;
    for (std::size_t m = 0; m < kDim; ++m) d[m] = chart.partial(G.c[idx], m);
    for (std::size_t delta = 0; delta < kDim; ++delta) dG[delta].c[idx] = frames.apply(delta, d);
  }
  Tensor4 R;
  for (std::size_t t = 0; t < kDim; ++t) {
    for (std::size_t b = 0; b < kDim; ++b) {
      for (std::size_t g = 0; g < kDim; ++g) {
        for (std::size_t d = g + 1; d < kDim; ++d) {
          GridFunction r;
          axpy(r, 1.0, dG[d](t, b, g));
          axpy(r, -1.0, dG[g](t, b, d));
          for (std::size_t m = 0; m < kDim; ++m) {
            add_product(r, 1.0, G(m, b, g), G(t, m, d));
            add_product(r, -1.0, G(m, b, d), G(t, m, g));
            add_product(r, -1.0, nh.W(m, d, g), G(t, b, m));
          }
          r = compact(std::move(r));
          GridFunction neg;
          axpy(neg, -1.0, r);
          R(t, b, g, d) = std::move(r);
          R(t, b, d, g) = std::move(neg);
        }
      }
    }
  }
  return R;
}

Tensor2 ricci(const Tensor4& R) {
  Tensor2 ric;
  for (std::size_t a = 0; a < kDim; ++a) {
    for (std::size_t b = 0; b < kDim; ++b) {
      GridFunction s;
      for (std::size_t t = 0; t < kDim; ++t) axpy(s, 1.0, R(t, a, b, t));
      ric(a, b) = compact(std::move(s));
    }
  }
  return ric;
}

ScalarCurvature scalar_curvature(const Tensor2& ric, const InverseDMetric& gi, const TensorGrid& grid) {
  ScalarCurvature s;
  for (std::size_t i = 0; i < kNh; ++i) {
    for (std::size_t j = 0; j < kNh; ++j) add_product(s.h_trace, 1.0, gi(i, j), ric(i, j));
  }
  for (std::size_t a = kNh; a < kDim; ++a) {
    for (std::size_t b = kNh; b < kDim; ++b) add_product(s.v_trace, 1.0, gi(a, b), ric(a, b));
  }
  if (is_zero(s.h_trace)) s.h_trace = GridFunction(grid);
  if (is_zero(s.v_trace)) s.v_trace = GridFunction(grid);
  s.total = s.h_trace + s.v_trace;
  return s;
}

Tensor2 einstein_tensor(const Tensor2& ric, const GridFunction& total, const DMetric& g, const TensorGrid&) {
  Tensor2 G;
  for (std::size_t a = 0; a < kDim; ++a) {
    for (std::size_t b = 0; b < kDim; ++b) {
      GridFunction e;
      axpy(e, 1.0, ric(a, b));
      add_product(e, -0.5, g(a, b), total);
      G(a, b) = compact(std::move(e));
    }
  }
  return G;
}

Tensor2 raise_first(const Tensor2& t, const InverseDMetric& gi, const TensorGrid&) {
  Tensor2 out;
  for (std::size_t a = 0; a < kDim; ++a) {
    for (std::size_t b = 0; b < kDim; ++b) {
      GridFunction s;
      for (std::size_t c = 0; c < kDim; ++c) add_product(s, 1.0, gi(a, c), t(c, b));
      out(a, b) = compact(std::move(s));
    }
  }
  return out;
}

double metric_compatibility_residual(const DConnection& conn, const DMetric& g, const FrameField& frames) {
  double r = 0.0;
  for (std::size_t al = 0; al < kDim; ++al) {
    for (std::size_t be = al; be < kDim; ++be) {
      if (is_h(al) != is_h(be)) continue;
      for (std::size_t ga = 0; ga < kDim; ++ga) {
        GridFunction d = frames.apply(ga, g(al, be));
        for (std::size_t t = 0; t < kDim; ++t) {
          add_product(d, -1.0, conn.gamma(t, al, ga), g(t, be));
          add_product(d, -1.0, conn.gamma(t, be, ga), g(al, t));
        }
        r = std::max(r, max_norm(d));
      }
    }
  }
  return r;
}

bool ConstraintReport::all_pass() const {
  return std::all_of(families.begin(), families.end(), [](const ConstraintFamily& f) { return f.pass; });
}

ConstraintReport check_lc_constraints(const DConnection& conn, const Nonholonomy& nh, const FrameField& frames,
                                      double tolerance) {
  const Chart& chart = frames.chart();
  const NConnectionField& n = frames.n();
  ConstraintReport rep;
  rep.tolerance = tolerance;
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  for (std::size_t c = kNh; c < kDim; ++c) {
    for (std::size_t a = kNh; a < kDim; ++a) {
      for (std::size_t j = 0; j < kNh; ++j) {
        GridFunction d;
        axpy(d, 1.0, conn.gamma(c, a, j));
        axpy(d, -1.0, chart.partial(n(c, j), a));
        r1 = std::max(r1, max_norm(d));
      }
    }
  }
  for (std::size_t i = 0; i < kNh; ++i) {
    for (std::size_t j = 0; j < kNh; ++j) {
      for (std::size_t b = kNh; b < kDim; ++b) r2 = std::max(r2, max_norm(conn.gamma(i, j, b)));
    }
  }
  for (const auto& a : nh.omega) {
    for (const auto& row : a) {
      for (const auto& f : row) r3 = std::max(r3, max_norm(f));
    }
  }
  rep.families.push_back({"L^c_aj = e_a N^c_j", r1, r1 <= tolerance});
  rep.families.push_back({"C^i_jb = 0", r2, r2 <= tolerance});
  rep.families.push_back({"Omega^a_ji = 0", r3, r3 <= tolerance});
  return rep;
}

GeometryStack compute_stack(const Chart& chart, const DMetric& g, const NConnectionField& n, double det_floor) {
  for (const auto& row : n.N) {
    for (const auto& f : row) {
      if (!is_zero(f)) f.require_finite("N-connection coefficient");
    }
  }
  GeometryStack s;
  s.ginv = invert(g, chart.grid(), det_floor);
  const FrameField frames(chart, n);
  s.nonholonomy = nonholonomy(frames);
  s.connection = canonical_dconnection(g, s.ginv, frames);
  s.torsion = torsion(s.connection, s.nonholonomy);
  s.curvature = curvature(s.connection, frames, s.nonholonomy);
  s.ricci = ricci(s.curvature);
  s.scalar = scalar_curvature(s.ricci, s.ginv, chart.grid());
  s.einstein = einstein_tensor(s.ricci, s.scalar.total, g, chart.grid());
  return s;
}

double commutator_residual(const FrameField& frames, const Nonholonomy& nh, const GridFunction& f) {
  std::array<GridFunction, kDim> ef;
  for (std::size_t b = 0; b < kDim; ++b) ef[b] = frames.apply(b, f);
  double r = 0.0;
  for (std::size_t al = 0; al < kDim; ++al) {
    for (std::size_t be = al + 1; be < kDim; ++be) {
      GridFunction c;
      axpy(c, 1.0, frames.apply(al, ef[be]));
      axpy(c, -1.0, frames.apply(be, ef[al]));
      for (std::size_t g = 0; g < kDim; ++g) add_product(c, -1.0, nh.W(g, al, be), ef[g]);
      r = std::max(r, max_norm(c));
    }
  }
  return r;
}

}  // namespace fracgeo
