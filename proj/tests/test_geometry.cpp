#include <cmath>
#include <random>

#include "doctest.h"
#include "fracgeo/errors.hpp"
#include "fracgeo/fractional_ops.hpp"
#include "fracgeo/geometry.hpp"
#include "oracles.hpp"

using namespace fracgeo;
using P = std::array<double, kDim>;

namespace {

Chart full_chart(std::size_t n, double alpha) {
  return Chart({AxisSpec::sampled(Grid1D::uniform(0.5, 1.5, n), alpha),
                AxisSpec::sampled(Grid1D::uniform(0.2, 1.0, n), alpha),
                AxisSpec::sampled(Grid1D::uniform(1.0, 2.0, n), alpha),
                AxisSpec::sampled(Grid1D::uniform(0.0, 0.5, n), alpha)});
}

/// Nontrivial d-metric and N-connection on a 4-D chart.
struct TestCase {
  DMetric g;
  NConnectionField n;
};

TestCase nontrivial(const Chart& c) {
  TestCase t;
  t.g.h[0][0] = c.sample([](const P& u) { return 1.0 + 0.3 * u[1] * u[2]; });
  t.g.h[1][1] = c.sample([](const P& u) { return 2.0 + std::sin(u[0]) * 0.5 + 0.1 * u[3]; });
  t.g.h[0][1] = c.sample([](const P& u) { return 0.1 * u[0] * u[2]; });
  t.g.h[1][0] = t.g.h[0][1];
  t.g.v[0][0] = c.sample([](const P& u) { return 1.5 + 0.2 * u[0] * u[2] * u[2]; });
  t.g.v[1][1] = c.sample([](const P& u) { return -1.0 - 0.25 * u[1] * u[2] - 0.1 * u[3] * u[3]; });
  t.n.N[0][0] = c.sample([](const P& u) { return 0.3 * u[1] * u[2]; });
  t.n.N[0][1] = c.sample([](const P& u) { return 0.2 * std::sin(u[0]) * u[2] * u[2]; });
  t.n.N[1][0] = c.sample([](const P& u) { return 0.1 * u[0] * u[3]; });
  t.n.N[1][1] = c.sample([](const P& u) { return 0.25 * u[2] * u[1] * u[1]; });
  return t;
}

double max_all(const Tensor3& t) {
  double m = 0.0;
  for (const auto& f : t.c) m = std::max(m, max_norm(f));
  return m;
}
double max_all(const Tensor4& t) {
  double m = 0.0;
  for (const auto& f : t.c) m = std::max(m, max_norm(f));
  return m;
}
double max_all(const Tensor2& t) {
  double m = 0.0;
  for (const auto& f : t.c) m = std::max(m, max_norm(f));
  return m;
}

}  // namespace

TEST_CASE("constant metric with zero N gives an exactly flat stack") {
  for (double alpha : {0.5, 1.0}) {
    const Chart c = full_chart(6, alpha);
    const DMetric g = DMetric::diagonal(GridFunction::constant(c.grid(), 1.0), GridFunction::constant(c.grid(), 2.0),
                                        GridFunction::constant(c.grid(), -1.0), GridFunction::constant(c.grid(), 3.0));
    const GeometryStack s = compute_stack(c, g, NConnectionField{});
    CHECK(max_all(s.torsion) == 0.0);
    CHECK(max_all(s.curvature) == 0.0);
    CHECK(max_all(s.ricci) == 0.0);
    CHECK(max_all(s.einstein) == 0.0);
    CHECK(max_norm(s.scalar.total) == 0.0);
    CHECK(max_all(s.connection.gamma) == 0.0);
  }
}

TEST_CASE("frames: identity for zero N and exact duality for any N") {
  const Chart c = full_chart(5, 0.7);
  NConnectionField zero;
  const FrameField f0(c, zero);
  const auto e = f0.frame_at(17);
  for (std::size_t a = 0; a < kDim; ++a)
    for (std::size_t b = 0; b < kDim; ++b) CHECK(e[a][b] == (a == b ? 1.0 : 0.0));
  const TestCase t = nontrivial(c);
  const FrameField f1(c, t.n);
  CHECK(f1.duality_residual() == 0.0);
}

TEST_CASE("e_1 with N^3_1 = x1 matches a composition of Caputo partials") {
  const Chart c = full_chart(7, 0.5);
  NConnectionField n;
  n.N[0][0] = c.sample([](const P& u) { return u[0]; });
  const FrameField fr(c, n);
  const GridFunction f = c.sample([](const P& u) { return u[0] * u[0] * u[2]; });
  const GridFunction got = fr.apply(0, f);
  GridFunction want = caputo_partial(f, 0, FracOrder(0.5));
  const GridFunction dv = caputo_partial(f, 2, FracOrder(0.5));
  for (std::size_t k = 0; k < want.size(); ++k) want[k] -= c.point(k)[0] * dv[k];
  CHECK(max_abs_diff(got, want) < 1e-14);
}

TEST_CASE("nonholonomy coefficients") {
  const Chart c = full_chart(6, 1.0);
  NConnectionField n;
  n.N[0][0] = GridFunction::constant(c.grid(), 2.0);
  n.N[1][1] = GridFunction::constant(c.grid(), -0.5);
  const Nonholonomy z = nonholonomy(FrameField(c, n));
  CHECK(max_all(z.W) == 0.0);

  NConnectionField lin;
  lin.N[0][0] = c.sample([](const P& u) { return u[2]; });  // N^3_1 = v
  const Nonholonomy w = nonholonomy(FrameField(c, lin));
  CHECK(w.W(2, 0, 2).max_abs() == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : w.W(2, 0, 2).values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : w.W(2, 2, 0).values()) CHECK(v == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("commutator brute force matches W e_gamma at alpha = 1") {
  double prev = 0.0;
  for (std::size_t n : {9u, 17u}) {
    const Chart c = full_chart(n, 1.0);
    const TestCase t = nontrivial(c);
    const FrameField fr(c, t.n);
    const Nonholonomy nh = nonholonomy(fr);
    const GridFunction f = c.sample([](const P& u) { return std::sin(u[0] + u[2]) * std::cos(u[3]) + u[1] * u[2]; });
    const double r = commutator_residual(fr, nh, f);
    if (prev > 0.0) CHECK(oracle::order(prev, r) > 1.5);
    prev = r;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("canonical connection reproduces polar Christoffel symbols at alpha = 1") {
  const Chart c({AxisSpec::sampled(Grid1D::uniform(1.0, 2.0, 11), 1.0), AxisSpec::sampled(Grid1D::uniform(0.0, 1.0, 5), 1.0),
                 AxisSpec::ignorable(), AxisSpec::ignorable()});
  const DMetric g = DMetric::diagonal(GridFunction::constant(c.grid(), 1.0), c.sample([](const P& u) { return u[0] * u[0]; }),
                                      GridFunction::constant(c.grid(), 1.0), GridFunction::constant(c.grid(), 1.0));
  const NConnectionField n;
  const InverseDMetric gi = invert(g, c.grid());
  const FrameField fr(c, n);
  const DConnection conn = canonical_dconnection(g, gi, fr);
  for (std::size_t k = 0; k < c.grid().size(); ++k) {
    const double r = c.point(k)[0];
    CHECK(conn.gamma(0, 1, 1)[k] == doctest::Approx(-r).epsilon(1e-12));
    CHECK(conn.gamma(1, 0, 1)[k] == doctest::Approx(1.0 / r).epsilon(1e-12));
    CHECK(conn.gamma(1, 1, 0)[k] == doctest::Approx(1.0 / r).epsilon(1e-12));
  }
  CHECK(is_zero(conn.gamma(0, 0, 0)));
}

TEST_CASE("canonical connection: metric compatibility and torsion purity") {
  for (double alpha : {0.5, 1.0}) {
    const Chart c = full_chart(6, alpha);
    const TestCase t = nontrivial(c);
    const FrameField fr(c, t.n);
    const GeometryStack s = compute_stack(c, t.g, t.n);
    CHECK(metric_compatibility_residual(s.connection, t.g, fr) < 1e-12);
    double hh = 0.0, vv = 0.0, mixed_vs_omega = 0.0;
    for (std::size_t i = 0; i < kNh; ++i)
      for (std::size_t j = 0; j < kNh; ++j)
        for (std::size_t k = 0; k < kNh; ++k) hh = std::max(hh, max_norm(s.torsion(i, j, k)));
    for (std::size_t a = kNh; a < kDim; ++a)
      for (std::size_t b = kNh; b < kDim; ++b)
        for (std::size_t cc = kNh; cc < kDim; ++cc) vv = std::max(vv, max_norm(s.torsion(a, b, cc)));
    for (std::size_t a = kNh; a < kDim; ++a) {
      for (std::size_t j = 0; j < kNh; ++j) {
        for (std::size_t i = 0; i < kNh; ++i) {
          GridFunction d = s.torsion(a, j, i);
          const GridFunction& om = s.nonholonomy.omega[a - kNh][j][i];
          if (is_zero(d)) d = GridFunction(c.grid());
          if (!is_zero(om)) d += om;
          mixed_vs_omega = std::max(mixed_vs_omega, d.max_abs());
        }
      }
    }
    CHECK(hh < 1e-12);
    CHECK(vv < 1e-12);
    CHECK(mixed_vs_omega < 1e-13);
    CHECK(max_norm(s.nonholonomy.omega[0][0][1]) > 1e-3);
  }
}

TEST_CASE("curvature antisymmetry, Ricci contraction and trace identity") {
  const Chart c = full_chart(6, 0.8);
  const TestCase t = nontrivial(c);
  const GeometryStack s = compute_stack(c, t.g, t.n);
  for (std::size_t tt = 0; tt < kDim; ++tt)
    for (std::size_t b = 0; b < kDim; ++b)
      for (std::size_t g = 0; g < kDim; ++g)
        for (std::size_t d = 0; d < kDim; ++d) {
          const GridFunction& x = s.curvature(tt, b, g, d);
          const GridFunction& y = s.curvature(tt, b, d, g);
          CHECK(is_zero(x) == is_zero(y));
          if (!is_zero(x)) CHECK(max_abs_diff(x, -1.0 * y) == 0.0);
        }
  // Block contractions: R_ij = R^k_ijk, R_ia = -R^k_ika, R_ai = R^b_aib, R_ab = R^c_abc.
  auto block_sum = [&](std::size_t a, std::size_t b, bool h_range, std::size_t last, bool swap) {
    GridFunction sum(c.grid());
    for (std::size_t k = h_range ? 0 : kNh; k < (h_range ? kNh : kDim); ++k) {
      const GridFunction& r = swap ? s.curvature(k, a, k, last) : s.curvature(k, a, b, k);
      if (!is_zero(r)) sum += (swap ? -1.0 : 1.0) * r;
    }
    return sum;
  };
  auto comp = [&](const GridFunction& f) { return is_zero(f) ? GridFunction(c.grid()) : f; };
  CHECK(max_abs_diff(comp(s.ricci(0, 1)), block_sum(0, 1, true, 0, false)) < 1e-12);
  CHECK(max_abs_diff(comp(s.ricci(0, 2)), block_sum(0, 2, true, 2, true)) < 1e-12);
  CHECK(max_abs_diff(comp(s.ricci(3, 1)), block_sum(3, 1, false, 0, false)) < 1e-12);
  CHECK(max_abs_diff(comp(s.ricci(2, 3)), block_sum(2, 3, false, 0, false)) < 1e-12);
  // g^{ab} G_ab = -sR in four dimensions.
  GridFunction tr(c.grid());
  for (std::size_t a = 0; a < kDim; ++a)
    for (std::size_t b = 0; b < kDim; ++b) {
      const GridFunction& gi = s.ginv(a, b);
      const GridFunction& G = s.einstein(a, b);
      if (is_zero(gi) || is_zero(G)) continue;
      for (std::size_t k = 0; k < tr.size(); ++k) tr[k] += gi[k] * G[k];
    }
  CHECK(max_abs_diff(tr, -1.0 * s.scalar.total) < 1e-9 * std::max(1.0, s.scalar.total.max_abs()));
  CHECK(max_abs_diff(s.scalar.total, s.scalar.h_trace + s.scalar.v_trace) == 0.0);
}

TEST_CASE("two-sphere h-block has scalar curvature 2 at alpha = 1") {
  double prev = 0.0;
  for (std::size_t n : {33u, 65u, 129u}) {
    const Chart c({AxisSpec::sampled(Grid1D::uniform(0.5, 2.5, n), 1.0), AxisSpec::ignorable(), AxisSpec::ignorable(),
                   AxisSpec::ignorable()});
    const DMetric g = DMetric::diagonal(GridFunction::constant(c.grid(), 1.0),
                                        c.sample([](const P& u) { return std::sin(u[0]) * std::sin(u[0]); }),
                                        GridFunction::constant(c.grid(), 1.0), GridFunction::constant(c.grid(), 1.0));
    const GeometryStack s = compute_stack(c, g, NConnectionField{});
    double e = 0.0;
    for (double v : s.scalar.total.values()) e = std::max(e, std::abs(v - 2.0));
    if (prev > 0.0) CHECK(oracle::order(prev, e) >= 1.0);
    prev = e;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("polar x Rindler product is Ricci flat at alpha = 1") {
  double prev = 0.0;
  for (std::size_t n : {17u, 33u, 65u}) {
    const Chart c({AxisSpec::sampled(Grid1D::uniform(1.0, 2.0, n), 1.0), AxisSpec::ignorable(),
                   AxisSpec::sampled(Grid1D::uniform(1.0, 2.0, n), 1.0), AxisSpec::ignorable()});
    const DMetric g = DMetric::diagonal(GridFunction::constant(c.grid(), 1.0), c.sample([](const P& u) { return u[0] * u[0]; }),
                                        GridFunction::constant(c.grid(), 1.0), c.sample([](const P& u) { return -u[2] * u[2]; }));
    const GeometryStack s = compute_stack(c, g, NConnectionField{});
    const double e = max_all(s.ricci);
    if (prev > 0.0) CHECK(oracle::order(prev, e) >= 1.5);
    prev = e;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("Einstein tensor symmetric for torsion-free integer case") {
  double prev = 0.0;
  for (std::size_t n : {9u, 17u, 33u}) {
  const Chart c({AxisSpec::sampled(Grid1D::uniform(0.5, 1.5, n), 1.0), AxisSpec::sampled(Grid1D::uniform(0.5, 1.5, n), 1.0),
                 AxisSpec::sampled(Grid1D::uniform(1.0, 2.0, n), 1.0), AxisSpec::ignorable()});
  const DMetric g = DMetric::diagonal(c.sample([](const P& u) { return 1.0 + u[0] * u[1]; }),
                                      c.sample([](const P& u) { return 2.0 + u[0]; }),
                                      c.sample([](const P& u) { return 1.0 + u[2] * u[2]; }),
                                      c.sample([](const P& u) { return -1.0 - u[2]; }));
  const GeometryStack s = compute_stack(c, g, NConnectionField{});
  // Symmetry holds in the continuum; the discrete asymmetry is truncation error.
  double asym = 0.0;
  for (std::size_t a = 0; a < kDim; ++a)
    for (std::size_t b = a + 1; b < kDim; ++b) {
      GridFunction x = s.einstein(a, b), y = s.einstein(b, a);
      if (is_zero(x)) x = GridFunction(c.grid());
      if (is_zero(y)) y = GridFunction(c.grid());
      asym = std::max(asym, max_abs_diff(x, y));
    }
  if (prev > 0.0) CHECK(oracle::order(prev, asym) >= 1.5);
  prev = asym;
  }
}

TEST_CASE("Levi-Civita constraint report") {
  const Chart c = full_chart(5, 1.0);
  const DMetric flat = DMetric::diagonal(GridFunction::constant(c.grid(), 1.0), GridFunction::constant(c.grid(), 1.0),
                                         GridFunction::constant(c.grid(), 1.0), GridFunction::constant(c.grid(), -1.0));
  const NConnectionField zero;
  const FrameField f0(c, zero);
  const GeometryStack s0 = compute_stack(c, flat, zero);
  CHECK(check_lc_constraints(s0.connection, s0.nonholonomy, f0, 1e-10).all_pass());

  const TestCase t = nontrivial(c);
  const FrameField f1(c, t.n);
  const GeometryStack s1 = compute_stack(c, t.g, t.n);
  const ConstraintReport rep = check_lc_constraints(s1.connection, s1.nonholonomy, f1, 1e-10);
  CHECK_FALSE(rep.all_pass());
  CHECK_FALSE(rep.families[2].pass);
  CHECK(rep.families[2].residual > 1e-3);
}

TEST_CASE("singular metric block reports the node") {
  const Chart c = full_chart(4, 1.0);
  const GridFunction one = GridFunction::constant(c.grid(), 1.0);
  GridFunction bad = one;
  bad[c.grid().flat_index(std::vector<std::size_t>{1, 2, 3, 0})] = 0.0;
  const DMetric g = DMetric::diagonal(one, one, bad, one);
  try {
    invert(g, c.grid());
    FAIL("expected SingularMetricError");
  } catch (const SingularMetricError& e) {
    CHECK(e.node() == std::vector<std::size_t>{1, 2, 3, 0});
  }
}

TEST_CASE("property: random constant-coefficient metrics are exactly flat") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Chart c = full_chart(4, trial % 2 ? 0.5 : 1.0);
    DMetric g = DMetric::diagonal(GridFunction::constant(c.grid(), u(rng)), GridFunction::constant(c.grid(), u(rng)),
                                  GridFunction::constant(c.grid(), -u(rng)), GridFunction::constant(c.grid(), u(rng)));
    g.h[0][1] = GridFunction::constant(c.grid(), 0.1 * u(rng));
    g.h[1][0] = g.h[0][1];
    NConnectionField n;
    n.N[0][1] = GridFunction::constant(c.grid(), u(rng));
    const GeometryStack s = compute_stack(c, g, n);
    CHECK(max_all(s.curvature) == 0.0);
    CHECK(max_all(s.torsion) == 0.0);
  }
}
