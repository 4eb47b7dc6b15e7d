#include <cmath>

#include "classical_fd.hpp"
#include "doctest.h"
#include "fracgeo/errors.hpp"
#include "fracgeo/fractional_ops.hpp"
#include "fracgeo/solution.hpp"

using namespace fracgeo;
using P = std::array<double, kDim>;

namespace {

Chart make_chart(std::size_t nx, std::size_t nv, double ax, double av, double vlo = 1.0, double vhi = 2.0) {
  return Chart({AxisSpec::sampled(Grid1D::uniform(0, 1, nx), ax), AxisSpec::sampled(Grid1D::uniform(0, 1, nx), ax),
                AxisSpec::sampled(Grid1D::uniform(vlo, vhi, nv), av), AxisSpec::ignorable()});
}

SourceSpec vacuum_v(const Chart& c, double u2 = 1.0) {
  return {GridFunction::constant(c.grid(), u2), GridFunction(h_grid(c))};
}

GeneratingData phi_data(const Chart& c, const std::function<double(const P&)>& phi) {
  GeneratingData gd;
  gd.phi = c.sample(phi);
  return gd;
}

double phi_of_v(const P& u) { return u[kV] * u[kV] + 1.0; }

/// Direct dense solve of the five-point Dirichlet problem lap psi = rhs.
std::vector<double> five_point_direct(std::size_t n, double h, double rhs) {
  const std::size_t m = n - 2, N = m * m;
  std::vector<std::vector<double>> A(N, std::vector<double>(N + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t r = i * m + j;
      A[r][r] = -4.0 / (h * h);
      if (i > 0) A[r][r - m] = 1.0 / (h * h);
      if (i + 1 < m) A[r][r + m] = 1.0 / (h * h);
      if (j > 0) A[r][r - 1] = 1.0 / (h * h);
      if (j + 1 < m) A[r][r + 1] = 1.0 / (h * h);
      A[r][N] = rhs;
    }
  }
  for (std::size_t c = 0; c < N; ++c) {
    for (std::size_t r = c + 1; r < N; ++r) {
      const double f = A[r][c] / A[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k <= N; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<double> x(N);
  for (std::size_t r = N; r-- > 0;) {
    double s = A[r][N];
    for (std::size_t k = r + 1; k < N; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  std::vector<double> full(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) full[(i + 1) * n + j + 1] = x[i * m + j];
  return full;
}

}  // namespace

TEST_CASE("psi: zero source gives psi = 0") {
  const Chart c = make_chart(9, 5, 1.0, 1.0);
  const PsiResult r = solve_psi(GridFunction(h_grid(c)), c, {});
  CHECK(r.psi.max_abs() == 0.0);
  CHECK(r.residual == 0.0);
}

TEST_CASE("psi: alpha = 1 matches a direct five-point solve") {
  const std::size_t n = 9;
  const Chart c = make_chart(n, 5, 1.0, 1.0);
  PsiOptions opt;
  opt.tolerance = 1e-13;
  const PsiResult r = solve_psi(GridFunction::constant(h_grid(c), 0.5), c, opt);
  const auto ref = five_point_direct(n, 1.0 / (n - 1), 2.0 * 0.5);
  double err = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) err = std::max(err, std::abs(r.psi[k] - ref[k]));
  CHECK(err < 1e-10);
  CHECK(r.residual <= 1e-13);
}

TEST_CASE("psi: fractional and conformal equations converge below tolerance") {
  SUBCASE("fractional linear") {
    const Chart c = make_chart(9, 5, 0.6, 1.0);
    const GridFunction u4 = GridFunction::sample(h_grid(c), [](std::span<const double> x) { return x[0] + x[1]; });
    const PsiResult r = solve_psi(u4, c, {});
    CHECK(r.residual <= 1e-10);
    CHECK(psi_residual(r.psi, u4, c, {}) == doctest::Approx(r.residual));
  }
  SUBCASE("conformal") {
    const Chart c = make_chart(9, 5, 1.0, 1.0);
    PsiOptions opt;
    opt.equation = PsiEquation::conformal;
    const PsiResult r = solve_psi(GridFunction::constant(h_grid(c), -0.3), c, opt);
    CHECK(r.residual <= 1e-10);
  }
}

TEST_CASE("psi: iteration cap raises ConvergenceError with the last residual") {
  const Chart c = make_chart(17, 5, 1.0, 1.0);
  PsiOptions opt;
  opt.max_iterations = 3;
  try {
    solve_psi(GridFunction::constant(h_grid(c), 1.0), c, opt);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_residual() > opt.tolerance);
    CHECK(std::isfinite(e.last_residual()));
    CHECK(e.iterations() == 3);
  }
}

TEST_CASE("generator: phi = phi(v) gives w = 0 exactly and passes the LC families") {
  for (double ax : {0.5, 1.0}) {
    const Chart c = make_chart(5, 17, ax, 1.0);
    const SolutionBundle sol = generate_solution(phi_data(c, phi_of_v), vacuum_v(c), c);
    CHECK(sol.w[0].max_abs() == 0.0);
    CHECK(sol.w[1].max_abs() == 0.0);
    const ConstraintReport rep = check_lc_solution(sol, 1e-8);
    CHECK(rep.families.size() == 4);
    CHECK(rep.all_pass());
  }
}

TEST_CASE("generator: field-consistent coefficients reconstruct phi, printed ones do not") {
  double prev = 1e300;
  for (std::size_t nv : {17, 33, 65}) {
    const Chart c = make_chart(5, nv, 1.0, 1.0);
    const SolutionBundle sol = generate_solution(phi_data(c, phi_of_v), vacuum_v(c), c);
    const double err = max_abs_diff(sol.aux_phi, sol.phi);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 2e-3);

  const Chart c = make_chart(5, 65, 1.0, 1.0);
  GeneratingData gd = phi_data(c, phi_of_v);
  gd.formula = HFormula::as_printed;
  const SolutionBundle sol = generate_solution(gd, vacuum_v(c), c);
  CHECK(max_abs_diff(sol.aux_phi, sol.phi) > 0.1);
}

TEST_CASE("generator: matches the classical recipe at integer order") {
  const std::size_t nx = 5, nv = 33;
  const Chart c = make_chart(nx, nv, 1.0, 1.0);
  auto phi = [](const P& u) { return u[kV] * u[kV] + 0.3 * u[kX1] * u[kV] - 0.2 * u[kX2] + 1.0; };
  const SolutionBundle sol = generate_solution(phi_data(c, phi), vacuum_v(c, 1.5), c);
  classical::Box b{{0, 0, 1}, {1, 1, 2}, {nx, nx, nv}};
  const auto ref = classical::generate(b, [&](double x1, double x2, double v) { return phi({x1, x2, v, 0}); }, 1.5);
  auto rel = [](const GridFunction& a, const classical::Field& r) {
    double e = 0.0, s = 1.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      e = std::max(e, std::abs(a[k] - r[k]));
      s = std::max(s, std::abs(r[k]));
    }
    return e / s;
  };
  CHECK(rel(sol.h4, ref.h4) < 1e-13);
  CHECK(rel(sol.h3, ref.h3) < 1e-13);
  CHECK(rel(sol.w[0], ref.w1) < 1e-13);
  CHECK(rel(sol.w[1], ref.w2) < 1e-13);
}

TEST_CASE("generator: w formula identity and sign coherence") {
  const Chart c = make_chart(5, 17, 0.75, 1.0);
  auto phi = [](const P& u) { return u[kV] * u[kV] + 0.5 * std::sin(u[kX1]) + u[kX2] * u[kV]; };
  const SolutionBundle sol = generate_solution(phi_data(c, phi), vacuum_v(c), c);
  // w_i phi* + d_i phi = 0 pointwise.
  const GridFunction d1 = c.partial(sol.phi, kX1);
  const GridFunction d2 = c.partial(sol.phi, kX2);
  double r = 0.0;
  for (std::size_t k = 0; k < sol.phi.size(); ++k) {
    r = std::max(r, std::abs(sol.w[0][k] * sol.phi_star[k] + d1[k]));
    r = std::max(r, std::abs(sol.w[1][k] * sol.phi_star[k] + d2[k]));
  }
  CHECK(r < 1e-12);
  for (int s4 : {1, -1}) {
    GeneratingData gd = phi_data(c, phi);
    gd.sign_h4 = s4;
    gd.h4_0 = GridFunction::constant(h_grid(c), s4 * 1.0);
    const SolutionBundle b = generate_solution(gd, vacuum_v(c), c);
    for (double h : b.h4.values()) CHECK(std::signbit(h) == (s4 < 0));
  }
}

TEST_CASE("generator: g1 is v-independent and n is v-constant when n2 = 0") {
  const Chart c = make_chart(9, 9, 1.0, 1.0);
  GeneratingData gd = phi_data(c, phi_of_v);
  const TensorGrid hg = h_grid(c);
  gd.n1[0] = GridFunction::sample(hg, [](std::span<const double> x) { return x[0] * x[1]; });
  gd.n1[1] = GridFunction::sample(hg, [](std::span<const double> x) { return 0.5 * x[0] * x[0]; });
  SourceSpec src = vacuum_v(c);
  src.upsilon4 = GridFunction::constant(hg, 0.4);
  const SolutionBundle sol = generate_solution(gd, src, c);
  CHECK(sol.psi.max_abs() > 0.0);
  const GridFunction g1v = c.partial(sol.g1, kV);
  CHECK(max_norm(g1v) == 0.0);
  CHECK(max_norm(c.partial(sol.n[0], kV)) == 0.0);
  const ConstraintReport rep = check_lc_solution(sol, 1e-8);
  CHECK(rep.all_pass());

  gd.n2[0] = GridFunction::constant(hg, 1.0);
  const ConstraintReport bad = check_lc_solution(generate_solution(gd, src, c), 1e-8);
  CHECK_FALSE(bad.all_pass());
  CHECK_FALSE(bad.families[2].pass);
}

TEST_CASE("generator: n integral is the fractional integral of h3 / |h4|^{3/2}") {
  const Chart c = make_chart(5, 33, 1.0, 0.5);
  GeneratingData gd = phi_data(c, phi_of_v);
  gd.n2[0] = GridFunction::constant(h_grid(c), 1.0);
  const SolutionBundle sol = generate_solution(gd, vacuum_v(c), c);
  CHECK(sol.v_trimmed == 1);
  CHECK(sol.chart.axis(kV).grid->size() == 32);
  // Along each v-line n_1 starts at 0 on the retained terminal and is nonzero after.
  CHECK(sol.n[0][0] != 0.0);
  for (double v : sol.h3.values()) CHECK(v != 0.0);
}

TEST_CASE("generator: precondition failures") {
  const Chart c = make_chart(5, 9, 1.0, 1.0);
  CHECK_THROWS_AS(generate_solution(phi_data(c, [](const P&) { return 2.0; }), vacuum_v(c), c), GenerationError);
  CHECK_THROWS_AS(generate_solution(phi_data(c, phi_of_v), vacuum_v(c, 0.0), c), GenerationError);
  // phi* vanishes on the line v = 1.5.
  const Chart c2 = make_chart(5, 9, 1.0, 1.0);
  try {
    generate_solution(phi_data(c2, [](const P& u) { return (u[kV] - 1.5) * (u[kV] - 1.5) + 1.0; }), vacuum_v(c2), c2);
    FAIL("expected GenerationError");
  } catch (const GenerationError& e) {
    REQUIRE(e.node().size() == 3);
    CHECK(e.node()[2] == 4);
  }
}

TEST_CASE("omega: constant factor is a no-op, y4-only factor keeps the constraint") {
  const Chart c = make_chart(5, 9, 1.0, 1.0);
  GeneratingData gd = phi_data(c, phi_of_v);
  const SourceSpec src = vacuum_v(c);
  const SolutionBundle sol = generate_solution(gd, src, c);
  const Chart oc = c.with_axis(kY4, AxisSpec::sampled(Grid1D::uniform(0, 1, 5), 1.0));

  const SolutionBundle one = apply_omega(sol, oc, GridFunction::constant(oc.grid(), 1.0));
  CHECK(one.omega_residual == 0.0);
  const FieldEquationReport a = verify_field_equations(sol, src);
  const FieldEquationReport b = verify_field_equations(one, src);
  CHECK(a.max_total == doctest::Approx(b.max_total).epsilon(1e-12));

  const SolutionBundle y4 = apply_omega(sol, oc, oc.sample([](const P& u) { return 1.0 + 0.2 * u[kY4]; }));
  CHECK(y4.omega_residual == 0.0);

  // A factor with x-dependence violates e_k omega = 0 (w = n = 0 here).
  const SolutionBundle bad = apply_omega(sol, oc, oc.sample([](const P& u) { return 1.0 + 0.1 * u[kX1]; }));
  CHECK(bad.omega_residual == doctest::Approx(0.1).epsilon(1e-10));
  CHECK_THROWS_AS(apply_omega(sol, oc, GridFunction::constant(oc.grid(), -1.0)), DomainError);
}

TEST_CASE("field equations: flat seed and refinement") {
  SUBCASE("decreases under refinement on the phi(v) setup") {
    double prev = 1e300;
    std::size_t nx = 5, nv = 17;
    for (int r = 0; r < 3; ++r) {
      const Chart c = make_chart(nx, nv, 0.5, 1.0);
      const SourceSpec src = vacuum_v(c);
      const SolutionBundle sol = generate_solution(phi_data(c, phi_of_v), src, c);
      const FieldEquationReport rep = verify_field_equations(sol, src);
      CHECK(rep.max_off_diagonal < 1e-12);
      CHECK(rep.max_diagonal < prev);
      prev = rep.max_diagonal;
      nx = 2 * nx - 1;
      nv = 2 * nv - 1;
    }
  }
  SUBCASE("interior diagonal converges at second order") {
    auto interior_err = [](std::size_t nv) {
      const Chart c = make_chart(5, nv, 1.0, 1.0);
      const SourceSpec src = vacuum_v(c);
      const SolutionBundle sol = generate_solution(phi_data(c, phi_of_v), src, c);
      const GeometryStack st = compute_stack(sol.chart, bundle_metric(sol), bundle_nconnection(sol));
      const Tensor2 G = raise_first(st.einstein, st.ginv, sol.chart.grid());
      double e = 0.0;
      for (std::size_t k = 0; k < c.grid().size(); ++k) {
        const std::size_t iv = c.grid().index_along(k, 2);
        if (iv < nv / 4 || iv > 3 * nv / 4) continue;
        e = std::max(e, std::abs(G(0, 0)[k] - 1.0));
      }
      return e;
    };
    const double e1 = interior_err(33), e2 = interior_err(65);
    CHECK(std::log2(e1 / e2) > 1.8);
    CHECK(e2 < 5e-3);
  }
}

TEST_CASE("field equations: integer order agrees with the classical coordinate computation") {
  const std::size_t nx = 5, nv = 33;
  const Chart c = make_chart(nx, nv, 1.0, 1.0);
  const SourceSpec src = vacuum_v(c);
  const SolutionBundle sol = generate_solution(phi_data(c, phi_of_v), src, c);
  const GeometryStack st = compute_stack(sol.chart, bundle_metric(sol), bundle_nconnection(sol));
  const Tensor2 G = raise_first(st.einstein, st.ginv, c.grid());

  classical::Box b{{0, 0, 1}, {1, 1, 2}, {nx, nx, nv}};
  std::array<std::array<classical::Field, 4>, 4> g;
  for (auto& row : g) for (auto& f : row) f.assign(b.size(), 0.0);
  for (std::size_t p = 0; p < b.size(); ++p) {
    g[0][0][p] = sol.g1[p];
    g[1][1][p] = sol.g2[p];
    g[2][2][p] = sol.h3[p];
    g[3][3][p] = sol.h4[p];
  }
  const auto Gc = classical::einstein_mixed(b, g);
  double err = 0.0;
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t p = 0; p < b.size(); ++p) {
        const double mine = is_zero(G(m, n)) ? 0.0 : G(m, n)[p];
        err = std::max(err, std::abs(mine - Gc[m][n][p]));
      }
  CHECK(err < 1e-10);
}
