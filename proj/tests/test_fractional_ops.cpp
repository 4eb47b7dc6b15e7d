#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fracgeo/errors.hpp"
#include "fracgeo/fractional_ops.hpp"
#include "fracgeo/kernels.hpp"
#include "oracles.hpp"

using namespace fracgeo;

namespace {

GridFunction sample(const Grid1D& g, double (*f)(double)) { return GridFunction::sample(g, f); }

double power_rule(double beta, double alpha, double x) {
  return std::tgamma(beta + 1.0) / std::tgamma(beta + 1.0 - alpha) * std::pow(x, beta - alpha);
}

double max_err_power(double beta, double alpha, std::size_t n) {
  const Grid1D g = Grid1D::uniform(0.0, 1.0, n);
  const GridFunction f = GridFunction::sample(g, [&](double x) { return std::pow(x, beta); });
  const GridFunction d = caputo_left(f, FracOrder(alpha));
  double e = 0.0;
  for (std::size_t k = 0; k < n; ++k) e = std::max(e, std::abs(d[k] - power_rule(beta, alpha, g.node(k))));
  return e;
}

}  // namespace

TEST_CASE("grid and order preconditions") {
  CHECK_THROWS_AS(FracOrder(0.0), DomainError);
  CHECK_THROWS_AS(FracOrder(1.5), DomainError);
  CHECK_THROWS_AS(Grid1D::uniform(1.0, 1.0, 10), DomainError);
  CHECK_THROWS_AS(Grid1D::uniform(0.0, 1.0, 2), DomainError);
  const double bad[] = {0.0, 0.1, 0.3, 0.4};
  CHECK_THROWS_AS(Grid1D::from_nodes(bad), DomainError);
  const double good[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  CHECK(Grid1D::from_nodes(good).spacing() == doctest::Approx(0.25));
  CHECK(Grid1D::uniform(0.0, 1.0, 5).refined().size() == 9);
}

TEST_CASE("caputo_left of a constant is exactly zero") {
  const Grid1D g = Grid1D::uniform(0.0, 1.0, 33);
  for (double a : {0.25, 0.5, 1.0}) {
    const GridFunction d = caputo_left(GridFunction::constant(TensorGrid({g}), 5.0), FracOrder(a));
    CHECK(d.max_abs() == 0.0);
    const GridFunction r = caputo_right(GridFunction::constant(TensorGrid({g}), 5.0), FracOrder(a));
    CHECK(r.max_abs() == 0.0);
  }
}

TEST_CASE("caputo_left of x at alpha 0.5 matches quadrature oracle") {
  const double ref = oracle::caputo_quadrature([](double) { return 1.0; }, 0.0, 1.0, 0.5);
  CHECK(ref == doctest::Approx(2.0 / std::sqrt(std::numbers::pi)).epsilon(1e-12));
  CHECK(ref == doctest::Approx(1.1283791670955126).epsilon(1e-12));
  const Grid1D g = Grid1D::uniform(0.0, 1.0, 65);
  const GridFunction d = caputo_left(sample(g, [](double x) { return x; }), FracOrder(0.5));
  // L1 is exact for piecewise-linear data.
  CHECK(d[64] == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("caputo_left of sin x against quadrature oracle at alpha 0.75") {
  const double alpha = 0.75;
  double prev = 0.0;
  for (std::size_t n : {65u, 129u, 257u}) {
    const Grid1D g = Grid1D::uniform(0.0, 2.0, n);
    const GridFunction d = caputo_left(sample(g, [](double x) { return std::sin(x); }), FracOrder(alpha));
    double e = 0.0;
    for (std::size_t k = 1; k < n; k += (n - 1) / 8) {
      const double ref = oracle::caputo_quadrature([](double t) { return std::cos(t); }, 0.0, g.node(k), alpha);
      e = std::max(e, std::abs(d[k] - ref));
    }
    if (prev > 0.0) CHECK(oracle::order(prev, e) > 2.0 - alpha - 0.3);
    prev = e;
  }
}

TEST_CASE("integer order reduces to classical operators at O(h^2)") {
  double prev_d = 0.0, prev_r = 0.0, prev_i = 0.0;
  for (std::size_t n : {33u, 65u, 129u}) {
    const Grid1D g = Grid1D::uniform(0.0, 1.0, n);
    const GridFunction f = sample(g, [](double x) { return std::sin(x); });
    const GridFunction d = caputo_left(f, FracOrder(1.0));
    const GridFunction r = caputo_right(f, FracOrder(1.0));
    const GridFunction i = rl_integral(f, FracOrder(1.0));
    double ed = 0, er = 0, ei = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = g.node(k);
      ed = std::max(ed, std::abs(d[k] - std::cos(x)));
      er = std::max(er, std::abs(r[k] + std::cos(x)));
      ei = std::max(ei, std::abs(i[k] - (1.0 - std::cos(x))));
    }
    if (prev_d > 0) {
      CHECK(oracle::order(prev_d, ed) > 1.8);
      CHECK(oracle::order(prev_r, er) > 1.8);
      CHECK(oracle::order(prev_i, ei) > 1.8);
    }
    prev_d = ed;
    prev_r = er;
    prev_i = ei;
  }
}

TEST_CASE("caputo_right equals reflected caputo_left") {
  const Grid1D g = Grid1D::uniform(0.0, 1.0, 41);
  const GridFunction f = sample(g, [](double x) { return x; });
  const GridFunction reflected = GridFunction::sample(g, [](double y) { return 1.0 - y; });
  const GridFunction r = caputo_right(f, FracOrder(0.5));
  const GridFunction l = caputo_left(reflected, FracOrder(0.5));
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(r[k] == doctest::Approx(l[g.size() - 1 - k]).epsilon(1e-14));
  // Right derivative of x is -(2x - x)^... : closed form -(1 - x)^(1/2) / Gamma(3/2).
  CHECK(r[0] == doctest::Approx(-1.0 / std::tgamma(1.5)).epsilon(1e-12));
}

TEST_CASE("rl_integral against quadrature oracle") {
  const double one = oracle::rl_quadrature([](double) { return 1.0; }, 0.0, 1.0, 0.5);
  CHECK(one == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-12));
  const Grid1D g = Grid1D::uniform(0.0, 1.0, 17);
  const GridFunction i = rl_integral(GridFunction::constant(TensorGrid({g}), 1.0), FracOrder(0.5));
  CHECK(i[16] == doctest::Approx(one).epsilon(1e-12));
  CHECK(i[0] == 0.0);
  CHECK(rl_integral(GridFunction(TensorGrid({g})), FracOrder(0.5)).max_abs() == 0.0);

  double prev = 0.0;
  for (std::size_t n : {33u, 65u, 129u}) {
    const Grid1D gg = Grid1D::uniform(0.0, 1.5, n);
    const GridFunction r = rl_integral(sample(gg, [](double x) { return std::exp(x); }), FracOrder(0.3));
    const double ref = oracle::rl_quadrature([](double t) { return std::exp(t); }, 0.0, 1.5, 0.3);
    const double e = std::abs(r[n - 1] - ref);
    if (prev > 0) CHECK(oracle::order(prev, e) > 1.7);
    prev = e;
  }
}

TEST_CASE("linearity to machine precision") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 8 + rng() % 60;
    const Grid1D g = Grid1D::uniform(0.0, 1.0 + u(rng) * 0.5 + 0.6, n);
    std::vector<double> fv(n), gv(n);
    for (auto& v : fv) v = u(rng);
    for (auto& v : gv) v = u(rng);
    const double a = u(rng), b = u(rng);
    const FracOrder ord(0.05 + 0.95 * std::abs(u(rng)));
    const GridFunction f(g, fv), h(g, gv);
    const GridFunction lhs = caputo_left(a * f + b * h, ord);
    const GridFunction rhs = a * caputo_left(f, ord) + b * caputo_left(h, ord);
    const double scale = std::max(1.0, lhs.max_abs());
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12 * scale);
  }
}

TEST_CASE("power rule converges at order >= 2 - alpha - 0.3") {
  for (double beta : {2.0, 3.0}) {
    for (double alpha : {0.25, 0.5, 0.75}) {
      const double e1 = max_err_power(beta, alpha, 257);
      const double e2 = max_err_power(beta, alpha, 513);
      CHECK(oracle::order(e1, e2) >= 2.0 - alpha - 0.3);
    }
  }
  // beta = 1: exact up to round-off.
  CHECK(max_err_power(1.0, 0.5, 513) < 1e-12);
}

TEST_CASE("fundamental theorem residuals") {
  const FracOrder ord(0.5);
  double pa = 0.0, pb = 0.0;
  for (std::size_t n : {257u, 513u, 1025u}) {
    const Grid1D g = Grid1D::uniform(0.0, 1.0, n);
    const auto r = check_fundamental(sample(g, [](double x) { return x * x; }), ord);
    if (pa > 0) {
      CHECK(r.residual_a < pa);
      CHECK(r.residual_b < pb);
    }
    pa = r.residual_a;
    pb = r.residual_b;
  }
  CHECK(pa < 1e-3);
  CHECK(pb < 1e-3);
  const Grid1D g = Grid1D::uniform(0.0, 1.0, 65);
  const auto z = check_fundamental(GridFunction(TensorGrid({g})), ord);
  CHECK(z.residual_a == 0.0);
  CHECK(z.residual_b == 0.0);
}

TEST_CASE("caputo_partial applies the 1-D operator along one axis") {
  const Grid1D gx = Grid1D::uniform(0.0, 1.0, 9);
  const Grid1D gv = Grid1D::uniform(0.0, 1.0, 33);
  const TensorGrid tg({gx, gv});
  const GridFunction f = GridFunction::sample(tg, [](std::span<const double> u) { return u[0] * u[1]; });
  const GridFunction d = caputo_partial(f, 1, FracOrder(0.5));
  for (std::size_t k = 0; k < tg.size(); ++k) {
    const double x = tg.coordinate(k, 0), v = tg.coordinate(k, 1);
    CHECK(d[k] == doctest::Approx(x * std::sqrt(v) / std::tgamma(1.5)).epsilon(1e-12));
  }
  CHECK(caputo_partial(GridFunction::constant(tg, 2.0), 0, FracOrder(0.3)).max_abs() == 0.0);
}

TEST_CASE("parallel kernels agree with the serial reference") {
  const TensorGrid tg({Grid1D::uniform(0.0, 1.0, 7), Grid1D::uniform(-1.0, 2.0, 50),
                       Grid1D::uniform(0.5, 1.0, 5)});
  const GridFunction f = GridFunction::sample(
      tg, [](std::span<const double> u) { return std::sin(u[0] + 2 * u[1]) + u[2] * u[1] * u[1]; });
  for (std::size_t axis = 0; axis < 3; ++axis) {
    for (double a : {0.3, 0.9, 1.0}) {
      for (LineOp op : {LineOp::caputo_left, LineOp::rl_integral}) {
        const auto p = kernels::apply_along_axis(f.values(), tg, axis, op, a);
        const auto s = reference::apply_along_axis(f.values(), tg, axis, op, a);
        double e = 0.0, m = 1.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
          e = std::max(e, std::abs(p[k] - s[k]));
          m = std::max(m, std::abs(s[k]));
        }
        CHECK(e <= 1e-11 * m);
      }
    }
  }
}

TEST_CASE("frac basis scale") {
  const Grid1D g = Grid1D::uniform(0.0, 2.0, 9);
  CHECK(frac_basis_scale(g, FracOrder(1.0)).max_abs() == 1.0);
  const GridFunction s = frac_basis_scale(g, FracOrder(0.5));
  CHECK(s[8] == doctest::Approx(std::sqrt(2.0) / std::tgamma(1.5)));
  for (std::size_t k = 0; k < 9; ++k) CHECK(frac_basis_scale(g, FracOrder(1.0))[k] == 1.0);
}
