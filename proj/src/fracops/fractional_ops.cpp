#include "fracgeo/fractional_ops.hpp"

#include <algorithm>
#include <cmath>

#include "fracgeo/errors.hpp"
#include "fracgeo/kernels.hpp"
#include "fracgeo/mittag_leffler.hpp"

namespace fracgeo {

namespace {

const Grid1D& line_grid(const GridFunction& f) {
  if (f.grid().rank() != 1) throw DomainError("operator expects a function on a 1-D grid");
  return f.grid().axis(0);
}

GridFunction along(const GridFunction& f, std::size_t axis, LineOp op, FracOrder ord) {
  if (axis >= f.grid().rank()) throw DomainError("axis index out of range");
  return GridFunction(f.grid(), kernels::apply_along_axis(f.values(), f.grid(), axis, op,
                                                          ord.alpha()));
}

GridFunction reversed(const GridFunction& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  std::reverse(v.begin(), v.end());
  return GridFunction(f.grid(), std::move(v));
}

}  // namespace

GridFunction caputo_left(const GridFunction& f, FracOrder ord) {
  line_grid(f);
  return along(f, 0, LineOp::caputo_left, ord);
}

GridFunction caputo_right(const GridFunction& f, FracOrder ord) {
  line_grid(f);
  // g(y) = f(a + b - y) on the same grid; right(f)(x) = left(g)(a + b - x).
  return reversed(along(reversed(f), 0, LineOp::caputo_left, ord));
}

GridFunction rl_integral(const GridFunction& f, FracOrder ord) {
  line_grid(f);
  return along(f, 0, LineOp::rl_integral, ord);
}

GridFunction caputo_partial(const GridFunction& f, std::size_t axis, FracOrder ord) {
  return along(f, axis, LineOp::caputo_left, ord);
}

GridFunction rl_integral_partial(const GridFunction& f, std::size_t axis, FracOrder ord) {
  return along(f, axis, LineOp::rl_integral, ord);
}

FundamentalResiduals check_fundamental(const GridFunction& f, FracOrder ord) {
  line_grid(f);
  FundamentalResiduals r;
  const GridFunction da = caputo_left(rl_integral(f, ord), ord);
  for (std::size_t k = 1; k < f.size(); ++k) r.residual_a = std::max(r.residual_a, std::abs(da[k] - f[k]));
  const GridFunction ib = rl_integral(caputo_left(f, ord), ord);
  for (std::size_t k = 0; k < f.size(); ++k) {
    r.residual_b = std::max(r.residual_b, std::abs(ib[k] - (f[k] - f[0])));
  }
  return r;
}

double ml_eigen_residual(double alpha, const Grid1D& grid, double window_start) {
  const FracOrder ord(alpha);
  const double lo = grid.lower();
  const GridFunction e = GridFunction::sample(
      grid, [&](double x) { return mittag_leffler(alpha, std::pow(x - lo, alpha)); });
  const GridFunction d = caputo_left(e, ord);
  double m = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid.node(k) < window_start) continue;
    m = std::max(m, std::abs(d[k] - e[k]));
  }
  return m;
}

double ml_eigen_check(double alpha, const Grid1D& grid) {
  return ml_eigen_residual(alpha, grid, grid.lower() + 0.5 * (grid.upper() - grid.lower()));
}

GridFunction frac_basis_scale(const Grid1D& grid, FracOrder ord) {
  if (ord.is_integer()) return GridFunction::constant(TensorGrid({grid}), 1.0);
  const double a = ord.alpha();
  const double g = std::tgamma(2.0 - a);
  return GridFunction::sample(grid, [&](double x) { return std::pow(x - grid.lower(), 1.0 - a) / g; });
}

}  // namespace fracgeo
