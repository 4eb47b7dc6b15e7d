#pragma once

#include <cstddef>

#include "fracgeo/grid.hpp"

namespace fracgeo {

/// Left Caputo derivative along a 1-D grid, terminal at the first node.
/// L1 product quadrature for alpha < 1 (node 0 is the empty-history value 0);
/// fourth-order classical differences for alpha == 1.
GridFunction caputo_left(const GridFunction& f, FracOrder ord);

/// Right Caputo derivative, terminal at the last node. Mirror of caputo_left;
/// at alpha == 1 this is -f'.
GridFunction caputo_right(const GridFunction& f, FracOrder ord);

/// Left Riemann-Liouville integral by product-trapezoid quadrature; 0 at node 0.
GridFunction rl_integral(const GridFunction& f, FracOrder ord);

/// caputo_left along one axis of a tensor-grid function, line by line.
GridFunction caputo_partial(const GridFunction& f, std::size_t axis, FracOrder ord);

/// rl_integral along one axis of a tensor-grid function.
GridFunction rl_integral_partial(const GridFunction& f, std::size_t axis, FracOrder ord);

struct FundamentalResiduals {
  /// max |D I f - f| over nodes >= 1 (node 0 carries the empty-history value).
  double residual_a = 0.0;
  /// max |I D f - (f - f(lower))| over all nodes.
  double residual_b = 0.0;
};

/// Residuals of the two fundamental-theorem identities linking caputo_left and
/// rl_integral. Reported, not thresholded.
FundamentalResiduals check_fundamental(const GridFunction& f, FracOrder ord);

/// Eigenfunction residual of E_alpha((x - lower)^alpha) under caputo_left.
/// The max-norm is taken over the upper half of the interval: near the
/// terminal the sample has an x^alpha cusp that no fixed-order quadrature
/// resolves uniformly, and including it would mask the convergence order.
double ml_eigen_check(double alpha, const Grid1D& grid);

/// Same residual with an explicit window start; nodes with x >= window_start
/// enter the max-norm.
double ml_eigen_residual(double alpha, const Grid1D& grid, double window_start);

/// Scale factors (x - lower)^(1-alpha) / Gamma(2-alpha) relating the
/// fractional differential to the ordinary one; identically 1 at alpha == 1.
GridFunction frac_basis_scale(const Grid1D& grid, FracOrder ord);

}  // namespace fracgeo
