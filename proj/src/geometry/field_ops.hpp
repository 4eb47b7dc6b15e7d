#pragma once

#include "fracgeo/grid.hpp"

// Pointwise algebra on fields where an empty GridFunction means zero.
namespace fracgeo::fields {

/// acc += s * x
void axpy(GridFunction& acc, double s, const GridFunction& x);
/// acc += s * x * y
void add_product(GridFunction& acc, double s, const GridFunction& x, const GridFunction& y);
/// acc += s * x * y * z
void add_product3(GridFunction& acc, double s, const GridFunction& x, const GridFunction& y,
                  const GridFunction& z);
/// Empty if every sample is exactly zero.
GridFunction compact(GridFunction f);

}  // namespace fracgeo::fields
