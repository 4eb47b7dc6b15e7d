#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fracgeo/grid.hpp"

/// Line operators applied along one axis of a tensor grid.
///
/// `kernels` is the production path: weights are tabulated once per call and
/// output nodes of all lines are distributed over OpenMP threads.
/// `reference` is a serial, formula-by-formula implementation kept for
/// cross-checking the parallel path in tests and in the benchmark.
namespace fracgeo {

enum class LineOp { caputo_left, rl_integral };

namespace kernels {

std::vector<double> apply_along_axis(std::span<const double> in, const TensorGrid& grid,
                                     std::size_t axis, LineOp op, double alpha);

}  // namespace kernels

namespace reference {

std::vector<double> apply_along_axis(std::span<const double> in, const TensorGrid& grid,
                                     std::size_t axis, LineOp op, double alpha);

}  // namespace reference

}  // namespace fracgeo
