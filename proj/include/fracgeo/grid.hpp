#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracgeo {

/// Fractional order alpha in (0, 1]. The integer ceiling s is always 1 in
/// this range; alpha == 1 selects the classical derivative.
class FracOrder {
 public:
  explicit FracOrder(double alpha);

  double alpha() const { return alpha_; }
  int ceiling() const { return 1; }
  bool is_integer() const { return alpha_ == 1.0; }

 private:
  double alpha_;
};

/// Uniform 1-D grid. `lower` doubles as the left terminal of every
/// left-sided operator along this axis, `upper` as the right terminal.
class Grid1D {
 public:
  static Grid1D uniform(double lower, double upper, std::size_t n_nodes);

  /// Accepts explicit node coordinates; rejects anything that is not uniform
  /// to within a relative tolerance of 1e-9 of the spacing.
  static Grid1D from_nodes(std::span<const double> nodes);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  std::size_t size() const { return n_; }
  double spacing() const { return h_; }
  double node(std::size_t k) const { return lower_ + static_cast<double>(k) * h_; }

  /// Halves the spacing: n -> 2n - 1, same extent.
  Grid1D refined() const;
  /// Drops the first `count` nodes; the new first node becomes the terminal.
  Grid1D drop_front(std::size_t count) const;

  bool operator==(const Grid1D& o) const {
    return lower_ == o.lower_ && upper_ == o.upper_ && n_ == o.n_;
  }

 private:
  Grid1D(double lower, double upper, std::size_t n);

  double lower_;
  double upper_;
  std::size_t n_;
  double h_;
};

/// Row-major tensor product of up to four Grid1D axes (last axis fastest).
class TensorGrid {
 public:
  TensorGrid() = default;
  explicit TensorGrid(std::vector<Grid1D> axes);

  std::size_t rank() const { return axes_.size(); }
  const Grid1D& axis(std::size_t a) const { return axes_[a]; }
  const std::vector<Grid1D>& axes() const { return axes_; }
  std::size_t size() const { return size_; }
  std::size_t stride(std::size_t a) const { return strides_[a]; }

  std::vector<std::size_t> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const std::size_t> idx) const;
  /// Index of the node along `a` for a flat index.
  std::size_t index_along(std::size_t flat, std::size_t a) const {
    return (flat / strides_[a]) % axes_[a].size();
  }
  double coordinate(std::size_t flat, std::size_t a) const {
    return axes_[a].node(index_along(flat, a));
  }

  bool operator==(const TensorGrid& o) const { return axes_ == o.axes_; }

 private:
  std::vector<Grid1D> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Samples of a real function on a TensorGrid.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(TensorGrid grid, std::vector<double> values);
  GridFunction(Grid1D grid, std::vector<double> values);
  /// Zero-filled.
  explicit GridFunction(TensorGrid grid);

  /// Samples `f` at every node; `f` receives the node coordinates.
  static GridFunction sample(const TensorGrid& grid,
                             const std::function<double(std::span<const double>)>& f);
  static GridFunction sample(const Grid1D& grid, const std::function<double(double)>& f);
  static GridFunction constant(const TensorGrid& grid, double c);

  const TensorGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  /// Throws DomainError if any sample is NaN or infinite.
  void require_finite(const char* what) const;

  double max_abs() const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);

 private:
  TensorGrid grid_;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

/// max |a - b| over all nodes; grids must agree.
double max_abs_diff(const GridFunction& a, const GridFunction& b);

/// Copy of `f` with the first `count` nodes along `axis` removed.
GridFunction drop_front(const GridFunction& f, std::size_t axis, std::size_t count);

/// Restriction of a function of the leading axes to a grid whose leading axes
/// match; `f` is replicated along the extra trailing axes. When `axis_map` is
/// given, `axis_map[k]` names the axis of `target` that carries axis k of `f`.
GridFunction broadcast(const GridFunction& f, const TensorGrid& target,
                       std::span<const std::size_t> axis_map);

}  // namespace fracgeo
