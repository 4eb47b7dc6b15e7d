#include "fracgeo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracgeo/errors.hpp"

namespace fracgeo {

FracOrder::FracOrder(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("fractional order must lie in (0, 1], got " + std::to_string(alpha));
  }
}

Grid1D::Grid1D(double lower, double upper, std::size_t n)
    : lower_(lower), upper_(upper), n_(n), h_((upper - lower) / static_cast<double>(n - 1)) {}

Grid1D Grid1D::uniform(double lower, double upper, std::size_t n_nodes) {
  if (!std::isfinite(lower) || !std::isfinite(upper)) throw DomainError("grid bounds must be finite");
  if (!(upper > lower)) throw DomainError("grid needs upper > lower (zero-length interval rejected)");
  if (n_nodes < 3) throw DomainError("grid needs at least 3 nodes");
  return Grid1D(lower, upper, n_nodes);
}

Grid1D Grid1D::from_nodes(std::span<const double> nodes) {
  if (nodes.size() < 3) throw DomainError("grid needs at least 3 nodes");
  const double h = (nodes.back() - nodes.front()) / static_cast<double>(nodes.size() - 1);
  if (!(h > 0.0)) throw DomainError("grid nodes must be increasing");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double expected = nodes.front() + static_cast<double>(k) * h;
    if (std::abs(nodes[k] - expected) > 1e-9 * h) {
      throw DomainError("non-uniform grid rejected at node " + std::to_string(k));
    }
  }
  return uniform(nodes.front(), nodes.back(), nodes.size());
}

Grid1D Grid1D::refined() const { return Grid1D(lower_, upper_, 2 * n_ - 1); }

Grid1D Grid1D::drop_front(std::size_t count) const {
  if (count + 3 > n_) throw DomainError("cannot drop that many nodes from grid");
  if (count == 0) return *this;
  return Grid1D(node(count), upper_, n_ - count);
}

TensorGrid::TensorGrid(std::vector<Grid1D> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 4) throw DomainError("tensor grid needs 1 to 4 axes");
  strides_.assign(axes_.size(), 1);
  size_ = 1;
  for (std::size_t a = axes_.size(); a-- > 0;) {
    strides_[a] = size_;
    size_ *= axes_[a].size();
  }
}

std::vector<std::size_t> TensorGrid::multi_index(std::size_t flat) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) idx[a] = index_along(flat, a);
  return idx;
}

std::size_t TensorGrid::flat_index(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) flat += idx[a] * strides_[a];
  return flat;
}

GridFunction::GridFunction(TensorGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("value count does not match node count");
}

GridFunction::GridFunction(Grid1D grid, std::vector<double> values)
    : GridFunction(TensorGrid({grid}), std::move(values)) {}

GridFunction::GridFunction(TensorGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

GridFunction GridFunction::sample(const TensorGrid& grid,
                                  const std::function<double(std::span<const double>)>& f) {
  GridFunction out(grid);
  std::vector<double> x(grid.rank());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t a = 0; a < grid.rank(); ++a) x[a] = grid.coordinate(k, a);
    out.values_[k] = f(x);
  }
  return out;
}

GridFunction GridFunction::sample(const Grid1D& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) v[k] = f(grid.node(k));
  return GridFunction(grid, std::move(v));
}

GridFunction GridFunction::constant(const TensorGrid& grid, double c) {
  GridFunction out(grid);
  std::fill(out.values_.begin(), out.values_.end(), c);
  return out;
}

void GridFunction::require_finite(const char* what) const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw DomainError(std::string(what) + ": non-finite sample at node " +
                        format_node(grid_.multi_index(k)));
    }
  }
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  if (!(grid_ == o.grid_)) throw DomainError("grid mismatch in +=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  if (!(grid_ == o.grid_)) throw DomainError("grid mismatch in -=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid())) throw DomainError("grid mismatch in max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

GridFunction drop_front(const GridFunction& f, std::size_t axis, std::size_t count) {
  const TensorGrid& g = f.grid();
  std::vector<Grid1D> axes = g.axes();
  axes[axis] = axes[axis].drop_front(count);
  TensorGrid target(axes);
  GridFunction out(target);
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < target.size(); ++k) {
    idx = target.multi_index(k);
    idx[axis] += count;
    out[k] = f[g.flat_index(idx)];
  }
  return out;
}

GridFunction broadcast(const GridFunction& f, const TensorGrid& target,
                       std::span<const std::size_t> axis_map) {
  const TensorGrid& g = f.grid();
  std::vector<std::size_t> map(axis_map.begin(), axis_map.end());
  if (map.empty()) {
    for (std::size_t a = 0; a < g.rank(); ++a) map.push_back(a);
  }
  if (map.size() != g.rank()) throw DomainError("broadcast: axis map size mismatch");
  for (std::size_t a = 0; a < g.rank(); ++a) {
    if (!(g.axis(a) == target.axis(map[a]))) throw DomainError("broadcast: axis grids differ");
  }
  GridFunction out(target);
  std::vector<std::size_t> src(g.rank());
  for (std::size_t k = 0; k < target.size(); ++k) {
    for (std::size_t a = 0; a < g.rank(); ++a) src[a] = target.index_along(k, map[a]);
    out[k] = f[g.flat_index(src)];
  }
  return out;
}

}  // namespace fracgeo
