#include "field_ops.hpp"

namespace fracgeo::fields {

namespace {

void ensure(GridFunction& acc, const GridFunction& like) {
  if (acc.size() == 0) acc = GridFunction(like.grid());
}

}  // namespace

void axpy(GridFunction& acc, double s, const GridFunction& x) {
  if (x.size() == 0 || s == 0.0) return;
  ensure(acc, x);
  auto a = acc.values();
  auto xv = x.values();
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += s * xv[k];
}

void add_product(GridFunction& acc, double s, const GridFunction& x, const GridFunction& y) {
  if (x.size() == 0 || y.size() == 0 || s == 0.0) return;
  ensure(acc, x);
  auto a = acc.values();
  auto xv = x.values();
  auto yv = y.values();
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += s * xv[k] * yv[k];
}

void add_product3(GridFunction& acc, double s, const GridFunction& x, const GridFunction& y,
                  const GridFunction& z) {
  if (x.size() == 0 || y.size() == 0 || z.size() == 0 || s == 0.0) return;
  ensure(acc, x);
  auto a = acc.values();
  auto xv = x.values();
  auto yv = y.values();
  auto zv = z.values();
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += s * xv[k] * yv[k] * zv[k];
}

GridFunction compact(GridFunction f) {
  for (double v : f.values()) {
    if (v != 0.0) return f;
  }
  return GridFunction();
}

}  // namespace fracgeo::fields
