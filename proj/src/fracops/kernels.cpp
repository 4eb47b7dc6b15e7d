#include "fracgeo/kernels.hpp"

#include <cmath>

namespace fracgeo::kernels {

namespace {

struct LineLayout {
  std::size_t n = 0;       // nodes along the axis
  std::size_t stride = 0;  // flat stride of the axis
  std::size_t lines = 0;   // number of lines
  std::size_t inner = 0;   // product of sizes of faster axes

  std::size_t base(std::size_t line) const {
    return (line / inner) * inner * n + line % inner;
  }
};

LineLayout layout(const TensorGrid& g, std::size_t axis) {
  LineLayout L;
  L.n = g.axis(axis).size();
  L.stride = g.stride(axis);
  L.inner = L.stride;
  L.lines = g.size() / L.n;
  return L;
}

/// Classical derivative, fourth order: five-point central inside, one-sided
/// five-point stencils on the two nodes nearest each end. Uniform order up to
/// the boundary keeps composed second derivatives accurate there. Grids with
/// fewer than 5 nodes fall back to second-order stencils. Written through
/// differences so constants give exact zeros.
double classical_derivative(const double* f, std::size_t n, std::size_t k, double h) {
  if (n < 5) {
    if (k == 0) return (4.0 * (f[1] - f[0]) - (f[2] - f[0])) / (2.0 * h);
    if (k == n - 1) return (4.0 * (f[n - 1] - f[n - 2]) - (f[n - 1] - f[n - 3])) / (2.0 * h);
    return (f[k + 1] - f[k - 1]) / (2.0 * h);
  }
  const double c = 1.0 / (12.0 * h);
  if (k == 0) {
    return c * (48.0 * (f[1] - f[0]) - 36.0 * (f[2] - f[0]) + 16.0 * (f[3] - f[0]) - 3.0 * (f[4] - f[0]));
  }
  if (k == 1) {
    return c * (-3.0 * (f[0] - f[1]) + 18.0 * (f[2] - f[1]) - 6.0 * (f[3] - f[1]) + (f[4] - f[1]));
  }
  if (k == n - 1) {
    const double* g = f + (n - 5);
    return -c * (48.0 * (g[3] - g[4]) - 36.0 * (g[2] - g[4]) + 16.0 * (g[1] - g[4]) - 3.0 * (g[0] - g[4]));
  }
  if (k == n - 2) {
    const double* g = f + (n - 5);
    return -c * (-3.0 * (g[4] - g[3]) + 18.0 * (g[2] - g[3]) - 6.0 * (g[1] - g[3]) + (g[0] - g[3]));
  }
  return c * (8.0 * (f[k + 1] - f[k - 1]) - (f[k + 2] - f[k - 2]));
}

}  // namespace

std::vector<double> apply_along_axis(std::span<const double> in, const TensorGrid& grid,
                                     std::size_t axis, LineOp op, double alpha) {
  const LineLayout L = layout(grid, axis);
  const double h = grid.axis(axis).spacing();
  const std::size_t n = L.n;

  std::vector<double> buf(L.lines * n);
  const long long lines = static_cast<long long>(L.lines);
#pragma omp parallel for schedule(static)
  for (long long line = 0; line < lines; ++line) {
    const std::size_t b = L.base(static_cast<std::size_t>(line));
    for (std::size_t k = 0; k < n; ++k) buf[line * n + k] = in[b + k * L.stride];
  }

  // Weight tables shared by every line.
  std::vector<double> w(n + 1, 0.0);
  std::vector<double> a0(n, 0.0);
  double scale = 1.0;
  if (op == LineOp::caputo_left && alpha < 1.0) {
    const double e = 1.0 - alpha;
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = std::pow(static_cast<double>(k + 1), e) - std::pow(static_cast<double>(k), e);
    }
    scale = std::pow(h, -alpha) / std::tgamma(2.0 - alpha);
  } else if (op == LineOp::rl_integral) {
    const double e = alpha + 1.0;
    for (std::size_t m = 1; m <= n; ++m) {
      const double md = static_cast<double>(m);
      w[m] = std::pow(md + 1.0, e) - 2.0 * std::pow(md, e) + std::pow(md - 1.0, e);
    }
    for (std::size_t j = 1; j < n; ++j) {
      const double jd = static_cast<double>(j);
      a0[j] = std::pow(jd - 1.0, e) - (jd - alpha - 1.0) * std::pow(jd, alpha);
    }
    scale = std::pow(h, alpha) / std::tgamma(alpha + 2.0);
  }

  std::vector<double> res(L.lines * n);
  const long long work = static_cast<long long>(L.lines * n);
#pragma omp parallel for schedule(dynamic, 64)
  for (long long t = 0; t < work; ++t) {
    const std::size_t line = static_cast<std::size_t>(t) / n;
    const std::size_t k = static_cast<std::size_t>(t) % n;
    const double* f = buf.data() + line * n;
    double v = 0.0;
    if (op == LineOp::caputo_left) {
      if (alpha == 1.0) {
        v = classical_derivative(f, n, k, h);
      } else {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += w[j] * (f[k - j] - f[k - j - 1]);
        v = scale * s;
      }
    } else if (k > 0) {
      double s = a0[k] * f[0] + f[k];
      for (std::size_t j = 1; j < k; ++j) s += w[k - j] * f[j];
      v = scale * s;
    }
    res[t] = v;
  }

  std::vector<double> out(in.size());
#pragma omp parallel for schedule(static)
  for (long long line = 0; line < lines; ++line) {
    const std::size_t b = L.base(static_cast<std::size_t>(line));
    for (std::size_t k = 0; k < n; ++k) out[b + k * L.stride] = res[line * n + k];
  }
  return out;
}

}  // namespace fracgeo::kernels
