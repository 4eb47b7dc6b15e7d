#include <cmath>

#include "fracgeo/kernels.hpp"

namespace fracgeo::reference {

namespace {

/// L1 sum in its forward form: sum over intervals [x_{j-1}, x_j] of the
/// exact kernel integral times the interval slope.
double caputo_node(const std::vector<double>& f, std::size_t k, double h, double alpha) {
  if (alpha == 1.0) {
    const std::size_t n = f.size();
    if (n < 5) {
      if (k == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
      if (k == n - 1) return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
      return (f[k + 1] - f[k - 1]) / (2.0 * h);
    }
    if (k == 0) return (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    if (k == 1) return (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    if (k == n - 1) {
      return (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / (12.0 * h);
    }
    if (k == n - 2) {
      return (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / (12.0 * h);
    }
    return (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / (12.0 * h);
  }
  const double xk = static_cast<double>(k) * h;
  double s = 0.0;
  for (std::size_t j = 1; j <= k; ++j) {
    const double slope = (f[j] - f[j - 1]) / h;
    const double lo = xk - static_cast<double>(j) * h;
    const double hi = xk - static_cast<double>(j - 1) * h;
    s += slope * (std::pow(hi, 1.0 - alpha) - std::pow(lo, 1.0 - alpha)) / (1.0 - alpha);
  }
  return s / std::tgamma(1.0 - alpha);
}

/// Exact kernel integral of the piecewise-linear interpolant of f.
double rl_node(const std::vector<double>& f, std::size_t n, double h, double alpha) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = static_cast<double>(n - j);
    const double q = static_cast<double>(n - j - 1);
    const double m0 = std::pow(h, alpha) / alpha * (std::pow(p, alpha) - std::pow(q, alpha));
    const double m1 = h * p * m0 -
                      std::pow(h, alpha + 1.0) / (alpha + 1.0) *
                          (std::pow(p, alpha + 1.0) - std::pow(q, alpha + 1.0));
    s += f[j] * m0 + (f[j + 1] - f[j]) / h * m1;
  }
  return s / std::tgamma(alpha);
}

}  // namespace

std::vector<double> apply_along_axis(std::span<const double> in, const TensorGrid& grid,
                                     std::size_t axis, LineOp op, double alpha) {
  const std::size_t n = grid.axis(axis).size();
  const std::size_t stride = grid.stride(axis);
  const double h = grid.axis(axis).spacing();
  std::vector<double> out(in.size(), 0.0);
  std::vector<double> line(n);
  for (std::size_t start = 0; start < in.size(); ++start) {
    if (grid.index_along(start, axis) != 0) continue;
    for (std::size_t k = 0; k < n; ++k) line[k] = in[start + k * stride];
    for (std::size_t k = 0; k < n; ++k) {
      double v = 0.0;
      if (op == LineOp::caputo_left) {
        v = (alpha < 1.0 && k == 0) ? 0.0 : caputo_node(line, k, h, alpha);
      } else if (k > 0) {
        v = rl_node(line, k, h, alpha);
      }
      out[start + k * stride] = v;
    }
  }
  return out;
}

}  // namespace fracgeo::reference
