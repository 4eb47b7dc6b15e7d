#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

/// Independent periodic solver for the scalar mKdV equation
///   k_t = -k_sss - 3/2 k^2 k_s
/// with the five-point centered third difference, the three-point first
/// difference and classical RK4.
namespace oracle {

inline std::vector<double> mkdv_rhs(const std::vector<double>& k, double h) {
  const std::size_t n = k.size();
  std::vector<double> out(n);
  auto at = [&](long j) { return k[static_cast<std::size_t>((j % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n))]; };
  for (std::size_t j = 0; j < n; ++j) {
    const long i = static_cast<long>(j);
    const double k3 = (at(i + 2) - 2.0 * at(i + 1) + 2.0 * at(i - 1) - at(i - 2)) / (2.0 * h * h * h);
    const double k1 = (at(i + 1) - at(i - 1)) / (2.0 * h);
    out[j] = -k3 - 1.5 * k[j] * k[j] * k1;
  }
  return out;
}

inline std::vector<double> mkdv_solve(std::vector<double> k, double h, double t_end, double dt_max) {
  const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt_max));
  const double dt = t_end / static_cast<double>(steps);
  const std::size_t n = k.size();
  auto axpy = [&](const std::vector<double>& x, double a, const std::vector<double>& y) {
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = x[j] + a * y[j];
    return r;
  };
  for (std::size_t s = 0; s < steps; ++s) {
    const auto k1 = mkdv_rhs(k, h);
    const auto k2 = mkdv_rhs(axpy(k, 0.5 * dt, k1), h);
    const auto k3 = mkdv_rhs(axpy(k, 0.5 * dt, k2), h);
    const auto k4 = mkdv_rhs(axpy(k, dt, k3), h);
    for (std::size_t j = 0; j < n; ++j) k[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return k;
}

}  // namespace oracle
