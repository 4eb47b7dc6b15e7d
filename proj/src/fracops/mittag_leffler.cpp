#include "fracgeo/mittag_leffler.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fracgeo/errors.hpp"

namespace fracgeo {

namespace {

constexpr double kNegativeSeriesLimit = 15.0;

void check_args(double alpha, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("Mittag-Leffler order must lie in (0, 1], got " + std::to_string(alpha));
  }
  if (!std::isfinite(z)) throw DomainError("Mittag-Leffler argument must be finite");
}

/// E_alpha(-t), t > 0, alpha < 1, via
/// (sin(alpha pi)/(alpha pi)) int_0^inf exp(-(t s)^(1/alpha)) / (s^2 + 2 s cos(alpha pi) + 1) ds.
double negative_integral(double alpha, double t) {
  const double pa = std::numbers::pi * alpha;
  const double c = std::cos(pa);
  const double inv = 1.0 / alpha;
  auto integrand = [&](double s) {
    return std::exp(-std::pow(t * s, inv)) / (s * s + 2.0 * s * c + 1.0);
  };
  boost::math::quadrature::exp_sinh<double> q;
  const double val = q.integrate(integrand, 1e-14);
  return std::sin(pa) / pa * val;
}

}  // namespace

double mittag_leffler_series(double alpha, double z) {
  check_args(alpha, z);
  if (z == 0.0) return 1.0;
  const long double lz = std::log(std::fabs(static_cast<long double>(z)));
  const bool neg = z < 0.0;
  long double sum = 1.0L;
  long double prev_mag = 1.0L;
  for (int k = 1; k < 100000; ++k) {
    const long double la = static_cast<long double>(alpha) * k + 1.0L;
    const long double mag = std::exp(k * lz - std::lgamma(la));
    const long double term = (neg && (k % 2)) ? -mag : mag;
    sum += term;
    // Stop once past the peak term and the tail is negligible.
    if (mag < prev_mag && mag < 1e-14L * std::fabs(sum)) break;
    prev_mag = mag;
  }
  const double out = static_cast<double>(sum);
  if (!std::isfinite(out)) {
    throw RangeError("Mittag-Leffler value overflows double at z = " + std::to_string(z));
  }
  return out;
}

double mittag_leffler_asymptotic(double alpha, double z) {
  check_args(alpha, z);
  if (!(z > 0.0)) throw DomainError("asymptotic Mittag-Leffler branch needs z > 0");
  const double ex = std::pow(z, 1.0 / alpha);
  if (ex > std::log(std::numeric_limits<double>::max()) + std::log(alpha)) {
    throw RangeError("Mittag-Leffler value overflows double at z = " + std::to_string(z));
  }
  double s = std::exp(ex) / alpha;
  // Algebraic tail; 1/Gamma vanishes at nonpositive integers.
  double zk = 1.0;
  for (int k = 1; k <= 12; ++k) {
    zk /= z;
    const double arg = 1.0 - alpha * k;
    if (arg <= 0.0 && arg == std::floor(arg)) continue;
    s -= zk / std::tgamma(arg);
  }
  return s;
}

double mittag_leffler(double alpha, double z) {
  check_args(alpha, z);
  if (alpha == 1.0) {
    const double v = std::exp(z);
    if (!std::isfinite(v)) throw RangeError("Mittag-Leffler value overflows double");
    return v;
  }
  if (z > 0.0) {
    return z <= kMittagLefflerSwitch ? mittag_leffler_series(alpha, z)
                                     : mittag_leffler_asymptotic(alpha, z);
  }
  // The alternating series peaks near exp(|z|^(1/alpha)); past the point where
  // that loses more than ~7 of long double's digits, use the integral form.
  if (-z <= kMittagLefflerSwitch && std::pow(-z, 1.0 / alpha) <= kNegativeSeriesLimit) {
    return mittag_leffler_series(alpha, z);
  }
  return negative_integral(alpha, -z);
}

}  // namespace fracgeo
