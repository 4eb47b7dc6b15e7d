#pragma once

namespace fracgeo {

/// One-parameter Mittag-Leffler function E_alpha(z) = sum z^k / Gamma(alpha k + 1)
/// for real z and 0 < alpha <= 1, relative accuracy target 1e-10.
///
/// Branches: power series for |z| <= 10; for z > 10 the exponential-dominant
/// asymptotic expansion; for negative z where the alternating series would
/// cancel catastrophically (|z|^(1/alpha) > 15, or z < -10) an integral
/// representation; alpha == 1 uses exp. Throws DomainError for bad alpha or non-finite z, RangeError on overflow.
double mittag_leffler(double alpha, double z);

/// Truncated power series with term-ratio stopping (1e-14), summed in long double.
double mittag_leffler_series(double alpha, double z);

/// Asymptotic form for large positive z:
/// (1/alpha) exp(z^(1/alpha)) - sum_{k>=1} z^(-k) / Gamma(1 - alpha k).
double mittag_leffler_asymptotic(double alpha, double z);

/// Branch switch point |z| of mittag_leffler.
inline constexpr double kMittagLefflerSwitch = 10.0;

}  // namespace fracgeo
