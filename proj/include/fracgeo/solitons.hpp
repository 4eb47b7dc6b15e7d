#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

/// Curve flows on a 2+2 split: each block carries a planar curve in a
/// constant-coefficient 2x2 metric. X denotes the arclength direction along
/// the curve and Y a flow direction supplied as samples.
///
///  0-flow:  gamma_tau = gamma_l (parameter translation)
///  +1-flow: -gamma_tau = D_X^2 gamma_X + 3/2 |D_X gamma_X|^2 gamma_X
///  -1-flow: membership test D_Y gamma_X = 0
namespace fracgeo {

using Vec2 = std::array<double, 2>;

/// Constant symmetric 2x2 block metric.
struct BlockMetric {
  double g11 = 1.0, g12 = 0.0, g22 = 1.0;

  static BlockMetric euclidean() { return {}; }
  double inner(const Vec2& a, const Vec2& b) const {
    return g11 * a[0] * b[0] + g12 * (a[0] * b[1] + a[1] * b[0]) + g22 * a[1] * b[1];
  }
  /// sqrt|g(a, a)|.
  double norm(const Vec2& a) const;
  void validate() const;
};

struct CurveBlock {
  std::vector<Vec2> points;
  BlockMetric metric;
  /// |gamma_l| at construction, the reference for the non-stretching drift.
  std::vector<double> initial_speed;
};

/// Curve sampled on a uniform parameter grid. Closed curves are periodic
/// with n samples over [0, period) and no repeated endpoint; open curves
/// have n samples over [0, period] inclusive.
struct FlowCurve {
  double period = 0.0;
  bool closed = true;
  CurveBlock h;
  std::optional<CurveBlock> v;
  double tau = 0.0;

  std::size_t size() const { return h.points.size(); }
  double spacing() const;
  double parameter(std::size_t k) const { return static_cast<double>(k) * spacing(); }
};

/// Assembles a curve, records the initial speeds and checks the invariants:
/// at least 5 samples, blocks of equal length, finite samples, nondegenerate
/// metrics and, for closed curves, the non-stretching gauge (relative speed
/// variation <= gauge_tolerance) and a wrap-around step comparable to the
/// interior steps. A constant block is accepted as a fixed point.
FlowCurve make_curve(double period, bool closed, std::vector<Vec2> h, BlockMetric hg,
                     std::optional<std::vector<Vec2>> v = std::nullopt, BlockMetric vg = {},
                     double gauge_tolerance = 1e-6);

/// Circle of radius r about `center`, unit speed (period 2 pi r).
std::vector<Vec2> circle_points(double r, std::size_t n, Vec2 center = {0.0, 0.0});
/// Ellipse with semi-axes a, b resampled at equal arclength; period is the perimeter.
std::vector<Vec2> ellipse_points(double a, double b, std::size_t n, double* perimeter = nullptr);
/// Unit-speed closed curve with curvature 1 + eps cos(k s), s in [0, 2 pi), k >= 2.
std::vector<Vec2> perturbed_circle_points(double eps, int k, std::size_t n);

/// How l-derivatives are taken by the flow operators.
struct DerivativeMode {
  /// 1 selects centered differences; alpha < 1 a left Caputo (L1) derivative
  /// over a trailing window of `window` nodes (periodically continued).
  double alpha = 1.0;
  std::size_t window = 16;
};

/// Derivative along l with the chosen mode.
std::vector<Vec2> l_derivative(const std::vector<Vec2>& p, double h, bool closed, const DerivativeMode& mode = {});

/// Planar curvature det(gamma_l, gamma_ll) / |gamma_l|^3 in the Euclidean
/// metric; spectral for closed curves.
std::vector<double> planar_curvature(const CurveBlock& b, double h, bool closed);

struct NonstretchStats {
  double min = 0.0;
  double max = 0.0;
  /// max_l | |gamma_l| - |gamma_l|(tau = 0) | / |gamma_l|(tau = 0).
  double drift = 0.0;
};

/// |gamma_l|_g statistics of one block; spectral derivative for closed curves.
NonstretchStats nonstretch_invariant(const CurveBlock& b, double h, bool closed);
/// Worst case over the blocks present.
NonstretchStats nonstretch_invariant(const FlowCurve& c);

struct RadiusStats {
  Vec2 centroid{};
  double min = 0.0;
  double max = 0.0;
};
/// Euclidean distances of the samples from their centroid.
RadiusStats radius_stats(const CurveBlock& b);

/// Raised by the +1 integrator when the blow-up detector trips; carries the
/// last state that passed the detector.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, FlowCurve last_stable)
      : std::runtime_error(what), last_(std::move(last_stable)) {}
  const FlowCurve& last_stable() const { return last_; }

 private:
  FlowCurve last_;
};

using FlowObserver = std::function<void(const FlowCurve&)>;

enum class Flow0Method { spectral, upwind };

struct Flow0Options {
  Flow0Method method = Flow0Method::spectral;
  /// Time step of the upwind scheme; ignored by the spectral shift.
  double dt = 0.0;
  /// Upwind steps must satisfy dt <= cfl * dl.
  double cfl = 1.0;
};

/// Advances both blocks by gamma_tau = gamma_l. Closed curves only. The
/// spectral method applies the exact Fourier shift; the upwind method uses
/// forward differences with SSPRK(4,3) and rejects CFL violations.
FlowCurve flow0_integrate(const FlowCurve& c, double tau_end, const Flow0Options& opt = {});

struct Flow1Options {
  double dt = 1e-5;
  /// Step restriction dt <= step_constant * (s_min dl)^3 with s_min the
  /// smallest speed; the default keeps SSPRK(4,3) inside its stability
  /// region for the composed centered operator.
  double step_constant = 1.5;
  bool enforce_step_limit = true;
  DerivativeMode mode;
  /// Detector: trips on non-finite samples or a relative speed drift above this.
  double blowup_drift = 0.5;
  /// Observer called at tau = 0, every `observe_every` steps and at the end.
  std::size_t observe_every = 0;
  FlowObserver observer;
};

/// Right-hand side of the +1 flow for one block.
std::vector<Vec2> flow_plus1_rhs(const CurveBlock& b, double h, bool closed, const DerivativeMode& mode = {});

/// Evolves each block by the +1 flow with SSPRK(4,3). Throws DomainError when
/// the step restriction is violated and InstabilityError on blow-up.
FlowCurve flow_plus1_integrate(const FlowCurve& c, double tau_end, const Flow1Options& opt = {});

struct Minus1Residual {
  double h = 0.0;
  double v = 0.0;
};

/// Max-norm of D_Y gamma_X per block, with D_Y = g(Y, gamma_X) / g(gamma_X, gamma_X) D_X
/// (only the tangential part of Y differentiates along the curve).
Minus1Residual flow_minus1_residual(const FlowCurve& c, const std::vector<Vec2>& y_h,
                                    const std::optional<std::vector<Vec2>>& y_v = std::nullopt);

}  // namespace fracgeo
