#include "fracgeo/solitons.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "fracgeo/errors.hpp"

namespace fracgeo {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

std::vector<cplx> forward(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x);
  std::vector<cplx> out(x.size() / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);
  return out;
}

std::vector<double> backward(std::vector<cplx> c, std::size_t n) {
  std::vector<double> out(n);
  fftw_plan p = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(c.data()), out.data(),
                                     FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

/// Spectral derivative of periodic samples over a period L.
std::vector<double> spectral_derivative(const std::vector<double>& x, double L) {
  const std::size_t n = x.size();
  auto c = forward(x);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (n % 2 == 0 && k == n / 2) {
      c[k] = 0.0;
    } else {
      c[k] *= cplx(0.0, 2.0 * kPi * static_cast<double>(k) / L);
    }
  }
  return backward(std::move(c), n);
}

/// Zero-mean periodic antiderivative; the mean of x is discarded.
std::vector<double> spectral_antiderivative(const std::vector<double>& x, double L) {
  const std::size_t n = x.size();
  auto c = forward(x);
  c[0] = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (n % 2 == 0 && k == n / 2) {
      c[k] = 0.0;
    } else {
      c[k] /= cplx(0.0, 2.0 * kPi * static_cast<double>(k) / L);
    }
  }
  return backward(std::move(c), n);
}

std::vector<double> component(const std::vector<Vec2>& p, int a) {
  std::vector<double> out(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) out[k] = p[k][a];
  return out;
}

std::vector<Vec2> zip(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<Vec2> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = {x[k], y[k]};
  return out;
}

bool is_constant(const std::vector<Vec2>& p) {
  return std::all_of(p.begin(), p.end(), [&](const Vec2& q) { return q == p.front(); });
}

std::vector<Vec2> centered(const std::vector<Vec2>& p, double h, bool closed) {
  const std::size_t n = p.size();
  std::vector<Vec2> d(n);
  const double inv = 1.0 / (2.0 * h);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    d[k] = {(p[k + 1][0] - p[k - 1][0]) * inv, (p[k + 1][1] - p[k - 1][1]) * inv};
  }
  for (std::size_t k : {std::size_t{0}, n - 1}) {
    for (int a = 0; a < 2; ++a) {
      if (closed) {
        d[k][a] = (p[(k + 1) % n][a] - p[(k + n - 1) % n][a]) / (2.0 * h);
      } else if (k == 0) {
        d[k][a] = (-3.0 * p[0][a] + 4.0 * p[1][a] - p[2][a]) / (2.0 * h);
      } else if (k == n - 1) {
        d[k][a] = (3.0 * p[n - 1][a] - 4.0 * p[n - 2][a] + p[n - 3][a]) / (2.0 * h);
      }
    }
  }
  return d;
}

/// L1 Caputo derivative at every node over a trailing window.
std::vector<Vec2> caputo_window(const std::vector<Vec2>& p, double h, bool closed, double alpha, std::size_t window) {
  if (window < 2) throw DomainError("fractional window must hold at least 2 nodes");
  const std::size_t n = p.size();
  std::vector<double> b(window);
  for (std::size_t j = 0; j < window; ++j) {
    const double jj = static_cast<double>(j);
    b[j] = std::pow(jj + 1.0, 1.0 - alpha) - std::pow(jj, 1.0 - alpha);
  }
  const double scale = std::pow(h, -alpha) / std::tgamma(2.0 - alpha);
  std::vector<Vec2> d(n, Vec2{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t m = closed ? window - 1 : std::min(window - 1, k);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i1 = (k + n - j) % n, i0 = (k + 2 * n - j - 1) % n;
      for (int a = 0; a < 2; ++a) d[k][a] += b[j] * (p[i1][a] - p[i0][a]);
    }
    for (int a = 0; a < 2; ++a) d[k][a] *= scale;
  }
  return d;
}

std::vector<double> speeds(const std::vector<Vec2>& p, const BlockMetric& g, double h, bool closed) {
  std::vector<Vec2> d;
  if (closed) {
    const double L = h * static_cast<double>(p.size());
    d = zip(spectral_derivative(component(p, 0), L), spectral_derivative(component(p, 1), L));
  } else {
    d = centered(p, h, false);
  }
  std::vector<double> s(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) s[k] = g.norm(d[k]);
  return s;
}

/// Cheap speeds for the blow-up detector.
std::vector<double> centered_speeds(const std::vector<Vec2>& p, const BlockMetric& g, double h, bool closed) {
  const auto d = centered(p, h, closed);
  std::vector<double> s(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) s[k] = g.norm(d[k]);
  return s;
}

double max_rel_drift(const std::vector<double>& s, const std::vector<double>& s0) {
  double r = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s0[k] == 0.0) continue;
    r = std::max(r, std::abs(s[k] - s0[k]) / s0[k]);
  }
  return r;
}

using State = std::vector<Vec2>;

State combine(double a, const State& x, double b, const State& y, double c, const State& z) {
  State out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (int i = 0; i < 2; ++i) out[k][i] = a * x[k][i] + b * y[k][i] + c * z[k][i];
  }
  return out;
}

/// One SSPRK(4,3) step of u' = L(u).
template <class Rhs>
State ssprk43(const State& u, double dt, const Rhs& L) {
  const State u1 = combine(1.0, u, 0.5 * dt, L(u), 0.0, u);
  const State u2 = combine(1.0, u1, 0.5 * dt, L(u1), 0.0, u1);
  const State u3 = combine(2.0 / 3.0, u, 1.0 / 3.0, u2, dt / 6.0, L(u2));
  return combine(1.0, u3, 0.5 * dt, L(u3), 0.0, u3);
}

std::size_t step_count(double tau_end, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (tau_end < 0.0) throw DomainError("flow time must be nonnegative");
  return static_cast<std::size_t>(std::ceil(tau_end / dt - 1e-9));
}

bool finite(const State& s) {
  return std::all_of(s.begin(), s.end(), [](const Vec2& p) { return std::isfinite(p[0]) && std::isfinite(p[1]); });
}

}  // namespace

double BlockMetric::norm(const Vec2& a) const { return std::sqrt(std::abs(inner(a, a))); }

void BlockMetric::validate() const {
  if (!std::isfinite(g11) || !std::isfinite(g12) || !std::isfinite(g22)) throw DomainError("block metric must be finite");
  if (g11 * g22 - g12 * g12 == 0.0) throw DomainError("block metric is degenerate");
}

double FlowCurve::spacing() const {
  const std::size_t n = size();
  return closed ? period / static_cast<double>(n) : period / static_cast<double>(n - 1);
}

FlowCurve make_curve(double period, bool closed, std::vector<Vec2> h, BlockMetric hg,
                     std::optional<std::vector<Vec2>> v, BlockMetric vg, double gauge_tolerance) {
  if (h.size() < 5) throw DomainError("curve needs at least 5 samples");
  if (!(period > 0.0) || !std::isfinite(period)) throw DomainError("curve period must be positive");
  if (v && v->size() != h.size()) throw DomainError("h and v blocks must have the same number of samples");
  hg.validate();
  if (v) vg.validate();
  FlowCurve c;
  c.period = period;
  c.closed = closed;
  c.h = {std::move(h), hg, {}};
  if (v) c.v = CurveBlock{std::move(*v), vg, {}};
  const double dl = c.spacing();
  auto prepare = [&](CurveBlock& b, const char* name) {
    if (!finite(b.points)) throw DomainError(std::string(name) + "-block samples must be finite");
    b.initial_speed = speeds(b.points, b.metric, dl, closed);
    if (!closed || is_constant(b.points)) return;
    const auto [lo, hi] = std::minmax_element(b.initial_speed.begin(), b.initial_speed.end());
    if (*lo == 0.0 || (*hi - *lo) > gauge_tolerance * *hi) {
      throw DomainError(std::string(name) + "-block is not in the non-stretching gauge (|gamma_l| not constant)");
    }
    const std::size_t n = b.points.size();
    double mean_step = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      mean_step += std::hypot(b.points[k + 1][0] - b.points[k][0], b.points[k + 1][1] - b.points[k][1]);
    }
    mean_step /= static_cast<double>(n - 1);
    const double wrap = std::hypot(b.points[0][0] - b.points[n - 1][0], b.points[0][1] - b.points[n - 1][1]);
    if (wrap > 2.0 * mean_step || wrap < 0.5 * mean_step) {
      throw DomainError(std::string(name) + "-block does not close smoothly");
    }
  };
  prepare(c.h, "h");
  if (c.v) prepare(*c.v, "v");
  return c;
}

std::vector<Vec2> circle_points(double r, std::size_t n, Vec2 center) {
  if (!(r > 0.0)) throw DomainError("circle radius must be positive");
  std::vector<Vec2> p(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    p[k] = {center[0] + r * std::cos(t), center[1] + r * std::sin(t)};
  }
  return p;
}

std::vector<Vec2> ellipse_points(double a, double b, std::size_t n, double* perimeter) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("ellipse semi-axes must be positive");
  const std::size_t m = std::max<std::size_t>(1024, 8 * n);
  std::vector<double> speed(m);
  auto sp = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  for (std::size_t k = 0; k < m; ++k) speed[k] = sp(2.0 * kPi * static_cast<double>(k) / static_cast<double>(m));
  double mean = 0.0;
  for (double s : speed) mean += s;
  mean /= static_cast<double>(m);
  const double P = 2.0 * kPi * mean;
  // S(t) = mean t + periodic part, evaluated from its Fourier series.
  const auto c = forward(speed);
  auto S = [&](double t) {
    double acc = mean * t;
    for (std::size_t k = 1; k < c.size() && k < m / 2; ++k) {
      const double kk = static_cast<double>(k);
      const cplx ck = c[k] / static_cast<double>(m);
      acc += 2.0 * (ck.real() * std::sin(kk * t) + ck.imag() * (std::cos(kk * t) - 1.0)) / kk;
    }
    return acc;
  };
  std::vector<Vec2> p(n);
  double t = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double target = P * static_cast<double>(j) / static_cast<double>(n);
    for (int it = 0; it < 50; ++it) {
      const double dt = (S(t) - target) / sp(t);
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    p[j] = {a * std::cos(t), b * std::sin(t)};
  }
  if (perimeter) *perimeter = P;
  return p;
}

std::vector<Vec2> perturbed_circle_points(double eps, int k, std::size_t n) {
  if (k < 2) throw DomainError("perturbation wavenumber must be >= 2 for a closed curve");
  std::vector<double> tx(n), ty(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
    const double th = s + eps / k * std::sin(k * s);
    tx[j] = std::cos(th);
    ty[j] = std::sin(th);
  }
  return zip(spectral_antiderivative(tx, 2.0 * kPi), spectral_antiderivative(ty, 2.0 * kPi));
}

std::vector<Vec2> l_derivative(const std::vector<Vec2>& p, double h, bool closed, const DerivativeMode& mode) {
  if (mode.alpha == 1.0) return centered(p, h, closed);
  if (!(mode.alpha > 0.0 && mode.alpha < 1.0)) throw DomainError("derivative order must lie in (0, 1]");
  return caputo_window(p, h, closed, mode.alpha, mode.window);
}

std::vector<double> planar_curvature(const CurveBlock& b, double h, bool closed) {
  std::vector<Vec2> d1, d2;
  if (closed) {
    const double L = h * static_cast<double>(b.points.size());
    const auto x1 = spectral_derivative(component(b.points, 0), L);
    const auto y1 = spectral_derivative(component(b.points, 1), L);
    d1 = zip(x1, y1);
    d2 = zip(spectral_derivative(x1, L), spectral_derivative(y1, L));
  } else {
    d1 = centered(b.points, h, false);
    d2 = centered(d1, h, false);
  }
  std::vector<double> k(b.points.size());
  for (std::size_t j = 0; j < k.size(); ++j) {
    const double s = std::hypot(d1[j][0], d1[j][1]);
    k[j] = (d1[j][0] * d2[j][1] - d1[j][1] * d2[j][0]) / (s * s * s);
  }
  return k;
}

NonstretchStats nonstretch_invariant(const CurveBlock& b, double h, bool closed) {
  const auto s = speeds(b.points, b.metric, h, closed);
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return {*lo, *hi, max_rel_drift(s, b.initial_speed)};
}

NonstretchStats nonstretch_invariant(const FlowCurve& c) {
  NonstretchStats r = nonstretch_invariant(c.h, c.spacing(), c.closed);
  if (c.v && !is_constant(c.v->points)) {
    const NonstretchStats q = nonstretch_invariant(*c.v, c.spacing(), c.closed);
    r.min = std::min(r.min, q.min);
    r.max = std::max(r.max, q.max);
    r.drift = std::max(r.drift, q.drift);
  }
  return r;
}

RadiusStats radius_stats(const CurveBlock& b) {
  RadiusStats r;
  for (const Vec2& p : b.points) {
    r.centroid[0] += p[0];
    r.centroid[1] += p[1];
  }
  r.centroid[0] /= static_cast<double>(b.points.size());
  r.centroid[1] /= static_cast<double>(b.points.size());
  r.min = 1e300;
  for (const Vec2& p : b.points) {
    const double d = std::hypot(p[0] - r.centroid[0], p[1] - r.centroid[1]);
    r.min = std::min(r.min, d);
    r.max = std::max(r.max, d);
  }
  return r;
}

FlowCurve flow0_integrate(const FlowCurve& c, double tau_end, const Flow0Options& opt) {
  if (!c.closed) throw DomainError("the 0-flow integrator supports closed curves only");
  if (tau_end < 0.0) throw DomainError("flow time must be nonnegative");
  FlowCurve out = c;
  out.tau = c.tau + tau_end;
  if (tau_end == 0.0) return out;
  const std::size_t n = c.size();
  const double h = c.spacing();

  if (opt.method == Flow0Method::spectral) {
    auto shift = [&](std::vector<Vec2>& p) {
      std::array<std::vector<double>, 2> comp;
      for (int a = 0; a < 2; ++a) {
        auto f = forward(component(p, a));
        for (std::size_t k = 0; k < f.size(); ++k) {
          const double phase = 2.0 * kPi * static_cast<double>(k) * tau_end / c.period;
          if (n % 2 == 0 && k == n / 2) {
            f[k] *= std::cos(phase);
          } else {
            f[k] *= cplx(std::cos(phase), std::sin(phase));
          }
        }
        comp[a] = backward(std::move(f), n);
      }
      p = zip(comp[0], comp[1]);
    };
    shift(out.h.points);
    if (out.v) shift(out.v->points);
    return out;
  }

  if (!(opt.dt > 0.0)) throw DomainError("upwind 0-flow needs a positive time step");
  if (opt.dt > opt.cfl * h) {
    throw DomainError("CFL violation: dt = " + std::to_string(opt.dt) + " exceeds " + std::to_string(opt.cfl) +
                      " * dl = " + std::to_string(opt.cfl * h));
  }
  const std::size_t steps = step_count(tau_end, opt.dt);
  const double dt = tau_end / static_cast<double>(steps);
  auto rhs = [&](const State& u) {
    State d(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (int a = 0; a < 2; ++a) d[k][a] = (u[(k + 1) % n][a] - u[k][a]) / h;
    }
    return d;
  };
  for (std::size_t s = 0; s < steps; ++s) {
    out.h.points = ssprk43(out.h.points, dt, rhs);
    if (out.v) out.v->points = ssprk43(out.v->points, dt, rhs);
  }
  return out;
}

std::vector<Vec2> flow_plus1_rhs(const CurveBlock& b, double h, bool closed, const DerivativeMode& mode) {
  const std::size_t n = b.points.size();
  if (is_constant(b.points)) return State(n, Vec2{0.0, 0.0});
  const State gl = l_derivative(b.points, h, closed, mode);
  std::vector<double> s(n);
  State T(n);
  for (std::size_t k = 0; k < n; ++k) {
    s[k] = b.metric.norm(gl[k]);
    if (s[k] == 0.0) throw DomainError("curve speed vanishes at sample " + std::to_string(k));
    T[k] = {gl[k][0] / s[k], gl[k][1] / s[k]};
  }
  State A = l_derivative(T, h, closed, mode);
  for (std::size_t k = 0; k < n; ++k) A[k] = {A[k][0] / s[k], A[k][1] / s[k]};
  State B = l_derivative(A, h, closed, mode);
  State out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a2 = b.metric.inner(A[k], A[k]);
    for (int i = 0; i < 2; ++i) out[k][i] = -(B[k][i] / s[k] + 1.5 * a2 * T[k][i]);
  }
  return out;
}

FlowCurve flow_plus1_integrate(const FlowCurve& c, double tau_end, const Flow1Options& opt) {
  const std::size_t steps = step_count(tau_end, opt.dt);
  const double h = c.spacing();
  const double dt = steps ? tau_end / static_cast<double>(steps) : 0.0;

  std::vector<const CurveBlock*> blocks{&c.h};
  if (c.v) blocks.push_back(&*c.v);
  std::vector<std::vector<double>> s0;
  double smin = 1e300;
  for (const CurveBlock* b : blocks) {
    s0.push_back(centered_speeds(b->points, b->metric, h, c.closed));
    if (is_constant(b->points)) continue;
    const auto d = l_derivative(b->points, h, c.closed, opt.mode);
    for (const Vec2& q : d) smin = std::min(smin, b->metric.norm(q));
  }
  if (opt.enforce_step_limit && smin < 1e300) {
    const double limit = opt.step_constant * smin * smin * smin * std::pow(h, 3.0 * opt.mode.alpha);
    if (opt.dt > limit) {
      throw DomainError("time step " + std::to_string(opt.dt) + " exceeds the stability limit " +
                        std::to_string(limit) + " (step_constant * (speed * dl)^3)");
    }
  }

  FlowCurve cur = c;
  if (opt.observer) opt.observer(cur);
  auto rhs_for = [&](const CurveBlock& b) {
    return [&, metric = b.metric](const State& u) {
      CurveBlock tmp{u, metric, {}};
      return flow_plus1_rhs(tmp, h, c.closed, opt.mode);
    };
  };
  for (std::size_t s = 1; s <= steps; ++s) {
    FlowCurve next = cur;
    next.h.points = ssprk43(cur.h.points, dt, rhs_for(cur.h));
    if (next.v) next.v->points = ssprk43(cur.v->points, dt, rhs_for(*cur.v));
    next.tau = c.tau + dt * static_cast<double>(s);

    std::size_t bi = 0;
    for (const CurveBlock* b : {&next.h, next.v ? &*next.v : nullptr}) {
      if (!b) continue;
      bool bad = !finite(b->points);
      if (!bad) bad = max_rel_drift(centered_speeds(b->points, b->metric, h, c.closed), s0[bi]) > opt.blowup_drift;
      if (bad) {
        throw InstabilityError("+1 flow blew up at tau = " + std::to_string(next.tau) +
                                   "; last stable tau = " + std::to_string(cur.tau),
                               cur);
      }
      ++bi;
    }
    cur = std::move(next);
    if (opt.observer && ((opt.observe_every && s % opt.observe_every == 0) || s == steps)) opt.observer(cur);
  }
  cur.tau = c.tau + tau_end;
  return cur;
}

Minus1Residual flow_minus1_residual(const FlowCurve& c, const std::vector<Vec2>& y_h,
                                    const std::optional<std::vector<Vec2>>& y_v) {
  auto block = [&](const CurveBlock& b, const std::vector<Vec2>& y) {
    if (y.size() != b.points.size()) throw DomainError("Y samples must match the curve samples");
    if (is_constant(b.points)) return 0.0;
    const double h = c.spacing();
    const State gl = centered(b.points, h, c.closed);
    const std::size_t n = gl.size();
    std::vector<double> s(n);
    State T(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = b.metric.norm(gl[k]);
      T[k] = {gl[k][0] / s[k], gl[k][1] / s[k]};
    }
    const State A = centered(T, h, c.closed);
    double r = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double coef = b.metric.inner(y[k], T[k]) / b.metric.inner(T[k], T[k]);
      const Vec2 a{coef * A[k][0] / s[k], coef * A[k][1] / s[k]};
      r = std::max(r, b.metric.norm(a));
    }
    return r;
  };
  Minus1Residual out;
  out.h = block(c.h, y_h);
  if (c.v) {
    if (!y_v) throw DomainError("Y samples for the v-block are required");
    out.v = block(*c.v, *y_v);
  }
  return out;
}

}  // namespace fracgeo
