#pragma once

#include "evanskit/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evanskit {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-11;
  double h0 = 0.0;  ///< 0 picks a step from the interval length
  double hmax = std::numeric_limits<double>::infinity();
  long max_steps = 2000000;
};

struct OdeStats {
  long steps = 0;
  long rejected = 0;
  double max_error_estimate = 0.0;  ///< largest accepted normalized local error
};

namespace detail {

template <typename Vector>
double scaled_error(const Vector& err, const Vector& y0, const Vector& y1,
                    const OdeOptions& opt) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc =
        opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    e = std::max(e, std::abs(err[i]) / sc);
  }
  return e;
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = f(x, y) from x0 to x1
/// (either direction). The observer runs after each accepted step and may
/// modify the state in place; it returns true when it did.
template <typename Vector, typename Rhs, typename Observer>
Vector integrate_dp45(Rhs&& f, Vector y, double x0, double x1,
                      const OdeOptions& opt, OdeStats* stats,
                      Observer&& after_step) {
  const double span = x1 - x0;
  if (span == 0.0) return y;
  const double dir = span > 0 ? 1.0 : -1.0;
  double h = opt.h0 > 0 ? opt.h0 : std::min(std::abs(span) / 100.0, opt.hmax);
  h = std::min(h, opt.hmax);
  double x = x0;
  OdeStats local;

  Vector k1 = f(x, y), k2, k3, k4, k5, k6, k7, ytmp, ynew;
  long n = 0;
  while (dir * (x1 - x) > 0) {
    if (++n > opt.max_steps)
      throw IntegrationFailure("step budget exhausted");
    bool last = false;
    if (h >= std::abs(x1 - x)) {
      h = std::abs(x1 - x);
      last = true;
    }
    const double s = dir * h;
    ytmp = y + s * (1.0 / 5) * k1;
    k2 = f(x + s / 5, ytmp);
    ytmp = y + s * ((3.0 / 40) * k1 + (9.0 / 40) * k2);
    k3 = f(x + s * 3 / 10, ytmp);
    ytmp = y + s * ((44.0 / 45) * k1 - (56.0 / 15) * k2 + (32.0 / 9) * k3);
    k4 = f(x + s * 4 / 5, ytmp);
    ytmp = y + s * ((19372.0 / 6561) * k1 - (25360.0 / 2187) * k2 +
                    (64448.0 / 6561) * k3 - (212.0 / 729) * k4);
    k5 = f(x + s * 8 / 9, ytmp);
    ytmp = y + s * ((9017.0 / 3168) * k1 - (355.0 / 33) * k2 +
                    (46732.0 / 5247) * k3 + (49.0 / 176) * k4 -
                    (5103.0 / 18656) * k5);
    k6 = f(x + s, ytmp);
    ynew = y + s * ((35.0 / 384) * k1 + (500.0 / 1113) * k3 +
                    (125.0 / 192) * k4 - (2187.0 / 6784) * k5 +
                    (11.0 / 84) * k6);
    k7 = f(x + s, ynew);
    Vector err = s * ((71.0 / 57600) * k1 - (71.0 / 16695) * k3 +
                      (71.0 / 1920) * k4 - (17253.0 / 339200) * k5 +
                      (22.0 / 525) * k6 - (1.0 / 40) * k7);
    const double e = detail::scaled_error(err, y, ynew, opt);
    if (!std::isfinite(e))
      throw IntegrationFailure("non-finite state during integration");
    if (e <= 1.0) {
      x = last ? x1 : x + s;
      y = ynew;
      ++local.steps;
      local.max_error_estimate = std::max(local.max_error_estimate, e);
      if (after_step(x, y))
        k1 = f(x, y);
      else
        k1 = k7;
      const double fac = e == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(e, -0.2));
      h = std::min(h * fac, opt.hmax);
      if (last) break;
    } else {
      ++local.rejected;
      h *= std::max(0.1, 0.9 * std::pow(e, -0.25));
      if (h < 1e-14 * std::max(1.0, std::abs(x)))
        throw IntegrationFailure("step size underflow");
    }
  }
  if (stats) {
    stats->steps += local.steps;
    stats->rejected += local.rejected;
    stats->max_error_estimate =
        std::max(stats->max_error_estimate, local.max_error_estimate);
  }
  return y;
}

template <typename Vector, typename Rhs>
Vector integrate_dp45(Rhs&& f, Vector y, double x0, double x1,
                      const OdeOptions& opt = {}, OdeStats* stats = nullptr) {
  return integrate_dp45(std::forward<Rhs>(f), std::move(y), x0, x1, opt, stats,
                        [](double, Vector&) { return false; });
}

/// One classical fourth-order Runge-Kutta step.
template <typename Vector, typename Rhs>
Vector rk4_step(Rhs&& f, double x, const Vector& y, double h) {
  const Vector k1 = f(x, y);
  const Vector k2 = f(x + h / 2, Vector(y + (h / 2) * k1));
  const Vector k3 = f(x + h / 2, Vector(y + (h / 2) * k2));
  const Vector k4 = f(x + h, Vector(y + h * k3));
  return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace evanskit
