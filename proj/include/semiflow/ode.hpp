#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "complex.hpp"
#include "errors.hpp"

namespace semiflow {

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step_growth = 5.0;
  double initial_step = 0.0;  // 0 picks a step from the field
  long max_steps = 2000000;
};

struct OdeOutput {
  std::vector<cplx> values;
  std::vector<double> error;  // accumulated local error estimates up to each output
  long steps = 0;
  long rejected = 0;
};

/**
 * Dormand-Prince 5(4) for a scalar complex ODE y' = F(t, y).
 * Lands exactly on each requested output time. `valid(y)` lets the caller
 * reject steps that leave the domain; a rejected step is retried smaller.
 */
template <class F, class Valid>
OdeOutput dopri45(F&& rhs, Valid&& valid, double t0, cplx y0, const std::vector<double>& outputs,
                  const OdeOptions& opt)
{
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeOutput out;
  out.values.reserve(outputs.size());
  out.error.reserve(outputs.size());
  double t = t0;
  cplx y = y0;
  double acc_err = 0.0;
  cplx k1 = rhs(t, y);
  double h = opt.initial_step;
  if (h <= 0.0) {
    const double d = std::abs(k1);
    h = d > 0.0 ? 1e-3 * std::max(1.0, std::abs(y)) / d : 1e-3;
    h = std::clamp(h, 1e-8, 1e-1);
  }
  for (double target : outputs) {
    if (target < t) throw ConfigError("output times must be nondecreasing");
    while (t < target) {
      if (out.steps + out.rejected > opt.max_steps) throw NumericError("step budget exhausted at t=" + std::to_string(t));
      bool clipped = false;
      double step = h;
      if (t + step >= target || t + 1.01 * step >= target) {
        step = target - t;
        clipped = true;
      }
      if (step <= 1e-15 * std::max(1.0, std::abs(t))) {
        if (target - t <= 1e-15 * std::max(1.0, std::abs(t))) {
          t = target;
          break;
        }
        throw NumericError("step size underflow at t=" + std::to_string(t));
      }
      const cplx k2 = rhs(t + c2 * step, y + step * (a21 * k1));
      const cplx k3 = rhs(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
      const cplx k4 = rhs(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
      const cplx k5 = rhs(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const cplx k6 = rhs(t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const cplx yn = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const bool ok_domain = finite(yn) && valid(t + step, yn);
      cplx k7 = ok_domain ? rhs(t + step, yn) : cplx(0.0, 0.0);
      const cplx errv = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y), std::abs(yn));
      const double en = ok_domain && finite(k7) ? std::abs(errv) / sc : INFINITY;
      if (en <= 1.0) {
        t = clipped ? target : t + step;
        y = yn;
        k1 = k7;
        acc_err += std::abs(errv);
        ++out.steps;
        const double fac = en == 0.0 ? opt.max_step_growth
                                     : std::clamp(0.9 * std::pow(en, -0.2), 0.2, opt.max_step_growth);
        // a clipped step says little about the natural step size
        h = clipped ? std::max(h, step * fac) : step * fac;
      } else {
        ++out.rejected;
        const double fac = std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.25;
        h = step * fac;
      }
    }
    out.values.push_back(y);
    out.error.push_back(acc_err);
  }
  return out;
}

} // namespace semiflow
