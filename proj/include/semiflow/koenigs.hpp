#pragma once

#include <cmath>
#include <limits>

#include "complex.hpp"
#include "errors.hpp"
#include "flow.hpp"
#include "generators.hpp"
#include "quadrature.hpp"

namespace semiflow {

struct ShiftConstant {
  cplx value{0.0, 0.0};
  double error = 0.0;
  bool available = false;
};

/**
 * Koenigs functions of a generator.
 *
 * h(z) = int_0^z d zeta / f(zeta) along the segment [0,z] in the disk and
 * sigma(w) = int_1^w dv / phi(v) along [1,w] in the half-plane. In both the
 * leading power is integrated in closed form and only the (integrable)
 * difference goes through quadrature.
 *
 * The shift constants behind h1 and sigma1 are computed once at
 * construction, by two different routes: endpoint extrapolation in the disk
 * and a tail-removing substitution in the half-plane.
 */
class KoenigsEvaluator {
public:
  explicit KoenigsEvaluator(GeneratorSpec gen, double quad_tol = 1e-10)
      : gen_(std::move(gen)), hp_(gen_), tol_(quad_tol)
  {
    if (!(quad_tol > 0.0)) throw ConfigError("quad_tol must be positive");
    const double p = gen_.effective_beta() - gen_.alpha();
    if (std::isinf(p)) {
      // no correction term at all: both difference integrands vanish
      c1_.available = c2_.available = true;
    } else if (p > 0.0) {
      c1_ = disk_shift(p);
      c2_ = halfplane_shift(p);
    }
  }

  const GeneratorSpec& generator() const { return gen_; }
  double quad_tol() const { return tol_; }

  // int_0^1 (h'(s) - 1/(a(1-s)^{alpha+1})) ds
  const ShiftConstant& c1() const { return c1_; }
  // int_1^inf (sigma'(v) - (v+1)^{alpha-1}/A) dv
  const ShiftConstant& c2() const { return c2_; }

  // h at the disk point z = 1 - g
  cplx h_gap(cplx g) const
  {
    const double alpha = gen_.alpha();
    const cplx a = gen_.a();
    const cplx z = 1.0 - g;
    const cplx lead = (cpow(g, -alpha) - 1.0) / (a * alpha);
    if (z == cplx(0.0, 0.0)) return 0.0;
    auto integrand = [&](double s) { return disk_difference((1.0 - s) + s * g); };
    const auto q = integrate(integrand, 0.0, 1.0, tol_, 0.1 * tol_ * std::max(1.0, std::abs(lead)) / std::abs(z));
    if (!q.converged) throw NumericError("quadrature for h did not converge");
    return lead + z * q.value;
  }

  cplx h(cplx z) const
  {
    check_disk_point(z);
    return h_gap(1.0 - z);
  }

  cplx sigma(cplx w) const
  {
    check_halfplane_point(w);
    const double alpha = gen_.alpha();
    const cplx lambda = gen_.constants().lambda;
    const cplx lead = (cpow(w + 1.0, alpha) - std::pow(2.0, alpha)) / lambda;
    const cplx dw = w - 1.0;
    if (dw == cplx(0.0, 0.0)) return 0.0;
    auto integrand = [&](double s) { return halfplane_difference(1.0 + s * dw); };
    const auto q = integrate(integrand, 0.0, 1.0, tol_, 0.1 * tol_ * std::max(1.0, std::abs(lead)) / std::abs(dw));
    if (!q.converged) throw NumericError("quadrature for sigma did not converge");
    return lead + dw * q.value;
  }

  cplx h1(cplx z) const { return h(z) + h1_shift(); }
  cplx h1_gap(cplx g) const { return h_gap(g) + h1_shift(); }
  cplx sigma1(cplx w) const { return sigma(w) + sigma1_shift(); }

  // h1 - h
  cplx h1_shift() const
  {
    require_shift(c1_);
    return std::pow(2.0, gen_.alpha()) / gen_.constants().lambda - c1_.value;
  }

  // sigma1 - sigma
  cplx sigma1_shift() const
  {
    require_shift(c2_);
    return std::pow(2.0, gen_.alpha()) / gen_.constants().lambda - c2_.value;
  }

  // 1/f(z) - 1/(a (1-z)^{1+alpha}) at z = 1 - g
  cplx disk_difference(cplx g) const
  {
    const cplx ex = gen_.excess_gap(g);
    if (ex == cplx(0.0, 0.0)) return 0.0;
    return -ex / (gen_.f_gap(g) * gen_.leading_gap(g));
  }

  // 1/phi(v) - (v+1)^{alpha-1}/A
  cplx halfplane_difference(cplx v) const
  {
    const cplx u = v + 1.0;
    const cplx ex = hp_.excess_u(u);
    if (ex == cplx(0.0, 0.0)) return 0.0;
    return -ex / (hp_.phi_u(u) * hp_.leading_u(u));
  }

private:
  void require_shift(const ShiftConstant& c) const
  {
    if (!c.available) throw ConfigError("shifted Koenigs function needs beta > alpha");
  }

  // integrate on [delta_k, 1] in g = 1 - s and extrapolate delta -> 0 with a delta^p remainder
  ShiftConstant disk_shift(double p) const
  {
    ShiftConstant out;
    out.available = true;
    auto d = [&](double g) { return disk_difference(cplx(g, 0.0)); };
    double delta = 1e-2;
    auto q0 = integrate(d, delta, 1.0, 0.1 * tol_, 1e-3 * tol_);
    if (!q0.converged) throw NumericError("shift constant quadrature failed");
    cplx prev_int = q0.value;
    const double r = std::pow(2.0, p);
    cplx prev_extrap = std::numeric_limits<double>::quiet_NaN();
    for (int k = 1; k <= 60; ++k) {
      const double next = 0.5 * delta;
      auto q = integrate(d, next, delta, 0.1 * tol_, 1e-3 * tol_);
      if (!q.converged) throw NumericError("shift constant quadrature failed");
      const cplx cur_int = prev_int + q.value;
      const cplx extrap = (r * cur_int - prev_int) / (r - 1.0);
      if (k >= 3) {
        const double change = std::abs(extrap - prev_extrap);
        if (change <= tol_ * std::max(1.0, std::abs(extrap))) {
          out.value = extrap;
          out.error = change;
          return out;
        }
      }
      prev_extrap = extrap;
      prev_int = cur_int;
      delta = next;
    }
    throw NumericError("shift constant extrapolation did not settle");
  }

  // v + 1 = 2 x^{-m}, m = 1/p, turns the algebraic tail into a bounded integrand on (0,1]
  ShiftConstant halfplane_shift(double p) const
  {
    ShiftConstant out;
    out.available = true;
    const double m = 1.0 / p;
    auto integrand = [&](double x) -> cplx {
      const double lx = std::log(x);
      if (-m * lx > 600.0) return 0.0;
      const double u = 2.0 * std::exp(-m * lx);
      return halfplane_difference(cplx(u - 1.0, 0.0)) * (2.0 * m * std::exp((-m - 1.0) * lx));
    };
    const auto q = integrate(integrand, 0.0, 1.0, 0.1 * tol_, 1e-3 * tol_);
    if (!q.converged) throw NumericError("tail integral for sigma1 did not converge");
    out.value = q.value;
    out.error = q.error;
    return out;
  }

  GeneratorSpec gen_;
  HalfPlaneGenerator hp_;
  double tol_;
  ShiftConstant c1_, c2_;
};

// |h(F_t(z)) - h(z) - t| (disk) or |sigma(Phi_t(w)) - sigma(w) - t| (half-plane)
inline double abel_residual(const KoenigsEvaluator& ev, cplx point, double t, const IntegratorConfig& base,
                            Frame frame = Frame::Disk)
{
  if (t < 0.0) throw ConfigError("negative time");
  if (t == 0.0) return 0.0;
  IntegratorConfig cfg = base;
  cfg.grid = TimeGrid::list({t});
  const auto tr = integrate_trajectory(ev.generator(), point, cfg, frame);
  if (frame == Frame::Disk) return std::abs(ev.h_gap(tr.gaps.back()) - ev.h(point) - t);
  return std::abs(ev.sigma(tr.points.back()) - ev.sigma(point) - t);
}

} // namespace semiflow
