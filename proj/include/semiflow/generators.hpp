#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "complex.hpp"
#include "errors.hpp"

namespace semiflow {

enum class RemainderKind { Zero, ExtraPower, RationalExample1 };

// R1(z) = 0, c(1-z)^{1+gamma}, or whatever the rational closed form implies
struct Remainder {
  RemainderKind kind = RemainderKind::Zero;
  cplx c{0.0, 0.0};
  double gamma = 0.0;
};

struct DerivedConstants {
  cplx A, B, lambda, mu;
};

inline DerivedConstants derive_constants(cplx a, double alpha, cplx b, double beta)
{
  DerivedConstants k;
  k.A = std::pow(2.0, alpha) * a;
  k.B = std::pow(2.0, alpha + beta) * b;
  k.lambda = alpha * k.A;
  k.mu = k.B / k.A;
  return k;
}

class GeneratorSpec;
GeneratorSpec make_generator(cplx a, double alpha, cplx b, double beta, Remainder rem = {});

/**
 * Power-form generator f(z) = a(1-z)^{1+alpha} + b(1-z)^{1+alpha+beta} + R1(z)
 * with Denjoy-Wolff point 1. Built only through make_generator.
 *
 * Evaluation is done in the gap variable g = 1 - z, so points very close
 * to 1 can be handled without forming 1 - z by subtraction.
 */
class GeneratorSpec {
public:
  cplx a() const { return a_; }
  double alpha() const { return alpha_; }
  cplx b() const { return b_; }
  double beta() const { return beta_; }
  const Remainder& remainder() const { return rem_; }
  const DerivedConstants& constants() const { return k_; }
  bool tangential() const { return tangential_; }

  // exponent of the first correction term beyond the leading one, +inf if none
  double effective_beta() const
  {
    if (b_ != cplx(0.0, 0.0)) return beta_;
    if (rem_.kind == RemainderKind::ExtraPower && rem_.c != cplx(0.0, 0.0)) return rem_.gamma - alpha_;
    return std::numeric_limits<double>::infinity();
  }

  cplx leading_gap(cplx g) const { return a_ * cpow(g, 1.0 + alpha_); }

  // f - a g^{1+alpha}, evaluated without cancellation
  cplx excess_gap(cplx g) const
  {
    switch (rem_.kind) {
    case RemainderKind::RationalExample1: {
      const cplx g2 = g * g;
      return cplx(0.0, -1.0) * g2 * g2 / (4.0 * (4.0 + cplx(0.0, 1.0) * g2));
    }
    case RemainderKind::ExtraPower:
      return b_ * cpow(g, 1.0 + alpha_ + beta_) + rem_.c * cpow(g, 1.0 + rem_.gamma);
    case RemainderKind::Zero:
      break;
    }
    return b_ * cpow(g, 1.0 + alpha_ + beta_);
  }

  cplx f_gap(cplx g) const
  {
    if (rem_.kind == RemainderKind::RationalExample1) {
      const cplx g2 = g * g;
      return g2 / (4.0 + cplx(0.0, 1.0) * g2);
    }
    return leading_gap(g) + excess_gap(g);
  }

  // df/dz at z = 1 - g
  cplx fprime_gap(cplx g) const
  {
    if (rem_.kind == RemainderKind::RationalExample1) {
      const cplx d = 4.0 + cplx(0.0, 1.0) * g * g;
      return -8.0 * g / (d * d);
    }
    cplx df = -a_ * (1.0 + alpha_) * cpow(g, alpha_);
    df -= b_ * (1.0 + alpha_ + beta_) * cpow(g, alpha_ + beta_);
    if (rem_.kind == RemainderKind::ExtraPower) df -= rem_.c * (1.0 + rem_.gamma) * cpow(g, rem_.gamma);
    return df;
  }

  // p = f/(1-z)^2
  cplx p_gap(cplx g) const
  {
    if (rem_.kind == RemainderKind::RationalExample1) return 1.0 / (4.0 + cplx(0.0, 1.0) * g * g);
    cplx p = a_ * cpow(g, alpha_ - 1.0) + b_ * cpow(g, alpha_ + beta_ - 1.0);
    if (rem_.kind == RemainderKind::ExtraPower) p += rem_.c * cpow(g, rem_.gamma - 1.0);
    return p;
  }

private:
  friend GeneratorSpec make_generator(cplx, double, cplx, double, Remainder);
  GeneratorSpec() = default;

  cplx a_{1.0, 0.0};
  double alpha_ = 1.0;
  cplx b_{0.0, 0.0};
  double beta_ = 1.0;
  Remainder rem_;
  DerivedConstants k_{};
  bool tangential_ = false;
};

inline constexpr double arg_tolerance = 1e-12;

inline void check_disk_point(cplx z)
{
  if (!finite(z) || !(std::abs(z) < 1.0)) throw ConfigError("point outside the unit disk");
}

inline void check_halfplane_point(cplx w)
{
  if (!finite(w) || !(w.real() > 0.0)) throw ConfigError("point outside the right half-plane");
}

inline GeneratorSpec make_generator(cplx a, double alpha, cplx b, double beta, Remainder rem)
{
  if (!finite(a) || !finite(b) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw ConfigError("generator parameters must be finite");
  if (a == cplx(0.0, 0.0)) throw ConfigError("leading coefficient a must be nonzero");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in (0,2]");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  const double bound = 0.5 * pi * std::min(alpha, 2.0 - alpha);
  const double arg_a = std::abs(std::arg(a));
  if (arg_a > bound + arg_tolerance) throw ConfigError("|arg a| exceeds (pi/2) min(alpha, 2-alpha)");
  if (rem.kind == RemainderKind::ExtraPower) {
    if (!finite(rem.c) || !std::isfinite(rem.gamma)) throw ConfigError("remainder parameters must be finite");
    if (!(rem.gamma > alpha + beta)) throw ConfigError("extra power requires gamma > alpha + beta");
  }
  if (rem.kind == RemainderKind::RationalExample1) {
    const bool match = std::abs(a - cplx(0.25, 0.0)) < 1e-15 && alpha == 1.0 &&
                       std::abs(b - cplx(0.0, -1.0 / 16.0)) < 1e-15 && beta == 2.0;
    if (!match) throw ConfigError("rational example requires (a, alpha, b, beta) = (1/4, 1, -i/16, 2)");
  }
  GeneratorSpec g;
  g.a_ = a;
  g.alpha_ = alpha;
  g.b_ = b;
  g.beta_ = beta;
  g.rem_ = rem;
  g.k_ = derive_constants(a, alpha, b, beta);
  g.tangential_ = std::abs(arg_a - 0.5 * pi * alpha) <= arg_tolerance;
  return g;
}

// f(z) = (1-z)^2 / (4 + i(1-z)^2)
inline GeneratorSpec rational_example_1()
{
  Remainder r;
  r.kind = RemainderKind::RationalExample1;
  return make_generator({0.25, 0.0}, 1.0, {0.0, -1.0 / 16.0}, 2.0, r);
}

inline cplx eval_f(const GeneratorSpec& gen, cplx z)
{
  check_disk_point(z);
  return gen.f_gap(1.0 - z);
}

inline cplx eval_f_prime(const GeneratorSpec& gen, cplx z)
{
  check_disk_point(z);
  return gen.fprime_gap(1.0 - z);
}

inline cplx eval_p(const GeneratorSpec& gen, cplx z)
{
  check_disk_point(z);
  return gen.p_gap(1.0 - z);
}

inline cplx cayley(cplx z)
{
  check_disk_point(z);
  return (1.0 + z) / (1.0 - z);
}

inline cplx cayley_inverse(cplx w)
{
  check_halfplane_point(w);
  return (w - 1.0) / (w + 1.0);
}

/**
 * Half-plane conjugate phi(w) = 2 p(C^{-1}(w)), written in u = w + 1 as
 * A u^{1-alpha} + B u^{1-alpha-beta} + rho1(u).
 * This is an independent closed form, not a composition with the disk code.
 */
class HalfPlaneGenerator {
public:
  explicit HalfPlaneGenerator(GeneratorSpec g) : gen_(std::move(g)) {}

  const GeneratorSpec& origin() const { return gen_; }

  cplx leading_u(cplx u) const { return gen_.constants().A * cpow(u, 1.0 - gen_.alpha()); }

  // phi - A u^{1-alpha}
  cplx excess_u(cplx u) const
  {
    const auto& k = gen_.constants();
    const auto& rem = gen_.remainder();
    switch (rem.kind) {
    case RemainderKind::RationalExample1:
      return cplx(0.0, -0.5) / (u * u + cplx(0.0, 1.0));
    case RemainderKind::ExtraPower:
      return k.B * cpow(u, 1.0 - gen_.alpha() - gen_.beta()) +
             std::pow(2.0, rem.gamma) * rem.c * cpow(u, 1.0 - rem.gamma);
    case RemainderKind::Zero:
      break;
    }
    return k.B * cpow(u, 1.0 - gen_.alpha() - gen_.beta());
  }

  cplx phi_u(cplx u) const
  {
    if (gen_.remainder().kind == RemainderKind::RationalExample1) {
      const cplx u2 = u * u;
      return 0.5 * u2 / (u2 + cplx(0.0, 1.0));
    }
    return leading_u(u) + excess_u(u);
  }

  cplx phi(cplx w) const
  {
    check_halfplane_point(w);
    return phi_u(w + 1.0);
  }

private:
  GeneratorSpec gen_;
};

inline HalfPlaneGenerator to_half_plane(const GeneratorSpec& gen) { return HalfPlaneGenerator(gen); }

struct AdmissibilityReport {
  double min_re_p = 0.0;
  cplx argmin{0.0, 0.0};
  double scale = 1.0;
  std::size_t points = 0;
  bool pass = false;
};

inline constexpr double eps_adm = 1e-12;

/**
 * Samples Re p on a polar grid of the disk plus a refinement of
 * half-circles around z = 1. A sampled check, not a proof.
 */
inline AdmissibilityReport validate_admissibility(const GeneratorSpec& gen, int nr = 64, int ntheta = 64,
                                                  bool refine = true)
{
  AdmissibilityReport rep;
  rep.min_re_p = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  auto visit = [&](cplx g) {
    const cplx p = gen.p_gap(g);
    if (!finite(p)) return;
    ++rep.points;
    scale = std::max(scale, std::abs(p));
    if (p.real() < rep.min_re_p) {
      rep.min_re_p = p.real();
      rep.argmin = 1.0 - g;
    }
  };
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) / nr;
    for (int j = 0; j < ntheta; ++j) visit(1.0 - std::polar(r, 2.0 * pi * j / ntheta));
  }
  // near the unit circle
  for (int k = 1; k <= 12; ++k) {
    const double r = 1.0 - std::pow(10.0, -k);
    for (int j = 0; j < ntheta; ++j) visit(1.0 - std::polar(r, 2.0 * pi * (j + 0.5) / ntheta));
  }
  if (refine) {
    // g = eps e^{i theta}, |theta| < pi/2, stays inside the disk for small eps
    for (int k = 1; k <= 14; ++k) {
      const double eps = std::pow(10.0, -0.5 * k);
      for (int j = 0; j <= ntheta; ++j) {
        const double th = -0.5 * pi + pi * (j + 0.5) / (ntheta + 1);
        const cplx g = std::polar(eps, th);
        if (std::abs(1.0 - g) < 1.0) visit(g);
      }
    }
  }
  rep.scale = std::max(1.0, scale);
  rep.pass = rep.min_re_p >= -eps_adm * rep.scale;
  return rep;
}

} // namespace semiflow
