#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "complex.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "flow.hpp"
#include "generators.hpp"
#include "koenigs.hpp"

namespace semiflow {

enum class Regime { BetaLess, BetaEqual, BetaGreater, PurePower };

inline std::string to_string(Regime r)
{
  switch (r) {
  case Regime::BetaLess: return "beta_less";
  case Regime::BetaEqual: return "beta_equal";
  case Regime::BetaGreater: return "beta_greater";
  case Regime::PurePower: return "pure_power";
  }
  return "?";
}

struct RegimeInfo {
  Regime regime = Regime::PurePower;
  int k = 0;  // binomial depth, BetaGreater only
};

inline RegimeInfo regime_of(const GeneratorSpec& gen)
{
  RegimeInfo r;
  const double a = gen.alpha(), b = gen.beta();
  if (gen.b() == cplx(0.0, 0.0)) return r;
  if (b == a) {
    r.regime = Regime::BetaEqual;
  } else if (b < a) {
    r.regime = Regime::BetaLess;
  } else {
    r.regime = Regime::BetaGreater;
    // largest k with k alpha <= beta; exact multiples land on k = beta/alpha
    int k = static_cast<int>(std::floor(b / a));
    while ((k + 1) * a <= b) ++k;
    while (k > 1 && k * a > b) --k;
    r.k = k;
  }
  return r;
}

// (s choose j) = prod_{i<j} (s - i) / j!
inline double binomial(double s, int j)
{
  double c = 1.0;
  for (int i = 0; i < j; ++i) c *= (s - i) / (i + 1);
  return c;
}

/**
 * The bracket in (w+1)Phi-type expansions:
 *   Phi_t(w) + 1 = (lambda t)^{1/alpha} * bracket.
 * `shift` is sigma1(w) (or h1(z) in the disk); it is only read for BetaGreater.
 */
inline cplx expansion_bracket(const GeneratorSpec& gen, double t, cplx shift = 0.0)
{
  const auto info = regime_of(gen);
  const double alpha = gen.alpha(), beta = gen.beta();
  const auto& k = gen.constants();
  switch (info.regime) {
  case Regime::PurePower:
    return 1.0;
  case Regime::BetaLess:
    return 1.0 + k.mu / (alpha - beta) * cpow(k.lambda * t, -beta / alpha);
  case Regime::BetaEqual:
    return 1.0 + (k.mu / alpha) * std::log(t + 1.0) / (k.lambda * t);
  case Regime::BetaGreater: {
    cplx s = 1.0;
    cplx pw = 1.0;
    for (int j = 1; j <= info.k; ++j) {
      pw *= shift / t;
      s += binomial(1.0 / alpha, j) * pw;
    }
    return s + k.mu / (alpha - beta) * cpow(k.lambda * t, -beta / alpha);
  }
  }
  return 1.0;
}

inline cplx leading_power(const GeneratorSpec& gen, double t)
{
  return cpow(gen.constants().lambda * t, 1.0 / gen.alpha());
}

// prediction of Phi_t(w) + 1 with the remainder set to zero
inline cplx predict_halfplane(const GeneratorSpec& gen, const KoenigsEvaluator* ev, cplx w, double t)
{
  if (!(t > 0.0)) throw ConfigError("prediction needs t > 0");
  check_halfplane_point(w);
  cplx shift = 0.0;
  if (regime_of(gen).regime == Regime::BetaGreater) {
    if (!ev) throw ConfigError("beta > alpha prediction needs a Koenigs evaluator");
    shift = ev->sigma1(w);
  }
  return leading_power(gen, t) * expansion_bracket(gen, t, shift);
}

// prediction of 1/(1 - F_t(z)); equals predict_halfplane(C(z))/2
inline cplx predict_disk(const GeneratorSpec& gen, const KoenigsEvaluator* ev, cplx z, double t)
{
  if (!(t > 0.0)) throw ConfigError("prediction needs t > 0");
  check_disk_point(z);
  cplx shift = 0.0;
  if (regime_of(gen).regime == Regime::BetaGreater) {
    if (!ev) throw ConfigError("beta > alpha prediction needs a Koenigs evaluator");
    shift = ev->h1(z);
  }
  return 0.5 * leading_power(gen, t) * expansion_bracket(gen, t, shift);
}

// remainder condition strong enough for the refined (constant-level) expansion
inline bool has_strong_remainder(const GeneratorSpec& gen)
{
  const auto& r = gen.remainder();
  if (r.kind == RemainderKind::Zero) return true;
  if (r.kind == RemainderKind::ExtraPower) return r.gamma > 2.0 * gen.alpha() || r.c == cplx(0.0, 0.0);
  return false;
}

inline void require_refined_hypotheses(const GeneratorSpec& gen)
{
  if (!has_strong_remainder(gen)) throw ConfigError("refined expansion needs a strong remainder");
  const auto reg = regime_of(gen).regime;
  if (reg == Regime::PurePower) return;
  const double a = gen.alpha(), b = gen.beta();
  if (!(b > 0.5 * a && b <= a)) throw ConfigError("refined expansion needs alpha/2 < beta <= alpha");
}

// the t-dependent correction subtracted in the definition of C
inline cplx refined_drift(const GeneratorSpec& gen, double t, bool shifted_time)
{
  const auto& k = gen.constants();
  const double a = gen.alpha(), b = gen.beta();
  switch (regime_of(gen).regime) {
  case Regime::BetaEqual:
    return k.mu * std::log(t + 1.0);
  case Regime::BetaLess:
    return k.mu * a / (a - b) * cpow(k.lambda * (shifted_time ? t + 1.0 : t), 1.0 - b / a);
  default:
    return 0.0;
  }
}

/**
 * (Phi_t(w)+1)^alpha (half-plane) or (2/(1-F_t(z)))^alpha (disk) with the
 * remainder dropped: lambda t + drift + lambda sigma(w) (or lambda h(z)) + C.
 */
inline cplx refined_expansion(const GeneratorSpec& gen, const KoenigsEvaluator& ev, Frame frame, cplx point, double t,
                              cplx C)
{
  require_refined_hypotheses(gen);
  const cplx lambda = gen.constants().lambda;
  const cplx kf = frame == Frame::Disk ? ev.h(point) : ev.sigma(point);
  return lambda * t + refined_drift(gen, t, false) + lambda * kf + C;
}

struct RemainderSeries {
  Regime regime = Regime::PurePower;
  std::vector<double> t;
  std::vector<cplx> scaled;
};

/**
 * Regime-scaled remainder along the trajectory of `point`:
 *   PurePower    t^{-1/alpha} (Phi_t(w) - (lambda t)^{1/alpha})   [disk: t^{-1/alpha} r(z,t)]
 *   BetaLess     t^{beta/alpha} Gamma
 *   BetaEqual    t Gamma / log(t+1)
 *   BetaGreater  t^{beta/alpha} Gamma
 * where Gamma is what is left of the bracket after the stated terms.
 */
inline RemainderSeries remainder_decay(const GeneratorSpec& gen, const KoenigsEvaluator& ev, cplx point, Frame frame,
                                       const IntegratorConfig& cfg)
{
  const auto info = regime_of(gen);
  const auto tr = integrate_trajectory(gen, point, cfg, frame);
  cplx shift = 0.0;
  if (info.regime == Regime::BetaGreater) shift = frame == Frame::Disk ? ev.h1(point) : ev.sigma1(point);
  const double alpha = gen.alpha(), beta = gen.beta();
  RemainderSeries out;
  out.regime = info.regime;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double t = tr.times[i];
    const cplx rel = tr.relative_to_leading(i);
    cplx s;
    if (info.regime == Regime::PurePower) {
      const cplx lead = leading_power(gen, t);
      s = frame == Frame::Disk ? 0.5 * lead * rel : lead * rel - 1.0;
      s *= std::pow(t, -1.0 / alpha);
    } else {
      const cplx gamma = rel - (expansion_bracket(gen, t, shift) - 1.0);
      if (info.regime == Regime::BetaEqual) s = gamma * t / std::log(t + 1.0);
      else s = gamma * std::pow(t, beta / alpha);
    }
    out.t.push_back(t);
    out.scaled.push_back(s);
  }
  return out;
}

// decay exponent assumed for the scaled remainders of each regime
inline double regime_default_p(const GeneratorSpec& gen)
{
  const auto info = regime_of(gen);
  switch (info.regime) {
  case Regime::BetaLess: return gen.beta() / gen.alpha();
  case Regime::BetaEqual:
  case Regime::PurePower: return 1.0;
  case Regime::BetaGreater: {
    const double q = info.k + 1 - gen.beta() / gen.alpha();
    return q > 0.0 ? std::min(q, 1.0) : 1.0;
  }
  }
  return 1.0;
}

inline LimitEstimate remainder_limit(const GeneratorSpec& gen, const RemainderSeries& r)
{
  return estimate_limit(r.t, r.scaled, {.p = regime_default_p(gen), .free_fallback = true});
}

inline std::vector<std::pair<double, double>> prediction_error_curve(const GeneratorSpec& gen,
                                                                     const KoenigsEvaluator& ev, cplx point,
                                                                     Frame frame, const IntegratorConfig& cfg)
{
  const auto info = regime_of(gen);
  const auto tr = integrate_trajectory(gen, point, cfg, frame);
  cplx shift = 0.0;
  if (info.regime == Regime::BetaGreater) shift = frame == Frame::Disk ? ev.h1(point) : ev.sigma1(point);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double t = tr.times[i];
    const cplx rel = tr.relative_to_leading(i);
    // relative error of the prediction against the integrated value
    const cplx br = expansion_bracket(gen, t, shift);
    out.emplace_back(t, std::abs((rel - (br - 1.0)) / br));
  }
  return out;
}

/**
 * C = lim ((Phi_t(1)+1)^alpha - lambda t - drift(t)); with the disk frame the
 * same limit is read off the trajectory of z = 0.
 */
inline LimitEstimate constant_C_estimate(const GeneratorSpec& gen, Frame frame, const IntegratorConfig& cfg)
{
  require_refined_hypotheses(gen);
  const cplx start = frame == Frame::Disk ? cplx(0.0, 0.0) : cplx(1.0, 0.0);
  const auto tr = integrate_trajectory(gen, start, cfg, frame);
  std::vector<double> ts;
  std::vector<cplx> vs;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    ts.push_back(tr.times[i]);
    vs.push_back(tr.shifted[i] - refined_drift(gen, tr.times[i], true));
  }
  return estimate_limit(ts, vs);
}

struct LimitComparison {
  LimitEstimate numeric;
  cplx closed_form{0.0, 0.0};

  double abs_diff() const { return std::abs(numeric.value - closed_form); }
  double rel_diff() const { return abs_diff() / std::max(std::abs(closed_form), 1e-300); }
};

/**
 * (t+1)^{beta/alpha} ((Phi_t(w)+1)^alpha - (Phi_t(1)+1)^alpha - lambda sigma(w))
 *   -> mu lambda^{1-beta/alpha} sigma(w).
 * Disk frame: the same with 1/(1-F_t(z)), 1/(1-F_t(0)), h(z), divided by 2^alpha.
 */
inline LimitComparison appendix_limit(const GeneratorSpec& gen, const KoenigsEvaluator& ev, cplx point,
                                      const IntegratorConfig& cfg, Frame frame = Frame::HalfPlane)
{
  const auto& k = gen.constants();
  const double alpha = gen.alpha(), beta = gen.beta();
  const cplx ref = frame == Frame::Disk ? cplx(0.0, 0.0) : cplx(1.0, 0.0);
  const auto tr = integrate_trajectory(gen, point, cfg, frame);
  const auto t1 = integrate_trajectory(gen, ref, cfg, frame);
  const cplx kf = frame == Frame::Disk ? ev.h(point) : ev.sigma(point);
  const double norm = frame == Frame::Disk ? std::pow(2.0, alpha) : 1.0;
  std::vector<double> ts;
  std::vector<cplx> vs;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double t = tr.times[i];
    ts.push_back(t);
    vs.push_back(std::pow(t + 1.0, beta / alpha) * (tr.shifted[i] - t1.shifted[i] - k.lambda * kf) / norm);
  }
  LimitComparison c;
  c.numeric = estimate_limit(ts, vs);
  c.closed_form = gen.b() == cplx(0.0, 0.0) ? cplx(0.0, 0.0) : k.mu * cpow(k.lambda, 1.0 - beta / alpha) * kf / norm;
  return c;
}

/**
 * lim (1/(1-F_t(z))^alpha - 1/(1-F_t(0))^alpha) = lambda h(z)/2^alpha, against
 * the quadrature value of the right side.
 */
inline LimitComparison koenigs_difference_limit(const GeneratorSpec& gen, const KoenigsEvaluator& ev, cplx z,
                                                const IntegratorConfig& cfg)
{
  const double alpha = gen.alpha();
  const double norm = std::pow(2.0, alpha);
  const auto tr = integrate_trajectory(gen, z, cfg, Frame::Disk);
  const auto t0 = integrate_trajectory(gen, 0.0, cfg, Frame::Disk);
  std::vector<double> ts;
  std::vector<cplx> vs;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    ts.push_back(tr.times[i]);
    vs.push_back((tr.shifted[i] - t0.shifted[i]) / norm);
  }
  LimitComparison c;
  c.numeric = estimate_limit(ts, vs);
  c.closed_form = gen.constants().lambda * ev.h(z) / norm;
  return c;
}

} // namespace semiflow
