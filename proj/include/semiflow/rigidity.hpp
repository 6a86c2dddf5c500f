#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "complex.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "flow.hpp"
#include "generators.hpp"
#include "geometry.hpp"
#include "koenigs.hpp"

namespace semiflow {

struct PairCurve {
  std::vector<double> t;
  std::vector<double> gap;   // |F_t(z1) - F*_t(z2)|
  std::vector<double> base;  // |1 - F_t(z1)|
  std::vector<cplx> diff;    // F_t(z1) - F*_t(z2)
};

inline void require_same_leading(const GeneratorSpec& s, const GeneratorSpec& s2)
{
  if (s.a() != s2.a() || s.alpha() != s2.alpha())
    throw ConfigError("pair comparison needs identical leading coefficient and exponent");
}

/**
 * Both flows run through the half-plane shifted state on one grid. With
 * u = (lambda t + v)^{1/alpha} the difference of the disk points is
 * 2(u - u*)/(u u*), and u - u* is formed from v - v* directly.
 */
inline PairCurve pair_curve(const GeneratorSpec& s, const GeneratorSpec& s2, cplx z1, cplx z2, const IntegratorConfig& base_cfg)
{
  require_same_leading(s, s2);
  IntegratorConfig cfg = base_cfg;
  cfg.method = Method::HalfPlane;
  const auto a = integrate_trajectory(s, z1, cfg, Frame::Disk);
  const auto b = integrate_trajectory(s2, z2, cfg, Frame::Disk);
  const double ia = 1.0 / s.alpha();
  const cplx lam = s.constants().lambda;
  PairCurve pc;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double t = a.times[i];
    const cplx sb = lam * t + b.shifted[i];
    const cplx ub = cpow(sb, ia);
    const cplx du = ub * pow1p_m1((a.shifted[i] - b.shifted[i]) / sb, ia);
    const cplx ua = ub + du;
    const cplx d = 2.0 * du / (ua * ub);
    pc.t.push_back(t);
    pc.diff.push_back(d);
    pc.gap.push_back(std::abs(d));
    pc.base.push_back(std::abs(a.gaps[i]));
  }
  return pc;
}

struct PairOrderReport {
  bool above_all = false;
  double estimated_order = 0.0;
  double fit_r2 = 0.0;
  double predicted_order = 0.0;
  bool predicted_lower_bound = false;  // the prediction is "greater than predicted_order"
  PairCurve curve;
};

/**
 * Order from the slope of log|F - F*| against log|1 - F| over the last
 * `tail_decades` of |1 - F|.
 */
inline PairOrderReport pair_order_estimate(const GeneratorSpec& s, const GeneratorSpec& s2, cplx z1, cplx z2,
                                           const IntegratorConfig& cfg, double tail_decades = 1.5)
{
  PairOrderReport rep;
  rep.curve = pair_curve(s, s2, z1, z2, cfg);
  const auto& c = rep.curve;
  bool all_zero = true;
  for (std::size_t i = 0; i < c.t.size(); ++i)
    if (c.gap[i] > 1e-300 && c.gap[i] > 1e-15 * c.base[i] * c.base[i]) all_zero = false;
  if (all_zero) {
    rep.above_all = true;
    rep.estimated_order = INFINITY;
    return rep;
  }
  double bmin = INFINITY;
  for (double b : c.base) bmin = std::min(bmin, b);
  const double cut = bmin * std::pow(10.0, tail_decades);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < c.t.size(); ++i)
    if (c.base[i] <= cut && c.gap[i] > 0.0) {
      x.push_back(c.base[i]);
      y.push_back(c.gap[i]);
    }
  if (x.size() < 6) throw ConfigError("pair order needs at least 6 tail samples");
  const auto fit = loglog_fit(x, y);
  rep.estimated_order = std::max(0.0, fit.slope - 1.0);
  rep.fit_r2 = fit.r2;
  return rep;
}

// |F - F*|/|1 - F|^{1+kappa} drops below 1e-3 of its first value and keeps falling over the last half
inline bool greater_than(const PairOrderReport& rep, double kappa)
{
  if (rep.above_all) return true;
  const auto& c = rep.curve;
  std::vector<double> s;
  for (std::size_t i = 0; i < c.t.size(); ++i) s.push_back(c.gap[i] / std::pow(c.base[i], 1.0 + kappa));
  if (s.size() < 4 || !(s.front() > 0.0)) return false;
  if (!(s.back() <= 1e-3 * s.front())) return false;
  for (std::size_t i = s.size() / 2 + 1; i < s.size(); ++i)
    if (s[i] > s[i - 1]) return false;
  return true;
}

inline bool approx_order(const PairOrderReport& rep, double kappa, double slack = 0.05)
{
  return !rep.above_all && std::abs(rep.estimated_order - kappa) <= slack && rep.fit_r2 >= 0.999;
}

struct WeakRigidityResult {
  cplx c;
  PairOrderReport pair;
  bool order_greater_than_beta = false;
  bool order_approx_beta = false;
  bool consistent = false;  // (c == 0) exactly when the order exceeds beta
};

// perturbation f + c(1-z)^{1+alpha+beta}, i.e. b -> b + c
inline GeneratorSpec perturbed_generator(const GeneratorSpec& gen, cplx c)
{
  return make_generator(gen.a(), gen.alpha(), gen.b() + c, gen.beta(), gen.remainder());
}

inline WeakRigidityResult weak_rigidity_experiment(const GeneratorSpec& gen, cplx c, cplx z, const IntegratorConfig& cfg)
{
  if (!(gen.beta() <= gen.alpha())) throw ConfigError("weak rigidity needs beta <= alpha");
  const auto pert = perturbed_generator(gen, c);
  if (!validate_admissibility(pert).pass) throw ConfigError("perturbed generator is not admissible");
  WeakRigidityResult r;
  r.c = c;
  r.pair = pair_order_estimate(gen, pert, z, z, cfg);
  r.pair.predicted_order = gen.beta();
  r.pair.predicted_lower_bound = c == cplx(0.0, 0.0);
  r.order_greater_than_beta = greater_than(r.pair, gen.beta());
  r.order_approx_beta = approx_order(r.pair, gen.beta());
  r.consistent = (c == cplx(0.0, 0.0)) == r.order_greater_than_beta;
  return r;
}

struct StrongRigidityPoint {
  cplx z;
  LimitEstimate limit;  // of t^{1+1/alpha} Re(e^{i theta}(F_t(z) - F*_t(z)))
  double last_value = 0.0;
  bool vanishes = false;
};

struct StrongRigidityReport {
  double theta = 0.0;
  bool exploratory = false;  // outside the proven hypotheses
  std::vector<StrongRigidityPoint> points;
  bool all_vanish = false;
  double koenigs_difference_spread = 0.0;  // max |(h - h*)(z) - (h - h*)(z_0)| over the grid
  bool koenigs_difference_constant = false;
};

inline bool strong_rigidity_hypotheses(const GeneratorSpec& s, const GeneratorSpec& s2)
{
  auto ok = [](const GeneratorSpec& g) {
    const double a = g.alpha(), b = g.beta();
    return (a / 2.0 < b && b <= a && has_strong_remainder(g)) || b > a;
  };
  return ok(s) && ok(s2);
}

/**
 * Scaled differences t^{1+1/alpha} Re(e^{i theta}(F_t - F*_t)) on a grid of
 * initial points. With `allow_exploratory` the check also runs outside the
 * hypotheses and only records the data.
 */
inline StrongRigidityReport strong_rigidity_check(const GeneratorSpec& s, const GeneratorSpec& s2, double theta,
                                                  const std::vector<cplx>& zs, const IntegratorConfig& cfg,
                                                  bool allow_exploratory = false)
{
  require_same_leading(s, s2);
  if (zs.empty()) throw ConfigError("strong rigidity needs at least one initial point");
  StrongRigidityReport rep;
  rep.theta = theta;
  rep.exploratory = !strong_rigidity_hypotheses(s, s2);
  if (rep.exploratory && !allow_exploratory) throw ConfigError("strong rigidity hypotheses are not met");
  const cplx rot = std::polar(1.0, theta);
  const double e = 1.0 + 1.0 / s.alpha();
  rep.all_vanish = true;
  for (cplx z : zs) {
    const auto pc = pair_curve(s, s2, z, z, cfg);
    std::vector<cplx> v;
    for (std::size_t i = 0; i < pc.t.size(); ++i) v.push_back(std::pow(pc.t[i], e) * (rot * pc.diff[i]).real());
    StrongRigidityPoint p;
    p.z = z;
    p.last_value = v.back().real();
    bool zero = true;
    for (auto x : v) zero = zero && x == cplx(0.0, 0.0);
    if (zero) {
      p.limit.model = LimitModel::LastValue;
      p.vanishes = true;
    } else {
      p.limit = estimate_limit(pc.t, v);
      p.vanishes = !p.limit.divergent && std::abs(p.limit.value) <= std::max(10.0 * p.limit.error, 1e-6);
    }
    rep.all_vanish = rep.all_vanish && p.vanishes;
    rep.points.push_back(p);
  }
  const KoenigsEvaluator h(s), h2(s2);
  const cplx d0 = h.h(zs.front()) - h2.h(zs.front());
  for (cplx z : zs) rep.koenigs_difference_spread = std::max(rep.koenigs_difference_spread, std::abs(h.h(z) - h2.h(z) - d0));
  rep.koenigs_difference_constant = rep.koenigs_difference_spread <= 1e-8 * (1.0 + std::abs(d0));
  return rep;
}

struct SameTrajectoryReport {
  PairOrderReport pair;
  bool order_check = false;  // > beta when beta < alpha, > alpha - 0.05 otherwise
  LimitEstimate scaled_difference;
  // beta == alpha: limit of t^{1-1/alpha}(Phi(w1) - Phi(w2)); a finite value forces the log-scaled one to 0
  std::optional<LimitEstimate> unlogged;
  bool scaled_difference_vanishes = false;
};

/**
 * Two trajectories of one semigroup. The scaled half-plane difference is
 * t^{(beta-1)/alpha}(Phi(w1) - Phi(w2)), with log(t+1) in the denominator
 * and t^{1 - 1/alpha} in place of the power when beta = alpha, and minus
 * (1/alpha) lambda^{1/alpha} t^{beta/alpha - 1}(sigma(w1) - sigma(w2)) when beta > alpha.
 */
inline SameTrajectoryReport same_trajectory_order(const GeneratorSpec& gen, cplx z1, cplx z2, const IntegratorConfig& cfg)
{
  if (z1 == z2) throw ConfigError("same-trajectory order needs distinct points");
  if (gen.b() == cplx(0.0, 0.0)) throw ConfigError("same-trajectory order needs a two-term generator");
  SameTrajectoryReport rep;
  rep.pair = pair_order_estimate(gen, gen, z1, z2, cfg);
  const double alpha = gen.alpha(), beta = gen.beta();
  rep.pair.predicted_lower_bound = true;
  if (beta < alpha) {
    rep.pair.predicted_order = beta;
    rep.order_check = rep.pair.above_all || rep.pair.estimated_order > beta;
  } else {
    rep.pair.predicted_order = alpha - 0.05;
    rep.order_check = rep.pair.above_all || rep.pair.estimated_order > alpha - 0.05;
  }

  const cplx w1 = cayley(z1), w2 = cayley(z2);
  IntegratorConfig hc = cfg;
  hc.method = Method::HalfPlane;
  const auto a = integrate_trajectory(gen, w1, hc, Frame::HalfPlane);
  const auto b = integrate_trajectory(gen, w2, hc, Frame::HalfPlane);
  const auto diff = trajectory_difference(a, b);
  const cplx lam_root = cpow(gen.constants().lambda, 1.0 / alpha);
  cplx dsig = 0.0;
  if (beta > alpha) {
    const KoenigsEvaluator ev(gen);
    dsig = ev.sigma(w1) - ev.sigma(w2);
  }
  std::vector<double> ts;
  std::vector<cplx> v, u;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const double t = a.times[i + 1];
    cplx x;
    if (beta == alpha) {
      u.push_back(std::pow(t, 1.0 - 1.0 / alpha) * diff[i]);
      x = u.back() / std::log(t + 1.0);
    } else x = std::pow(t, (beta - 1.0) / alpha) * diff[i];
    if (beta > alpha) x -= lam_root / alpha * std::pow(t, beta / alpha - 1.0) * dsig;
    ts.push_back(t);
    v.push_back(x);
  }
  rep.scaled_difference = estimate_limit(ts, v);
  if (beta == alpha) {
    rep.unlogged = estimate_limit(ts, u);
    rep.scaled_difference_vanishes = !rep.unlogged->divergent;
  } else {
    rep.scaled_difference_vanishes = !rep.scaled_difference.divergent &&
                                     std::abs(rep.scaled_difference.value) <= std::max(10.0 * rep.scaled_difference.error, 1e-6);
  }
  return rep;
}

} // namespace semiflow
