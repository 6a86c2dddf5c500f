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
#include "koenigs.hpp"

namespace semiflow {

enum class OmegaRegion { O1 = 1, O2, O3, O4, O5 };

inline std::string to_string(OmegaRegion r) { return "Omega" + std::to_string(static_cast<int>(r)); }

inline OmegaRegion classify_omega(double alpha, double beta)
{
  if (!(alpha > 0.0 && alpha <= 2.0) || !(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("(alpha, beta) outside (0,2] x (0,inf)");
  if (alpha > 1.0 && beta > 1.0) return OmegaRegion::O1;
  if (alpha == 1.0 && beta > 1.0) return OmegaRegion::O2;
  if (alpha < std::min(1.0, beta)) return OmegaRegion::O3;
  if (beta == 1.0 && alpha > 1.0) return OmegaRegion::O4;
  return OmegaRegion::O5;  // beta <= min(1, alpha) and not the O4 line
}

// mu lambda^{-beta/alpha}; its imaginary part drives the asymptote/curvature dichotomies
inline cplx twist(const GeneratorSpec& gen)
{
  const auto& k = gen.constants();
  return k.mu * cpow(k.lambda, -gen.beta() / gen.alpha());
}

// Im(mu lambda^{-beta/alpha}) == 0, with a relative threshold unless overridden
inline bool twist_vanishes(const GeneratorSpec& gen, std::optional<bool> override_flag = std::nullopt)
{
  if (override_flag) return *override_flag;
  const cplx tw = twist(gen);
  return std::abs(tw.imag()) <= 1e-12 * std::max(1.0, std::abs(tw));
}

inline double limit_slope(const GeneratorSpec& gen) { return -std::arg(gen.a()) / gen.alpha(); }

// arg(1 - F_t(z)) on the grid, extrapolated
inline LimitEstimate empirical_slope(const GeneratorSpec& gen, cplx z, const IntegratorConfig& cfg)
{
  const auto tr = integrate_trajectory(gen, z, cfg, Frame::Disk);
  std::vector<double> ts;
  std::vector<cplx> vs;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    ts.push_back(tr.times[i]);
    vs.push_back(std::arg(tr.gaps[i]));
  }
  return estimate_limit(ts, vs);
}

struct TangentSample {
  double t = 0.0;
  double gap = 0.0;          // |1 - F_t(z)|
  double signed_distance = 0.0;
  double distance = 0.0;     // |signed_distance|
  double formula = 0.0;      // the same distance through the r(z,t) expression
};

/**
 * Distance from F_t(z) to the limit tangent line through 1 with direction
 * e^{-i arg(a)/alpha}. The sign is that of the normal obtained by turning the
 * direction by +pi/2.
 */
inline std::vector<TangentSample> tangent_distance(const GeneratorSpec& gen, const Trajectory& tr)
{
  if (tr.frame != Frame::Disk) throw ConfigError("tangent distance needs a disk trajectory");
  const double theta = std::arg(gen.a()) / gen.alpha();
  const cplx rot = std::polar(1.0, theta);
  const cplx lam_root = cpow(gen.constants().lambda, 1.0 / gen.alpha());
  std::vector<TangentSample> out;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    TangentSample s;
    s.t = tr.times[i];
    const cplx g = tr.gaps[i];
    s.gap = std::abs(g);
    // z - 1 = -g; the signed distance is Im(conj(direction) (z - 1))
    s.signed_distance = -(rot * g).imag();
    s.distance = std::abs(s.signed_distance);
    if (s.t > 0.0) {
      // r = 1/(1-F) - (lambda t)^{1/alpha}/2 = (lambda t)^{1/alpha} rel / 2
      const cplx r = 0.5 * cpow(gen.constants().lambda * s.t, 1.0 / gen.alpha()) * tr.relative_to_leading(i);
      s.formula = std::abs(lam_root) * std::abs((r / lam_root).imag()) * std::norm(g);
    } else {
      s.formula = s.distance;
    }
    out.push_back(s);
  }
  return out;
}

// signed curvature of the orbits of z' = F(z) at a point: Im F'(z)/|F(z)|
inline double field_curvature(cplx f, cplx fprime)
{
  const double m = std::abs(f);
  if (!(m > 1e-300)) return std::numeric_limits<double>::quiet_NaN();
  return fprime.imag() / m;
}

inline double curvature_at_gap(const GeneratorSpec& gen, cplx g)
{
  return field_curvature(gen.f_gap(g), gen.fprime_gap(g));
}

// curvature of the trajectory of z at F_t(z); NaN flags |f| below the underflow threshold
inline double curvature(const GeneratorSpec& gen, cplx z, double t, double tol = 1e-10)
{
  check_disk_point(z);
  if (t == 0.0) return curvature_at_gap(gen, 1.0 - z);
  IntegratorConfig cfg;
  cfg.rel_tol = tol;
  cfg.grid = TimeGrid::list({t});
  const auto tr = integrate_trajectory(gen, z, cfg, Frame::Disk);
  return curvature_at_gap(gen, tr.gaps.back());
}

enum class CurvatureClass { Zero, FinitePerTrajectory, FiniteShared, InfiniteExceptSpecial, Infinite };

inline std::string to_string(CurvatureClass c)
{
  switch (c) {
  case CurvatureClass::Zero: return "zero";
  case CurvatureClass::FinitePerTrajectory: return "finite_per_trajectory";
  case CurvatureClass::FiniteShared: return "finite_shared";
  case CurvatureClass::InfiniteExceptSpecial: return "infinite_except_special";
  case CurvatureClass::Infinite: return "infinite";
  }
  return "?";
}

struct CurvatureClassReport {
  OmegaRegion region = OmegaRegion::O1;
  CurvatureClass cls = CurvatureClass::Zero;
  bool resolved_by_dichotomy = false;  // decided by whether Im(mu lambda^{-beta/alpha}) vanishes
};

inline CurvatureClassReport limit_curvature_class(const GeneratorSpec& gen, std::optional<bool> override_flag = {})
{
  if (gen.b() == cplx(0.0, 0.0)) throw ConfigError("curvature classification needs a two-term generator");
  CurvatureClassReport r;
  r.region = classify_omega(gen.alpha(), gen.beta());
  const bool vanish = twist_vanishes(gen, override_flag);
  switch (r.region) {
  case OmegaRegion::O1: r.cls = CurvatureClass::Zero; break;
  case OmegaRegion::O2: r.cls = CurvatureClass::FinitePerTrajectory; break;
  case OmegaRegion::O3: r.cls = CurvatureClass::InfiniteExceptSpecial; break;
  case OmegaRegion::O4:
    r.cls = vanish ? CurvatureClass::Zero : CurvatureClass::FiniteShared;
    r.resolved_by_dichotomy = true;
    break;
  case OmegaRegion::O5:
    // with a real twist the mu-terms are tangent to the limit line and alpha alone decides
    if (!vanish) r.cls = CurvatureClass::Infinite;
    else if (gen.alpha() > 1.0) r.cls = CurvatureClass::Zero;
    else if (gen.alpha() == 1.0) r.cls = CurvatureClass::FinitePerTrajectory;
    else r.cls = CurvatureClass::InfiniteExceptSpecial;
    r.resolved_by_dichotomy = true;
    break;
  }
  return r;
}

struct ContactTheory {
  double order = 0.0;
  bool lower_bound_only = false;  // order is only known to be at least `order`
  double constant = 0.0;          // lim d/|1-F|^{1+order}, or the log-corrected ratio
  bool log_corrected = false;
};

/**
 * Predicted contact order with the limit tangent line and the limit of
 * d/|1-F|^{1+order}. The constants are written through t^{1/alpha}|1-F| -> 2|lambda|^{-1/alpha}.
 */
inline ContactTheory contact_theory(const GeneratorSpec& gen, const KoenigsEvaluator& ev, cplx z)
{
  const double alpha = gen.alpha(), beta = gen.beta();
  const auto& k = gen.constants();
  const double lam = std::abs(k.lambda);
  const double tw = std::abs(twist(gen).imag());
  const bool tw0 = twist_vanishes(gen);
  ContactTheory th;
  const auto reg = regime_of(gen).regime;
  if (reg == Regime::BetaLess) {
    th.order = beta;
    th.lower_bound_only = tw0;
    th.constant = std::pow(2.0, -beta) * std::pow(lam, beta / alpha) * tw / (alpha - beta);
  } else if (reg == Regime::BetaEqual) {
    th.order = alpha;
    th.log_corrected = true;
    const double im = std::abs((k.mu / (alpha * k.lambda)).imag());
    th.lower_bound_only = im <= 1e-12 * std::max(1.0, std::abs(k.mu / (alpha * k.lambda)));
    th.constant = alpha * alpha * std::abs(gen.a()) * im;
  } else {
    const double ih = std::abs(ev.h1(z).imag());
    if (ih > 1e-12 * std::max(1.0, std::abs(ev.h1(z)))) {
      th.order = alpha;
      th.constant = std::abs(gen.a()) * ih;
    } else if (reg == Regime::BetaGreater) {
      th.order = beta;
      th.lower_bound_only = tw0;
      th.constant = std::pow(2.0, -beta) * std::pow(lam, beta / alpha) * tw / (beta - alpha);
    } else {
      th.order = alpha;
      th.lower_bound_only = true;
    }
  }
  return th;
}

struct ContactOrderReport {
  bool above_all = false;         // distance vanishes to working precision
  double estimated_order = 0.0;
  double fit_r2 = 0.0;
  bool reliable = false;          // r2 >= 0.999
  LimitEstimate limit_constant;
  ContactTheory theory;
  std::size_t tail_samples = 0;
};

/**
 * Order from the least-squares slope of log d against log|1-F| over the last
 * decade and a half of gaps; constant from the extrapolated ratio
 * d/|1-F|^{1+order} (times 1/|log|1-F|| in the log-corrected case).
 */
inline ContactOrderReport contact_order_estimate(const std::vector<double>& t, const std::vector<double>& d,
                                                 const std::vector<double>& gap, const ContactTheory& theory,
                                                 double tail_decades = 1.5)
{
  if (t.size() != d.size() || t.size() != gap.size()) throw ConfigError("sample size mismatch");
  ContactOrderReport rep;
  rep.theory = theory;
  double gmin = INFINITY;
  for (std::size_t i = 0; i < gap.size(); ++i)
    if (t[i] > 0.0) gmin = std::min(gmin, gap[i]);
  const double gcut = gmin * std::pow(10.0, tail_decades);
  std::vector<double> tt, dd, gg;
  double ratio_max = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || gap[i] > gcut) continue;
    tt.push_back(t[i]);
    dd.push_back(d[i]);
    gg.push_back(gap[i]);
    ratio_max = std::max(ratio_max, d[i] / gap[i]);
  }
  rep.tail_samples = tt.size();
  if (tt.size() < 6) throw ConfigError("contact order needs at least 6 tail samples");
  if (ratio_max <= 1e-14) {
    rep.above_all = true;
    rep.estimated_order = INFINITY;
    return rep;
  }
  const auto fit = loglog_fit(gg, dd);
  rep.estimated_order = std::max(0.0, fit.slope - 1.0);
  rep.fit_r2 = fit.r2;
  rep.reliable = fit.r2 >= 0.999;
  std::vector<cplx> ratio;
  for (std::size_t i = 0; i < tt.size(); ++i) {
    double r = dd[i] / std::pow(gg[i], 1.0 + theory.order);
    if (theory.log_corrected) r /= std::abs(std::log(gg[i]));
    ratio.push_back(r);
  }
  rep.limit_constant = estimate_limit(tt, ratio, {.tail_fraction = 1.0});
  return rep;
}

enum class AsymptoteExists { Yes, No, OnlySpecialTrajectory };

inline std::string to_string(AsymptoteExists e)
{
  switch (e) {
  case AsymptoteExists::Yes: return "yes";
  case AsymptoteExists::No: return "no";
  case AsymptoteExists::OnlySpecialTrajectory: return "only_special_trajectory";
  }
  return "?";
}

struct AsymptoteReport {
  OmegaRegion region = OmegaRegion::O1;
  AsymptoteExists exists = AsymptoteExists::Yes;
  bool shared_across_initial_points = false;
  bool passes_through_minus_one = false;
  // predicted lim Im(conj(lambda^{1/alpha})(Phi_t(w)+1)) when an asymptote exists
  std::optional<double> predicted_limit;
  // signed offset of the asymptote from -1 along the rotated imaginary axis
  std::optional<double> intercept;
  LimitEstimate numeric_limit;
  double last_value = 0.0;
  bool consistent = false;
};

// Im(conj(lambda^{1/alpha}) (Phi_t(w) + 1)) along a half-plane trajectory
inline std::vector<double> asymptote_samples(const Trajectory& tr)
{
  std::vector<double> out;
  const double lam2 = std::pow(std::abs(tr.lambda), 2.0 / tr.alpha);
  for (std::size_t i = 1; i < tr.size(); ++i)
    out.push_back(lam2 * std::pow(tr.times[i], 1.0 / tr.alpha) * tr.relative_to_leading(i).imag());
  return out;
}

inline AsymptoteReport asymptote_report(const GeneratorSpec& gen, const KoenigsEvaluator& ev, cplx w,
                                        const IntegratorConfig& cfg, std::optional<bool> override_flag = {})
{
  if (gen.b() == cplx(0.0, 0.0)) throw ConfigError("asymptote classification needs a two-term generator");
  const double alpha = gen.alpha();
  const auto& k = gen.constants();
  const double lam_abs = std::abs(k.lambda);
  AsymptoteReport rep;
  rep.region = classify_omega(alpha, gen.beta());
  const bool vanish = twist_vanishes(gen, override_flag);
  switch (rep.region) {
  case OmegaRegion::O1:
    rep.shared_across_initial_points = true;
    rep.passes_through_minus_one = true;
    rep.predicted_limit = 0.0;
    break;
  case OmegaRegion::O2: {
    const double L = lam_abs * lam_abs * ev.sigma1(w).imag();
    rep.predicted_limit = L;
    rep.passes_through_minus_one = std::abs(L) <= 1e-12 * lam_abs * lam_abs;
    break;
  }
  case OmegaRegion::O3:
    rep.exists = AsymptoteExists::OnlySpecialTrajectory;
    rep.passes_through_minus_one = true;
    if (std::abs(ev.sigma1(w).imag()) <= 1e-12) rep.predicted_limit = 0.0;
    break;
  case OmegaRegion::O4:
    rep.shared_across_initial_points = true;
    rep.passes_through_minus_one = vanish;
    rep.predicted_limit = std::pow(lam_abs, 2.0 / alpha) / (alpha - 1.0) *
                          (k.mu * cpow(k.lambda, -1.0 / alpha)).imag();
    break;
  case OmegaRegion::O5:
    if (!vanish) {
      rep.exists = AsymptoteExists::No;
    } else if (alpha > 1.0) {
      rep.shared_across_initial_points = true;
      rep.passes_through_minus_one = true;
      rep.predicted_limit = 0.0;
    } else if (alpha < 1.0) {
      rep.exists = AsymptoteExists::OnlySpecialTrajectory;
      rep.passes_through_minus_one = true;
    }
    // alpha == 1: one asymptote per trajectory, no closed form for its offset
    break;
  }
  const double root_abs = std::pow(lam_abs, 1.0 / alpha);
  if (rep.predicted_limit) rep.intercept = *rep.predicted_limit / root_abs;

  const auto tr = integrate_trajectory(gen, w, cfg, Frame::HalfPlane);
  const auto s = asymptote_samples(tr);
  std::vector<double> ts(tr.times.begin() + 1, tr.times.end());
  std::vector<cplx> vs(s.begin(), s.end());
  rep.numeric_limit = estimate_limit(ts, vs);
  rep.last_value = s.back();
  if (rep.exists == AsymptoteExists::Yes && !rep.predicted_limit) {
    rep.consistent = !rep.numeric_limit.divergent;
    if (rep.consistent) rep.intercept = rep.numeric_limit.value.real() / root_abs;
  } else if (rep.predicted_limit) {
    const double L = *rep.predicted_limit;
    const double tol = std::max(10.0 * rep.numeric_limit.error, 1e-2 * std::max(1.0, std::abs(L)));
    rep.consistent = !rep.numeric_limit.divergent && std::abs(rep.numeric_limit.value.real() - L) <= tol;
  } else {
    rep.consistent = rep.numeric_limit.divergent;
  }
  return rep;
}

enum class MutualClass { MutuallyConvergent, AsymptoticallyParallel, MutuallyDivergent, Unclassified };

inline std::string to_string(MutualClass m)
{
  switch (m) {
  case MutualClass::MutuallyConvergent: return "mutually_convergent";
  case MutualClass::AsymptoticallyParallel: return "asymptotically_parallel";
  case MutualClass::MutuallyDivergent: return "mutually_divergent";
  case MutualClass::Unclassified: return "unclassified";
  }
  return "?";
}

inline MutualClass mutual_theory(const GeneratorSpec& gen)
{
  if (gen.b() == cplx(0.0, 0.0)) return MutualClass::Unclassified;
  const double a = gen.alpha(), b = gen.beta();
  if (a > 1.0 && b >= 1.0) return MutualClass::MutuallyConvergent;
  if (b > a && a == 1.0) return MutualClass::AsymptoticallyParallel;
  if (a < std::min(1.0, b)) return MutualClass::MutuallyDivergent;
  return MutualClass::Unclassified;
}

struct MutualPosition {
  MutualClass theory = MutualClass::Unclassified;
  MutualClass measured = MutualClass::Unclassified;
  LimitEstimate evidence;              // s(w1, w2)
  double last_abs_difference = 0.0;    // |Phi_t(w1) - Phi_t(w2)| at the last grid time
  std::optional<cplx> s_over_sigma;    // s/(sigma(w1) - sigma(w2))
};

// Phi_t(w1) - Phi_t(w2) from the shifted states, free of the large common part
inline std::vector<cplx> trajectory_difference(const Trajectory& a, const Trajectory& b)
{
  std::vector<cplx> out;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double t = a.times[i];
    const cplx s2 = a.lambda * t + b.shifted[i];
    const cplx u2 = cpow(s2, 1.0 / a.alpha);
    out.push_back(u2 * pow1p_m1((a.shifted[i] - b.shifted[i]) / s2, 1.0 / a.alpha));
  }
  return out;
}

inline MutualPosition mutual_position(const GeneratorSpec& gen, const KoenigsEvaluator& ev, cplx w1, cplx w2,
                                      const IntegratorConfig& cfg)
{
  if (w1 == w2) throw ConfigError("mutual position needs distinct points");
  MutualPosition mp;
  mp.theory = mutual_theory(gen);
  const auto a = integrate_trajectory(gen, w1, cfg, Frame::HalfPlane);
  const auto b = integrate_trajectory(gen, w2, cfg, Frame::HalfPlane);
  const auto diff = trajectory_difference(a, b);
  std::vector<double> ts(a.times.begin() + 1, a.times.end());
  mp.evidence = estimate_limit(ts, diff);
  mp.last_abs_difference = std::abs(diff.back());
  const double scale = std::abs(w1 - w2);
  if (mp.evidence.divergent) mp.measured = MutualClass::MutuallyDivergent;
  else if (std::abs(mp.evidence.value) <= std::max(10.0 * mp.evidence.error, 1e-6 * scale))
    mp.measured = MutualClass::MutuallyConvergent;
  else mp.measured = MutualClass::AsymptoticallyParallel;
  if (mp.measured == MutualClass::AsymptoticallyParallel) mp.s_over_sigma = mp.evidence.value / (ev.sigma(w1) - ev.sigma(w2));
  return mp;
}

// Phi_{t+1}(w) - Phi_t(w)
inline cplx unit_increment(const GeneratorSpec& gen, cplx w, double t, const IntegratorConfig& base)
{
  IntegratorConfig cfg = base;
  cfg.grid = TimeGrid::list({t, t + 1.0});
  const auto tr = integrate_trajectory(gen, w, cfg, Frame::HalfPlane);
  const cplx s1 = gen.constants().lambda * t + tr.shifted[1];
  const cplx s2 = gen.constants().lambda * (t + 1.0) + tr.shifted[2];
  return cpow(s1, 1.0 / gen.alpha()) * pow1p_m1((s2 - s1) / s1, 1.0 / gen.alpha());
}

struct Slice {
  cplx origin;
  cplx direction;
  double s_lo, s_hi;
  cplx at(double s) const { return origin + s * direction; }
};

/**
 * Root of Im h1 (disk) or Im sigma1 (half-plane) along a segment, by bisection.
 */
inline cplx special_trajectory_locator(const KoenigsEvaluator& ev, const Slice& slice, Frame frame = Frame::Disk)
{
  if (!(ev.generator().effective_beta() > ev.generator().alpha())) throw ConfigError("special trajectory needs beta > alpha");
  auto f = [&](double s) { return frame == Frame::Disk ? ev.h1(slice.at(s)).imag() : ev.sigma1(slice.at(s)).imag(); };
  double lo = slice.s_lo, hi = slice.s_hi;
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return slice.at(lo);
  if (fhi == 0.0) return slice.at(hi);
  if ((flo > 0.0) == (fhi > 0.0)) throw NumericError("no sign change of Im h1 on the slice");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return slice.at(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return slice.at(0.5 * (lo + hi));
}

} // namespace semiflow
