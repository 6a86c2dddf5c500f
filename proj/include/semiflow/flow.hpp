#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "complex.hpp"
#include "errors.hpp"
#include "generators.hpp"
#include "ode.hpp"

namespace semiflow {

enum class Frame { Disk, HalfPlane };

// Auto: disk requests up to t = 1e3 integrate z directly, everything else
// goes through the half-plane.
enum class Method { Auto, DiskDirect, HalfPlane };

struct TimeGrid {
  std::vector<double> times;  // positive, strictly increasing; t = 0 is implicit

  static TimeGrid geometric(double t0, double ratio, int count)
  {
    if (!(t0 > 0.0) || !(ratio > 1.0) || count < 1) throw ConfigError("geometric grid needs t0 > 0, ratio > 1, count >= 1");
    TimeGrid g;
    for (int k = 0; k < count; ++k) g.times.push_back(t0 * std::pow(ratio, k));
    return g;
  }

  // n points per decade from t_first to t_last, both included exactly
  static TimeGrid decades(double t_first, double t_last, int per_decade)
  {
    if (!(t_first > 0.0) || !(t_last > t_first) || per_decade < 1) throw ConfigError("bad decade grid");
    const double l0 = std::log10(t_first), l1 = std::log10(t_last);
    const int n = static_cast<int>(std::ceil((l1 - l0) * per_decade - 1e-9));
    TimeGrid g;
    for (int k = 0; k < n; ++k) g.times.push_back(std::pow(10.0, l0 + static_cast<double>(k) / per_decade));
    g.times.front() = t_first;
    g.times.push_back(t_last);
    return g;
  }

  static TimeGrid list(std::vector<double> ts)
  {
    TimeGrid g;
    g.times = std::move(ts);
    g.validate();
    return g;
  }

  void validate() const
  {
    if (times.empty()) throw ConfigError("empty time grid");
    double prev = 0.0;
    for (double t : times) {
      if (!(t > prev) || !std::isfinite(t)) throw ConfigError("time grid must be positive and strictly increasing");
      prev = t;
    }
  }

  double back() const { return times.back(); }
};

inline TimeGrid default_grid(double t_max = 1e6)
{
  const double ratio = std::pow(2.0, 0.25);
  const int count = static_cast<int>(std::floor(std::log(t_max) / std::log(ratio) + 1e-9)) + 1;
  return TimeGrid::geometric(1.0, ratio, count);
}

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step_growth = 5.0;
  TimeGrid grid = default_grid();
  Method method = Method::Auto;
};

/**
 * Sampled trajectory. Index 0 is t = 0.
 *
 * Besides the points themselves every sample carries
 *   gaps[i]    = 1 - C^{-1}(w) = 2/(w+1), i.e. 1 - z of the disk point,
 *   shifted[i] = (w+1)^alpha - lambda t,
 * which are what asymptotic measurements need; both avoid the cancellation
 * that forming 1 - z or (w+1)^alpha - lambda t from the points would cause.
 */
struct Trajectory {
  Frame frame = Frame::Disk;
  cplx initial_point{0.0, 0.0};
  std::vector<double> times;
  std::vector<cplx> points;
  std::vector<double> est_local_error;
  std::vector<cplx> gaps;
  std::vector<cplx> shifted;
  double alpha = 1.0;
  cplx lambda{1.0, 0.0};

  std::size_t size() const { return times.size(); }

  // w + 1 for the half-plane image of sample i
  cplx plus_one(std::size_t i) const { return 2.0 / gaps[i]; }

  // (w+1)/(lambda t)^{1/alpha} - 1, for t > 0
  cplx relative_to_leading(std::size_t i) const
  {
    return pow1p_m1(shifted[i] / (lambda * times[i]), 1.0 / alpha);
  }
};

namespace detail {

inline Method resolve_method(Frame frame, const IntegratorConfig& cfg)
{
  if (cfg.method != Method::Auto) return cfg.method;
  return frame == Frame::Disk && cfg.grid.back() <= 1e3 ? Method::DiskDirect : Method::HalfPlane;
}

inline OdeOptions ode_options(const IntegratorConfig& cfg)
{
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) throw ConfigError("tolerances must be positive");
  OdeOptions o;
  o.rel_tol = cfg.rel_tol;
  o.abs_tol = cfg.abs_tol;
  o.max_step_growth = cfg.max_step_growth;
  return o;
}

} // namespace detail

/**
 * Integrates the flow from `start` (z0 in the disk or w0 in the half-plane,
 * according to `frame`).
 *
 * The half-plane route integrates v = (w+1)^alpha - lambda t, which obeys
 *   v' = alpha u^{alpha-1} (phi(w) - A u^{1-alpha}),  u = w + 1 = (lambda t + v)^{1/alpha}.
 * The right side only involves the excess of phi over its leading term, so v
 * stays of moderate size and its absolute accuracy carries over to every
 * asymptotic quantity.
 */
inline Trajectory integrate_trajectory(const GeneratorSpec& gen, cplx start, const IntegratorConfig& cfg,
                                       Frame frame = Frame::Disk)
{
  cfg.grid.validate();
  if (frame == Frame::Disk) {
    check_disk_point(start);
    if (std::abs(start) >= 1.0 - 1e-12) throw ConfigError("initial point too close to the unit circle");
  } else {
    check_halfplane_point(start);
  }
  const double alpha = gen.alpha();
  const cplx lambda = gen.constants().lambda;
  Trajectory tr;
  tr.frame = frame;
  tr.initial_point = start;
  tr.alpha = alpha;
  tr.lambda = lambda;
  tr.times.push_back(0.0);
  tr.times.insert(tr.times.end(), cfg.grid.times.begin(), cfg.grid.times.end());
  const auto opt = detail::ode_options(cfg);
  const Method method = detail::resolve_method(frame, cfg);

  if (method == Method::DiskDirect) {
    if (frame != Frame::Disk) throw ConfigError("direct disk integration needs a disk trajectory");
    const cplx g0 = 1.0 - start;
    auto rhs = [&](double, cplx g) { return -gen.f_gap(g); };
    auto valid = [](double, cplx g) { return std::abs(1.0 - g) < 1.0 && g.real() > 0.0; };
    auto out = dopri45(rhs, valid, 0.0, g0, cfg.grid.times, opt);
    auto push = [&](double t, cplx g, double err) {
      tr.points.push_back(1.0 - g);
      tr.gaps.push_back(g);
      tr.shifted.push_back(cpow(2.0 / g, alpha) - lambda * t);
      tr.est_local_error.push_back(err);
    };
    push(0.0, g0, 0.0);
    for (std::size_t i = 0; i < out.values.size(); ++i) push(cfg.grid.times[i], out.values[i], out.error[i]);
    return tr;
  }

  const HalfPlaneGenerator hp(gen);
  const cplx u0 = frame == Frame::Disk ? 2.0 / (1.0 - start) : start + 1.0;
  const cplx v0 = cpow(u0, alpha);
  auto rhs = [&](double t, cplx v) {
    const cplx s = lambda * t + v;
    const cplx u = cpow(s, 1.0 / alpha);
    return alpha * (s / u) * hp.excess_u(u);
  };
  auto valid = [&](double t, cplx v) {
    const cplx u = cpow(lambda * t + v, 1.0 / alpha);
    return u.real() > 1.0 - 1e-12 * std::abs(u);
  };
  auto out = dopri45(rhs, valid, 0.0, v0, cfg.grid.times, opt);
  auto push = [&](double t, cplx v, double err_v) {
    const cplx s = lambda * t + v;
    const cplx u = t == 0.0 ? u0 : cpow(s, 1.0 / alpha);
    const cplx g = 2.0 / u;
    const double err_u = std::abs(u) / (alpha * std::abs(s)) * err_v;
    tr.gaps.push_back(g);
    tr.shifted.push_back(v);
    if (frame == Frame::Disk) {
      tr.points.push_back(t == 0.0 ? start : 1.0 - g);
      tr.est_local_error.push_back(0.5 * std::norm(g) * err_u);
    } else {
      tr.points.push_back(t == 0.0 ? start : u - 1.0);
      tr.est_local_error.push_back(err_u);
    }
  };
  push(0.0, v0, 0.0);
  for (std::size_t i = 0; i < out.values.size(); ++i) push(cfg.grid.times[i], out.values[i], out.error[i]);
  return tr;
}

inline IntegratorConfig single_time_config(double t, double tol)
{
  IntegratorConfig cfg;
  cfg.rel_tol = tol;
  cfg.abs_tol = std::min(1e-12, tol);
  cfg.grid = TimeGrid::list({t});
  return cfg;
}

inline cplx flow_at(const GeneratorSpec& gen, cplx z0, double t, double tol = 1e-9, Frame frame = Frame::Disk)
{
  if (t < 0.0) throw ConfigError("negative time");
  if (frame == Frame::Disk) check_disk_point(z0);
  else check_halfplane_point(z0);
  if (t == 0.0) return z0;
  return integrate_trajectory(gen, z0, single_time_config(t, tol), frame).points.back();
}

inline double check_semigroup_property(const GeneratorSpec& gen, cplx z0, double s, double t, double tol = 1e-9,
                                       Frame frame = Frame::Disk)
{
  if (s < 0.0 || t < 0.0) throw ConfigError("negative time");
  const cplx direct = flow_at(gen, z0, s + t, tol, frame);
  const cplx composed = flow_at(gen, flow_at(gen, z0, s, tol, frame), t, tol, frame);
  return std::abs(direct - composed);
}

// closed-form flow of f(z) = a(1-z)^2
inline cplx pure_quadratic_flow(cplx a, cplx z, double t)
{
  const cplx q = a * t * (1.0 - z);
  return (z + q) / (1.0 + q);
}

inline cplx pure_quadratic_gap(cplx a, cplx z, double t)
{
  return (1.0 - z) / (1.0 + a * t * (1.0 - z));
}

struct Rect {
  double re_min, re_max, im_min, im_max;
};

struct FieldSample {
  cplx z;
  cplx f;
};

/**
 * Samples f on cell centres of an nx-by-ny grid over the rectangle.
 * Cells whose centre falls outside the disk are skipped.
 */
inline std::vector<FieldSample> direction_field(const GeneratorSpec& gen, const Rect& r, int nx, int ny)
{
  if (nx < 1 || ny < 1 || !(r.re_max > r.re_min) || !(r.im_max > r.im_min)) throw ConfigError("bad field rectangle");
  std::vector<FieldSample> out;
  for (int j = 0; j < ny; ++j) {
    const double y = r.im_min + (j + 0.5) * (r.im_max - r.im_min) / ny;
    for (int i = 0; i < nx; ++i) {
      const double x = r.re_min + (i + 0.5) * (r.re_max - r.re_min) / nx;
      const cplx z(x, y);
      if (std::abs(z) >= 1.0) continue;
      out.push_back({z, gen.f_gap(1.0 - z)});
    }
  }
  if (out.empty()) throw ConfigError("field rectangle does not meet the unit disk");
  return out;
}

inline std::string fmt17(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_trajectory_csv(const Trajectory& tr, std::ostream& os)
{
  os << "t,re,im,err\n";
  for (std::size_t i = 0; i < tr.size(); ++i)
    os << fmt17(tr.times[i]) << ',' << fmt17(tr.points[i].real()) << ',' << fmt17(tr.points[i].imag()) << ','
       << fmt17(tr.est_local_error[i]) << '\n';
}

inline void write_field_csv(const std::vector<FieldSample>& field, std::ostream& os)
{
  os << "re,im,f_re,f_im\n";
  for (const auto& s : field)
    os << fmt17(s.z.real()) << ',' << fmt17(s.z.imag()) << ',' << fmt17(s.f.real()) << ',' << fmt17(s.f.imag())
       << '\n';
}

} // namespace semiflow
