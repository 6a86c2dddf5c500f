#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "complex.hpp"
#include "errors.hpp"

namespace semiflow {

enum class LimitModel { TailFit, Aitken, LastValue };

inline std::string to_string(LimitModel m)
{
  switch (m) {
  case LimitModel::TailFit: return "tail_fit";
  case LimitModel::Aitken: return "aitken";
  case LimitModel::LastValue: return "last_value";
  }
  return "?";
}

struct LimitEstimate {
  cplx value{0.0, 0.0};
  double error = 0.0;
  LimitModel model = LimitModel::LastValue;
  double p = 0.0;  // decay exponent used by TailFit
  std::size_t samples_used = 0;
  bool divergent = false;
};

struct LimitOptions {
  std::optional<double> p;       // fixed decay exponent; estimated from the data when empty
  double tail_fraction = 0.5;    // share of the samples treated as the tail
  bool aitken = false;           // use iterated Aitken instead of the power-law fit
  bool free_fallback = false;    // with a fixed p, refit with a free p when that gives a smaller error
};

namespace detail {

struct LinFit {
  cplx intercept, slope;
};

// least squares v ~ L + c x with real x, complex v
inline LinFit linear_fit(const std::vector<double>& x, const std::vector<cplx>& v, std::size_t lo, std::size_t hi)
{
  const double n = static_cast<double>(hi - lo);
  double mx = 0.0;
  cplx mv = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    mx += x[i];
    mv += v[i];
  }
  mx /= n;
  mv /= n;
  double sxx = 0.0;
  cplx sxv = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxv += (x[i] - mx) * (v[i] - mv);
  }
  const cplx c = sxx > 0.0 ? sxv / sxx : cplx(0.0, 0.0);
  return {mv - c * mx, c};
}

inline double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline cplx aitken3(cplx a, cplx b, cplx c)
{
  const cplx den = (c - b) - (b - a);
  if (std::abs(den) <= 1e-300) return c;
  return c - (c - b) * (c - b) / den;
}

} // namespace detail

/**
 * Estimates lim v(t) from samples on a (roughly geometric) grid by fitting
 * v ~ L + c t^{-p} over the tail. The error is the largest deviation, over
 * the last third of the samples, of the extrapolants obtained from windows
 * ending at those samples, combined with the fit residual there.
 */
inline LimitEstimate estimate_limit(const std::vector<double>& t, const std::vector<cplx>& v, LimitOptions opt = {})
{
  const std::size_t n = t.size();
  if (n != v.size()) throw ConfigError("sample size mismatch");
  if (n < 6) throw ConfigError("estimate_limit needs at least 6 samples");
  for (std::size_t i = 0; i < n; ++i)
    if (!(t[i] > 0.0) || !finite(v[i])) throw NumericError("non-finite samples in limit estimation");
  std::size_t tail = std::max<std::size_t>(6, static_cast<std::size_t>(std::ceil(opt.tail_fraction * n)));
  tail = std::min(tail, n);
  const std::size_t lo = n - tail;
  const std::size_t third = std::max<std::size_t>(2, tail / 3);
  double scale = 0.0, spread = 0.0;
  for (std::size_t i = lo; i < n; ++i) {
    scale = std::max(scale, std::abs(v[i]));
    spread = std::max(spread, std::abs(v[i] - v[n - 1]));
  }
  LimitEstimate est;
  est.samples_used = tail;
  if (spread <= 64.0 * 2.2e-16 * std::max(scale, 1e-300)) {
    est.value = v[n - 1];
    est.error = spread;
    est.model = LimitModel::LastValue;
    return est;
  }

  if (opt.aitken) {
    std::vector<cplx> acc;
    for (std::size_t i = lo + 2; i < n; ++i) acc.push_back(detail::aitken3(v[i - 2], v[i - 1], v[i]));
    est.model = LimitModel::Aitken;
    est.value = acc.back();
    double dev = 0.0;
    for (std::size_t i = acc.size() > third ? acc.size() - third : 0; i < acc.size(); ++i)
      dev = std::max(dev, std::abs(acc[i] - est.value));
    est.error = dev;
    est.divergent = !(dev <= scale);
    return est;
  }

  // decay exponent from ratios of successive differences
  double p;
  if (opt.p) {
    p = *opt.p;
  } else {
    std::vector<double> ps;
    for (std::size_t i = lo; i + 2 < n; ++i) {
      const double d1 = std::abs(v[i + 1] - v[i]), d2 = std::abs(v[i + 2] - v[i + 1]);
      if (d1 <= 0.0 || d2 <= 0.0) continue;
      const double lr = std::log(t[i + 2] / t[i + 1]);
      // differences of c t^{-p} on a geometric grid shrink by (t_{i+2}/t_{i+1})^{-p}
      ps.push_back(-std::log(d2 / d1) / lr);
    }
    if (ps.empty()) {
      est.value = v[n - 1];
      est.error = spread;
      return est;
    }
    std::vector<double> last(ps.end() - std::min(ps.size(), third), ps.end());
    p = detail::median(last);
  }
  est.p = p;
  est.model = LimitModel::TailFit;
  if (!(p > 0.02)) {
    est.value = v[n - 1];
    est.error = spread;
    est.divergent = true;
    return est;
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::pow(t[i], -p);
  const auto fit = detail::linear_fit(x, v, lo, n);
  est.value = fit.intercept;
  double dev = 0.0;
  for (std::size_t j = n - third; j < n; ++j) {
    dev = std::max(dev, std::abs(v[j] - (fit.intercept + fit.slope * x[j])));
    if (j + 1 - lo >= 3 && j + 1 < n) {
      const auto w = detail::linear_fit(x, v, lo, j + 1);
      dev = std::max(dev, std::abs(w.intercept - fit.intercept));
    }
  }
  est.error = dev;
  est.divergent = !(dev <= std::max(scale, 1e-300));
  if (opt.p && opt.free_fallback) {
    LimitOptions free = opt;
    free.p.reset();
    const auto alt = estimate_limit(t, v, free);
    if (!alt.divergent && (est.divergent || alt.error < est.error)) return alt;
  }
  return est;
}

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

// ordinary least squares of log y against log x
inline LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y)
{
  if (x.size() != y.size() || x.size() < 3) throw ConfigError("log-log fit needs at least 3 paired samples");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericError("log-log fit needs positive samples");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  LogLogFit f;
  f.n = lx.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

} // namespace semiflow
