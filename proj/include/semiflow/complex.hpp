#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace semiflow {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// principal branch z^s for real s, with 0^s = 0 when s > 0
inline cplx cpow(cplx z, double s)
{
  if (z == cplx(0.0, 0.0)) return s > 0 ? cplx(0.0, 0.0) : cplx(INFINITY, 0.0);
  if (z.imag() == 0.0 && z.real() > 0.0) return {std::pow(z.real(), s), 0.0};
  return std::polar(std::pow(std::abs(z), s), s * std::arg(z));
}

// log(1+x) without cancellation for small |x|
inline cplx clog1p(cplx x)
{
  const double re = 0.5 * std::log1p(2.0 * x.real() + std::norm(x));
  const double im = std::atan2(x.imag(), 1.0 + x.real());
  return {re, im};
}

// exp(y)-1 without cancellation for small |y|
inline cplx cexpm1(cplx y)
{
  const double em1 = std::expm1(y.real());
  const double s = std::sin(0.5 * y.imag());
  const double cm1 = -2.0 * s * s;
  const double er = em1 + 1.0;
  return {em1 * std::cos(y.imag()) + cm1, er * std::sin(y.imag())};
}

// (1+x)^s - 1, accurate when |x| is small
inline cplx pow1p_m1(cplx x, double s)
{
  return cexpm1(s * clog1p(x));
}

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

} // namespace semiflow
