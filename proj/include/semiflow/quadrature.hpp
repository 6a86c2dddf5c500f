#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "complex.hpp"

namespace semiflow {

struct QuadResult {
  cplx value{0.0, 0.0};
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1,1]
inline constexpr std::array<double, 8> gk15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  cplx value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b)
{
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const cplx fc = f(c);
  cplx kron = fc * gk15_wk[7];
  cplx gauss = fc * gk15_wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * gk15_x[j];
    const cplx f1 = f(c - dx), f2 = f(c + dx);
    kron += (f1 + f2) * gk15_wk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * gk15_wg[j / 2];
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

} // namespace detail

/**
 * Globally adaptive Gauss-Kronrod quadrature of a complex-valued f over [a,b].
 * Bisects the interval with the largest error estimate until the summed
 * estimate drops below max(abs_tol, rel_tol*|I|).
 */
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0, int max_intervals = 20000)
{
  QuadResult res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gk15(f, a, b);
  cplx total = first.value;
  double err = first.error;
  heap.push(first);
  res.intervals = 1;
  while (res.intervals < max_intervals) {
    if (err <= std::max(abs_tol, rel_tol * std::abs(total))) {
      res.converged = true;
      break;
    }
    auto s = heap.top();
    heap.pop();
    const double m = 0.5 * (s.a + s.b);
    if (!(m > s.a && m < s.b)) {
      // no room left to bisect; keep the estimate we have
      heap.push(s);
      break;
    }
    auto l = detail::gk15(f, s.a, m);
    auto r = detail::gk15(f, m, s.b);
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
    ++res.intervals;
  }
  // resum to shed accumulated rounding in the running totals
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  res.value = total;
  res.error = err;
  if (!res.converged) res.converged = err <= std::max(abs_tol, rel_tol * std::abs(total));
  return res;
}

} // namespace semiflow
