#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "streamcov/error.hpp"

namespace streamcov {

namespace quad_detail {

struct Ctx {
  double unresolved = 0.0;  // error left behind by segments that hit max depth
  long evals = 0;
};

template <class F>
double recurse(const F& f, double a, double fa, double b, double fb, double m, double fm,
               double whole, double tol, int depth, Ctx& ctx) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  ctx.evals += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = (left + right - whole) / 15.0;
  if (std::abs(err) <= tol || depth <= 0) {
    if (depth <= 0) ctx.unresolved += std::abs(err);
    return left + right + err;
  }
  return recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, ctx) +
         recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, ctx);
}

}  // namespace quad_detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance.
/// Throws QuadratureFailure when subdivision bottoms out with the error
/// estimate still far above the requested tolerance.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol, int max_depth = 48) {
  if (a == b) return 0.0;
  quad_detail::Ctx ctx;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
    fail(Errc::QuadratureFailure, "non-finite integrand value");
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double v = quad_detail::recurse(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth, ctx);
  if (!std::isfinite(v)) fail(Errc::QuadratureFailure, "integral did not evaluate to a finite value");
  if (ctx.unresolved > 100.0 * abs_tol)
    fail(Errc::QuadratureFailure, "max subdivision depth reached before convergence");
  return v;
}

/// \int_a^\infty f(x) dx via the substitution x = a + scale*(e^s - 1), which
/// turns algebraic tail decay (>= 1/x^2) into exponential decay in s.  The
/// image of s in [0, s_max] covers x up to ~scale*e^s_max.
template <class F>
double integrate_to_inf(const F& f, double a, double abs_tol, double scale = 1.0,
                        double s_max = 60.0) {
  auto g = [&](double s) {
    const double es = std::exp(s);
    const double x = a + scale * (es - 1.0);
    return f(x) * scale * es;
  };
  return integrate(g, 0.0, s_max, abs_tol);
}

}  // namespace streamcov
