#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pdmdp {

namespace detail {
inline double kronrod_panel(const std::function<double(double)>& f, double a, double b, double abs_tol,
                            double rel_tol, int depth) {
  using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  double v = rule::integrate(f, a, b, 0, 0.0, &err);
  if (depth <= 0 || err <= std::max(abs_tol, rel_tol * std::abs(v))) return v;
  double m = 0.5 * (a + b);
  return kronrod_panel(f, a, m, abs_tol, rel_tol, depth - 1) + kronrod_panel(f, m, b, abs_tol, rel_tol, depth - 1);
}
}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15 points) over [a, b]. A panel is accepted once its error
/// estimate is below `tol` relative to its value or below 1e-14 in absolute terms (the rule's
/// own rounding floor does not shrink with the panel width).
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                        int max_depth = 24) {
  if (!(b > a)) return 0.0;
  return detail::kronrod_panel(f, a, b, 1e-14, tol, max_depth);
}

}  // namespace pdmdp
