#pragma once

// Exact area of the intersection of a disc with a triangle in the plane.

#include "hplateau/core.hpp"

#include <cmath>

namespace hplateau {

namespace detail {

inline double cross2(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

// Signed area of {|x| < R} ∩ triangle(0, a, b).
inline double disc_wedge_area(const Vec2 &a, const Vec2 &b, double R) {
  const Vec2 d = b - a;
  const double A = d.squaredNorm();
  if (A == 0.0)
    return 0.0;
  const double B = a.dot(d), C = a.squaredNorm() - R * R;
  double ts[4] = {0.0, 0.0, 0.0, 1.0};
  int n = 1;
  const double disc = B * B - A * C;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / A, (-B + sq) / A})
      if (t > 0.0 && t < 1.0)
        ts[n++] = t;
  }
  ts[n++] = 1.0;
  double area = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    const Vec2 p = a + ts[k] * d, q = a + ts[k + 1] * d;
    const Vec2 mid = 0.5 * (p + q);
    if (mid.squaredNorm() <= R * R)
      area += 0.5 * cross2(p, q);
    else
      area += 0.5 * R * R * std::atan2(cross2(p, q), p.dot(q));
  }
  return area;
}

} // namespace detail

/// Area of D_R(c) ∩ triangle(a, b, d), orientation independent.
inline double disc_triangle_area(const Vec2 &c, double R, const Vec2 &a, const Vec2 &b,
                                 const Vec2 &d) {
  if (R <= 0.0)
    return 0.0;
  const Vec2 pa = a - c, pb = b - c, pd = d - c;
  const double s = detail::disc_wedge_area(pa, pb, R) + detail::disc_wedge_area(pb, pd, R) +
                   detail::disc_wedge_area(pd, pa, R);
  return std::abs(s);
}

} // namespace hplateau
