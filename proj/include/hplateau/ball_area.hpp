#pragma once

// Area of the image surface inside a Euclidean ball |x| < t centred at the
// origin (a geodesic ball of radius f(t) in the ball model). Straddling
// triangles are subdivided adaptively; leaves clip the linear interpolant
// of |x| - t.

#include "hplateau/disc_map.hpp"

namespace hplateau {

enum class AreaKind { ambient, b };

struct ClipOptions {
  int max_depth = 8;
  double rel_tol = 1e-7; ///< stop subdividing when children agree with the parent estimate
};

namespace detail {

inline double triangle_b_area(const AmbientMetric &metric, const Vec &p0, const Vec &p1,
                              const Vec &p2) {
  const Vec d1 = p1 - p0, d2 = p2 - p0;
  double g11, g12, g22;
  if (metric.euclidean_b()) {
    g11 = d1.squaredNorm();
    g12 = d1.dot(d2);
    g22 = d2.squaredNorm();
  } else {
    Mat B(metric.dim(), metric.dim());
    metric.b_form((p0 + p1 + p2) / 3.0, B);
    g11 = d1.dot(B * d1);
    g12 = d1.dot(B * d2);
    g22 = d2.dot(B * d2);
  }
  return 0.5 * std::sqrt(std::max(0.0, g11 * g22 - g12 * g12));
}

// Distance from the origin to the triangle (p0, p1, p2) in any dimension.
inline double origin_distance(const Vec &a, const Vec &b, const Vec &c) {
  const Vec ab = b - a, ac = c - a, ap = -a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0)
    return a.norm();
  const Vec bp = -b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3)
    return b.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0)
    return (a + d1 / (d1 - d3) * ab).norm();
  const Vec cp = -c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6)
    return c.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0)
    return (a + d2 / (d2 - d6) * ac).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b)).norm();
  const double denom = 1.0 / (va + vb + vc);
  return (a + ab * (vb * denom) + ac * (vc * denom)).norm();
}

// Fraction of the reference triangle where the linear interpolant of
// (f0, f1, f2) is negative.
inline double negative_fraction(double f0, double f1, double f2) {
  const std::array<Vec2, 3> P{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const std::array<double, 3> f{f0, f1, f2};
  std::vector<Vec2> poly;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    if (f[i] <= 0)
      poly.push_back(P[i]);
    if ((f[i] <= 0) != (f[j] <= 0))
      poly.push_back(P[i] + f[i] / (f[i] - f[j]) * (P[j] - P[i]));
  }
  double a = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto &p = poly[i], &q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - p.y() * q.x();
  }
  return std::abs(a); // reference triangle has area 1/2
}

class BallClipper {
public:
  BallClipper(const AmbientMetric &metric, double t, AreaKind kind, const ClipOptions &opt)
      : metric_(metric), t_(t), kind_(kind), opt_(opt) {}

  double area(const Vec &a, const Vec &b, const Vec &c, int depth = 0) const {
    const double fa = a.norm() - t_, fb = b.norm() - t_, fc = c.norm() - t_;
    if (fa <= 0 && fb <= 0 && fc <= 0)
      return full(a, b, c);
    const bool all_out = fa > 0 && fb > 0 && fc > 0;
    if (all_out && origin_distance(a, b, c) >= t_)
      return 0.0;
    const double coarse = leaf(a, b, c, fa, fb, fc);
    if (depth >= opt_.max_depth)
      return coarse;
    const Vec ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    const std::array<std::array<const Vec *, 3>, 4> kids{{{&a, &ab, &ca},
                                                          {&ab, &b, &bc},
                                                          {&ca, &bc, &c},
                                                          {&ab, &bc, &ca}}};
    double fine = 0.0;
    for (const auto &k : kids)
      fine += leaf(*k[0], *k[1], *k[2], k[0]->norm() - t_, k[1]->norm() - t_, k[2]->norm() - t_);
    if (!all_out && std::abs(fine - coarse) <= opt_.rel_tol * full(a, b, c))
      return fine;
    double sum = 0.0;
    for (const auto &k : kids)
      sum += area(*k[0], *k[1], *k[2], depth + 1);
    return sum;
  }

private:
  double full(const Vec &a, const Vec &b, const Vec &c) const {
    return kind_ == AreaKind::ambient ? triangle_metric_area(metric_, a, b, c)
                                      : triangle_b_area(metric_, a, b, c);
  }
  double leaf(const Vec &a, const Vec &b, const Vec &c, double fa, double fb, double fc) const {
    if (fa <= 0 && fb <= 0 && fc <= 0)
      return full(a, b, c);
    if (fa > 0 && fb > 0 && fc > 0)
      return 0.0;
    return negative_fraction(fa, fb, fc) * full(a, b, c);
  }

  const AmbientMetric &metric_;
  double t_;
  AreaKind kind_;
  ClipOptions opt_;
};

} // namespace detail

/// Area (ambient or b-metric) of the image of `map` inside |x| < t.
inline double area_in_ball(const DiscMap &map, double t, AreaKind kind = AreaKind::ambient,
                           const ClipOptions &opt = {}) {
  detail::check_positions(map);
  const auto &mesh = map.mesh();
  const int T = mesh.triangle_count();
  std::vector<double> parts(T);
  const detail::BallClipper clip(*map.metric, t, kind, opt);
  parallel_chunks(T, 256, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      const auto &tr = mesh.triangles[i];
      parts[i] = clip.area(map.positions.col(tr[0]), map.positions.col(tr[1]),
                           map.positions.col(tr[2]));
    }
  });
  return pairwise_sum(parts);
}

/// Area inside the geodesic ball B_r(o).
inline double area_in_geodesic_ball(const DiscMap &map, double r, AreaKind kind = AreaKind::ambient,
                                    const ClipOptions &opt = {}) {
  return area_in_ball(map, map.metric->model().g(r), kind, opt);
}

/// Euclidean area of the image polyhedral surface.
inline double euclidean_area(const DiscMap &map) {
  const auto &mesh = map.mesh();
  std::vector<double> parts(mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto &tr = mesh.triangles[t];
    const Vec d1 = map.positions.col(tr[1]) - map.positions.col(tr[0]);
    const Vec d2 = map.positions.col(tr[2]) - map.positions.col(tr[0]);
    parts[t] = 0.5 * std::sqrt(std::max(
                         0.0, d1.squaredNorm() * d2.squaredNorm() - d1.dot(d2) * d1.dot(d2)));
  }
  return pairwise_sum(parts);
}

} // namespace hplateau
