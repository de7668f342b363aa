#pragma once

// Piecewise-linear maps u: D -> B on the polar disc mesh, with boundary
// vertices constrained to a curve through monotone parameters, and their
// Dirichlet energy, area and conformality defect in the ambient metric.
//
// On a triangle T with reference edges E = [z1 - z0, z2 - z0] and image
// edges D = [x1 - x0, x2 - x0] the differential is J = D E^{-1}, so
//     E_T = 1/2 |T| lambda(|xbar|)^2 tr(Q D^T B D),   Q = E^{-1} E^{-T},
//     A_T = 1/2 lambda(|xbar|)^2 sqrt(det(D^T B D)),
// with the metric frozen at the image barycenter xbar.

#include "hplateau/ambient_metric.hpp"
#include "hplateau/boundary_curve.hpp"
#include "hplateau/clipping.hpp"
#include "hplateau/disc_mesh.hpp"

#include <array>
#include <limits>
#include <memory>
#include <sstream>

namespace hplateau {

/// Mesh plus the derived data every map on it shares.
class DiscGeometry {
public:
  explicit DiscGeometry(int level) : mesh(build_mesh(level)), locator(mesh) {
    const int T = mesh.triangle_count();
    ref_area.resize(T);
    q.resize(T);
    for (int t = 0; t < T; ++t) {
      const auto &tr = mesh.triangles[t];
      const Vec2 e1 = mesh.vertices[tr[1]] - mesh.vertices[tr[0]];
      const Vec2 e2 = mesh.vertices[tr[2]] - mesh.vertices[tr[0]];
      Eigen::Matrix2d E;
      E << e1, e2;
      const Eigen::Matrix2d Ei = E.inverse();
      const Eigen::Matrix2d Q = Ei * Ei.transpose();
      ref_area[t] = 0.5 * std::abs(E.determinant());
      q[t] = {Q(0, 0), Q(0, 1), Q(1, 1)};
    }
    incidence_start.assign(mesh.vertex_count() + 1, 0);
    for (const auto &tr : mesh.triangles)
      for (int v : tr)
        ++incidence_start[v + 1];
    for (int v = 0; v < mesh.vertex_count(); ++v)
      incidence_start[v + 1] += incidence_start[v];
    incidence.resize(incidence_start.back());
    std::vector<int> fill(incidence_start.begin(), incidence_start.end() - 1);
    for (int t = 0; t < T; ++t)
      for (int c = 0; c < 3; ++c)
        incidence[fill[mesh.triangles[t][c]]++] = 3 * t + c;
  }
  DiscGeometry(const DiscGeometry &) = delete;
  DiscGeometry &operator=(const DiscGeometry &) = delete;

  DiscMesh mesh;
  PointLocator locator;
  std::vector<double> ref_area;
  std::vector<std::array<double, 3>> q; ///< Q entries (q11, q12, q22)
  /// Corners (3 t + c) touching each vertex, in increasing order.
  std::vector<int> incidence_start, incidence;
};

inline std::shared_ptr<const DiscGeometry> make_geometry(int level) {
  return std::make_shared<const DiscGeometry>(level);
}

struct DiscMap {
  std::shared_ptr<const DiscGeometry> geometry;
  std::shared_ptr<const BoundaryCurve> curve;
  std::shared_ptr<const AmbientMetric> metric;
  Mat positions;              ///< dim x V, column per vertex
  std::vector<double> params; ///< per boundary-loop index, increasing, span < L
  std::array<int, 3> anchors{}; ///< boundary-loop indices with frozen params

  const DiscMesh &mesh() const { return geometry->mesh; }
  int dim() const { return static_cast<int>(positions.rows()); }
  int boundary_count() const { return mesh().boundary_count(); }

  /// Boundary parameter at angle theta, linear in theta between vertices.
  double param_at_angle(double theta) const {
    const int m = boundary_count();
    double u = std::fmod(theta, 2.0 * kPi);
    if (u < 0)
      u += 2.0 * kPi;
    const double pos = u / (2.0 * kPi) * m;
    const int i = std::min(static_cast<int>(pos), m - 1);
    const double s = pos - i;
    const double t0 = params[i];
    const double t1 = i + 1 < m ? params[i + 1] : params[0] + curve->length();
    return (1.0 - s) * t0 + s * t1;
  }

  /// u(z): barycentric interpolation inside, curve lookup on the circle.
  Vec eval(const Vec2 &z) const {
    if (z.norm() >= 1.0 - 1e-12)
      return curve->point(param_at_angle(std::atan2(z.y(), z.x())));
    const auto hit = geometry->locator.locate(z);
    const auto &tr = mesh().triangles[hit.triangle];
    return hit.bary[0] * positions.col(tr[0]) + hit.bary[1] * positions.col(tr[1]) +
           hit.bary[2] * positions.col(tr[2]);
  }

  /// Places boundary vertices on the curve at their parameters.
  void sync_boundary() {
    const auto &loop = mesh().boundary_loop;
    for (int i = 0; i < boundary_count(); ++i)
      positions.col(loop[i]) = curve->point(params[i]);
  }
};

/// Uniform parameters with anchors at boundary angles 0, 2pi/3, 4pi/3 and
/// curve parameters 0, L/3, 2L/3.
inline void set_uniform_params(DiscMap &map) {
  const int m = map.boundary_count();
  require(m % 3 == 0, "boundary count must be divisible by 3");
  map.params.resize(m);
  for (int i = 0; i < m; ++i)
    map.params[i] = map.curve->length() * i / m;
  map.anchors = {0, m / 3, 2 * m / 3};
}

struct EnergyReport {
  double energy = 0.0;
  double area = 0.0;
  double defect = 0.0;
  double b_area = 0.0;           ///< area in the metric <,>_b (no conformal factor)
  double euclidean_energy = 0.0; ///< Dirichlet energy into R^n
};

namespace detail {

inline void check_positions(const DiscMap &map) {
  const double safe = map.metric->safe_radius();
  for (int v = 0; v < map.positions.cols(); ++v) {
    const double r = map.positions.col(v).norm();
    if (!(r < safe)) {
      std::ostringstream os;
      os << "disc map: vertex " << v << " at |x| = " << r
         << " lies outside the safe ball (1 - margin)";
      throw DomainError(os.str());
    }
  }
}

} // namespace detail

/// Energy, area, defect and b-area; per-triangle ambient and Euclidean
/// energies optional.
inline EnergyReport energy_report(const DiscMap &map, std::vector<double> *tri_energy = nullptr,
                                  std::vector<double> *tri_euclidean = nullptr) {
  detail::check_positions(map);
  const auto &geo = *map.geometry;
  const auto &metric = *map.metric;
  const int T = geo.mesh.triangle_count(), dim = map.dim();
  std::vector<double> e(T), a(T), ab(T), ee(T);
  parallel_chunks(T, 2048, [&](std::size_t b, std::size_t end, std::size_t) {
    Mat B(dim, dim);
    for (std::size_t t = b; t < end; ++t) {
      const auto &tr = geo.mesh.triangles[t];
      const Vec x0 = map.positions.col(tr[0]);
      const Vec d1 = map.positions.col(tr[1]) - x0, d2 = map.positions.col(tr[2]) - x0;
      const Vec bar = x0 + (d1 + d2) / 3.0;
      const double lam = metric.model().lambda(bar.norm()).value;
      const auto &q = geo.q[t];
      const double s_e = q[0] * d1.squaredNorm() + 2 * q[1] * d1.dot(d2) + q[2] * d2.squaredNorm();
      double m11 = d1.squaredNorm(), m12 = d1.dot(d2), m22 = d2.squaredNorm();
      if (!metric.euclidean_b()) {
        metric.b_form(bar, B);
        m11 = d1.dot(B * d1);
        m12 = d1.dot(B * d2);
        m22 = d2.dot(B * d2);
      }
      const double S = q[0] * m11 + 2 * q[1] * m12 + q[2] * m22;
      const double root = std::sqrt(std::max(0.0, m11 * m22 - m12 * m12));
      e[t] = 0.5 * geo.ref_area[t] * lam * lam * S;
      a[t] = 0.5 * lam * lam * root;
      ab[t] = 0.5 * root;
      ee[t] = 0.5 * geo.ref_area[t] * s_e;
    }
  });
  EnergyReport rep;
  rep.energy = pairwise_sum(e);
  rep.area = pairwise_sum(a);
  rep.b_area = pairwise_sum(ab);
  rep.euclidean_energy = pairwise_sum(ee);
  rep.defect = rep.energy - rep.area;
  if (tri_energy)
    *tri_energy = std::move(e);
  if (tri_euclidean)
    *tri_euclidean = std::move(ee);
  return rep;
}

inline double dirichlet_energy(const DiscMap &map) { return energy_report(map).energy; }
inline double surface_area(const DiscMap &map) { return energy_report(map).area; }
inline double conformality_defect(const DiscMap &map) { return energy_report(map).defect; }

/// Dirichlet energy and its gradient with respect to every vertex position
/// (dim x V). The conformal factor enters through its tabulated derivative;
/// derivatives of a perturbation B are central differences with step 1e-6.
inline double energy_gradient(const DiscMap &map, Mat &grad) {
  detail::check_positions(map);
  const auto &geo = *map.geometry;
  const auto &metric = *map.metric;
  const int T = geo.mesh.triangle_count(), dim = map.dim();
  std::vector<double> e(T);
  Mat corner(dim, 3 * T);
  const bool plain = metric.euclidean_b();
  parallel_chunks(T, 2048, [&](std::size_t b, std::size_t end, std::size_t) {
    Mat B(dim, dim), Bp(dim, dim), Bm(dim, dim);
    Vec g1(dim), g2(dim), gbar(dim);
    for (std::size_t t = b; t < end; ++t) {
      const auto &tr = geo.mesh.triangles[t];
      const Vec x0 = map.positions.col(tr[0]);
      const Vec d1 = map.positions.col(tr[1]) - x0, d2 = map.positions.col(tr[2]) - x0;
      const Vec bar = x0 + (d1 + d2) / 3.0;
      const double rho = bar.norm();
      const auto lv = metric.model().lambda(rho);
      const double lam2 = lv.value * lv.value;
      const auto &q = geo.q[t];
      const double A = geo.ref_area[t];
      const Vec v1 = q[0] * d1 + q[1] * d2, v2 = q[1] * d1 + q[2] * d2;
      double S;
      if (plain) {
        S = d1.dot(v1) + d2.dot(v2);
        g1 = A * lam2 * v1;
        g2 = A * lam2 * v2;
        gbar.setZero();
      } else {
        metric.b_form(bar, B);
        S = d1.dot(B * v1) + d2.dot(B * v2);
        g1 = A * lam2 * (B * v1);
        g2 = A * lam2 * (B * v2);
        const double h = 1e-6;
        Vec xp = bar, xm = bar;
        for (int k = 0; k < dim; ++k) {
          xp(k) += h;
          xm(k) -= h;
          metric.b_form(xp, Bp);
          metric.b_form(xm, Bm);
          const Mat dB = (Bp - Bm) / (2 * h);
          gbar(k) = 0.5 * A * lam2 * (d1.dot(dB * v1) + d2.dot(dB * v2));
          xp(k) = bar(k);
          xm(k) = bar(k);
        }
      }
      if (rho > 0.0)
        gbar += (A * S * lv.value * lv.derivative / rho) * bar;
      e[t] = 0.5 * A * lam2 * S;
      corner.col(3 * t) = -g1 - g2 + gbar / 3.0;
      corner.col(3 * t + 1) = g1 + gbar / 3.0;
      corner.col(3 * t + 2) = g2 + gbar / 3.0;
    }
  });
  grad.setZero(dim, geo.mesh.vertex_count());
  for (int v = 0; v < geo.mesh.vertex_count(); ++v)
    for (int k = geo.incidence_start[v]; k < geo.incidence_start[v + 1]; ++k)
      grad.col(v) += corner.col(geo.incidence[k]);
  return pairwise_sum(e);
}

/// Gradient with respect to the boundary parameters: <dE/dx_b, gamma'(t_b)>.
inline std::vector<double> param_gradient(const DiscMap &map, const Mat &grad) {
  const auto &loop = map.mesh().boundary_loop;
  std::vector<double> gp(loop.size());
  for (std::size_t i = 0; i < loop.size(); ++i)
    gp[i] = grad.col(loop[i]).dot(map.curve->tangent(map.params[i]));
  return gp;
}

/// Energy of u restricted to D_R(c) ∩ D, exact for the piecewise-constant
/// energy density (circle–triangle intersection areas).
inline double subdomain_energy(const DiscMap &map, const Vec2 &c, double R,
                               const std::vector<double> &tri_energy) {
  const auto &geo = *map.geometry;
  std::vector<double> parts;
  for (int t = 0; t < geo.mesh.triangle_count(); ++t) {
    const auto &tr = geo.mesh.triangles[t];
    const auto &v = geo.mesh.vertices;
    const double frac =
        disc_triangle_area(c, R, v[tr[0]], v[tr[1]], v[tr[2]]) / geo.ref_area[t];
    if (frac > 0.0)
      parts.push_back(std::min(1.0, frac) * tri_energy[t]);
  }
  return pairwise_sum(parts);
}

inline double subdomain_energy(const DiscMap &map, const Vec2 &c, double R) {
  std::vector<double> te;
  energy_report(map, &te);
  return subdomain_energy(map, c, R, te);
}

/// Image mesh as OBJ (first three coordinates), 1-based faces.
inline void write_obj(std::ostream &os, const DiscMap &map) {
  os.precision(17);
  for (int v = 0; v < map.positions.cols(); ++v) {
    os << 'v';
    for (int k = 0; k < 3; ++k)
      os << ' ' << (k < map.dim() ? map.positions(k, v) : 0.0);
    os << '\n';
  }
  for (const auto &t : map.mesh().triangles)
    os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

} // namespace hplateau
