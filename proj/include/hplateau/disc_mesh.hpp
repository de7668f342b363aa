#pragma once

// Structured polar triangulation of the closed unit disc. Level L has
// N = 2^L rings; ring j (radius j/N) carries 6j vertices at angles
// 2 pi i / (6j), and consecutive rings are stitched by merging their angle
// sequences. Level 0 is the hexagonal fan (7 vertices, 6 triangles).

#include "hplateau/core.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

namespace hplateau {

struct DiscMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles; ///< counter-clockwise
  std::vector<int> boundary_loop;            ///< ring N in increasing angle
  std::vector<int> ring_start;               ///< first vertex of ring j; ring 0 is the centre
  int level = 0;
  int rings = 1;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int boundary_count() const { return static_cast<int>(boundary_loop.size()); }
  int ring_size(int j) const { return j == 0 ? 1 : 6 * j; }
  int ring_of(int v) const {
    const auto it = std::upper_bound(ring_start.begin(), ring_start.end(), v);
    return static_cast<int>(it - ring_start.begin()) - 1;
  }
  bool is_boundary(int v) const { return v >= ring_start[rings]; }
  /// Angle of boundary vertex i (index into boundary_loop).
  double boundary_angle(int i) const { return 2.0 * kPi * i / boundary_count(); }
  double triangle_area(int t) const {
    const auto &tr = triangles[t];
    const Vec2 e1 = vertices[tr[1]] - vertices[tr[0]], e2 = vertices[tr[2]] - vertices[tr[0]];
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
  }
  /// Mesh width: longest edge.
  double max_edge() const {
    double h = 0.0;
    for (const auto &t : triangles)
      for (int k = 0; k < 3; ++k)
        h = std::max(h, (vertices[t[k]] - vertices[t[(k + 1) % 3]]).norm());
    return h;
  }
};

inline DiscMesh build_mesh(int level) {
  require(level >= 0 && level <= 10, "build_mesh: level must lie in [0, 10]");
  DiscMesh m;
  m.level = level;
  m.rings = 1 << level;
  const int N = m.rings;
  m.ring_start.push_back(0);
  m.vertices.emplace_back(0.0, 0.0);
  for (int j = 1; j <= N; ++j) {
    m.ring_start.push_back(m.vertex_count());
    const int n = 6 * j;
    const double rad = static_cast<double>(j) / N;
    for (int i = 0; i < n; ++i) {
      const double th = 2.0 * kPi * i / n;
      if (j == N)
        m.vertices.emplace_back(std::cos(th), std::sin(th));
      else
        m.vertices.emplace_back(rad * std::cos(th), rad * std::sin(th));
    }
  }
  m.ring_start.push_back(m.vertex_count());

  for (int i = 0; i < 6; ++i)
    m.triangles.push_back({0, 1 + i, 1 + (i + 1) % 6});
  for (int j = 2; j <= N; ++j) {
    const int in0 = m.ring_start[j - 1], out0 = m.ring_start[j];
    const long mi = 6L * (j - 1), no = 6L * j;
    long i = 0, k = 0;
    while (i < mi || k < no) {
      // Advance along whichever ring has the smaller next angle; integer
      // comparison of (k+1)/no and (i+1)/mi keeps ties deterministic.
      const bool outer = i == mi || (k < no && (k + 1) * mi <= (i + 1) * no);
      if (outer) {
        m.triangles.push_back({in0 + static_cast<int>(i % mi), out0 + static_cast<int>(k),
                               out0 + static_cast<int>((k + 1) % no)});
        ++k;
      } else {
        m.triangles.push_back({in0 + static_cast<int>(i), out0 + static_cast<int>(k % no),
                               in0 + static_cast<int>((i + 1) % mi)});
        ++i;
      }
    }
  }
  for (int i = 0; i < 6 * N; ++i)
    m.boundary_loop.push_back(m.ring_start[N] + i);
  return m;
}

struct MeshStats {
  int vertices = 0, edges = 0, faces = 0;
  int euler = 0;
  double min_angle_deg = 180.0;
  bool orientation_ok = true;
  bool edges_manifold = true; ///< every edge has one or two faces
};

inline MeshStats mesh_stats(const DiscMesh &m) {
  MeshStats s;
  s.vertices = m.vertex_count();
  s.faces = m.triangle_count();
  std::map<std::pair<int, int>, int> edge_use;
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto &tr = m.triangles[t];
    if (!(m.triangle_area(t) > 0.0))
      s.orientation_ok = false;
    for (int k = 0; k < 3; ++k) {
      const int a = tr[k], b = tr[(k + 1) % 3];
      ++edge_use[{std::min(a, b), std::max(a, b)}];
      const Vec2 u = m.vertices[b] - m.vertices[a];
      const Vec2 w = m.vertices[tr[(k + 2) % 3]] - m.vertices[a];
      const double ang = std::acos(std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0));
      s.min_angle_deg = std::min(s.min_angle_deg, ang * 180.0 / kPi);
    }
  }
  s.edges = static_cast<int>(edge_use.size());
  for (const auto &[e, n] : edge_use)
    if (n > 2)
      s.edges_manifold = false;
  s.euler = s.vertices - s.edges + s.faces;
  return s;
}

/// Barycentric location in the polygonal disc. Points outside every
/// triangle (between a boundary chord and the unit circle) are assigned to
/// the nearest triangle with clamped coordinates.
class PointLocator {
public:
  struct Hit {
    int triangle = -1;
    std::array<double, 3> bary{};
  };

  explicit PointLocator(const DiscMesh &mesh)
      : mesh_(&mesh), cells_(std::max(4, 2 * mesh.rings)) {
    buckets_.assign(static_cast<std::size_t>(cells_) * cells_, {});
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      double x0 = 2, x1 = -2, y0 = 2, y1 = -2;
      for (int v : mesh.triangles[t]) {
        x0 = std::min(x0, mesh.vertices[v].x());
        x1 = std::max(x1, mesh.vertices[v].x());
        y0 = std::min(y0, mesh.vertices[v].y());
        y1 = std::max(y1, mesh.vertices[v].y());
      }
      for (int cx = cell(x0); cx <= cell(x1); ++cx)
        for (int cy = cell(y0); cy <= cell(y1); ++cy)
          buckets_[static_cast<std::size_t>(cy) * cells_ + cx].push_back(t);
    }
  }

  Hit locate(const Vec2 &z) const {
    Hit best;
    double best_score = -std::numeric_limits<double>::infinity();
    const int cx = cell(z.x()), cy = cell(z.y());
    for (int ring = 0; ring <= cells_; ++ring) {
      for (int ix = cx - ring; ix <= cx + ring; ++ix)
        for (int iy = cy - ring; iy <= cy + ring; ++iy) {
          if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring)
            continue;
          if (ix < 0 || iy < 0 || ix >= cells_ || iy >= cells_)
            continue;
          for (int t : buckets_[static_cast<std::size_t>(iy) * cells_ + ix]) {
            const auto b = barycentric(t, z);
            const double score = std::min({b[0], b[1], b[2]});
            if (score > best_score || (score == best_score && t < best.triangle)) {
              best_score = score;
              best = {t, b};
            }
          }
        }
      if (best_score >= -1e-12 || (best.triangle >= 0 && ring >= 1))
        break;
    }
    double sum = 0.0;
    for (double &b : best.bary) {
      b = std::max(0.0, b);
      sum += b;
    }
    for (double &b : best.bary)
      b /= sum;
    return best;
  }

private:
  int cell(double x) const {
    return std::clamp(static_cast<int>(std::floor((x + 1.0) * 0.5 * cells_)), 0, cells_ - 1);
  }
  std::array<double, 3> barycentric(int t, const Vec2 &z) const {
    const auto &tr = mesh_->triangles[t];
    const Vec2 &a = mesh_->vertices[tr[0]], &b = mesh_->vertices[tr[1]],
               &c = mesh_->vertices[tr[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    const double l1 = ((z.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (z.y() - a.y())) / det;
    const double l2 = ((b.x() - a.x()) * (z.y() - a.y()) - (z.x() - a.x()) * (b.y() - a.y())) / det;
    return {1.0 - l1 - l2, l1, l2};
  }

  const DiscMesh *mesh_;
  int cells_;
  std::vector<std::vector<int>> buckets_;
};

/// OBJ with 2D positions (z = 0), 1-based faces.
inline void write_obj(std::ostream &os, const DiscMesh &m) {
  os.precision(17);
  for (const auto &v : m.vertices)
    os << "v " << v.x() << ' ' << v.y() << " 0\n";
  for (const auto &t : m.triangles)
    os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

} // namespace hplateau
