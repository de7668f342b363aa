#pragma once

// Discrete Courant–Lebesgue radius: among radii r in (s, sqrt s) pick the
// one whose image arc u(D ∩ ∂D_r(z0)) is shortest, and compare its length
// with sqrt(8 pi E / -ln s), E the energy of u on D_{sqrt s}(z0).

#include "hplateau/disc_map.hpp"

#include <cmath>
#include <sstream>

namespace hplateau {

enum class LengthMetric { ambient, euclidean };

struct ArcSample {
  std::vector<Vec2> points; ///< parameter points of one connected arc, in order
};

struct CourantLebesgueResult {
  double r = 0.0;
  double arc_length = 0.0;
  double energy = 0.0; ///< E(u, D ∩ D_{sqrt s}(z0)) in the chosen metric
  double bound = 0.0;  ///< sqrt(8 pi E / -ln s)
  std::vector<double> radii, lengths;
  std::vector<ArcSample> arcs; ///< arcs realizing the selected radius
};

namespace detail {

/// Pieces of the circle z0 + r e^{i psi} inside the closed unit disc,
/// sampled densely with bisection-refined endpoints on |z| = 1.
inline std::vector<ArcSample> circle_arcs_in_disc(const Vec2 &z0, double r, int samples) {
  auto at = [&](double psi) { return Vec2(z0 + r * Vec2(std::cos(psi), std::sin(psi))); };
  auto inside = [](const Vec2 &z) { return z.squaredNorm() < 1.0; };
  auto refine = [&](double in_psi, double out_psi) {
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (in_psi + out_psi);
      (inside(at(mid)) ? in_psi : out_psi) = mid;
    }
    const Vec2 z = at(in_psi);
    return Vec2(z / std::max(1.0, z.norm()));
  };
  std::vector<ArcSample> arcs;
  // Start the sweep at an outside sample when there is one so that every
  // arc is contiguous in the sweep.
  int start = -1;
  for (int k = 0; k < samples; ++k)
    if (!inside(at(2 * kPi * k / samples))) {
      start = k;
      break;
    }
  if (start < 0) {
    ArcSample full;
    for (int k = 0; k <= samples; ++k)
      full.points.push_back(at(2 * kPi * k / samples));
    arcs.push_back(std::move(full));
    return arcs;
  }
  ArcSample cur;
  bool in = false;
  for (int k = 1; k <= samples; ++k) {
    const double prev_psi = 2 * kPi * (start + k - 1) / samples;
    const double psi = 2 * kPi * (start + k) / samples;
    const bool now = inside(at(psi));
    if (now && !in) {
      cur.points = {refine(psi, prev_psi)};
    }
    if (now)
      cur.points.push_back(at(psi));
    if (!now && in) {
      cur.points.push_back(refine(prev_psi, psi));
      arcs.push_back(std::move(cur));
      cur = {};
    }
    in = now;
  }
  return arcs;
}

inline double image_length(const DiscMap &map, const ArcSample &arc, LengthMetric lm) {
  std::vector<double> parts;
  Vec prev = map.eval(arc.points.front());
  for (std::size_t k = 1; k < arc.points.size(); ++k) {
    const Vec cur = map.eval(arc.points[k]);
    const Vec d = cur - prev;
    if (lm == LengthMetric::euclidean)
      parts.push_back(d.norm());
    else
      parts.push_back(map.metric->length(0.5 * (cur + prev), d));
    prev = cur;
  }
  return pairwise_sum(parts);
}

} // namespace detail

inline CourantLebesgueResult courant_lebesgue_radius(const DiscMap &map, const Vec2 &z0, double s,
                                                     LengthMetric lm = LengthMetric::ambient,
                                                     int candidates = 48) {
  require(s > 0.0 && s < 1.0, "courant_lebesgue_radius: s must lie in (0, 1)");
  require(z0.norm() <= 1.0 + 1e-12, "courant_lebesgue_radius: z0 must lie in the closed disc");
  const double rs = std::sqrt(s);
  const auto &verts = map.mesh().vertices;
  int in_annulus = 0;
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto &v : verts) {
    const double d = (v - z0).norm();
    if (d > s && d < rs)
      ++in_annulus;
    if (d > 1e-12)
      nearest = std::min(nearest, d);
  }
  if (in_annulus == 0) {
    std::ostringstream os;
    os << "courant_lebesgue_radius: annulus (" << s << ", " << rs
       << ") contains no mesh vertices; minimum usable s is " << nearest * nearest;
    throw DomainError(os.str());
  }

  CourantLebesgueResult res;
  std::vector<double> te, tee;
  energy_report(map, &te, &tee);
  res.energy = subdomain_energy(map, z0, rs, lm == LengthMetric::euclidean ? tee : te);
  res.bound = std::sqrt(8.0 * kPi * res.energy / -std::log(s));

  const double h = map.mesh().max_edge();
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < candidates; ++k) {
    const double r = std::exp(std::log(s) + (k + 0.5) / candidates * (std::log(rs) - std::log(s)));
    const int samples = std::max(256, static_cast<int>(8.0 * 2 * kPi * r / h));
    const auto arcs = detail::circle_arcs_in_disc(z0, r, samples);
    std::vector<double> pieces;
    for (const auto &a : arcs)
      pieces.push_back(detail::image_length(map, a, lm));
    const double len = pairwise_sum(pieces);
    res.radii.push_back(r);
    res.lengths.push_back(len);
    if (len < best) {
      best = len;
      res.r = r;
      res.arc_length = len;
      res.arcs = arcs;
    }
  }
  return res;
}

} // namespace hplateau
