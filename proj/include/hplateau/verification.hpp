#pragma once

// Cross-cutting checks on solved surfaces: monotonicity of area ratios,
// Hessian comparison in the model, radial/spherical splitting, capacity and
// oscillation bounds, asymptotic boundary containment, and the manifest.

#include "hplateau/dopri5.hpp"
#include "hplateau/expansion.hpp"

#include <map>

namespace hplateau {

struct MonotonicityRow {
  double r = 0.0;
  double area = 0.0;
  double G = 0.0;
  double ratio = 0.0;
};

struct MonotonicityReport {
  std::vector<MonotonicityRow> rows;
  std::vector<double> dropped; ///< radii reaching the surface boundary
  std::vector<std::string> warnings;
  double ratio_tol = 0.0;
  int level = 0;
  double max_relative_decrease = 0.0;
  bool passes() const { return max_relative_decrease <= ratio_tol; }
};

/// Default ratio tolerance: 1e-2 at level 5, doubled per coarser level.
inline double default_ratio_tol(int level) { return 1e-2 * std::max(1.0, std::ldexp(1.0, 5 - level)); }

/// Area(M ∩ B_r)/G(r) over the requested radii, G from `sol`.
inline MonotonicityReport monotonicity_report(const DiscMap &map, const ComparisonSolution &sol,
                                              const std::vector<double> &radii,
                                              double ratio_tol = -1.0,
                                              const ClipOptions &clip = {}) {
  MonotonicityReport rep;
  rep.level = map.mesh().level;
  rep.ratio_tol = ratio_tol > 0 ? ratio_tol : default_ratio_tol(rep.level);
  double boundary_r = std::numeric_limits<double>::infinity();
  for (int v : map.mesh().boundary_loop)
    boundary_r = std::min(boundary_r, map.metric->geodesic_radius(map.positions.col(v)));
  for (double r : radii) {
    require(r > 0.0, "monotonicity_report: radii must be positive");
    if (r >= boundary_r) {
      rep.dropped.push_back(r);
      std::ostringstream os;
      os << "radius " << r << " dropped: surface boundary at geodesic radius " << boundary_r;
      rep.warnings.push_back(os.str());
      continue;
    }
    MonotonicityRow row;
    row.r = r;
    row.area = area_in_geodesic_ball(map, r, AreaKind::ambient, clip);
    row.G = sol.eval_G(r);
    row.ratio = row.area / row.G;
    rep.rows.push_back(row);
  }
  std::sort(rep.rows.begin(), rep.rows.end(),
            [](const auto &a, const auto &b) { return a.r < b.r; });
  double running = 0.0;
  for (const auto &row : rep.rows) {
    if (running > 0.0)
      rep.max_relative_decrease = std::max(rep.max_relative_decrease, (running - row.ratio) / running);
    running = std::max(running, row.ratio);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Hessian comparison in the rotationally symmetric model

struct HessianReport {
  double r = 0.0;
  double uu = 0.0;         ///< <u, u>
  double hess_r = 0.0;     ///< (r o c)''(0), c the geodesic with c'(0) = u
  double bound_r = 0.0;    ///< F'/F (<u,u> - <grad r, u>^2)
  double hess_G = 0.0;     ///< (G o r o c)''(0)
  double bound_G = 0.0;    ///< F' <u, u>
  double radial_part = 0.0;
  bool pass(double tol) const {
    return hess_r >= bound_r - tol * std::max(1.0, std::abs(bound_r)) &&
           hess_G >= bound_G - tol * std::max(1.0, std::abs(bound_G));
  }
};

/// Second derivatives of r and G o r along the geodesic through x with
/// velocity u, by central differences of the polar geodesic flow.
inline HessianReport hessian_spot_check(const AmbientMetric &metric, const ComparisonSolution &sol,
                                        const Vec &x, const Vec &u, double h = 1e-3) {
  require(x.size() == metric.dim() && u.size() == metric.dim(),
          "hessian_spot_check: dimension mismatch");
  if (x.norm() < 1e-12)
    throw DomainError("hessian_spot_check: r is not smooth at the origin");
  HessianReport rep;
  const double t = x.norm();
  const Vec e = x / t;
  const double lam = metric.model().conformal_factor(t);
  rep.r = metric.geodesic_radius(x);
  const double ur = u.dot(e);
  const double up = (u - ur * e).norm();
  rep.uu = lam * lam * u.squaredNorm();
  rep.radial_part = lam * ur;
  // polar coordinates in the plane spanned by x and u: dr^2 + F(r)^2 dth^2
  const double rdot = lam * ur, thdot = up / t;
  auto rhs = [&sol](double, const State<4> &y) {
    const double F = sol.eval_F(y[0]), Fp = sol.eval_Fprime(y[0]);
    return State<4>{y[2], y[3], F * Fp * y[3] * y[3], -2.0 * Fp / F * y[2] * y[3]};
  };
  Dopri5Options opt;
  opt.rtol = 1e-13;
  opt.atol = 1e-15;
  opt.h_init = h / 8;
  auto flow = [&](double sign) {
    State<4> end{};
    integrate_dopri5<4>(
        rhs, State<4>{rep.r, 0.0, sign * rdot, sign * thdot}, 0.0, h, opt,
        [&](double, const State<4> &y, const State<4> &) { end = y; });
    return end[0];
  };
  const double rp = flow(1.0), rm = flow(-1.0);
  rep.hess_r = (rp - 2.0 * rep.r + rm) / (h * h);
  rep.hess_G = (sol.eval_G(rp) - 2.0 * sol.eval_G(rep.r) + sol.eval_G(rm)) / (h * h);
  const double F = sol.eval_F(rep.r), Fp = sol.eval_Fprime(rep.r);
  rep.bound_r = Fp / F * (rep.uu - rep.radial_part * rep.radial_part);
  rep.bound_G = Fp * rep.uu;
  return rep;
}

// ---------------------------------------------------------------------------
// Radial versus spherical energy

struct RadialSphericalReport {
  double max_violation = 0.0;      ///< max over triangles of (rad - spher)/(rad + spher)
  double weighted_violation = 0.0; ///< energy-weighted mean of the positive part
  double tol = 0.0;
  bool passes() const { return weighted_violation <= tol; }
};

inline RadialSphericalReport radial_spherical_check(const DiscMap &map, double tol = 0.02) {
  detail::check_positions(map);
  const auto &mesh = map.mesh();
  RadialSphericalReport rep;
  rep.tol = tol;
  std::vector<double> w, wv;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto &tr = mesh.triangles[t];
    const Vec2 e1 = mesh.vertices[tr[1]] - mesh.vertices[tr[0]];
    const Vec2 e2 = mesh.vertices[tr[2]] - mesh.vertices[tr[0]];
    Eigen::Matrix2d E;
    E << e1, e2;
    const Mat D = (Mat(map.dim(), 2) << map.positions.col(tr[1]) - map.positions.col(tr[0]),
                   map.positions.col(tr[2]) - map.positions.col(tr[0]))
                      .finished();
    const Mat J = D * E.inverse();
    const Vec bar = (map.positions.col(tr[0]) + map.positions.col(tr[1]) + map.positions.col(tr[2])) / 3.0;
    const double rho = bar.norm();
    if (rho < 1e-12)
      continue;
    const double lam = map.metric->model().lambda(rho).value;
    const Vec e = bar / rho;
    const double total = lam * lam * J.squaredNorm();
    const double rad = lam * lam * (e.transpose() * J).squaredNorm();
    const double spher = total - rad;
    if (total <= 0.0)
      continue;
    const double v = (rad - spher) / total;
    rep.max_violation = std::max(rep.max_violation, v);
    const double energy = 0.5 * total * mesh.triangle_area(t);
    w.push_back(energy);
    wv.push_back(energy * std::max(0.0, v));
  }
  const double W = pairwise_sum(w);
  rep.weighted_violation = W > 0 ? pairwise_sum(wv) / W : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Capacity and oscillation

/// cap(D_rho(c), D) for |c| = d; concentric case pi / (-ln rho).
inline double disc_capacity(double rho, double d = 0.0) {
  require(rho > 0.0 && d >= 0.0 && rho + d < 1.0, "disc_capacity: disc must lie inside D");
  const double mu = std::acosh((1.0 + rho * rho - d * d) / (2.0 * rho));
  return kPi / mu;
}

struct CapacityReport {
  double rho = 0.0;
  double energy = 0.0;
  double cap = 0.0;
  double bound = 0.0; ///< 8 a^-2 cap
  double tol = 0.0;
  bool passes() const { return energy <= bound * (1.0 + tol); }
};

/// E(u, D_rho(0)) <= 8 a^-2 cap(D_rho, D).
inline CapacityReport capacity_check(const DiscMap &map, double rho = 0.5, double tol = 0.05) {
  CapacityReport rep;
  rep.rho = rho;
  rep.tol = tol;
  rep.energy = subdomain_energy(map, Vec2(0, 0), rho);
  rep.cap = disc_capacity(rho);
  const double a = map.metric->model().a();
  rep.bound = 8.0 / (a * a) * rep.cap;
  return rep;
}

struct OscillationReport {
  Vec2 z0{0.0, 0.0};
  double s = 0.0;
  double max_distance = 0.0; ///< upper bound: metric length of the Euclidean chord
  double cap = 0.0;
  double constant = 0.0;      ///< sqrt(8/pi) + 4 sqrt(pi/-ln s)
  double bound_a_inv = 0.0;   ///< with a^-1
  double bound_a_inv2 = 0.0;  ///< with a^-2, as stated
  double bound = 0.0;         ///< the larger of the two
  int samples = 0;
  bool passes() const { return max_distance <= bound; }
};

/// dist(u(z), u(z0)) for mesh vertices z in D_s(z0).
inline OscillationReport oscillation_check(const DiscMap &map, const Vec2 &z0, double s) {
  const double room = 1.0 - z0.norm();
  require(s > 0.0 && s < room * room, "oscillation_check: need 0 < s < (1 - |z0|)^2");
  OscillationReport rep;
  rep.z0 = z0;
  rep.s = s;
  const Vec u0 = map.eval(z0);
  const auto &metric = *map.metric;
  for (int v = 0; v < map.mesh().vertex_count(); ++v) {
    if ((map.mesh().vertices[v] - z0).norm() >= s)
      continue;
    const Vec d = map.positions.col(v) - u0;
    double len = 0.0;
    const int n = 32;
    for (int k = 0; k < n; ++k)
      len += metric.length(u0 + (k + 0.5) / n * d, d / n);
    rep.max_distance = std::max(rep.max_distance, len);
    ++rep.samples;
  }
  rep.cap = disc_capacity(std::sqrt(s), z0.norm());
  rep.constant = std::sqrt(8.0 / kPi) + 4.0 * std::sqrt(kPi / -std::log(s));
  const double a = metric.model().a();
  rep.bound_a_inv = rep.constant / a * std::sqrt(rep.cap);
  rep.bound_a_inv2 = rep.constant / (a * a) * std::sqrt(rep.cap);
  rep.bound = std::max(rep.bound_a_inv, rep.bound_a_inv2);
  return rep;
}

// ---------------------------------------------------------------------------
// Asymptotic boundary

struct AsymptoticBoundaryReport {
  std::vector<double> R;
  std::vector<HausdorffSample> distances;
  std::vector<double> excluded; ///< entries with concentration events
  bool trend_ok = false;
};

/// Trend test over the last three included entries: symmetric distance
/// non-increasing (within `tol`) or already below `tol`.
inline AsymptoticBoundaryReport
asymptotic_boundary_check(const std::vector<double> &R, const std::vector<HausdorffSample> &d,
                          const std::vector<bool> &concentrated, double tol) {
  require(R.size() == d.size() && R.size() == concentrated.size(),
          "asymptotic_boundary_check: size mismatch");
  AsymptoticBoundaryReport rep;
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (concentrated[i]) {
      rep.excluded.push_back(R[i]);
      continue;
    }
    rep.R.push_back(R[i]);
    rep.distances.push_back(d[i]);
  }
  if (rep.distances.empty())
    return rep;
  const std::size_t n = rep.distances.size(), b = n >= 3 ? n - 3 : 0;
  bool mono = true;
  for (std::size_t i = b + 1; i < n; ++i)
    mono = mono && rep.distances[i].symmetric <= rep.distances[i - 1].symmetric + tol;
  rep.trend_ok = mono || rep.distances.back().symmetric <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Manifest

struct CheckResult {
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

inline const std::vector<std::string> &manifest_tags() {
  static const std::vector<std::string> tags{"Fsao-i", "Fsao-ii", "Fsao-iii", "BR",   "BM",
                                             "mon",    "c0-i",    "c0-ii",    "a",    "ten",
                                             "are",    "des8-empirical"};
  return tags;
}

struct ManifestEntry {
  std::string tag;
  CheckResult result;
};

/// Known tags in their fixed order, then any others alphabetically.
inline std::vector<ManifestEntry> run_manifest(const std::map<std::string, CheckResult> &checks) {
  std::vector<ManifestEntry> out;
  const auto &tags = manifest_tags();
  for (const auto &t : tags)
    if (auto it = checks.find(t); it != checks.end())
      out.push_back({t, it->second});
  for (const auto &[t, r] : checks)
    if (std::find(tags.begin(), tags.end(), t) == tags.end())
      out.push_back({t, r});
  return out;
}

inline bool manifest_passes(const std::vector<ManifestEntry> &m) {
  return std::all_of(m.begin(), m.end(), [](const auto &e) { return e.result.pass; });
}

} // namespace hplateau
