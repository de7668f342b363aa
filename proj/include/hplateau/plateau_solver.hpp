#pragma once

// Discrete Plateau problem: minimize the Dirichlet energy of a disc map over
// interior vertex positions and monotone boundary parameters, with three
// anchor parameters frozen. Projected L-BFGS with Armijo backtracking along
// the projected path.

#include "hplateau/disc_map.hpp"
#include "hplateau/lune_map.hpp"

#include <Eigen/Sparse>

#include <chrono>
#include <deque>

namespace hplateau {

/// Euclidean harmonic extension of the boundary positions (cotangent
/// weights on the reference mesh).
inline Mat harmonic_extension(const DiscGeometry &geo, const Mat &boundary_positions) {
  const auto &m = geo.mesh;
  const int V = m.vertex_count(), nb = m.boundary_count(), ni = V - nb;
  const int dim = static_cast<int>(boundary_positions.rows());
  require(boundary_positions.cols() == nb, "harmonic_extension: boundary size mismatch");
  // interior vertices are exactly 0 .. ni-1 (rings are numbered outward)
  std::vector<Eigen::Triplet<double>> trip;
  Mat rhs = Mat::Zero(ni, dim);
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto &tr = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tr[(k + 1) % 3], b = tr[(k + 2) % 3];
      const Vec2 ua = m.vertices[a] - m.vertices[tr[k]], ub = m.vertices[b] - m.vertices[tr[k]];
      const double cot = ua.dot(ub) / std::abs(ua.x() * ub.y() - ua.y() * ub.x());
      const double w = 0.5 * cot;
      for (auto [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
        if (i >= ni)
          continue;
        trip.emplace_back(i, i, w);
        if (j < ni)
          trip.emplace_back(i, j, -w);
        else
          rhs.row(i) += w * boundary_positions.col(j - ni).transpose();
      }
    }
  }
  Eigen::SparseMatrix<double> L(ni, ni);
  L.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
  if (solver.info() != Eigen::Success)
    throw NumericalError("harmonic_extension: factorization failed");
  const Mat X = solver.solve(rhs);
  Mat out(dim, V);
  out.leftCols(ni) = X.transpose();
  out.rightCols(nb) = boundary_positions;
  return out;
}

/// Fresh map with uniform parameters and harmonic-extension interior.
inline DiscMap initial_map(std::shared_ptr<const DiscGeometry> geo,
                           std::shared_ptr<const BoundaryCurve> curve,
                           std::shared_ptr<const AmbientMetric> metric) {
  require(curve->dim() == metric->dim(), "initial_map: curve and metric dimensions differ");
  DiscMap map{std::move(geo), std::move(curve), std::move(metric), {}, {}, {}};
  set_uniform_params(map);
  const int nb = map.boundary_count();
  Mat bp(map.curve->dim(), nb);
  for (int i = 0; i < nb; ++i)
    bp.col(i) = map.curve->point(map.params[i]);
  map.positions = harmonic_extension(*map.geometry, bp);
  return map;
}

struct SolveOptions {
  int max_iterations = 4000;
  double gtol = 1e-9;  ///< projected-gradient infinity norm
  double ftol = 1e-13; ///< relative energy decrease over `stall_window` iterations
  int stall_window = 10;
  int memory = 10;
  double gap = -1.0; ///< minimum parameter gap; negative means L 1e-4 / boundary count
  /// maximum parameter gap as a multiple of L / boundary count; 0 disables.
  /// Without a cap, large-R solves on coarse meshes let boundary vertices
  /// bunch up so that long chords cut through the low-density interior.
  double max_gap_factor = 3.0;
  bool optimize_params = true;
};

struct PlateauResult {
  DiscMap map;
  double energy = 0.0;
  double area = 0.0;
  double conformality_defect = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool line_search_failed = false;
  bool concentration_suspected = false;
  double seconds = 0.0;
};

namespace detail {

// Isotonic regression of u (unit weights) by pool adjacent violators.
inline void pava(std::vector<double> &u) {
  std::vector<double> val;
  std::vector<int> cnt;
  for (double x : u) {
    val.push_back(x);
    cnt.push_back(1);
    while (val.size() >= 2 && val[val.size() - 2] > val.back()) {
      const int nc = cnt[cnt.size() - 2] + cnt.back();
      const double nv = (val[val.size() - 2] * cnt[cnt.size() - 2] + val.back() * cnt.back()) / nc;
      val.pop_back();
      cnt.pop_back();
      val.back() = nv;
      cnt.back() = nc;
    }
  }
  std::size_t j = 0;
  for (std::size_t b = 0; b < val.size(); ++b)
    for (int c = 0; c < cnt[b]; ++c)
      u[j++] = val[b];
}

// Projection of the interior values y_1..y_{K-1} of a chain with fixed ends
// y_0 = lo, y_K = hi onto {y_{j+1} - y_j >= d}: shift by j d, isotonic
// regression, clip. With flip = true the constraint is y_{j+1} - y_j <= d.
inline void project_chain(std::vector<double> &y, double lo, double hi, double d, bool flip) {
  const int K = static_cast<int>(y.size()) + 1;
  const double sgn = flip ? -1.0 : 1.0;
  std::vector<double> u(y.size());
  for (int j = 1; j < K; ++j)
    u[j - 1] = sgn * (y[j - 1] - j * d);
  pava(u);
  const double a = sgn * lo, b = sgn * (hi - K * d);
  const double ulo = std::min(a, b), uhi = std::max(a, b);
  for (int j = 1; j < K; ++j)
    y[j - 1] = sgn * std::clamp(u[j - 1], ulo, uhi) + j * d;
}

/// Euclidean projection of free parameters between consecutive anchors
/// onto {gap <= t_{j+1} - t_j <= max_gap}. Each bound alone is an exact
/// isotonic projection; both together go through Dykstra's alternation.
inline void project_params(std::vector<double> &t, const std::array<int, 3> &anchors, double L,
                           double gap, double max_gap = 0.0) {
  const int m = static_cast<int>(t.size());
  for (int a = 0; a < 3; ++a) {
    const int i0 = anchors[a];
    const int i1 = a < 2 ? anchors[a + 1] : anchors[0] + m;
    const double lo = t[i0];
    const double hi = a < 2 ? t[anchors[a + 1]] : t[anchors[0]] + L;
    const int K = i1 - i0;
    if (K <= 1)
      continue;
    // free indices j = 1..K-1 map to t[(i0 + j) % m]; unwrap last arc
    std::vector<double> y(K - 1);
    for (int j = 1; j < K; ++j)
      y[j - 1] = t[(i0 + j) % m] + (i0 + j >= m ? L : 0.0);
    if (max_gap > 0.0 && (hi - lo) <= K * max_gap) {
      std::vector<double> p(K - 1, 0.0), q(K - 1, 0.0), z(K - 1), w(K - 1);
      for (int it = 0; it < 20000; ++it) {
        for (int j = 0; j < K - 1; ++j)
          z[j] = y[j] + p[j];
        project_chain(z, lo, hi, gap, false);
        for (int j = 0; j < K - 1; ++j) {
          p[j] += y[j] - z[j];
          w[j] = z[j] + q[j];
        }
        project_chain(w, lo, hi, max_gap, true);
        double change = 0.0;
        for (int j = 0; j < K - 1; ++j) {
          q[j] += z[j] - w[j];
          change = std::max(change, std::abs(w[j] - y[j]));
          y[j] = w[j];
        }
        if (change <= 1e-15 * L)
          break;
      }
      // both sets hold up to roundoff; finish on the lower bound exactly
      project_chain(y, lo, hi, gap, false);
    } else {
      project_chain(y, lo, hi, gap, false);
    }
    for (int j = 1; j < K; ++j)
      t[(i0 + j) % m] = y[j - 1] - (i0 + j >= m ? L : 0.0);
  }
}

class PlateauProblem {
public:
  PlateauProblem(DiscMap &map, const SolveOptions &opt) : map_(map), opt_(opt) {
    const int V = map.mesh().vertex_count(), nb = map.boundary_count();
    ni_ = V - nb;
    dim_ = map.dim();
    for (int i = 0; i < nb; ++i)
      if (opt.optimize_params && i != map.anchors[0] && i != map.anchors[1] &&
          i != map.anchors[2])
        free_params_.push_back(i);
    gap_ = opt.gap > 0 ? opt.gap : map.curve->length() * 1e-4 / nb;
    max_gap_ = opt.max_gap_factor > 0 ? opt.max_gap_factor * map.curve->length() / nb : 0.0;
  }

  int size() const { return ni_ * dim_ + static_cast<int>(free_params_.size()); }
  double gap() const { return gap_; }

  Vec get() const {
    Vec x(size());
    for (int v = 0; v < ni_; ++v)
      x.segment(v * dim_, dim_) = map_.positions.col(v);
    for (std::size_t k = 0; k < free_params_.size(); ++k)
      x(ni_ * dim_ + k) = map_.params[free_params_[k]];
    return x;
  }

  void set(const Vec &x) {
    for (int v = 0; v < ni_; ++v)
      map_.positions.col(v) = x.segment(v * dim_, dim_);
    for (std::size_t k = 0; k < free_params_.size(); ++k)
      map_.params[free_params_[k]] = x(ni_ * dim_ + k);
    map_.sync_boundary();
  }

  Vec project(const Vec &x) const {
    Vec y = x;
    if (free_params_.empty())
      return y;
    std::vector<double> t = map_.params;
    for (std::size_t k = 0; k < free_params_.size(); ++k)
      t[free_params_[k]] = x(ni_ * dim_ + k);
    project_params(t, map_.anchors, map_.curve->length(), gap_, max_gap_);
    for (std::size_t k = 0; k < free_params_.size(); ++k)
      y(ni_ * dim_ + k) = t[free_params_[k]];
    return y;
  }

  /// Energy and gradient at x; +inf if a vertex leaves the safe ball.
  double evaluate(const Vec &x, Vec &g) {
    set(x);
    Mat grad;
    double e;
    try {
      e = energy_gradient(map_, grad);
    } catch (const DomainError &) {
      return std::numeric_limits<double>::infinity();
    }
    g.resize(size());
    for (int v = 0; v < ni_; ++v)
      g.segment(v * dim_, dim_) = grad.col(v);
    if (!free_params_.empty()) {
      const auto gp = param_gradient(map_, grad);
      for (std::size_t k = 0; k < free_params_.size(); ++k)
        g(ni_ * dim_ + k) = gp[free_params_[k]];
    }
    return e;
  }

  /// Fraction of free parameter gaps sitting at the lower bound.
  double active_gap_fraction() const {
    const int m = static_cast<int>(map_.params.size());
    int active = 0;
    for (int i = 0; i < m; ++i) {
      const double next = i + 1 < m ? map_.params[i + 1] : map_.params[0] + map_.curve->length();
      if (next - map_.params[i] <= gap_ * (1 + 1e-9))
        ++active;
    }
    return static_cast<double>(active) / m;
  }

private:
  DiscMap &map_;
  SolveOptions opt_;
  int ni_ = 0, dim_ = 0;
  std::vector<int> free_params_;
  double gap_ = 0.0;
  double max_gap_ = 0.0;
};

} // namespace detail

/// Minimizes the Dirichlet energy starting from `start` (a prior map on the
/// same geometry, curve and metric, or the result of initial_map).
inline PlateauResult solve_plateau(DiscMap start, const SolveOptions &opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  require(start.curve->dim() == start.dim(), "solve_plateau: dimension mismatch");
  for (const auto &p : start.curve->samples())
    require(p.norm() < start.metric->safe_radius(),
            "solve_plateau: boundary curve leaves the safe ball");
  PlateauResult res{std::move(start)};
  detail::PlateauProblem prob(res.map, opt);
  {
    // make the starting parameters feasible
    Vec x = prob.project(prob.get());
    prob.set(x);
  }
  Vec x = prob.get(), g;
  double f = prob.evaluate(x, g);
  if (!std::isfinite(f))
    throw DomainError("solve_plateau: starting map leaves the safe ball");

  std::deque<Vec> S, Y;
  std::deque<double> rho;
  std::deque<double> history{f};
  auto pg_norm = [&](const Vec &xx, const Vec &gg) {
    return (xx - prob.project(xx - gg)).lpNorm<Eigen::Infinity>();
  };
  double pg = pg_norm(x, g);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (pg <= opt.gtol) {
      res.converged = true;
      break;
    }
    // two-loop recursion
    Vec d = -g;
    std::vector<double> alpha(S.size());
    for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
      alpha[k] = rho[k] * S[k].dot(d);
      d -= alpha[k] * Y[k];
    }
    if (!S.empty())
      d *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double beta = rho[k] * Y[k].dot(d);
      d += (alpha[k] - beta) * S[k];
    }
    if (g.dot(d) >= 0.0) {
      S.clear();
      Y.clear();
      rho.clear();
      d = -g;
    }
    double step = 1.0;
    if (S.empty())
      step = std::min(1.0, 1e-2 / std::max(1e-300, d.lpNorm<Eigen::Infinity>()));
    Vec xn, gn;
    double fn = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      xn = prob.project(x + step * d);
      fn = prob.evaluate(xn, gn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * g.dot(xn - x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!S.empty()) {
        // retry from steepest descent with fresh memory
        S.clear();
        Y.clear();
        rho.clear();
        prob.set(x);
        continue;
      }
      prob.set(x);
      res.line_search_failed = true;
      break;
    }
    const Vec s = xn - x, y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opt.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    x = xn;
    g = gn;
    f = fn;
    pg = pg_norm(x, g);
    history.push_back(f);
    if (static_cast<int>(history.size()) > opt.stall_window + 1)
      history.pop_front();
    if (static_cast<int>(history.size()) == opt.stall_window + 1 &&
        history.front() - f <= opt.ftol * std::abs(f)) {
      res.converged = true;
      ++it;
      break;
    }
  }
  prob.set(x);
  const auto rep = energy_report(res.map);
  res.energy = rep.energy;
  res.area = rep.area;
  res.conformality_defect = rep.defect;
  res.iterations = it;
  res.grad_norm = pg;
  res.concentration_suspected = prob.active_gap_fraction() > 0.1;
  res.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

/// Resamples u o phi on the reference mesh for a disc automorphism phi;
/// boundary parameters follow by interpolation in angle. Anchors keep their
/// boundary indices and take the new parameter values.
template <class Phi>
DiscMap reparametrize(const DiscMap &map, Phi &&phi) {
  DiscMap out = map;
  const auto &mesh = map.mesh();
  const int nb = map.boundary_count();
  const double L = map.curve->length();
  std::vector<double> t(nb);
  for (int i = 0; i < nb; ++i) {
    const Complex w = phi(std::polar(1.0, mesh.boundary_angle(i)));
    t[i] = map.param_at_angle(std::arg(w));
  }
  // unwrap into an increasing sequence starting at t[0]
  for (int i = 1; i < nb; ++i)
    while (t[i] <= t[i - 1])
      t[i] += L;
  out.params = t;
  for (int v = 0; v < mesh.vertex_count() - nb; ++v)
    out.positions.col(v) = map.eval(to_vec2(phi(to_complex(mesh.vertices[v]))));
  out.sync_boundary();
  return out;
}

struct RecenterResult {
  DiscMap map;
  Vec2 z_star{0.0, 0.0};
  double radius_before = 0.0; ///< geodesic radius of u(0) before
  double radius_after = 0.0;
  bool identity = true;
};

/// Pulls back by the automorphism sending 0 to the vertex z* whose image is
/// closest (in geodesic radius) to the origin.
inline RecenterResult recenter(const DiscMap &map) {
  const auto &mesh = map.mesh();
  int best = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double r = map.metric->geodesic_radius(map.positions.col(v));
    if (r < best_r) {
      best_r = r;
      best = v;
    }
  }
  if (mesh.is_boundary(best))
    throw DomainError("recenter: closest image point lies on the boundary ring; handle "
                      "boundary concentration first");
  RecenterResult res{map};
  res.z_star = mesh.vertices[best];
  res.radius_before = map.metric->geodesic_radius(map.positions.col(0));
  res.radius_after = best_r;
  if (best == 0)
    return res;
  res.identity = false;
  const Complex c = to_complex(res.z_star);
  res.map = reparametrize(map, [c](Complex z) { return disc_automorphism(c, z); });
  res.radius_after = map.metric->geodesic_radius(res.map.positions.col(0));
  return res;
}

} // namespace hplateau
