#pragma once

// Expanding-disc scheme: boundary curves Gamma_R = Exp(R gamma) for an
// asymptotic curve gamma on the unit sphere, solves along an R schedule with
// warm starts and recentering, per-entry area checks, boundary-energy
// concentration detection and the lune blow-up with its energy ledger.

#include "hplateau/ball_area.hpp"
#include "hplateau/courant_lebesgue.hpp"
#include "hplateau/lune_map.hpp"
#include "hplateau/plateau_solver.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <functional>
#include <istream>
#include <optional>

namespace hplateau {

/// Closed curve on the unit sphere, sampled; consecutive samples are joined
/// by great-circle arcs for the cone quadrature.
struct AsymptoticCurve {
  std::string name;
  std::vector<Vec> samples;

  int dim() const { return static_cast<int>(samples.front().size()); }
  /// Sphere arclength.
  double length() const {
    std::vector<double> parts;
    for (std::size_t i = 0; i < samples.size(); ++i)
      parts.push_back(arc(i));
    return pairwise_sum(parts);
  }
  /// Length of the chordal polyline through the samples.
  double chord_length() const {
    std::vector<double> parts;
    for (std::size_t i = 0; i < samples.size(); ++i)
      parts.push_back((samples[(i + 1) % samples.size()] - samples[i]).norm());
    return pairwise_sum(parts);
  }
  double arc(std::size_t i) const {
    const Vec &a = samples[i], &b = samples[(i + 1) % samples.size()];
    return 2.0 * std::asin(std::min(1.0, 0.5 * (b - a).norm()));
  }
};

inline AsymptoticCurve make_asymptotic_curve(std::string name, std::vector<Vec> samples) {
  require(samples.size() >= 3, "asymptotic curve: need at least 3 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double n = samples[i].norm();
    if (std::abs(n - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "asymptotic curve: sample " << i << " has norm " << n << ", not on the unit sphere";
      throw DomainError(os.str());
    }
    samples[i] /= n;
  }
  BoundaryCurve check(samples); // simplicity at sample resolution
  return {std::move(name), std::move(samples)};
}

inline AsymptoticCurve equator_curve(int n = 256) {
  std::vector<Vec> s;
  for (int i = 0; i < n; ++i) {
    Vec v(3);
    v << std::cos(2 * kPi * i / n), std::sin(2 * kPi * i / n), 0.0;
    s.push_back(v);
  }
  return make_asymptotic_curve("equator", std::move(s));
}

/// Circle of polar angle beta about the x3 axis, rotated by `tilt` about x1.
inline AsymptoticCurve tilted_circle_curve(int n = 256, double beta = kPi / 3, double tilt = 0.3) {
  std::vector<Vec> s;
  const double ct = std::cos(tilt), st = std::sin(tilt);
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n;
    const double x = std::sin(beta) * std::cos(th), y = std::sin(beta) * std::sin(th),
                 z = std::cos(beta);
    Vec v(3);
    v << x, ct * y - st * z, st * y + ct * z;
    s.push_back(v);
  }
  return make_asymptotic_curve("tilted-circle", std::move(s));
}

/// Radial projection of a (1, q) torus knot: the equator with latitude
/// oscillation amp * sin(q theta).
inline AsymptoticCurve torus_knot_curve(int n = 256, int q = 3, double amp = 0.3) {
  std::vector<Vec> s;
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n, psi = amp * std::sin(q * th);
    Vec v(3);
    v << std::cos(th) * std::cos(psi), std::sin(th) * std::cos(psi), std::sin(psi);
    s.push_back(v);
  }
  return make_asymptotic_curve("torus-knot-projection", std::move(s));
}

/// Samples as comma or whitespace separated rows; '#' starts a comment.
inline AsymptoticCurve read_curve_samples(std::istream &in, std::string name = "samples") {
  std::vector<Vec> s;
  std::string line;
  int dim = -1, lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos)
      line.erase(h);
    for (char &c : line)
      if (c == ',')
        c = ' ';
    std::istringstream row(line);
    std::vector<double> xs;
    double x;
    while (row >> x)
      xs.push_back(x);
    if (!row.eof())
      throw DomainError("curve samples: unparsable line " + std::to_string(lineno));
    if (xs.empty())
      continue;
    if (dim < 0)
      dim = static_cast<int>(xs.size());
    if (static_cast<int>(xs.size()) != dim || dim < 3)
      throw DomainError("curve samples: line " + std::to_string(lineno) +
                        " has the wrong number of coordinates");
    s.push_back(Eigen::Map<Vec>(xs.data(), dim));
  }
  return make_asymptotic_curve(std::move(name), std::move(s));
}

/// Gamma_R = g(R) gamma.
inline std::shared_ptr<const BoundaryCurve> build_gamma_R(const AsymptoticCurve &curve,
                                                          const BallModel &model, double R) {
  require(R > 0.0, "build_gamma_R: R must be positive");
  const double t = model.g(R);
  std::vector<Vec> s;
  for (const auto &p : curve.samples)
    s.push_back(t * p);
  return std::make_shared<const BoundaryCurve>(std::move(s));
}

struct ConeAreaReport {
  double R = 0.0;
  double cone_area = 0.0;
  double LG0 = 0.0;   ///< L G0(R)
  double lower = 0.0; ///< m_lo L G0(R)
  double upper = 0.0; ///< m_hi L G0(R)
};

/// Area of the geodesic cone {Exp(t gamma(s)) : 0 <= t <= R} by quadrature
/// in the ambient metric: Gauss-Legendre along each great-circle segment,
/// adaptive Gauss-Kronrod in t.
inline ConeAreaReport cone_area_check(const AsymptoticCurve &curve, const AmbientMetric &metric,
                                      double R) {
  require(R >= 0.0, "cone_area_check: R must be non-negative");
  require(curve.dim() == metric.dim(), "cone_area_check: dimension mismatch");
  const auto &model = metric.model();
  static constexpr std::array<double, 8> gx{-0.9602898564975363, -0.7966664774136267,
                                            -0.5255324099163290, -0.1834346424956498,
                                            0.1834346424956498,  0.5255324099163290,
                                            0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> gw{0.1012285362903763, 0.2223810344533745,
                                            0.3137066661054733, 0.3626837833783620,
                                            0.3626837833783620, 0.3137066661054733,
                                            0.2223810344533745, 0.1012285362903763};
  const int n = static_cast<int>(curve.samples.size()), dim = curve.dim();
  auto ring = [&](double t) {
    if (t <= 0.0)
      return 0.0;
    const double te = model.g(t), tp = model.gprime(t);
    const double lam = model.lambda(te).value;
    Mat B(dim, dim);
    std::vector<double> parts(n);
    for (int i = 0; i < n; ++i) {
      const Vec &a = curve.samples[i], &b = curve.samples[(i + 1) % n];
      const double th = curve.arc(i);
      // unit-speed great circle a -> b
      const Vec perp = (b - a.dot(b) * a).normalized();
      double acc = 0.0;
      for (int q = 0; q < 8; ++q) {
        const double s = 0.5 * th * (gx[q] + 1.0);
        const Vec gam = std::cos(s) * a + std::sin(s) * perp;
        const Vec dgam = -std::sin(s) * a + std::cos(s) * perp;
        const Vec x = te * gam, xs = te * dgam, xt = tp * gam;
        double g11, g12, g22;
        if (metric.euclidean_b()) {
          g11 = xs.squaredNorm();
          g12 = xs.dot(xt);
          g22 = xt.squaredNorm();
        } else {
          metric.b_form(x, B);
          g11 = xs.dot(B * xs);
          g12 = xs.dot(B * xt);
          g22 = xt.dot(B * xt);
        }
        acc += gw[q] * lam * lam * std::sqrt(std::max(0.0, g11 * g22 - g12 * g12));
      }
      parts[i] = 0.5 * th * acc;
    }
    return pairwise_sum(parts);
  };
  ConeAreaReport rep;
  rep.R = R;
  // lambda comes from a C1 Hermite table, so asking for much more than 1e-9
  // only buys subdivision
  if (R > 0.0)
    rep.cone_area =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(ring, 0.0, R, 10, 1e-9);
  rep.LG0 = curve.length() * model.solution().eval_G(R);
  rep.lower = metric.m_lo() * rep.LG0;
  rep.upper = metric.m_hi() * rep.LG0;
  return rep;
}

// ---------------------------------------------------------------------------
// Concentration detection

struct ConcentrationEvent {
  double theta_star = 0.0;
  double covered_fraction = 0.0;
  std::string kind; ///< "jump" or "point-boundary"
};

/// Largest fraction of L gained by the boundary parametrization over an
/// angular window of width `window`; an event when it exceeds `threshold`.
inline std::optional<ConcentrationEvent>
detect_concentration(const DiscMap &map, double window = 0.25, double threshold = 0.9) {
  require(window > 0.0 && window < 2 * kPi, "detect_concentration: window must lie in (0, 2 pi)");
  const double L = map.curve->length();
  const int m = map.boundary_count(), centres = 4 * m;
  double best = -1.0, best_theta = 0.0;
  for (int c = 0; c < centres; ++c) {
    const double th = 2 * kPi * c / centres;
    double inc = map.param_at_angle(th + 0.5 * window) - map.param_at_angle(th - 0.5 * window);
    if (inc < 0.0)
      inc += L;
    if (inc > best) {
      best = inc;
      best_theta = th;
    }
  }
  const double frac = best / L;
  if (frac <= threshold)
    return std::nullopt;
  ConcentrationEvent ev{best_theta, frac, "jump"};
  // point-boundary: everything outside the window lands on a near point
  double diam_all = 0.0, diam_out = 0.0;
  const auto &loop = map.mesh().boundary_loop;
  std::vector<int> outside;
  for (int i = 0; i < m; ++i) {
    const double d = std::abs(std::remainder(map.mesh().boundary_angle(i) - best_theta, 2 * kPi));
    if (d > 0.5 * window)
      outside.push_back(loop[i]);
  }
  const auto &s = map.curve->samples();
  for (std::size_t i = 0; i < s.size(); i += std::max<std::size_t>(1, s.size() / 64))
    for (std::size_t j = 0; j < s.size(); j += std::max<std::size_t>(1, s.size() / 64))
      diam_all = std::max(diam_all, (s[i] - s[j]).norm());
  if (!outside.empty()) {
    const Vec c = map.positions.col(outside.front());
    for (int v : outside)
      diam_out = std::max(diam_out, 2.0 * (map.positions.col(v) - c).norm());
  }
  if (diam_out <= 1e-3 * diam_all)
    ev.kind = "point-boundary";
  return ev;
}

/// Smallest fraction of the circle whose angular window holds `mass` of the
/// boundary parameter increase.
inline double coverage_span(const DiscMap &map, double mass = 0.9) {
  const int m = map.boundary_count();
  const double L = map.curve->length();
  std::vector<double> t(2 * m + 1);
  for (int i = 0; i < 2 * m + 1; ++i)
    t[i] = map.params[i % m] + (i / m) * L;
  int best = m;
  int j = 0;
  for (int i = 0; i < m; ++i) {
    j = std::max(j, i);
    while (j < i + m && t[j] - t[i] < mass * L)
      ++j;
    best = std::min(best, j - i);
  }
  return static_cast<double>(best) / m;
}

// ---------------------------------------------------------------------------
// Blow-up

struct BlowupOptions {
  int k = 8;                        ///< Courant-Lebesgue s = 1/k
  double delta_max_fraction = 0.25; ///< cut arc must be shorter than this times L
  int oversample = 8;               ///< samples of the modified curve per boundary vertex
  int candidates = 48;
};

struct BlowupRecord {
  double R = 0.0; ///< schedule entry the event came from (0 outside an expansion)
  int depth = 0;
  std::string kind;
  double theta_star = 0.0;
  double covered_fraction = 0.0;
  double s = 0.0;
  double r = 0.0;
  double cut_arc_length = 0.0;
  double cl_bound = 0.0;
  double curve_length_before = 0.0;
  double curve_length_after = 0.0;
  double energy_total = 0.0;     ///< Euclidean energy before
  double energy_retained = 0.0;  ///< on D ∩ D_r(z0), the working energy after
  double energy_discarded = 0.0; ///< on D \ D_r(z0)
  double energy_rescaled = 0.0;  ///< Euclidean energy of the resampled map
  double coverage_span_before = 0.0;
  double coverage_span_after = 0.0;
};

struct BlowupResult {
  DiscMap map;
  BlowupRecord record;
};

/// Rescales u near the concentration point: u o T with T the conformal map of
/// D onto the lune D ∩ D_r(z0), z0 = e^{i theta*}, r from the Courant-Lebesgue
/// search with s = 1/k; three-point normalized on the modified curve
/// (retained arc of Gamma plus the image of the cut circle).
inline BlowupResult blowup_rescale(const DiscMap &map, const ConcentrationEvent &event,
                                   const BlowupOptions &opt = {}, int depth = 1) {
  require(opt.k >= 2, "blowup_rescale: k must be at least 2");
  BlowupRecord rec;
  rec.depth = depth;
  rec.kind = event.kind;
  rec.theta_star = event.theta_star;
  rec.covered_fraction = event.covered_fraction;
  rec.s = 1.0 / opt.k;
  rec.curve_length_before = map.curve->length();
  rec.coverage_span_before = coverage_span(map);

  const Complex z0 = std::polar(1.0, event.theta_star);
  const auto cl = courant_lebesgue_radius(map, to_vec2(z0), rec.s, LengthMetric::euclidean,
                                          opt.candidates);
  rec.r = cl.r;
  rec.cut_arc_length = cl.arc_length;
  rec.cl_bound = cl.bound;
  if (cl.arc_length > opt.delta_max_fraction * rec.curve_length_before) {
    std::ostringstream os;
    os << "blowup_rescale: cut arc length " << cl.arc_length << " exceeds delta_max "
       << opt.delta_max_fraction * rec.curve_length_before;
    throw DomainError(os.str());
  }

  std::vector<double> te, tee;
  energy_report(map, &te, &tee);
  rec.energy_total = pairwise_sum(tee);
  rec.energy_retained = subdomain_energy(map, to_vec2(z0), cl.r, tee);
  rec.energy_discarded = rec.energy_total - rec.energy_retained;

  const LuneMap lune(cl.r);
  auto T0 = [&](Complex zeta) { return -z0 * lune.forward(zeta); };

  // modified curve: u along the lune boundary
  const int M = opt.oversample * map.boundary_count();
  std::vector<Vec> pts(M);
  for (int j = 0; j < M; ++j)
    pts[j] = map.eval(to_vec2(T0(std::polar(1.0, 2 * kPi * j / M))));
  double scale = 0.0;
  for (const auto &p : pts)
    scale = std::max(scale, p.norm());
  std::vector<double> cum(M + 1, 0.0);
  std::vector<Vec> kept;
  for (int j = 0; j < M; ++j) {
    const double step = (pts[(j + 1) % M] - pts[j]).norm();
    cum[j + 1] = cum[j] + (step > 1e-14 * scale ? step : 0.0);
    if (j == 0 || cum[j] > cum[j - 1])
      kept.push_back(pts[j]);
  }
  // knots of `kept` equal cum at kept indices; a zero closing step means the
  // last kept sample duplicates the first
  if (kept.size() > 1 && (kept.back() - kept.front()).norm() <= 1e-14 * scale)
    kept.pop_back();
  auto curve = std::make_shared<const BoundaryCurve>(kept, false);
  const double Lt = curve->length();
  rec.curve_length_after = Lt;
  auto param_of = [&](double psi) {
    double u = std::fmod(psi, 2 * kPi);
    if (u < 0)
      u += 2 * kPi;
    const double pos = u / (2 * kPi) * M;
    const int i = std::min(static_cast<int>(pos), M - 1);
    const double f = pos - i;
    return std::min(Lt, (1 - f) * cum[i] + f * cum[i + 1]);
  };
  auto angle_of = [&](double target) {
    const int i = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
    const int ii = std::clamp(i, 0, M - 1);
    const double span = cum[ii + 1] - cum[ii];
    const double f = span > 0 ? (target - cum[ii]) / span : 0.0;
    return 2 * kPi * (ii + f) / M;
  };
  const ThreePointAutomorphism phi(
      {Complex(1, 0), std::polar(1.0, 2 * kPi / 3), std::polar(1.0, 4 * kPi / 3)},
      {Complex(1, 0), std::polar(1.0, angle_of(Lt / 3)), std::polar(1.0, angle_of(2 * Lt / 3))});

  DiscMap out{map.geometry, curve, map.metric, Mat(map.dim(), map.mesh().vertex_count()), {}, {}};
  set_uniform_params(out);
  const auto &mesh = map.mesh();
  const int m = mesh.boundary_count();
  for (int i = 0; i < m; ++i)
    out.params[i] = param_of(std::arg(phi(std::polar(1.0, mesh.boundary_angle(i)))));
  out.params[0] = 0.0;
  out.params[out.anchors[1]] = Lt / 3;
  out.params[out.anchors[2]] = 2 * Lt / 3;
  for (int i = 1; i < m; ++i)
    while (out.params[i] < out.params[i - 1])
      out.params[i] += Lt;
  for (int v = 0; v < mesh.vertex_count() - m; ++v)
    out.positions.col(v) = map.eval(to_vec2(T0(phi(to_complex(mesh.vertices[v])))));
  out.sync_boundary();

  rec.energy_rescaled = energy_report(out).euclidean_energy;
  rec.coverage_span_after = coverage_span(out);
  return {std::move(out), rec};
}

struct BlowupLineage {
  std::vector<BlowupRecord> events;
  double cumulative_discarded = 0.0;
  bool energy_decreasing = true; ///< every round strictly lowers the working energy
};

/// Repeated detect / rescale up to `max_depth` rounds.
inline BlowupLineage run_blowup(DiscMap map, double window, double threshold,
                                const BlowupOptions &opt, int max_depth = 3,
                                DiscMap *final_map = nullptr) {
  BlowupLineage lin;
  for (int d = 1; d <= max_depth; ++d) {
    const auto ev = detect_concentration(map, window, threshold);
    if (!ev)
      break;
    auto res = blowup_rescale(map, *ev, opt, d);
    lin.cumulative_discarded += res.record.energy_discarded;
    if (!(res.record.energy_retained < res.record.energy_total))
      lin.energy_decreasing = false;
    lin.events.push_back(res.record);
    map = std::move(res.map);
  }
  if (final_map)
    *final_map = std::move(map);
  return lin;
}

/// u(z) = g(R) M_a(z) onto the equatorial disc, M_a(z) = (z + a)/(1 + a z):
/// the boundary parametrization piles up near theta = 0 as a -> -1.
inline DiscMap concentration_fixture(std::shared_ptr<const AmbientMetric> metric, int level = 7,
                                     double a = -0.985, double R = 2.0) {
  require(std::abs(a) < 1.0, "concentration_fixture: |a| must be < 1");
  auto geo = make_geometry(level);
  const int m = geo->mesh.boundary_count(), n = 4 * m;
  const double c = metric->model().g(R);
  std::vector<Vec> s;
  for (int i = 0; i < n; ++i) {
    Vec v = Vec::Zero(metric->dim());
    v(0) = c * std::cos(2 * kPi * i / n);
    v(1) = c * std::sin(2 * kPi * i / n);
    s.push_back(v);
  }
  auto curve = std::make_shared<const BoundaryCurve>(s);
  DiscMap map{geo, curve, metric, Mat::Zero(metric->dim(), geo->mesh.vertex_count()), {}, {}};
  set_uniform_params(map);
  const double seg = curve->knots()[1];
  auto moebius = [a](Complex z) { return (z + a) / (1.0 + a * z); };
  for (int i = 0; i < m; ++i) {
    double ang = std::arg(moebius(std::polar(1.0, geo->mesh.boundary_angle(i))));
    if (ang < 0)
      ang += 2 * kPi;
    map.params[i] = ang / (2 * kPi) * n * seg;
  }
  for (int i = 1; i < m; ++i)
    while (map.params[i] <= map.params[i - 1])
      map.params[i] += curve->length();
  for (int v = 0; v < geo->mesh.vertex_count() - m; ++v) {
    const Complex w = c * moebius(to_complex(geo->mesh.vertices[v]));
    map.positions(0, v) = w.real();
    map.positions(1, v) = w.imag();
  }
  map.sync_boundary();
  return map;
}

// ---------------------------------------------------------------------------
// Modified-curve area threshold

struct ModifiedCurveReport {
  double a0 = 0.0;       ///< min observed Euclidean area
  double baseline = 0.0; ///< isoperimetric floor of the unmodified family
  double floor = 0.0;    ///< baseline - (eps + delta)^2
  bool pass = false;
};

inline ModifiedCurveReport modified_curve_threshold(const std::vector<double> &euclidean_areas,
                                                    double baseline, double eps, double delta,
                                                    double tol = 0.0) {
  require(!euclidean_areas.empty(), "modified_curve_threshold: no areas");
  require(eps >= 0.0 && delta >= 0.0, "modified_curve_threshold: eps and delta must be >= 0");
  ModifiedCurveReport rep;
  rep.a0 = *std::min_element(euclidean_areas.begin(), euclidean_areas.end());
  rep.baseline = baseline;
  rep.floor = baseline - (eps + delta) * (eps + delta);
  rep.pass = rep.a0 >= rep.floor - tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Asymptotic boundary evidence

struct HausdorffSample {
  double one_sided = 0.0; ///< far-ring directions to gamma
  double symmetric = 0.0;
};

/// Radial projections of the outermost interior ring compared with gamma.
inline HausdorffSample far_ring_hausdorff(const DiscMap &map, const AsymptoticCurve &curve) {
  const auto &mesh = map.mesh();
  const int j = std::max(0, mesh.rings - 1);
  std::vector<Vec> dirs;
  for (int v = mesh.ring_start[j]; v < mesh.ring_start[j + 1]; ++v) {
    const Vec x = map.positions.col(v);
    if (x.norm() > 0)
      dirs.push_back(x / x.norm());
  }
  const auto &g = curve.samples;
  auto to_polyline = [&](const Vec &p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec &a = g[i], &b = g[(i + 1) % g.size()];
      const Vec ab = b - a;
      const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      best = std::min(best, (a + t * ab - p).norm());
    }
    return best;
  };
  HausdorffSample h;
  for (const auto &d : dirs)
    h.one_sided = std::max(h.one_sided, to_polyline(d));
  double back = 0.0;
  for (const auto &p : g) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto &d : dirs)
      best = std::min(best, (p - d).norm());
    back = std::max(back, best);
  }
  h.symmetric = std::max(h.one_sided, back);
  return h;
}

// ---------------------------------------------------------------------------
// Expansion run

struct ExpansionOptions {
  int level = 5;
  SolveOptions solve;
  double rho = 1.0;          ///< configured hitting radius for the b-area bound
  double area_step = 0.5;    ///< sampled s values: area_step, 2 area_step, ..., <= R
  double area_tol = 0.05;    ///< relative slack on area(M ∩ B_s) <= C L G0(s)
  double window = 0.25;
  double threshold = 0.9;
  bool recenter = true;
  ClipOptions clip;
  BlowupOptions blowup;
  int blowup_depth = 3;
};

struct AreaSample {
  double s = 0.0;
  double area = 0.0;
  double bound = 0.0; ///< C L G0(s)
  bool ok = false;
};

struct LedgerEntry {
  double R = 0.0;
  double energy = 0.0;
  double euclidean_energy = 0.0;
  double area = 0.0;
  double area_b = 0.0;
  double area_b_inside_rho = 0.0;
  double defect = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  bool recentered = false;
  Vec2 z_star{0.0, 0.0};
  double hitting_radius = 0.0;
  std::vector<AreaSample> area_table;
  bool area_ok = false;
  double ten_bound = 0.0; ///< 2 C L a^-1 g(rho)/F0(rho) for the b-area outside g(rho)
  bool ten_ok = false;
  bool rho_ok = false;
  HausdorffSample hausdorff;
  std::optional<ConcentrationEvent> concentration;
};

struct ExpansionLedger {
  std::string curve;
  double L = 0.0;
  double C = 1.0;
  double rho = 0.0;     ///< configured
  double rho_hat = 0.0; ///< empirical hitting radius (max over entries)
  double E0 = 0.0;      ///< running bound on the Euclidean energies
  std::vector<double> schedule;
  std::vector<LedgerEntry> entries;
  BlowupLineage blowup;
};

/// Solve along the schedule. `on_entry` (optional) sees each recorded map.
inline ExpansionLedger
run_expansion(const AsymptoticCurve &curve, const std::vector<double> &schedule,
              std::shared_ptr<const AmbientMetric> metric, const ExpansionOptions &opt = {},
              const std::function<void(const LedgerEntry &, const DiscMap &)> &on_entry = {}) {
  require(!schedule.empty(), "run_expansion: empty schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i)
    require(schedule[i] > 0.0 && (i == 0 || schedule[i] > schedule[i - 1]),
            "run_expansion: schedule must be positive and increasing");
  require(curve.dim() == metric->dim(), "run_expansion: dimension mismatch");
  const auto &model = metric->model();
  const auto &sol = model.solution();
  ExpansionLedger led;
  led.curve = curve.name;
  led.L = curve.length();
  led.C = metric->m_hi();
  led.rho = opt.rho;
  led.schedule = schedule;
  auto geo = make_geometry(opt.level);
  std::optional<DiscMap> prev;
  double prev_scale = 0.0;
  for (double R : schedule) {
    auto gamma = build_gamma_R(curve, model, R);
    const double scale = model.g(R);
    DiscMap start = [&] {
      if (!prev)
        return initial_map(geo, gamma, metric);
      // Gamma_R is a Euclidean dilation of the previous curve, so arclength
      // parameters and positions scale together
      DiscMap w = *prev;
      const double f = scale / prev_scale;
      w.curve = gamma;
      w.positions *= f;
      for (auto &t : w.params)
        t *= f;
      w.sync_boundary();
      return w;
    }();
    auto res = solve_plateau(std::move(start), opt.solve);
    LedgerEntry e;
    e.R = R;
    e.converged = res.converged;
    e.iterations = res.iterations;
    e.grad_norm = res.grad_norm;
    DiscMap map = std::move(res.map);
    if (opt.recenter) {
      try {
        auto rc = recenter(map);
        e.recentered = !rc.identity;
        e.z_star = rc.z_star;
        map = std::move(rc.map);
      } catch (const DomainError &) {
        e.recentered = false; // closest point on the boundary ring; concentration handles it
      }
    }
    const auto rep = energy_report(map);
    e.energy = rep.energy;
    e.euclidean_energy = rep.euclidean_energy;
    e.area = rep.area;
    e.area_b = rep.b_area;
    e.defect = rep.defect;
    e.hitting_radius = std::numeric_limits<double>::infinity();
    for (int v = 0; v < map.positions.cols(); ++v)
      e.hitting_radius = std::min(e.hitting_radius, metric->geodesic_radius(map.positions.col(v)));
    e.area_ok = true;
    for (int j = 1; j * opt.area_step <= R + 1e-12; ++j) {
      AreaSample a;
      a.s = j * opt.area_step;
      a.area = area_in_geodesic_ball(map, a.s, AreaKind::ambient, opt.clip);
      a.bound = led.C * led.L * sol.eval_G(a.s);
      a.ok = a.area <= a.bound * (1.0 + opt.area_tol);
      e.area_ok = e.area_ok && a.ok;
      e.area_table.push_back(a);
    }
    const double grho = model.g(opt.rho);
    e.area_b_inside_rho = area_in_ball(map, grho, AreaKind::b, opt.clip);
    e.ten_bound = 2.0 * led.C * led.L / model.a() * grho / sol.eval_F(opt.rho);
    e.ten_ok = e.area_b - e.area_b_inside_rho <= e.ten_bound;
    e.rho_ok = e.hitting_radius <= opt.rho;
    e.concentration = detect_concentration(map, opt.window, opt.threshold);
    if (e.concentration) {
      try {
        auto lin = run_blowup(map, opt.window, opt.threshold, opt.blowup, opt.blowup_depth);
        for (auto &ev : lin.events) {
          ev.R = R;
          led.blowup.events.push_back(ev);
        }
        led.blowup.cumulative_discarded += lin.cumulative_discarded;
        led.blowup.energy_decreasing = led.blowup.energy_decreasing && lin.energy_decreasing;
      } catch (const DomainError &) {
        // cut arc too long for the modified-curve regime; the event stays on the entry
      }
    }
    e.hausdorff = far_ring_hausdorff(map, curve);
    led.E0 = std::max(led.E0, e.euclidean_energy);
    led.rho_hat = std::max(led.rho_hat, e.hitting_radius);
    if (on_entry)
      on_entry(e, map);
    led.entries.push_back(std::move(e));
    prev = std::move(map);
    prev_scale = scale;
  }
  return led;
}

} // namespace hplateau
