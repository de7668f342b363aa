#include "hplateau/plateau_solver.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>

using namespace hplateau;

namespace {

const std::shared_ptr<const BallModel> &model() {
  static const auto m = BallModel::build(std::make_shared<const ComparisonSolution>(
      solve_comparison(CurvatureProfile::hyperbolic(1.0), 30.0, 1e-10)));
  return m;
}

Vec p3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

std::shared_ptr<const BoundaryCurve> planar_circle(double c, int m) {
  std::vector<Vec> s;
  for (int i = 0; i < m; ++i)
    s.push_back(p3(c * std::cos(2 * kPi * i / m), c * std::sin(2 * kPi * i / m), 0.0));
  return std::make_shared<const BoundaryCurve>(s);
}

// Saddle-like closed curve: a circle with a cos(2 theta) vertical wobble.
std::shared_ptr<const BoundaryCurve> saddle(double c, double h, int m) {
  std::vector<Vec> s;
  for (int i = 0; i < m; ++i) {
    const double th = 2 * kPi * i / m;
    s.push_back(p3(c * std::cos(th), c * std::sin(th), h * std::cos(2 * th)));
  }
  return std::make_shared<const BoundaryCurve>(s);
}

std::shared_ptr<const AmbientMetric> metric() {
  return std::make_shared<const AmbientMetric>(model(), 3);
}

void expect_feasible(const std::vector<double> &t, const std::array<int, 3> &anchors,
                     const std::vector<double> &anchor_values, double L, double gap) {
  const int m = static_cast<int>(t.size());
  for (int i = 0; i < m; ++i) {
    const double next = i + 1 < m ? t[i + 1] : t[0] + L;
    EXPECT_GE(next - t[i], gap * (1 - 1e-9)) << i;
  }
  for (int a = 0; a < 3; ++a)
    EXPECT_EQ(t[anchors[a]], anchor_values[a]);
}

} // namespace

TEST(HarmonicExtension, ReproducesLinearData) {
  auto geo = make_geometry(3);
  const auto &mesh = geo->mesh;
  const int nb = mesh.boundary_count();
  Mat bp(3, nb);
  for (int i = 0; i < nb; ++i) {
    const Vec2 z = mesh.vertices[mesh.boundary_loop[i]];
    bp.col(i) = p3(0.3 * z.x() - 0.1 * z.y() + 0.05, 0.2 * z.y(), 0.1 * z.x());
  }
  const Mat X = harmonic_extension(*geo, bp);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec2 z = mesh.vertices[v];
    EXPECT_NEAR((X.col(v) - p3(0.3 * z.x() - 0.1 * z.y() + 0.05, 0.2 * z.y(), 0.1 * z.x())).norm(),
                0.0, 1e-12);
  }
}

TEST(ProjectParams, PropertyFeasibleIdempotentAndNearest) {
  std::mt19937_64 rng(41);
  const int m = 48;
  const double L = 5.0, gap = 1e-3;
  const std::array<int, 3> anchors{0, 16, 32};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t(m);
    for (int i = 0; i < m; ++i)
      t[i] = L * i / m;
    const std::vector<double> av{t[0], t[16], t[32]};
    std::vector<double> x = t;
    for (int i = 0; i < m; ++i)
      if (i % 16 != 0)
        x[i] += hptest::uniform(rng, -1.0, 1.0);
    std::vector<double> p = x;
    detail::project_params(p, anchors, L, gap);
    expect_feasible(p, anchors, av, L, gap);
    std::vector<double> pp = p;
    detail::project_params(pp, anchors, L, gap);
    for (int i = 0; i < m; ++i)
      EXPECT_NEAR(pp[i], p[i], 1e-12);
    // any other feasible point is no closer to x
    auto dist2 = [&](const std::vector<double> &y) {
      double d = 0;
      for (int i = 0; i < m; ++i)
        d += (x[i] - y[i]) * (x[i] - y[i]);
      return d;
    };
    std::vector<double> y = t;
    for (int i = 0; i < m; ++i)
      if (i % 16 != 0)
        y[i] += hptest::uniform(rng, -0.03, 0.03);
    EXPECT_LE(dist2(p), dist2(y) + 1e-12);
  }
}

TEST(ProjectParams, PropertyTwoSidedGapBounds) {
  std::mt19937_64 rng(43);
  const int m = 48;
  const double L = 5.0, gap = 1e-3, max_gap = 3.0 * L / m;
  const std::array<int, 3> anchors{0, 16, 32};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> t(m);
    for (int i = 0; i < m; ++i)
      t[i] = L * i / m;
    const std::vector<double> av{t[0], t[16], t[32]};
    std::vector<double> x = t;
    for (int i = 0; i < m; ++i)
      if (i % 16 != 0)
        x[i] += hptest::uniform(rng, -1.5, 1.5);
    std::vector<double> p = x;
    detail::project_params(p, anchors, L, gap, max_gap);
    expect_feasible(p, anchors, av, L, gap);
    for (int i = 0; i < m; ++i) {
      const double next = i + 1 < m ? p[i + 1] : p[0] + L;
      EXPECT_LE(next - p[i], max_gap * (1 + 1e-9)) << i;
    }
    auto dist2 = [&](const std::vector<double> &y) {
      double d = 0;
      for (int i = 0; i < m; ++i)
        d += (x[i] - y[i]) * (x[i] - y[i]);
      return d;
    };
    for (int k = 0; k < 5; ++k) {
      std::vector<double> y = t;
      for (int i = 0; i < m; ++i)
        if (i % 16 != 0)
          y[i] += hptest::uniform(rng, -0.03, 0.03);
      EXPECT_LE(dist2(p), dist2(y) + 1e-9);
    }
  }
}

TEST(PlateauSolver, FlatDiscIsTotallyGeodesicMinimizer) {
  // the equatorial disc is totally geodesic; the conformal identity
  // parametrization is the minimizer and its energy is the hyperbolic area
  const double c = 0.5;
  auto geo = make_geometry(3);
  auto map = initial_map(geo, planar_circle(c, geo->mesh.boundary_count()), metric());
  const double e0 = dirichlet_energy(map);
  SolveOptions opt;
  opt.gtol = 1e-8;
  const auto res = solve_plateau(map, opt);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.energy, e0 + 1e-12);
  EXPECT_NEAR(res.energy, 4 * kPi * c * c / (1 - c * c), 0.02 * res.energy);
  EXPECT_LT(res.conformality_defect, 5e-3 * res.energy);
  EXPECT_LT(res.map.positions.row(2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PlateauSolver, SaddleConvergesWithConstraintsHeld) {
  auto geo = make_geometry(3);
  auto curve = saddle(0.6, 0.25, 96);
  auto start = initial_map(geo, curve, metric());
  const double e0 = dirichlet_energy(start);
  const auto res = solve_plateau(start);
  EXPECT_TRUE(res.converged) << "iterations " << res.iterations << " pg " << res.grad_norm;
  EXPECT_LT(res.energy, e0);
  EXPECT_GE(res.energy, res.area - 1e-12);
  // conformality improves as the parametrization relaxes
  EXPECT_LT(res.conformality_defect, energy_report(start).defect);
  const auto &loop = res.map.mesh().boundary_loop;
  for (int i = 0; i < res.map.boundary_count(); ++i)
    EXPECT_EQ((res.map.positions.col(loop[i]) - curve->point(res.map.params[i])).norm(), 0.0);
  const double L = curve->length();
  expect_feasible(res.map.params, res.map.anchors, {0.0, L / 3, 2 * L / 3}, L,
                  L * 1e-4 / res.map.boundary_count());
  EXPECT_FALSE(res.concentration_suspected);
}

TEST(PlateauSolver, DeterministicAcrossRuns) {
  auto geo = make_geometry(2);
  auto start = initial_map(geo, saddle(0.5, 0.2, 48), metric());
  const auto a = solve_plateau(start), b = solve_plateau(start);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(PlateauSolver, RejectsCurveOutsideSafeBall) {
  auto geo = make_geometry(1);
  std::vector<Vec> s;
  for (int i = 0; i < 12; ++i)
    s.push_back(p3(std::cos(2 * kPi * i / 12), std::sin(2 * kPi * i / 12), 0.0));
  auto curve = std::make_shared<const BoundaryCurve>(s);
  DiscMap map{geo, curve, metric(), Mat::Zero(3, geo->mesh.vertex_count()), {}, {}};
  set_uniform_params(map);
  map.sync_boundary();
  EXPECT_THROW(solve_plateau(map), DomainError);
}

TEST(Recenter, PullsImageOfCentreTowardOrigin) {
  // u = c * M(z) with M a disc automorphism moving 0 to -0.4
  const double c = 0.6;
  auto geo = make_geometry(4);
  const int m = geo->mesh.boundary_count();
  std::vector<Vec> s;
  for (int i = 0; i < 4 * m; ++i)
    s.push_back(p3(c * std::cos(2 * kPi * i / (4 * m)), c * std::sin(2 * kPi * i / (4 * m)), 0));
  auto curve = std::make_shared<const BoundaryCurve>(s);
  DiscMap map{geo, curve, metric(), Mat::Zero(3, geo->mesh.vertex_count()), {}, {}};
  set_uniform_params(map);
  const Complex shift(-0.4, 0.0);
  for (int v = 0; v < geo->mesh.vertex_count(); ++v) {
    const Complex w = c * disc_automorphism(shift, to_complex(geo->mesh.vertices[v]));
    map.positions.col(v) = p3(w.real(), w.imag(), 0);
  }
  const auto L = curve->length();
  for (int i = 0; i < m; ++i) {
    double a = std::arg(disc_automorphism(shift, std::polar(1.0, geo->mesh.boundary_angle(i))));
    if (a < 0)
      a += 2 * kPi;
    map.params[i] = L * a / (2 * kPi);
  }
  // unwrap so parameters increase from index 0
  for (int i = 1; i < m; ++i)
    while (map.params[i] <= map.params[i - 1])
      map.params[i] += L;
  map.sync_boundary();

  const auto res = recenter(map);
  EXPECT_FALSE(res.identity);
  EXPECT_NEAR(res.radius_before, 2 * std::atanh(0.4 * c), 1e-9);
  EXPECT_LT(res.radius_after, 0.1);
  EXPECT_LT(map.metric->geodesic_radius(res.map.positions.col(0)), 0.1);
  for (int i = 1; i < m; ++i)
    EXPECT_GT(res.map.params[i], res.map.params[i - 1]);
}

TEST(Recenter, IdentityWhenAlreadyCentred) {
  auto geo = make_geometry(2);
  auto map = initial_map(geo, planar_circle(0.5, geo->mesh.boundary_count()), metric());
  const auto res = recenter(map);
  EXPECT_TRUE(res.identity);
  EXPECT_NEAR(res.radius_after, 0.0, 1e-12);
}
