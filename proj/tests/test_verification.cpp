#include "hplateau/verification.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>

using namespace hplateau;

namespace {

const std::shared_ptr<const ComparisonSolution> &hyperbolic() {
  static const auto s = std::make_shared<const ComparisonSolution>(
      solve_comparison(CurvatureProfile::hyperbolic(1.0), 30.0, 1e-10));
  return s;
}

const std::shared_ptr<const BallModel> &model() {
  static const auto m = BallModel::build(hyperbolic());
  return m;
}

std::shared_ptr<const AmbientMetric> metric() {
  static const auto m = std::make_shared<const AmbientMetric>(model(), 3);
  return m;
}

Vec p3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

// Linear map z -> (A z, 0) on a fresh mesh; the boundary curve is its own image.
DiscMap linear_map(int level, double a11, double a12, double a21, double a22) {
  auto geo = make_geometry(level);
  const auto &mesh = geo->mesh;
  const int nb = mesh.boundary_count();
  std::vector<Vec> s;
  for (int i = 0; i < nb; ++i) {
    const Vec2 z = mesh.vertices[mesh.boundary_loop[i]];
    s.push_back(p3(a11 * z.x() + a12 * z.y(), a21 * z.x() + a22 * z.y(), 0.0));
  }
  DiscMap map{geo, std::make_shared<const BoundaryCurve>(s), metric(),
              Mat(3, mesh.vertex_count()), {}, {}};
  set_uniform_params(map);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec2 z = mesh.vertices[v];
    map.positions.col(v) = p3(a11 * z.x() + a12 * z.y(), a21 * z.x() + a22 * z.y(), 0.0);
  }
  map.sync_boundary();
  return map;
}

// Equatorial disc of geodesic radius R, parametrized conformally.
DiscMap flat_disc(int level, double R) {
  const double c = model()->g(R);
  return linear_map(level, c, 0, 0, c);
}

// Concentric radius of the disc D_rho(d) after a real disc automorphism, by bisection.
double concentric_equivalent(double rho, double d) {
  const double x1 = d - rho, x2 = d + rho;
  auto phi = [](double m, double x) { return (x - m) / (1 - m * x); };
  double lo = -0.999999, hi = 0.999999;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid, x1) + phi(mid, x2) > 0 ? lo : hi) = mid;
  }
  return phi(0.5 * (lo + hi), x2);
}

} // namespace

TEST(Monotonicity, TotallyGeodesicDiscIsEqualityCase) {
  const auto map = flat_disc(5, 3.0);
  const auto rep = monotonicity_report(map, *hyperbolic(), {0.5, 1.0, 1.5, 2.0, 2.5, 3.5});
  ASSERT_EQ(rep.rows.size(), 5u);
  for (const auto &row : rep.rows) {
    EXPECT_NEAR(row.ratio, 2 * kPi, 0.01 * 2 * kPi) << row.r;
    EXPECT_NEAR(row.G, std::cosh(row.r) - 1, 1e-8);
  }
  EXPECT_TRUE(rep.passes());
  ASSERT_EQ(rep.dropped.size(), 1u);
  EXPECT_EQ(rep.dropped[0], 3.5);
  EXPECT_EQ(rep.warnings.size(), 1u);
  EXPECT_THROW(monotonicity_report(map, *hyperbolic(), {-1.0}), DomainError);
}

TEST(Monotonicity, TinyDiscAgainstFlatComparison) {
  // near the origin the metric is 4 I; with k = 0 the comparison G is r^2 / 2
  const auto flat = solve_comparison(CurvatureProfile::constant(0.0), 1.0, 1e-10);
  const auto map = flat_disc(5, 0.02);
  const auto rep = monotonicity_report(map, flat, {0.002, 0.005, 0.01, 0.015});
  for (const auto &row : rep.rows) {
    EXPECT_NEAR(row.area / (row.r * row.r), kPi, 0.01 * kPi) << row.r;
    EXPECT_NEAR(row.ratio, 2 * kPi, 0.01 * 2 * kPi) << row.r;
  }
}

TEST(Monotonicity, DefaultToleranceScalesWithLevel) {
  EXPECT_EQ(default_ratio_tol(5), 1e-2);
  EXPECT_EQ(default_ratio_tol(7), 1e-2);
  EXPECT_EQ(default_ratio_tol(3), 4e-2);
}

TEST(Monotonicity, PropertySolvedPerturbedCurvesAreNonDecreasing) {
  std::mt19937_64 rng(61);
  auto geo = make_geometry(4);
  for (int trial = 0; trial < 3; ++trial) {
    const double R = hptest::uniform(rng, 1.5, 2.5);
    const double amp = hptest::uniform(rng, 0.05, 0.25);
    const int q = 2 + trial;
    std::vector<Vec> s;
    for (int i = 0; i < 256; ++i) {
      const double th = 2 * kPi * i / 256;
      const double z = amp * std::sin(q * th), rr = std::sqrt(1 - z * z);
      s.push_back(p3(rr * std::cos(th), rr * std::sin(th), z));
    }
    const auto c = make_asymptotic_curve("wobble", s);
    const auto res = solve_plateau(initial_map(geo, build_gamma_R(c, *model(), R), metric()));
    std::vector<double> radii;
    for (int k = 1; k <= 8; ++k)
      radii.push_back(R * k / 9.0);
    const auto rep = monotonicity_report(res.map, *hyperbolic(), radii);
    EXPECT_LE(rep.max_relative_decrease, 0.01) << trial;
  }
}

TEST(Hessian, SphericalDirectionMatchesCoth) {
  const double t = std::tanh(0.5); // geodesic radius 1
  const Vec x = p3(t, 0, 0);
  const double lam = model()->conformal_factor(t);
  const auto rep = hessian_spot_check(*metric(), *hyperbolic(), x, p3(0, 1.0 / lam, 0));
  EXPECT_NEAR(rep.r, 1.0, 1e-9);
  EXPECT_NEAR(rep.uu, 1.0, 1e-12);
  EXPECT_NEAR(rep.hess_r, 1.313035, 1e-5);
  EXPECT_NEAR(rep.bound_r, 1.0 / std::tanh(1.0), 1e-8);
  EXPECT_TRUE(rep.pass(1e-5));
}

TEST(Hessian, RadialDirection) {
  const double t = std::tanh(0.5);
  const double lam = model()->conformal_factor(t);
  const auto rep = hessian_spot_check(*metric(), *hyperbolic(), p3(t, 0, 0), p3(1.0 / lam, 0, 0));
  EXPECT_NEAR(rep.hess_r, 0.0, 1e-6);
  EXPECT_NEAR(rep.hess_G, std::cosh(1.0), 1e-6);
  EXPECT_NEAR(rep.bound_G, std::cosh(1.0), 1e-8);
  EXPECT_THROW(hessian_spot_check(*metric(), *hyperbolic(), p3(0, 0, 0), p3(1, 0, 0)), DomainError);
}

TEST(Hessian, PropertyBoundsHoldForRandomDirections) {
  std::mt19937_64 rng(62);
  for (int k = 0; k < 40; ++k) {
    const Vec x = hptest::random_point(rng, 3, 0.05, 0.9);
    Vec u = hptest::random_point(rng, 3, 0.1, 1.0);
    u /= model()->conformal_factor(x.norm());
    const auto rep = hessian_spot_check(*metric(), *hyperbolic(), x, u);
    // equality case of the comparison: hyperbolic space is the model itself
    EXPECT_NEAR(rep.hess_r, rep.bound_r, 1e-4 * std::max(1.0, rep.bound_r)) << k;
    EXPECT_TRUE(rep.pass(1e-5)) << k;
  }
}

TEST(RadialSpherical, ConformalDiscThroughOriginIsBalanced) {
  const auto rep = radial_spherical_check(flat_disc(4, 2.0));
  EXPECT_LT(rep.weighted_violation, 1e-3);
  EXPECT_TRUE(rep.passes());
}

TEST(RadialSpherical, RadialStretchIsFlagged) {
  // strong stretch along x: triangles near the x axis have radial energy
  // well above spherical energy
  const auto rep = radial_spherical_check(linear_map(4, 0.8, 0, 0, 0.1));
  EXPECT_GT(rep.max_violation, 0.5);
  EXPECT_GT(rep.weighted_violation, 0.02);
  EXPECT_FALSE(rep.passes());
}

TEST(Capacity, ClosedFormsAndConformalInvariance) {
  EXPECT_NEAR(disc_capacity(0.5), 4.5324, 1e-4);
  EXPECT_NEAR(disc_capacity(0.5), kPi / std::log(2.0), 1e-14);
  std::mt19937_64 rng(63);
  for (int k = 0; k < 50; ++k) {
    const double rho = hptest::uniform(rng, 0.01, 0.6);
    const double d = hptest::uniform(rng, 0.0, 0.98 - rho);
    const double oracle = kPi / -std::log(concentric_equivalent(rho, d));
    EXPECT_NEAR(disc_capacity(rho, d), oracle, 1e-9 * oracle) << rho << " " << d;
  }
  EXPECT_THROW(disc_capacity(0.6, 0.5), DomainError);
}

TEST(Capacity, EquatorialSolutionIsWithinBound) {
  const auto res = solve_plateau(initial_map(
      make_geometry(4), build_gamma_R(equator_curve(), *model(), 4.0), metric()));
  const auto rep = capacity_check(res.map);
  EXPECT_GT(rep.energy, 0.0);
  EXPECT_NEAR(rep.bound, 8 * kPi / std::log(2.0), 1e-9);
  EXPECT_TRUE(rep.passes());
}

TEST(Oscillation, FlatDiscStaysWithinBound) {
  const auto map = flat_disc(5, 3.0);
  const auto rep = oscillation_check(map, Vec2(0.1, -0.2), 0.04);
  EXPECT_GT(rep.samples, 0);
  EXPECT_NEAR(rep.constant, std::sqrt(8 / kPi) + 4 * std::sqrt(kPi / -std::log(0.04)), 1e-14);
  EXPECT_EQ(rep.bound_a_inv, rep.bound_a_inv2); // a = 1
  // the chord of a totally geodesic disc through z0 is nearly a geodesic;
  // compare with the closed-form hyperbolic distance of the farthest vertex
  EXPECT_GT(rep.max_distance, 0.0);
  EXPECT_TRUE(rep.passes());
  EXPECT_THROW(oscillation_check(map, Vec2(0.8, 0), 0.1), DomainError);
}

TEST(Oscillation, ChordLengthBoundsGeodesicDistance) {
  // on the flat disc the distance between images is the hyperbolic distance
  const auto map = flat_disc(5, 2.0);
  const Vec2 z0(0.0, 0.0);
  const auto rep = oscillation_check(map, z0, 0.09);
  const double c = model()->g(2.0);
  // farthest sampled vertex lies at |z| < 0.09, so Euclidean image radius < 0.09 c
  EXPECT_LE(rep.max_distance, 2 * std::atanh(0.09 * c) * (1 + 1e-3));
  EXPECT_GE(rep.max_distance, 2 * std::atanh(0.06 * c));
}

TEST(AsymptoticBoundary, TrendAndExclusion) {
  const std::vector<double> R{1, 2, 3, 4};
  std::vector<HausdorffSample> d{{0.2, 0.3}, {0.1, 0.2}, {0.05, 0.1}, {0.02, 0.05}};
  auto rep = asymptotic_boundary_check(R, d, {false, false, false, false}, 1e-3);
  EXPECT_TRUE(rep.trend_ok);
  d[3].symmetric = 0.4;
  rep = asymptotic_boundary_check(R, d, {false, false, false, false}, 1e-3);
  EXPECT_FALSE(rep.trend_ok);
  rep = asymptotic_boundary_check(R, d, {false, false, false, true}, 1e-3);
  EXPECT_TRUE(rep.trend_ok);
  ASSERT_EQ(rep.excluded.size(), 1u);
  EXPECT_EQ(rep.excluded[0], 4.0);
  EXPECT_THROW(asymptotic_boundary_check(R, d, {false}, 1e-3), DomainError);
}

TEST(AsymptoticBoundary, EquatorLedgerIsAligned) {
  ExpansionOptions opt;
  opt.level = 3;
  const auto led = run_expansion(equator_curve(), {1.0, 2.0, 3.0}, metric(), opt);
  std::vector<double> R;
  std::vector<HausdorffSample> d;
  std::vector<bool> conc;
  for (const auto &e : led.entries) {
    R.push_back(e.R);
    d.push_back(e.hausdorff);
    conc.push_back(e.concentration.has_value());
    // to mesh resolution: one boundary-vertex spacing
    EXPECT_LT(e.hausdorff.symmetric, 2 * kPi / make_geometry(3)->mesh.boundary_count());
  }
  EXPECT_TRUE(asymptotic_boundary_check(R, d, conc, 1e-3).trend_ok);
}

TEST(Manifest, OrderingFaultInjectionAndEmpty) {
  EXPECT_TRUE(run_manifest({}).empty());
  std::map<std::string, CheckResult> checks;
  for (const auto &t : manifest_tags())
    checks[t] = {true, 1.0, 1.0, ""};
  checks["zeta-extra"] = {true, 0.0, 0.0, ""};
  checks["alpha-extra"] = {true, 0.0, 0.0, ""};
  auto m = run_manifest(checks);
  ASSERT_EQ(m.size(), manifest_tags().size() + 2);
  for (std::size_t i = 0; i < manifest_tags().size(); ++i)
    EXPECT_EQ(m[i].tag, manifest_tags()[i]);
  EXPECT_EQ(m[m.size() - 2].tag, "alpha-extra");
  EXPECT_EQ(m.back().tag, "zeta-extra");
  EXPECT_TRUE(manifest_passes(m));
  // a broken tolerance fails exactly one entry
  const auto cap = capacity_check(flat_disc(3, 2.0), 0.5, 0.05);
  auto broken = cap;
  broken.bound = 0.5 * cap.energy;
  checks["c0-i"] = {broken.passes(), broken.energy, broken.tol, "fault"};
  m = run_manifest(checks);
  int failures = 0;
  for (const auto &e : m)
    failures += e.result.pass ? 0 : 1;
  EXPECT_EQ(failures, 1);
  EXPECT_FALSE(manifest_passes(m));
}
