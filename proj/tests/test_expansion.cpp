#include "hplateau/expansion.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace hplateau;

namespace {

const std::shared_ptr<const BallModel> &model() {
  static const auto m = BallModel::build(std::make_shared<const ComparisonSolution>(
      solve_comparison(CurvatureProfile::hyperbolic(1.0), 30.0, 1e-10)));
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

} // namespace

TEST(AsymptoticCurve, BuiltinsLieOnSphere) {
  for (const auto &c : {equator_curve(), tilted_circle_curve(), torus_knot_curve()}) {
    for (const auto &p : c.samples)
      EXPECT_NEAR(p.norm(), 1.0, 1e-12) << c.name;
    EXPECT_GT(c.length(), 0.0);
  }
  EXPECT_NEAR(equator_curve(512).length(), 2 * kPi, 1e-12);
  // great-circle polygon inscribed in the small circle of polar angle pi/3
  EXPECT_NEAR(tilted_circle_curve(512).length(),
              512 * 2 * std::asin(std::sin(kPi / 3) * std::sin(kPi / 512)), 1e-12);
}

TEST(AsymptoticCurve, ReadSamples) {
  std::istringstream in("# three points\n1,0,0\n0 1 0\n\n-1, 0, 0\n0,-1,0\n");
  const auto c = read_curve_samples(in);
  EXPECT_EQ(c.samples.size(), 4u);
  std::istringstream off("1,0,0\n0,2,0\n-1,0,0\n");
  EXPECT_THROW(read_curve_samples(off), DomainError);
  std::istringstream bad("1,0,0\n0,x,0\n-1,0,0\n");
  EXPECT_THROW(read_curve_samples(bad), DomainError);
  std::istringstream ragged("1,0,0\n0,1\n-1,0,0\n");
  EXPECT_THROW(read_curve_samples(ragged), DomainError);
}

TEST(GammaR, EquatorRadiusAndLengthScaling) {
  const auto eq = equator_curve();
  const auto g2 = build_gamma_R(eq, *model(), 2.0);
  for (const auto &p : g2->samples())
    EXPECT_NEAR(p.norm(), 0.761594, 1e-6);
  std::mt19937_64 rng(51);
  for (int k = 0; k < 10; ++k) {
    const double R = hptest::uniform(rng, 0.1, 12.0);
    const auto tc = tilted_circle_curve();
    EXPECT_NEAR(build_gamma_R(tc, *model(), R)->length() / tc.chord_length(), model()->g(R),
                1e-14);
  }
  // R -> infinity: samples approach the asymptotic curve
  const auto far = build_gamma_R(eq, *model(), 25.0);
  for (std::size_t i = 0; i < eq.samples.size(); ++i)
    EXPECT_LT((far->samples()[i] - eq.samples[i]).norm(), 1e-9);
  EXPECT_THROW(build_gamma_R(eq, *model(), 0.0), DomainError);
}

TEST(ConeArea, EqualityInRotationallySymmetricModel) {
  const auto eq = equator_curve();
  for (double R : {1.0, 2.0, 4.0}) {
    const auto rep = cone_area_check(eq, *metric(), R);
    const double oracle = 2 * kPi * (std::cosh(R) - 1.0);
    EXPECT_NEAR(rep.cone_area / oracle - 1.0, 0.0, 1e-4) << R;
    EXPECT_NEAR(rep.LG0 / oracle - 1.0, 0.0, 1e-4);
  }
  EXPECT_NEAR(cone_area_check(eq, *metric(), 2.0).cone_area, 17.3563, 1e-3);
  EXPECT_LT(cone_area_check(eq, *metric(), 1e-4).cone_area, 1e-7);
}

TEST(ConeArea, PropertySandwichUnderPerturbation) {
  for (const char *name : {"diagonal-bump", "rotation-shear"}) {
    AmbientMetric pert(model(), 3, make_perturbation(name, 3));
    for (const auto &c : {tilted_circle_curve(128), torus_knot_curve(128)}) {
      for (double R : {0.5, 1.5, 3.0}) {
        const auto rep = cone_area_check(c, pert, R);
        EXPECT_GE(rep.cone_area, rep.lower * (1 - 1e-6)) << name << " " << c.name << " " << R;
        EXPECT_LE(rep.cone_area, rep.upper * (1 + 1e-6)) << name << " " << c.name << " " << R;
      }
    }
  }
}

TEST(Concentration, UniformParametrizationHasNoEvent) {
  auto geo = make_geometry(4);
  const auto map = initial_map(geo, build_gamma_R(equator_curve(), *model(), 2.0), metric());
  EXPECT_FALSE(detect_concentration(map).has_value());
  EXPECT_NEAR(coverage_span(map), 0.9, 1.0 / map.boundary_count() + 1e-12);
}

TEST(Concentration, SmoothedStepFiresAtPi) {
  auto geo = make_geometry(6);
  auto map = initial_map(geo, build_gamma_R(equator_curve(), *model(), 2.0), metric());
  const double L = map.curve->length();
  const int m = map.boundary_count();
  // phi = small linear drift plus a step of height (1 - eps) L smoothed over 0.01 at pi
  const double eps = 0.002;
  for (int i = 0; i < m; ++i) {
    const double th = geo->mesh.boundary_angle(i);
    map.params[i] = L * (eps * th / (2 * kPi) + (1 - eps) * 0.5 * (1 + std::tanh((th - kPi) / 0.01)));
  }
  map.sync_boundary();
  const auto ev = detect_concentration(map);
  ASSERT_TRUE(ev.has_value());
  EXPECT_NEAR(ev->theta_star, kPi, 0.05);
  EXPECT_GT(ev->covered_fraction, 0.99);
  EXPECT_EQ(ev->kind, "jump");
}

TEST(Concentration, CollapsedBoundaryIsPointBoundary) {
  auto geo = make_geometry(4);
  auto map = initial_map(geo, build_gamma_R(equator_curve(1024), *model(), 2.0), metric());
  const double L = map.curve->length();
  const int m = map.boundary_count();
  // all but a tiny window around theta = 0 maps into a stretch of 1e-5 L
  for (int i = 0; i < m; ++i) {
    const double th = geo->mesh.boundary_angle(i);
    const double u = std::min(1.0, th / 0.1);
    map.params[i] = L * (1 - 1e-5) * u + 1e-5 * L * th / (2 * kPi);
  }
  map.sync_boundary();
  const auto ev = detect_concentration(map);
  ASSERT_TRUE(ev.has_value());
  EXPECT_EQ(ev->kind, "point-boundary");
}

TEST(Blowup, FixtureRescalesAndDiscardsEnergy) {
  const auto fx = concentration_fixture(metric(), 5);
  const auto ev = detect_concentration(fx);
  ASSERT_TRUE(ev.has_value());
  EXPECT_NEAR(std::remainder(ev->theta_star, 2 * kPi), 0.0, 0.05);
  BlowupOptions opt;
  const auto res = blowup_rescale(fx, *ev, opt);
  const auto &r = res.record;
  EXPECT_GT(r.r, 1.0 / opt.k);
  EXPECT_LT(r.r, 1.0 / std::sqrt(double(opt.k)));
  EXPECT_GT(r.energy_discarded, 0.0);
  EXPECT_NEAR(r.energy_discarded + r.energy_retained, r.energy_total, 1e-12 * r.energy_total);
  EXPECT_LE(r.cut_arc_length, r.cl_bound);
  EXPECT_LE(r.cut_arc_length, std::sqrt(8 * kPi * r.energy_total / std::log(double(opt.k))));
  EXPECT_LT(r.coverage_span_before, 0.1);
  EXPECT_GE(r.coverage_span_after, 0.5);
  // the rescaled map is a valid problem instance
  const auto &out = res.map;
  const auto &loop = out.mesh().boundary_loop;
  for (int i = 0; i < out.boundary_count(); ++i)
    EXPECT_EQ((out.positions.col(loop[i]) - out.curve->point(out.params[i])).norm(), 0.0);
  EXPECT_EQ(out.params[out.anchors[0]], 0.0);
  EXPECT_NEAR(out.params[out.anchors[1]], out.curve->length() / 3, 1e-12);
  for (int i = 1; i < out.boundary_count(); ++i)
    EXPECT_GE(out.params[i], out.params[i - 1]);
}

TEST(Blowup, DeterministicAndRejectsLongCut) {
  const auto fx = concentration_fixture(metric(), 4);
  const auto ev = detect_concentration(fx);
  ASSERT_TRUE(ev.has_value());
  const auto a = blowup_rescale(fx, *ev), b = blowup_rescale(fx, *ev);
  EXPECT_EQ(a.record.energy_discarded, b.record.energy_discarded);
  EXPECT_EQ((a.map.positions - b.map.positions).cwiseAbs().maxCoeff(), 0.0);
  BlowupOptions tight;
  tight.delta_max_fraction = 1e-6;
  EXPECT_THROW(blowup_rescale(fx, *ev, tight), DomainError);
}

TEST(Blowup, LineageRecordsEnergyDrops) {
  const auto fx = concentration_fixture(metric(), 4);
  const auto lin = run_blowup(fx, 0.25, 0.9, {}, 3);
  ASSERT_GE(lin.events.size(), 1u);
  EXPECT_TRUE(lin.energy_decreasing);
  EXPECT_GT(lin.cumulative_discarded, 0.0);
  EXPECT_LE(lin.cumulative_discarded, lin.events.front().energy_total);
}

TEST(ModifiedCurve, ThresholdReport) {
  const auto base = modified_curve_threshold({1.0, 2.0}, 1.0, 0.0, 0.0);
  EXPECT_EQ(base.floor, base.baseline);
  EXPECT_TRUE(base.pass);
  const auto r = modified_curve_threshold({0.95}, 1.0, 0.1, 0.1);
  EXPECT_NEAR(r.floor, 0.96, 1e-15);
  EXPECT_FALSE(r.pass);
}

TEST(ModifiedCurve, FlatOracleAndNotchedCircle) {
  // near the origin the metric is close to 4 I, so the solution is nearly the flat disc
  const double rho = 0.02, w = 0.2, depth = 0.15 * rho;
  auto geo = make_geometry(4);
  const int n = 8 * geo->mesh.boundary_count();
  std::vector<Vec> circle, notched;
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n;
    circle.push_back(p3(rho * std::cos(th), rho * std::sin(th), 0.0));
    // smooth inward notch supported on |theta - pi| < w
    const double u = (th - kPi) / w;
    const double dent = std::abs(u) < 1 ? depth * std::pow(std::cos(0.5 * kPi * u), 2) : 0.0;
    notched.push_back(p3((rho - dent) * std::cos(th), (rho - dent) * std::sin(th), 0.0));
  }
  const double eps = 2 * w * rho; // length of the modified arc
  auto plain = solve_plateau(
      initial_map(geo, std::make_shared<const BoundaryCurve>(circle), metric()));
  auto dented = solve_plateau(
      initial_map(geo, std::make_shared<const BoundaryCurve>(notched), metric()));
  const double baseline = kPi * rho * rho;
  EXPECT_LT(euclidean_area(plain.map), baseline);
  EXPECT_NEAR(euclidean_area(plain.map), baseline, 0.01 * baseline);
  const auto rep =
      modified_curve_threshold({euclidean_area(dented.map)}, baseline, eps, 0.0, 0.01 * baseline);
  EXPECT_TRUE(rep.pass) << rep.a0 << " vs " << rep.floor;
  EXPECT_LT(rep.a0, euclidean_area(plain.map));
}

TEST(Expansion, EquatorEntriesAreFlatWithEqualityRatios) {
  ExpansionOptions opt;
  opt.level = 4;
  const auto led = run_expansion(equator_curve(), {1.0, 2.0, 3.0}, metric(), opt);
  ASSERT_EQ(led.entries.size(), 3u);
  double emax = 0.0;
  for (const auto &e : led.entries) {
    EXPECT_TRUE(e.converged) << e.R;
    EXPECT_TRUE(e.area_ok) << e.R;
    EXPECT_TRUE(e.ten_ok) << e.R;
    EXPECT_FALSE(e.concentration.has_value());
    EXPECT_FALSE(e.recentered);
    EXPECT_LT(e.hitting_radius, 1e-2);
    for (const auto &a : e.area_table)
      if (a.s <= e.R - 1.0)
        EXPECT_NEAR(a.area / model()->solution().eval_G(a.s), 2 * kPi, 0.03 * 2 * kPi) << a.s;
    EXPECT_LT(e.hausdorff.one_sided, 1e-3);
    emax = std::max(emax, e.euclidean_energy);
  }
  EXPECT_EQ(led.E0, emax);
}

TEST(Expansion, SingleEntrySchedule) {
  ExpansionOptions opt;
  opt.level = 3;
  const auto led = run_expansion(tilted_circle_curve(96), {2.0}, metric(), opt);
  ASSERT_EQ(led.entries.size(), 1u);
  EXPECT_EQ(led.E0, led.entries[0].euclidean_energy);
  EXPECT_THROW(run_expansion(tilted_circle_curve(96), {2.0, 1.0}, metric(), opt), DomainError);
}

TEST(Expansion, WarmStartAgreesWithColdStart) {
  ExpansionOptions opt;
  opt.level = 3;
  opt.recenter = false;
  opt.solve.gtol = 1e-10;
  opt.solve.ftol = 1e-15;
  const auto c = torus_knot_curve(96);
  const auto warm = run_expansion(c, {1.5, 2.0}, metric(), opt);
  const auto cold = run_expansion(c, {2.0}, metric(), opt);
  // the parameter valley is flat to roundoff, so both stop within solver
  // noise of each other rather than at the same point
  EXPECT_NEAR(warm.entries.back().energy, cold.entries.back().energy,
              1e-4 * cold.entries.back().energy);
}

TEST(Expansion, RotationalEquivariance) {
  ExpansionOptions opt;
  opt.level = 3;
  const auto c = torus_knot_curve(96);
  Eigen::Matrix3d Q = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -1).normalized()).toRotationMatrix();
  std::vector<Vec> rotated;
  for (const auto &p : c.samples)
    rotated.push_back(Q * p);
  const auto rc = make_asymptotic_curve("rotated", rotated);
  // the discrete functional itself is invariant
  auto geo = make_geometry(opt.level);
  const auto ma = initial_map(geo, build_gamma_R(c, *model(), 2.0), metric());
  const auto mb = initial_map(geo, build_gamma_R(rc, *model(), 2.0), metric());
  EXPECT_NEAR(dirichlet_energy(ma), dirichlet_energy(mb), 1e-12 * dirichlet_energy(ma));
  const auto a = run_expansion(c, {2.0}, metric(), opt);
  const auto b = run_expansion(rc, {2.0}, metric(), opt);
  EXPECT_NEAR(a.entries[0].energy, b.entries[0].energy, 1e-4 * a.entries[0].energy);
}
