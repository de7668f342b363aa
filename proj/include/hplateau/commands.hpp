#pragma once

// Command pipelines behind the CLI. Each one writes its artifacts plus
// config.json (the echo-back) and manifest.json into a run directory.

#include "hplateau/io.hpp"

#include <iostream>
#include <random>

namespace hplateau {

struct CommandResult {
  std::filesystem::path run_dir;
  std::vector<ManifestEntry> manifest;
  int exit_code = 0;
};

namespace detail {

inline CheckResult at_most(double value, double tol, std::string detail = {}) {
  return {value <= tol, value, tol, std::move(detail)};
}

struct Pipeline {
  RunConfig cfg;
  std::shared_ptr<const ComparisonSolution> sol;
  std::shared_ptr<const BallModel> model;
  std::shared_ptr<const AmbientMetric> metric;

  explicit Pipeline(RunConfig c, bool need_model = true) : cfg(std::move(c)) {
    sol = std::make_shared<const ComparisonSolution>(
        solve_comparison(build_profile(cfg.profile), cfg.profile.s_max, cfg.profile.tol));
    if (need_model) {
      model = BallModel::build(sol);
      metric = build_metric(cfg, model);
    }
  }
};

inline void ode_checks(const Pipeline &p, std::map<std::string, CheckResult> &out) {
  const auto &sol = *p.sol;
  const double tol = p.cfg.verify.ode_tol;
  const auto growth = check_growth_ratios(sol);
  out["Fsao-i"] = at_most(1.0 - growth.min_sFprime_over_F, tol, "1 - min s F'/F");
  if (sol.profile.monotone_nonincreasing()) {
    const auto mono = check_G_over_sF(sol);
    out["Fsao-ii"] = at_most(mono.max_violation, tol, "largest increase of G/(sF)");
  }
  const double a = p.cfg.profile.a;
  const auto k0 = CurvatureProfile::hyperbolic(a);
  const auto sol0 = solve_comparison(k0, sol.s_max(), p.cfg.profile.tol);
  const auto C = ratio_constant_C(sol.profile, k0, sol.s_max());
  const auto rb = check_ratio_bound(sol, sol0, C);
  out["Fsao-iii"] = {rb.passes(tol), rb.max_log_ratio, C.value + tol,
                     C.window_only ? "max |ln F/F0| against C (window only)"
                                   : "max |ln F/F0| against C"};
  if (p.cfg.profile.kind == "constant") {
    const double smax = std::min(10.0, sol.s_max());
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double s = smax * i / 2000;
      worst = std::max(worst, std::abs(sol.eval_F(s) - std::sinh(a * s) / a));
    }
    out["ode-oracle"] = at_most(worst / std::cosh(a * smax), 1e-8,
                                "sup |F - sinh(a s)/a| / cosh(a s_max) on [0, 10]");
  }
}

inline void ball_checks(const Pipeline &p, std::map<std::string, CheckResult> &out) {
  const auto &model = *p.model;
  const auto pol = check_polar_identity(model, p.cfg.verify.polar_samples, p.cfg.seed + 1);
  out["BR"] = at_most(pol.max_rel_err, p.cfg.verify.polar_tol,
                      "pulled-back metric against dr^2 + F^2 dtheta^2");
  // metric sandwich m_lo lambda^2 |v|^2 <= |v|^2_x <= m_hi lambda^2 |v|^2
  std::mt19937_64 rng(p.cfg.seed + 2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double t_hi = model.g(p.cfg.schedule.back());
  const auto &metric = *p.metric;
  double worst = 0.0;
  for (int k = 0; k < 256; ++k) {
    Vec x(metric.dim()), v(metric.dim());
    for (int i = 0; i < metric.dim(); ++i) {
      x[i] = n(rng);
      v[i] = n(rng);
    }
    x = x.normalized() * t_hi * std::cbrt(u(rng));
    const double lam = model.conformal_factor(x.norm());
    const double q = std::pow(metric.length(x, v), 2) / (lam * lam * v.squaredNorm());
    worst = std::max({worst, metric.m_lo() - q, q - metric.m_hi()});
  }
  out["BM"] = at_most(std::max(0.0, worst), 1e-9, "excursion of |v|_x^2 / (lambda^2 |v|^2) outside [m_lo, m_hi]");
  if (p.cfg.profile.kind == "constant") {
    const double a = p.cfg.profile.a;
    double worst_g = 0.0, worst_l = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double r = std::min(10.0, model.s_max()) * i / 2000;
      worst_g = std::max(worst_g, std::abs(model.g(r) - std::tanh(a * r / 2)));
      const double t = 0.999 * i / 2000;
      const double exact = 2.0 / (a * (1 - t * t));
      worst_l = std::max(worst_l, std::abs(model.conformal_factor(t) - exact) / exact);
    }
    out["ball-oracle"] = at_most(std::max(worst_g / 1e-8, worst_l / 1e-6), 1.0,
                                 "max of sup|g - tanh(a r/2)|/1e-8 and sup rel err of f'/1e-6");
  }
}

// Checks on a single solved surface.
inline void surface_checks(const Pipeline &p, const DiscMap &map, double R,
                           std::map<std::string, CheckResult> &out,
                           MonotonicityReport *mono_out = nullptr) {
  const auto &v = p.cfg.verify;
  std::vector<double> radii;
  for (int j = 1; j * p.cfg.expansion.area_step < R; ++j)
    radii.push_back(j * p.cfg.expansion.area_step);
  if (radii.empty())
    radii.push_back(0.5 * R);
  const auto mono = monotonicity_report(map, *p.sol, radii, v.ratio_tol, p.cfg.expansion.clip);
  out["mon"] = at_most(mono.max_relative_decrease, mono.ratio_tol,
                       "largest relative decrease of area/G over " +
                           std::to_string(mono.rows.size()) + " radii");
  if (mono_out)
    *mono_out = mono;
  const auto osc = oscillation_check(map, Vec2(0, 0), v.oscillation_s);
  out["c0-ii"] = {osc.passes(), osc.max_distance, osc.bound,
                  "chord-length distance in D_s(0) against the oscillation bound"};
  const auto rs = radial_spherical_check(map, v.radial_tol);
  out["radial-spherical"] = at_most(rs.weighted_violation, rs.tol,
                                    "energy-weighted excess of radial over spherical energy");
  // Hessian comparison at seeded points inside the surface's reach
  std::mt19937_64 rng(p.cfg.seed + 3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const double t_hi = p.model->g(R);
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < v.hessian_samples; ++k) {
    Vec x(p.metric->dim()), w(p.metric->dim());
    for (int i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      w[i] = n(rng);
    }
    x = x.normalized() * t_hi * u(rng);
    w /= w.norm() * p.model->conformal_factor(x.norm());
    const auto h = hessian_spot_check(*p.metric, *p.sol, x, w);
    worst = std::max({worst, (h.bound_r - h.hess_r) / std::max(1.0, std::abs(h.bound_r)),
                      (h.bound_G - h.hess_G) / std::max(1.0, std::abs(h.bound_G))});
    ok = ok && h.pass(v.hessian_tol);
  }
  out["hes"] = {ok, std::max(0.0, worst), v.hessian_tol,
                "relative shortfall of Hess r and Hess G o r below their bounds"};
}

inline void write_common(const std::filesystem::path &dir, const RunConfig &cfg) {
  write_json(dir / "config.json", to_json(cfg));
}

inline CommandResult finish(const std::filesystem::path &dir,
                            const std::map<std::string, CheckResult> &checks) {
  CommandResult res;
  res.run_dir = dir;
  res.manifest = run_manifest(checks);
  write_json(dir / "manifest.json", to_json(res.manifest));
  return res;
}

} // namespace detail

inline CommandResult cmd_ode_check(const RunConfig &cfg, const std::filesystem::path &dir) {
  detail::write_common(dir, cfg);
  detail::Pipeline p(cfg, false);
  // the integrator grid is dense; keep about 4000 of its nodes
  CsvTable t({"s", "k", "F", "Fprime", "G"});
  const std::size_t n = p.sol->grid.size(), stride = std::max<std::size_t>(1, n / 4000);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; i += stride)
    keep.push_back(i);
  if (keep.back() != n - 1)
    keep.push_back(n - 1);
  for (std::size_t i : keep) {
    const double s = p.sol->grid[i];
    t.row({s, p.sol->profile(s), p.sol->F[i], p.sol->Fprime[i], p.sol->G[i]});
  }
  t.write(dir / "ode.csv");
  std::map<std::string, CheckResult> checks;
  detail::ode_checks(p, checks);
  return detail::finish(dir, checks);
}

inline CommandResult cmd_ball_model(const RunConfig &cfg, const std::filesystem::path &dir) {
  detail::write_common(dir, cfg);
  detail::Pipeline p(cfg);
  CsvTable g({"r", "g", "gprime"});
  const double rmax = std::min(10.0, p.model->s_max());
  for (int i = 0; i <= 1000; ++i) {
    const double r = rmax * i / 1000;
    g.row({r, p.model->g(r), r > 0 ? p.model->gprime(r) : p.model->gprime0()});
  }
  g.write(dir / "g.csv");
  CsvTable l({"t", "lambda"});
  for (int i = 0; i <= 1000; ++i) {
    const double t = 0.999 * i / 1000;
    l.row({t, p.model->conformal_factor(t)});
  }
  l.write(dir / "lambda.csv");
  std::map<std::string, CheckResult> checks;
  detail::ball_checks(p, checks);
  return detail::finish(dir, checks);
}

/// Solves one Plateau problem for Gamma_R with R the last schedule entry.
inline CommandResult cmd_plateau(const RunConfig &cfg, const std::filesystem::path &dir,
                                 std::ostream &log = std::cout) {
  detail::write_common(dir, cfg);
  detail::Pipeline p(cfg);
  const double R = cfg.schedule.back();
  const auto curve = build_curve(cfg);
  auto geo = make_geometry(cfg.level);
  auto res = solve_plateau(initial_map(geo, build_gamma_R(curve, *p.model, R), p.metric), cfg.solver);
  log << "plateau: R = " << R << ", energy " << res.energy << ", " << res.iterations
      << " iterations, " << res.seconds << " s\n";
  write_obj(dir / "surface.obj", res.map);
  double max_dev = 0.0;
  for (int v = 0; v < res.map.positions.cols(); ++v)
    for (int i = 2; i < res.map.dim(); ++i)
      max_dev = std::max(max_dev, std::abs(res.map.positions(i, v)));
  write_json(dir / "plateau.json",
             {{"R", R},
              {"curve", curve.name},
              {"level", cfg.level},
              {"energy", res.energy},
              {"area", res.area},
              {"conformality_defect", res.conformality_defect},
              {"defect_over_energy", res.conformality_defect / res.energy},
              {"max_offplane_deviation", max_dev},
              {"iterations", res.iterations},
              {"grad_norm", res.grad_norm},
              {"converged", res.converged},
              {"line_search_failed", res.line_search_failed},
              {"concentration_suspected", res.concentration_suspected}});
  CsvTable b({"index", "theta", "param", "x", "y", "z"});
  const auto &mesh = res.map.mesh();
  for (int i = 0; i < res.map.boundary_count(); ++i) {
    const auto x = res.map.positions.col(mesh.boundary_loop[i]);
    b.row({double(i), mesh.boundary_angle(i), res.map.params[i], x[0], x[1], x[2]});
  }
  b.write(dir / "boundary.csv");
  std::map<std::string, CheckResult> checks;
  MonotonicityReport mono;
  detail::surface_checks(p, res.map, R, checks, &mono);
  CsvTable m({"r", "area", "G", "ratio"});
  for (const auto &row : mono.rows)
    m.row({row.r, row.area, row.G, row.ratio});
  m.write(dir / "monotonicity.csv");
  for (const auto &w : mono.warnings)
    log << "warning: " << w << "\n";
  const auto cap = capacity_check(res.map, cfg.verify.capacity_rho, cfg.verify.capacity_tol);
  checks["c0-i"] = {cap.passes(), cap.energy, cap.bound * (1 + cap.tol),
                    "E(u, D_rho) against 8 a^-2 cap(D_rho, D)"};
  checks["converged"] = {res.converged, double(res.iterations), double(cfg.solver.max_iterations),
                         "iterations used; the solver stopped on gtol or the ftol stall window"};
  return detail::finish(dir, checks);
}

inline CommandResult cmd_expand(const RunConfig &cfg, const std::filesystem::path &dir,
                                std::ostream &log = std::cout) {
  detail::write_common(dir, cfg);
  detail::Pipeline p(cfg);
  const auto curve = build_curve(cfg);
  std::optional<DiscMap> last;
  double worst_cap = 0.0, cap_bound = 0.0;
  bool cap_ok = true;
  const auto led = run_expansion(
      curve, cfg.schedule, p.metric, cfg.expansion, [&](const LedgerEntry &e, const DiscMap &map) {
        write_obj(dir / ("surface_R" + r_label(e.R) + ".obj"), map);
        const auto cap = capacity_check(map, cfg.verify.capacity_rho, cfg.verify.capacity_tol);
        worst_cap = std::max(worst_cap, cap.energy);
        cap_bound = cap.bound * (1 + cap.tol);
        cap_ok = cap_ok && (!e.converged || cap.passes());
        log << "expand: R = " << e.R << ", energy " << e.energy << ", " << e.iterations
            << " iterations" << (e.concentration ? ", concentration" : "") << "\n";
        last = map;
      });
  write_json(dir / "ledger.json", to_json(led));

  CsvTable entries({"R", "energy", "euclidean_energy", "area", "area_b", "area_b_inside_rho",
                    "defect", "hitting_radius", "iterations", "converged", "recentered",
                    "hausdorff_symmetric"});
  CsvTable areas({"R", "s", "area", "bound", "ok"});
  for (const auto &e : led.entries) {
    entries.row({e.R, e.energy, e.euclidean_energy, e.area, e.area_b, e.area_b_inside_rho,
                 e.defect, e.hitting_radius, double(e.iterations), double(e.converged),
                 double(e.recentered), e.hausdorff.symmetric});
    for (const auto &a : e.area_table)
      areas.row({e.R, a.s, a.area, a.bound, double(a.ok)});
  }
  entries.write(dir / "entries.csv");
  areas.write(dir / "areas.csv");

  std::map<std::string, CheckResult> checks;
  detail::ode_checks(p, checks);
  detail::ball_checks(p, checks);
  detail::surface_checks(p, *last, cfg.schedule.back(), checks);
  for (const char *tag : {"mon", "c0-ii", "radial-spherical", "hes"})
    checks[tag].detail += " (last entry, R = " + r_label(cfg.schedule.back()) + ")";
  checks["c0-i"] = {cap_ok, worst_cap, cap_bound,
                    "largest E(u, D_rho) over converged entries against 8 a^-2 cap(D_rho, D)"};
  double worst_a = 0.0, worst_ten = 0.0;
  bool a_ok = true, ten_ok = true, conv = true;
  int max_it = 0;
  std::vector<double> R, b_late;
  std::vector<HausdorffSample> hd;
  std::vector<bool> conc;
  for (const auto &e : led.entries) {
    for (const auto &a : e.area_table)
      worst_a = std::max(worst_a, a.area / a.bound - 1.0);
    a_ok = a_ok && e.area_ok;
    ten_ok = ten_ok && e.ten_ok;
    worst_ten = std::max(worst_ten, (e.area_b - e.area_b_inside_rho) / e.ten_bound);
    conv = conv && e.converged;
    max_it = std::max(max_it, e.iterations);
    R.push_back(e.R);
    hd.push_back(e.hausdorff);
    conc.push_back(e.concentration.has_value());
    if (e.R >= cfg.verify.b_spread_from)
      b_late.push_back(e.area_b);
  }
  checks["a"] = {a_ok, worst_a, cfg.expansion.area_tol,
                 "largest area(M cap B_s)/(C L G0(s)) - 1 over all entries"};
  checks["ten"] = {ten_ok, worst_ten, 1.0, "largest outer b-area over its bound"};
  if (b_late.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(b_late.begin(), b_late.end());
    checks["areas-spread"] = detail::at_most((*hi - *lo) / *hi, cfg.verify.b_spread_tol,
                                             "spread of b-areas over entries with R >= " +
                                                 r_label(cfg.verify.b_spread_from));
  }
  checks["rho-empirical"] = detail::at_most(led.rho_hat, led.rho, "largest hitting radius");
  const auto ab = asymptotic_boundary_check(R, hd, conc, cfg.verify.hausdorff_tol);
  checks["asymptotic-boundary"] = {ab.trend_ok,
                                   ab.distances.empty() ? 0.0 : ab.distances.back().symmetric,
                                   cfg.verify.hausdorff_tol,
                                   "symmetric Hausdorff trend over the last three entries"};
  if (!led.blowup.events.empty())
    checks["des8-empirical"] = {led.blowup.cumulative_discarded > 0 && led.blowup.energy_decreasing,
                                led.blowup.cumulative_discarded, 0.0,
                                "discarded energy over the blow-up lineage, must be > 0"};
  checks["converged"] = {conv, double(max_it), double(cfg.solver.max_iterations),
                         "every entry converged; value is the largest iteration count"};
  return detail::finish(dir, checks);
}

inline CommandResult cmd_blowup_demo(const RunConfig &cfg, const std::filesystem::path &dir,
                                     std::ostream &log = std::cout) {
  detail::write_common(dir, cfg);
  detail::Pipeline p(cfg);
  const auto fx = concentration_fixture(p.metric, cfg.blowup.fixture_level, cfg.blowup.fixture_a,
                                        cfg.blowup.fixture_R);
  write_obj(dir / "fixture.obj", fx);
  std::map<std::string, CheckResult> checks;
  const auto ev = detect_concentration(fx, cfg.expansion.window, cfg.expansion.threshold);
  checks["concentration-detected"] = {ev.has_value(), ev ? ev->covered_fraction : 0.0,
                                      cfg.expansion.threshold,
                                      "largest window fraction of the boundary parameter"};
  BlowupLineage lin;
  if (ev) {
    BlowupOptions opt;
    opt.k = cfg.blowup.k;
    opt.delta_max_fraction = cfg.blowup.delta_max_fraction;
    opt.oversample = cfg.blowup.oversample;
    DiscMap out = fx;
    lin = run_blowup(fx, cfg.expansion.window, cfg.expansion.threshold, opt, cfg.blowup.max_depth,
                     &out);
    write_obj(dir / "rescaled.obj", out);
    for (const auto &r : lin.events)
      log << "blowup-demo: depth " << r.depth << ", discarded " << r.energy_discarded
          << ", coverage " << r.coverage_span_before << " -> " << r.coverage_span_after << "\n";
  }
  write_json(dir / "lineage.json", to_json(lin));
  if (!lin.events.empty()) {
    const auto &first = lin.events.front();
    checks["blowup-coverage"] = {first.coverage_span_after >= 0.5, first.coverage_span_after, 0.5,
                                 "coverage span after the first rescale, must be >= 0.5"};
    checks["des8-empirical"] = {lin.cumulative_discarded > 0 && lin.energy_decreasing,
                                lin.cumulative_discarded, 0.0,
                                "discarded energy over the lineage, must be > 0"};
  }
  return detail::finish(dir, checks);
}

/// Re-derives the ledger-level checks of a prior run directory from its
/// JSON files (no solving) and compares them with its manifest.
inline CommandResult cmd_verify(const std::filesystem::path &prior,
                                const std::filesystem::path &dir, std::ostream &log = std::cout) {
  const auto cfg = load_config(prior / "config.json");
  const auto manifest = manifest_from_json(read_json(prior / "manifest.json"));
  std::map<std::string, CheckResult> checks;
  ojson mismatches = ojson::array();
  auto stored = [&](const std::string &tag) -> const CheckResult * {
    for (const auto &e : manifest)
      if (e.tag == tag)
        return &e.result;
    return nullptr;
  };
  auto compare = [&](const std::string &tag, bool recomputed) {
    if (const auto *s = stored(tag); s && s->pass != recomputed)
      mismatches.push_back(tag);
  };
  if (std::filesystem::exists(prior / "ledger.json")) {
    const auto led = read_json(prior / "ledger.json");
    bool a_ok = true, ten_ok = true;
    double E0 = 0.0;
    for (const auto &e : led.at("entries")) {
      for (const auto &a : e.at("area_table"))
        a_ok = a_ok && a.at("area").get<double>() <=
                           a.at("bound").get<double>() * (1.0 + cfg.expansion.area_tol);
      ten_ok = ten_ok && e.at("area_b").get<double>() - e.at("area_b_inside_rho").get<double>() <=
                             e.at("ten_bound").get<double>();
      E0 = std::max(E0, e.at("euclidean_energy").get<double>());
    }
    compare("a", a_ok);
    compare("ten", ten_ok);
    if (E0 != led.at("E0").get<double>())
      mismatches.push_back("E0");
    const auto &lin = led.at("blowup_lineage");
    if (!lin.at("events").empty())
      compare("des8-empirical", lin.at("cumulative_discarded").get<double>() > 0 &&
                                    lin.at("energy_decreasing").get<bool>());
  }
  if (std::filesystem::exists(prior / "lineage.json")) {
    const auto lin = read_json(prior / "lineage.json");
    if (!lin.at("events").empty())
      compare("des8-empirical", lin.at("cumulative_discarded").get<double>() > 0 &&
                                    lin.at("energy_decreasing").get<bool>());
  }
  for (const auto &e : manifest)
    checks[e.tag] = e.result;
  const bool consistent = mismatches.empty();
  checks["manifest-consistent"] = {consistent, double(mismatches.size()), 0.0,
                                   "stored pass flags agree with flags re-derived from the ledger"};
  auto res = detail::finish(dir, checks);
  write_json(dir / "verify.json", {{"run", prior.filename().string()},
                                   {"consistent", consistent},
                                   {"mismatches", mismatches},
                                   {"all_pass", manifest_passes(res.manifest)}});
  for (const auto &e : res.manifest)
    if (!e.result.pass)
      log << "verify: " << e.tag << " FAILED (" << e.result.detail << ")\n";
  res.exit_code = manifest_passes(res.manifest) ? 0 : 1;
  return res;
}

} // namespace hplateau
