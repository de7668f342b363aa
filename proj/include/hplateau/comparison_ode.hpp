#pragma once

// Comparison function F of a radial curvature profile k:
//   F'' + k F = 0,  F(0) = 0,  F'(0) = 1,   G(s) = int_0^s F.
// F is the norm of a normal Jacobi field in the rotationally symmetric model
// with radial curvature k. The growth, monotonicity and two-sided ratio
// estimates for F are exposed as checks over the sampled solution.

#include "hplateau/core.hpp"
#include "hplateau/curvature.hpp"
#include "hplateau/dopri5.hpp"
#include "hplateau/hermite.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

namespace hplateau {

struct ComparisonSolution {
  std::vector<double> grid; ///< strictly increasing, grid[0] = 0
  std::vector<double> F;
  std::vector<double> Fprime;
  std::vector<double> G;
  CurvatureProfile profile;
  double tol = 1e-6;

  double s_max() const { return grid.back(); }

  double eval_F(double s) const {
    check_range(s);
    const std::size_t i = locate_interval(grid, s);
    return hermite(grid[i], grid[i + 1], F[i], F[i + 1], Fprime[i],
                   Fprime[i + 1], s)
        .value;
  }

  double eval_Fprime(double s) const {
    check_range(s);
    const std::size_t i = locate_interval(grid, s);
    return hermite(grid[i], grid[i + 1], Fprime[i], Fprime[i + 1],
                   -profile(grid[i]) * F[i], -profile(grid[i + 1]) * F[i + 1], s)
        .value;
  }

  double eval_G(double s) const {
    check_range(s);
    const std::size_t i = locate_interval(grid, s);
    return hermite(grid[i], grid[i + 1], G[i], G[i + 1], F[i], F[i + 1], s).value;
  }

  /// Columns s, F, Fprime, G.
  void write_csv(std::ostream &os) const {
    os << "s,F,Fprime,G\n";
    os.precision(17);
    for (std::size_t i = 0; i < grid.size(); ++i)
      os << grid[i] << ',' << F[i] << ',' << Fprime[i] << ',' << G[i] << '\n';
  }

private:
  void check_range(double s) const {
    if (!(s >= 0.0 && s <= grid.back()))
      throw DomainError("comparison solution evaluated outside [0, s_max]");
  }
};

/// Integrates (F, F', G) with an adaptive Dormand–Prince 5(4) scheme. The
/// step is capped so that the cubic Hermite interpolant reproduces F'' = -kF
/// at interval midpoints to within tol * max(1, F).
inline ComparisonSolution solve_comparison(const CurvatureProfile &profile,
                                           double s_max, double tol) {
  require(s_max > 0.0, "solve_comparison: s_max must be positive");
  require(tol > 0.0 && tol <= 1e-4, "solve_comparison: tol must lie in (0, 1e-4]");
  profile.validate(s_max);

  const double kmax = std::max(1.0, profile.max_abs(s_max));
  Dopri5Options opt;
  opt.rtol = std::max(tol * 1e-4, 1e-13);
  opt.atol = opt.rtol;
  opt.h_init = std::min(1e-4, s_max / 16);
  opt.h_max = 0.5 * std::sqrt(24.0 * tol) / kmax;
  opt.breakpoints = profile.breakpoints(s_max);

  ComparisonSolution sol{{}, {}, {}, {}, profile, tol};
  auto rhs = [&profile](double s, const State<3> &y) -> State<3> {
    return {y[1], -profile(s) * y[0], y[0]};
  };
  integrate_dopri5<3>(rhs, State<3>{0.0, 1.0, 0.0}, 0.0, s_max, opt,
                      [&sol](double s, const State<3> &y, const State<3> &) {
                        sol.grid.push_back(s);
                        sol.F.push_back(y[0]);
                        sol.Fprime.push_back(y[1]);
                        sol.G.push_back(y[2]);
                      });
  return sol;
}

/// max over interval midpoints of |p''(m) + k(m) p(m)| / max(1, p(m)), with
/// p the Hermite interpolant of (F, F'); p''(m) = (F'_{i+1} - F'_i) / h.
inline double ode_residual(const ComparisonSolution &sol) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < sol.grid.size(); ++i) {
    const double h = sol.grid[i + 1] - sol.grid[i];
    const double m = sol.grid[i] + 0.5 * h;
    const double Fm = hermite(sol.grid[i], sol.grid[i + 1], sol.F[i],
                              sol.F[i + 1], sol.Fprime[i], sol.Fprime[i + 1], m)
                          .value;
    const double second = (sol.Fprime[i + 1] - sol.Fprime[i]) / h;
    worst = std::max(worst, std::abs(second + sol.profile(m) * Fm) /
                                std::max(1.0, Fm));
  }
  return worst;
}

struct GrowthReport {
  double min_sFprime_over_F = 1.0; ///< limit value 1 at s = 0 included
  double min_Fprime_over_F = std::numeric_limits<double>::infinity();
};

inline GrowthReport check_growth_ratios(const ComparisonSolution &sol) {
  GrowthReport rep;
  for (std::size_t i = 1; i < sol.grid.size(); ++i) {
    const double s = sol.grid[i];
    rep.min_sFprime_over_F =
        std::min(rep.min_sFprime_over_F, s * sol.Fprime[i] / sol.F[i]);
    rep.min_Fprime_over_F = std::min(rep.min_Fprime_over_F, sol.Fprime[i] / sol.F[i]);
  }
  return rep;
}

struct MonotoneRatioReport {
  double max_violation = 0.0;
  bool passes(double tol) const { return max_violation <= tol; }
};

/// Largest increase of G/(sF) between consecutive grid nodes (s > 0).
inline MonotoneRatioReport check_G_over_sF(const ComparisonSolution &sol) {
  if (!sol.profile.monotone_nonincreasing() ||
      !sol.profile.sampled_nonincreasing(sol.s_max()))
    throw DomainError("check_G_over_sF: profile is not non-increasing");
  MonotoneRatioReport rep{-std::numeric_limits<double>::infinity()};
  double prev = 0.5; // limit at s = 0
  for (std::size_t i = 1; i < sol.grid.size(); ++i) {
    const double q = sol.G[i] / (sol.grid[i] * sol.F[i]);
    rep.max_violation = std::max(rep.max_violation, q - prev);
    prev = q;
  }
  return rep;
}

struct RatioConstant {
  double value = 0.0;        ///< (pi/2) * int_0^{s_max} phi
  double s_max = 0.0;
  double phi_at_s_max = 0.0; ///< integrand at the truncation point
  double asserted_tail = 0.0;
  /// The integrand has not decayed by s_max and no tail bound was asserted,
  /// so the constant only covers [0, s_max].
  bool window_only = false;
};

/// C = (pi/2) int_0^{s_max} |k - k0| / sqrt(-k0) by adaptive Gauss–Kronrod,
/// split at profile breakpoints. If the caller asserts a bound on the
/// neglected tail it is added to the returned value.
inline RatioConstant ratio_constant_C(const CurvatureProfile &k,
                                      const CurvatureProfile &k0, double s_max,
                                      std::optional<double> asserted_tail = {}) {
  require(s_max > 0.0, "ratio_constant_C: s_max must be positive");
  for (double s : k0.probe_points(s_max))
    if (!(k0(s) < 0.0))
      throw DomainError("ratio_constant_C: background curvature k0 touches 0");
  require(k0.sampled_nonincreasing(s_max),
          "ratio_constant_C: background curvature k0 must be non-increasing");

  auto phi = [&](double s) { return std::abs(k(s) - k0(s)) / std::sqrt(-k0(s)); };
  std::vector<double> cuts{0.0};
  for (double b : k.breakpoints(s_max))
    cuts.push_back(b);
  for (double b : k0.breakpoints(s_max))
    cuts.push_back(b);
  cuts.push_back(s_max);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        phi, cuts[i], cuts[i + 1], 15, 1e-13);

  RatioConstant rc;
  rc.s_max = s_max;
  rc.phi_at_s_max = phi(s_max);
  rc.asserted_tail = asserted_tail.value_or(0.0);
  rc.value = 0.5 * kPi * integral + 0.5 * kPi * rc.asserted_tail;
  rc.window_only = !asserted_tail && rc.phi_at_s_max > 1e-8;
  return rc;
}

struct RatioBoundReport {
  double max_log_ratio = 0.0;
  double C = 0.0;
  bool window_only = false;
  bool passes(double tol) const { return max_log_ratio <= C + tol; }
};

/// max |ln(F/F0)| over the nodes s > 0 of solF that lie inside solF0's range.
inline RatioBoundReport check_ratio_bound(const ComparisonSolution &solF,
                                          const ComparisonSolution &solF0,
                                          const RatioConstant &C) {
  RatioBoundReport rep{0.0, C.value, C.window_only};
  for (std::size_t i = 1; i < solF.grid.size(); ++i) {
    const double s = solF.grid[i];
    if (s > solF0.s_max())
      break;
    const double F0 = solF0.eval_F(s);
    rep.max_log_ratio = std::max(rep.max_log_ratio, std::abs(std::log(solF.F[i] / F0)));
  }
  return rep;
}

} // namespace hplateau
