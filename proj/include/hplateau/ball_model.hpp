#pragma once

// Conformal unit-ball coordinates for a rotationally symmetric metric with
// radial curvature k <= -a^2 < 0. The radius transfer
//
//     g(r) = exp(-int_r^inf dt / F(t))
//
// sends geodesic radius r to Euclidean radius g(r) < 1, and with f = g^{-1}
// the metric reads f'(|x|)^2 dx^2. The infinite tail of the integral is
// bracketed with the cosh lower bound F(t) >= F(s_max) cosh(c (t - s_max)),
// so every value of g carries a certified relative error <= tail_bound().

#include "hplateau/comparison_ode.hpp"

#include <array>
#include <memory>
#include <ostream>
#include <sstream>

namespace hplateau {

struct BallModelOptions {
  /// Distance to the ideal boundary inside which the conformal factor is
  /// refused.
  double margin = 1e-6;
  /// Largest admissible half-width of the tail bracket.
  double tail_tol = 1e-10;
};

class BallModel {
public:
  static std::shared_ptr<const BallModel>
  build(std::shared_ptr<const ComparisonSolution> sol, BallModelOptions opt = {}) {
    require(sol != nullptr, "build_ball_model: null solution");
    const double a = sol->profile.a();
    if (!(a > 0.0))
      throw DomainError("build_ball_model: profile must declare a > 0 (k <= -a^2); "
                        "with a = 0 the integral of 1/F may diverge");
    return std::shared_ptr<const BallModel>(new BallModel(std::move(sol), opt));
  }

  const ComparisonSolution &solution() const { return *sol_; }
  double s_max() const { return sol_->s_max(); }
  double a() const { return sol_->profile.a(); }
  double margin() const { return opt_.margin; }
  /// Half-width of the tail bracket; bounds |ln g_true - ln g| for every r.
  double tail_bound() const { return tail_half_; }
  /// Lower and upper ends of the tail bracket [T_lo, T_hi].
  std::array<double, 2> tail_bracket() const { return {0.0, 2.0 * tail_half_}; }
  /// Largest t for which f and the conformal-factor table are available.
  double t_max() const { return table_t_.back(); }

  double g(double r) const {
    require(r >= 0.0 && r <= s_max(), "ball model: g(r) needs 0 <= r <= s_max");
    if (r == 0.0)
      return 0.0;
    return std::exp(log_g(r));
  }

  /// g'(r) = g(r) / F(r); g'(0) = lim g(r)/r.
  double gprime(double r) const {
    require(r >= 0.0 && r <= s_max(), "ball model: g'(r) needs 0 <= r <= s_max");
    if (r == 0.0)
      return gprime0_;
    return g(r) / sol_->eval_F(r);
  }
  double gprime0() const { return gprime0_; }

  /// Inverse of g: bisection to 1e-12 followed by two Newton steps using
  /// g' = g / F.
  double f(double t) const {
    require(t >= 0.0 && t <= t_max(),
            "ball model: f(t) needs 0 <= t <= t_max (raise s_max for larger t)");
    if (t == 0.0)
      return 0.0;
    const std::size_t i = locate_interval(table_t_, t);
    double lo = sol_->grid[i], hi = sol_->grid[i + 1];
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < t ? lo : hi) = mid;
    }
    double r = 0.5 * (lo + hi);
    for (int k = 0; k < 2; ++k) {
      const double gr = g(r);
      r -= (gr - t) / (gr / sol_->eval_F(r));
      r = std::clamp(r, sol_->grid[i], sol_->grid[i + 1]);
    }
    return r;
  }

  /// f'(t) from the algebraic relation f' = (F o f) / (g o f) = (F o f) / t.
  double conformal_factor(double t) const {
    check_factor_domain(t);
    if (t == 0.0)
      return 1.0 / gprime0_;
    return sol_->eval_F(f(t)) / t;
  }

  /// f''(t) = ((F' - 1) F / g^2) o f.
  double fsecond(double t) const {
    check_factor_domain(t);
    if (t < 1e-6) {
      // F' - 1 ~ -k(0) r^2 / 2, F ~ r, r ~ t / g'(0)
      const double r = t / gprime0_;
      return -sol_->profile(0.0) * r * r * r / (2.0 * t * t + 1e-300);
    }
    const double r = f(t);
    return (sol_->eval_Fprime(r) - 1.0) * sol_->eval_F(r) / (t * t);
  }

  /// Conformal factor and its t-derivative from a cubic Hermite table built
  /// on the exact node values; used inside energy assembly.
  HermiteValue lambda(double t) const {
    if (!(t >= 0.0 && t < 1.0 - opt_.margin) || t > t_max()) {
      std::ostringstream os;
      os << "ball model: conformal factor requested at |x| = " << t
         << " outside [0, 1 - margin)";
      throw DomainError(os.str());
    }
    const std::size_t i = locate_interval(table_t_, t);
    const auto v = hermite(table_t_[i], table_t_[i + 1], table_lambda_[i],
                           table_lambda_[i + 1], table_dlambda_[i],
                           table_dlambda_[i + 1], t);
    return v;
  }

  /// Columns r, g, fprime for r on a uniform grid while g(r) < 1 - margin.
  void write_csv(std::ostream &os, int samples = 200) const {
    os << "r,g,fprime\n";
    os.precision(17);
    double r_end = s_max();
    while (r_end > 0 && g(r_end) >= 1.0 - opt_.margin)
      r_end *= 0.99;
    for (int i = 0; i <= samples; ++i) {
      const double r = r_end * i / samples;
      const double t = g(r);
      os << r << ',' << t << ',' << conformal_factor(t) << '\n';
    }
  }

private:
  BallModel(std::shared_ptr<const ComparisonSolution> sol, BallModelOptions opt)
      : sol_(std::move(sol)), opt_(opt) {
    const auto &s = *sol_;
    const std::size_t n = s.grid.size();

    // B(r) = int_0^r (1/F(t) - 1/t) dt, a smooth integrand with b(0) = 0.
    cumB_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
      cumB_[i + 1] = cumB_[i] + integrate_b(i, s.grid[i], s.grid[i + 1]);

    const double smax = s.s_max();
    const double Fend = s.F.back();
    double c = s.profile.a();
    if (s.profile.monotone_nonincreasing())
      c = std::max(c, std::sqrt(-s.profile(smax)));
    const double t_hi = kPi / (2.0 * c * Fend);
    tail_mid_ = 0.5 * t_hi;
    tail_half_ = 0.5 * t_hi;
    if (tail_half_ > opt_.tail_tol) {
      std::ostringstream os;
      os << "build_ball_model: tail bound " << tail_half_ << " exceeds tolerance "
         << opt_.tail_tol << "; raise s_max (currently " << smax << ")";
      throw DomainError(os.str());
    }
    log_gprime0_ = -std::log(smax) - cumB_.back() - tail_mid_;
    gprime0_ = std::exp(log_gprime0_);

    table_t_.push_back(0.0);
    table_lambda_.push_back(1.0 / gprime0_);
    table_dlambda_.push_back(0.0);
    const double t_stop = 1.0 - 0.1 * opt_.margin;
    for (std::size_t i = 1; i < n; ++i) {
      const double t = std::exp(log_g_node(i));
      if (!(t > table_t_.back()))
        break;
      table_t_.push_back(t);
      table_lambda_.push_back(s.F[i] / t);
      table_dlambda_.push_back((s.Fprime[i] - 1.0) * s.F[i] / (t * t));
      if (t > t_stop)
        break;
    }
    require(table_t_.size() >= 2, "build_ball_model: solution grid too coarse");
  }

  double b_at(std::size_t i, double t) const {
    const auto &s = *sol_;
    const double F = hermite(s.grid[i], s.grid[i + 1], s.F[i], s.F[i + 1],
                             s.Fprime[i], s.Fprime[i + 1], t)
                         .value;
    return (t - F) / (t * F);
  }

  // 5-point Gauss–Legendre on [lo, hi] within grid interval i.
  double integrate_b(std::size_t i, double lo, double hi) const {
    static constexpr std::array<double, 5> x{
        0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
        0.9061798459386640};
    static constexpr std::array<double, 5> w{
        0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
        0.2369268850561891, 0.2369268850561891};
    if (hi <= lo)
      return 0.0;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double acc = 0.0;
    for (int k = 0; k < 5; ++k)
      acc += w[k] * b_at(i, mid + half * x[k]);
    return half * acc;
  }

  double log_g_node(std::size_t i) const {
    return std::log(sol_->grid[i] / sol_->s_max()) - (cumB_.back() - cumB_[i]) -
           tail_mid_;
  }

  double log_g(double r) const {
    const auto &s = *sol_;
    const std::size_t i = locate_interval(s.grid, r);
    const double Br = cumB_[i] + integrate_b(i, s.grid[i], r);
    return std::log(r / s.s_max()) - (cumB_.back() - Br) - tail_mid_;
  }

  void check_factor_domain(double t) const {
    if (!(t >= 0.0 && t < 1.0 - opt_.margin)) {
      std::ostringstream os;
      os << "ball model: t = " << t << " is within margin " << opt_.margin
         << " of the ideal boundary";
      throw DomainError(os.str());
    }
    require(t <= t_max(), "ball model: t beyond tabulated range; raise s_max");
  }

  std::shared_ptr<const ComparisonSolution> sol_;
  BallModelOptions opt_;
  std::vector<double> cumB_;
  double tail_mid_ = 0.0, tail_half_ = 0.0;
  double log_gprime0_ = 0.0, gprime0_ = 0.0;
  std::vector<double> table_t_, table_lambda_, table_dlambda_;
};

/// Ball-model point realizing Exp(r * direction) for a unit direction.
inline Vec exp_point(const BallModel &model, const Vec &direction, double r) {
  require(std::abs(direction.norm() - 1.0) <= 1e-12,
          "exp_point: direction must be a unit vector");
  require(r >= 0.0, "exp_point: r must be non-negative");
  return model.g(r) * direction;
}

struct PolarIdentityReport {
  double max_rel_err = 0.0;
  double max_radial_err = 0.0;  ///< |f'(g(r)) g'(r) - 1|
  double max_angular_err = 0.0; ///< |f'(g(r)) g(r) / F(r) - 1|
  int samples = 0;
};

/// Compares the pulled-back conformal metric with dr^2 + F(r)^2 dtheta^2 at
/// pseudo-random (r, theta) using central differences of the polar chart.
inline PolarIdentityReport check_polar_identity(const BallModel &model, int samples,
                                                std::uint64_t seed = 1) {
  PolarIdentityReport rep;
  rep.samples = samples;
  std::uint64_t state = seed * 0x9E3779B97F4A7C15ull + 1;
  auto uniform = [&state] {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  double r_hi = model.s_max();
  while (model.g(r_hi) >= 1.0 - 10 * model.margin())
    r_hi *= 0.95;
  const double h = 1e-5;
  for (int k = 0; k < samples; ++k) {
    const double r = 0.05 + (r_hi - 0.1) * uniform();
    const double th = 2 * kPi * uniform();
    const double t = model.g(r);
    const double lam = model.conformal_factor(t);
    // radial tangent d/dr (g(r) e_theta)
    const double dr = (model.g(r + h) - model.g(r - h)) / (2 * h);
    // angular tangent d/dtheta (g(r) e_theta), Euclidean length
    const Vec2 p1(std::cos(th + h), std::sin(th + h)), p0(std::cos(th - h), std::sin(th - h));
    const double dth = (t * (p1 - p0) / (2 * h)).norm();
    const double radial = std::abs(lam * dr - 1.0);
    const double angular = std::abs(lam * dth / model.solution().eval_F(r) - 1.0);
    rep.max_radial_err = std::max(rep.max_radial_err, radial);
    rep.max_angular_err = std::max(rep.max_angular_err, angular);
  }
  rep.max_rel_err = std::max(rep.max_radial_err, rep.max_angular_err);
  return rep;
}

} // namespace hplateau
