#pragma once

#include "hplateau/core.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace hplateau {

struct ConstantCurvature {
  double value = -1.0;
};

/// Piecewise-linear samples; constant extrapolation past the last node.
struct SampledCurvature {
  std::vector<double> grid;
  std::vector<double> values;
};

/// Named analytic profiles:
///   "exp-decay"      k(s) = p0 - p1 * exp(-s / p2)
///   "linear"         k(s) = p0 + p1 * s
///   "rational-decay" k(s) = p0 - p1 / (1 + s)^2
struct ClosedFormCurvature {
  std::string id;
  std::vector<double> params;
};

/// Radial curvature as a function of distance s >= 0 from the base point.
class CurvatureProfile {
public:
  using Kind = std::variant<ConstantCurvature, SampledCurvature, ClosedFormCurvature>;

  CurvatureProfile(Kind kind, double a, bool monotone_nonincreasing)
      : kind_(std::move(kind)), a_(a), monotone_(monotone_nonincreasing) {
    if (const auto *s = std::get_if<SampledCurvature>(&kind_)) {
      require(s->grid.size() >= 2 && s->grid.size() == s->values.size(),
              "sampled curvature needs matching grid/values with >= 2 nodes");
      require(s->grid.front() == 0.0, "sampled curvature grid must start at 0");
      for (std::size_t i = 1; i < s->grid.size(); ++i)
        require(s->grid[i] > s->grid[i - 1],
                "sampled curvature grid must be strictly increasing");
    }
    if (const auto *c = std::get_if<ClosedFormCurvature>(&kind_)) {
      const std::size_t need = c->id == "exp-decay" ? 3 : 2;
      require(c->id == "exp-decay" || c->id == "linear" || c->id == "rational-decay",
              "unknown closed-form curvature id '" + c->id + "'");
      require(c->params.size() == need,
              "closed-form curvature '" + c->id + "' expects " +
                  std::to_string(need) + " parameters");
      if (c->id == "exp-decay")
        require(c->params[2] > 0.0, "exp-decay scale must be positive");
    }
    require(a_ >= 0.0, "declared curvature bound a must be >= 0");
  }

  /// Space form of curvature -a^2 with the bound a declared.
  static CurvatureProfile hyperbolic(double a) {
    return {ConstantCurvature{-a * a}, a, true};
  }
  static CurvatureProfile constant(double value, double a = 0.0) {
    return {ConstantCurvature{value}, a, true};
  }

  double operator()(double s) const {
    return std::visit(
        [s](const auto &k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ConstantCurvature>) {
            return k.value;
          } else if constexpr (std::is_same_v<T, SampledCurvature>) {
            if (s <= k.grid.front())
              return k.values.front();
            if (s >= k.grid.back())
              return k.values.back();
            const auto it = std::upper_bound(k.grid.begin(), k.grid.end(), s);
            const std::size_t i = static_cast<std::size_t>(it - k.grid.begin()) - 1;
            const double w = (s - k.grid[i]) / (k.grid[i + 1] - k.grid[i]);
            return (1.0 - w) * k.values[i] + w * k.values[i + 1];
          } else {
            const auto &p = k.params;
            if (k.id == "exp-decay")
              return p[0] - p[1] * std::exp(-s / p[2]);
            if (k.id == "linear")
              return p[0] + p[1] * s;
            return p[0] - p[1] / ((1.0 + s) * (1.0 + s));
          }
        },
        kind_);
  }

  double a() const { return a_; }
  bool monotone_nonincreasing() const { return monotone_; }
  const Kind &kind() const { return kind_; }

  /// Kinks of the profile inside (0, s_max).
  std::vector<double> breakpoints(double s_max) const {
    std::vector<double> out;
    if (const auto *s = std::get_if<SampledCurvature>(&kind_))
      for (double g : s->grid)
        if (g > 0.0 && g < s_max)
          out.push_back(g);
    return out;
  }

  /// Points at which hypotheses are spot-checked: profile nodes plus a
  /// uniform grid of 4097 points on [0, s_max].
  std::vector<double> probe_points(double s_max) const {
    std::vector<double> pts = breakpoints(s_max);
    constexpr int n = 4096;
    for (int i = 0; i <= n; ++i)
      pts.push_back(s_max * i / n);
    std::sort(pts.begin(), pts.end());
    return pts;
  }

  double max_abs(double s_max) const {
    double m = 0.0;
    for (double s : probe_points(s_max))
      m = std::max(m, std::abs((*this)(s)));
    return m;
  }

  /// Throws DomainError if a value is positive, if the declared bound
  /// k <= -a^2 fails, or if a declared monotonicity fails on the probes.
  void validate(double s_max) const {
    const auto pts = probe_points(s_max);
    double prev = (*this)(0.0);
    for (double s : pts) {
      const double k = (*this)(s);
      if (!(k <= 0.0)) {
        std::ostringstream os;
        os << "curvature profile is positive (k = " << k << ") at s = " << s;
        throw DomainError(os.str());
      }
      if (a_ > 0.0 && k > -a_ * a_ + 1e-12 * a_ * a_) {
        std::ostringstream os;
        os << "curvature profile violates declared bound k <= -a^2 (a = " << a_
           << ") at s = " << s << " (k = " << k << ")";
        throw DomainError(os.str());
      }
      if (monotone_ && k > prev + 1e-14 * std::max(1.0, std::abs(prev))) {
        std::ostringstream os;
        os << "curvature profile flagged non-increasing but increases at s = " << s;
        throw DomainError(os.str());
      }
      prev = k;
    }
  }

  /// True iff the probes show a non-increasing profile.
  bool sampled_nonincreasing(double s_max) const {
    double prev = (*this)(0.0);
    for (double s : probe_points(s_max)) {
      const double k = (*this)(s);
      if (k > prev + 1e-14 * std::max(1.0, std::abs(prev)))
        return false;
      prev = k;
    }
    return true;
  }

private:
  Kind kind_;
  double a_ = 0.0;
  bool monotone_ = false;
};

} // namespace hplateau
