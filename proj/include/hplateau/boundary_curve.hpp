#pragma once

#include "hplateau/core.hpp"

#include <cmath>
#include <sstream>

namespace hplateau {

/// Closed polyline parametrized proportionally to Euclidean arclength,
/// gamma(t) for t taken modulo L.
class BoundaryCurve {
public:
  explicit BoundaryCurve(std::vector<Vec> samples, bool check_simple = true)
      : samples_(std::move(samples)) {
    require(samples_.size() >= 3, "BoundaryCurve: need at least 3 samples");
    const auto dim = samples_.front().size();
    cum_.push_back(0.0);
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      require(samples_[i].size() == dim, "BoundaryCurve: mixed dimensions");
      const double len = (samples_[(i + 1) % samples_.size()] - samples_[i]).norm();
      require(len > 0.0, "BoundaryCurve: repeated consecutive sample");
      cum_.push_back(cum_.back() + len);
    }
    L_ = cum_.back();
    require(L_ > 0.0, "BoundaryCurve: zero length");
    if (check_simple)
      check_no_self_contact();
  }

  double length() const { return L_; }
  int dim() const { return static_cast<int>(samples_.front().size()); }
  int sample_count() const { return static_cast<int>(samples_.size()); }
  const std::vector<Vec> &samples() const { return samples_; }
  /// Arclength of each sample node; knots of the parametrization.
  const std::vector<double> &knots() const { return cum_; }

  double wrap(double t) const {
    double u = std::fmod(t, L_);
    if (u < 0.0)
      u += L_;
    return u;
  }

  int segment(double t) const {
    const double u = wrap(t);
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return std::clamp(static_cast<int>(it - cum_.begin()) - 1, 0, sample_count() - 1);
  }

  Vec point(double t) const {
    const double u = wrap(t);
    const int i = segment(u);
    const double s = (u - cum_[i]) / (cum_[i + 1] - cum_[i]);
    return (1.0 - s) * samples_[i] + s * samples_[(i + 1) % samples_.size()];
  }

  /// d gamma / dt on the segment containing t (right derivative at knots).
  Vec tangent(double t) const {
    const int i = segment(t);
    return (samples_[(i + 1) % samples_.size()] - samples_[i]) / (cum_[i + 1] - cum_[i]);
  }

  /// Distance from t to the nearest knot, in parameter units.
  double distance_to_knot(double t) const {
    const double u = wrap(t);
    const int i = segment(u);
    return std::min(u - cum_[i], cum_[i + 1] - u);
  }

private:
  // Non-adjacent samples must stay apart; a coarse proxy for simplicity at
  // sample resolution.
  void check_no_self_contact() const {
    const std::size_t n = samples_.size();
    double min_seg = L_;
    for (std::size_t i = 0; i < n; ++i)
      min_seg = std::min(min_seg, cum_[i + 1] - cum_[i]);
    const double eps = 1e-3 * min_seg;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1)
          continue;
        if ((samples_[i] - samples_[j]).squaredNorm() < eps * eps) {
          std::ostringstream os;
          os << "BoundaryCurve: curve is not simple (samples " << i << " and " << j
             << " coincide)";
          throw DomainError(os.str());
        }
      }
  }

  std::vector<Vec> samples_;
  std::vector<double> cum_;
  double L_ = 0.0;
};

} // namespace hplateau
