#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace hplateau {

/// Value and first derivative of the cubic Hermite interpolant on [x0, x1].
struct HermiteValue {
  double value;
  double derivative;
};

inline HermiteValue hermite(double x0, double x1, double y0, double y1,
                            double d0, double d1, double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
  const double dh00 = 6 * t2 - 6 * t, dh10 = 3 * t2 - 4 * t + 1;
  const double dh01 = -6 * t2 + 6 * t, dh11 = 3 * t2 - 2 * t;
  const double derivative =
      (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
  return {value, derivative};
}

/// Index i with xs[i] <= x < xs[i+1], clamped to [0, n-2].
inline std::size_t locate_interval(const std::vector<double> &xs, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::ptrdiff_t i = (it - xs.begin()) - 1;
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(xs.size()) - 2));
}

} // namespace hplateau
