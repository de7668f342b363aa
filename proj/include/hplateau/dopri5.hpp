#pragma once

// Dormand–Prince 5(4) embedded Runge–Kutta integrator with FSAL and
// breakpoint-aware step placement. Every accepted step end is reported to an
// observer together with the derivative there, which is all a cubic Hermite
// dense output needs.

#include "hplateau/core.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace hplateau {

template <std::size_t N> using State = std::array<double, N>;

struct Dopri5Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_max = std::numeric_limits<double>::infinity();
  /// Steps smaller than h_min_rel * max(1, |t|) count as underflow.
  double h_min_rel = 1e-14;
  /// Interior points the integrator must land on exactly (kinks of the rhs).
  std::vector<double> breakpoints;
  std::size_t max_steps = 10'000'000;
};

class StepUnderflow : public NumericalError {
public:
  StepUnderflow(const std::string &what, double last_good)
      : NumericalError(what), last_good_t(last_good) {}
  double last_good_t;
};

namespace detail {

template <std::size_t N>
State<N> axpy(const State<N> &y, double h,
              std::initializer_list<std::pair<double, const State<N> *>> terms) {
  State<N> out = y;
  for (const auto &[c, k] : terms) {
    if (c == 0.0)
      continue;
    for (std::size_t i = 0; i < N; ++i)
      out[i] += h * c * (*k)[i];
  }
  return out;
}

} // namespace detail

template <std::size_t N, class Rhs, class Observer>
void integrate_dopri5(Rhs &&rhs, State<N> y, double t0, double t1,
                      const Dopri5Options &opt, Observer &&observe) {
  require(t1 > t0, "integrate_dopri5: t1 must exceed t0");

  // Butcher tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                   a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<double> stops;
  for (double b : opt.breakpoints)
    if (b > t0 && b < t1)
      stops.push_back(b);
  std::sort(stops.begin(), stops.end());
  stops.push_back(t1);
  std::size_t next_stop = 0;

  double t = t0;
  State<N> k1 = rhs(t, y);
  observe(t, y, k1);

  double h = std::min(opt.h_init, opt.h_max);
  std::size_t steps = 0;
  while (next_stop < stops.size()) {
    const double target = stops[next_stop];
    if (++steps > opt.max_steps)
      throw NumericalError("integrate_dopri5: step budget exhausted");
    bool lands = false;
    if (t + h >= target - 1e-15 * std::max(1.0, std::abs(target))) {
      h = target - t;
      lands = true;
    }
    if (h < opt.h_min_rel * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "integrate_dopri5: step size underflow at s = " << t;
      throw StepUnderflow(os.str(), t);
    }

    const State<N> k2 = rhs(t + c2 * h, detail::axpy<N>(y, h, {{a21, &k1}}));
    const State<N> k3 =
        rhs(t + c3 * h, detail::axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
    const State<N> k4 = rhs(
        t + c4 * h, detail::axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 =
        rhs(t + c5 * h, detail::axpy<N>(y, h, {{a51, &k1}, {a52, &k2},
                                               {a53, &k3}, {a54, &k4}}));
    const State<N> k6 =
        rhs(t + h, detail::axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3},
                                          {a64, &k4}, {a65, &k5}}));
    const State<N> ynew = detail::axpy<N>(
        y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const double tnew = lands ? target : t + h;
    const State<N> k7 = rhs(tnew, ynew);

    double err2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                            e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc =
          opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err2 += (e / sc) * (e / sc);
    }
    const double err = std::sqrt(err2 / static_cast<double>(N));

    if (err <= 1.0) {
      t = tnew;
      y = ynew;
      k1 = k7;
      observe(t, y, k1);
      if (lands)
        ++next_stop;
      const double fac =
          err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::min(h * fac, opt.h_max);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
}

} // namespace hplateau
