#pragma once

// Conformal map from the unit disc onto the lune D ∩ D_r(-1), 0 < r < 1.
//
//   zeta  ->  w = i (1 + zeta) / (1 - zeta)        disc to upper half plane
//         ->  W = e^{i theta_lo} w^{alpha / pi}    half plane to sector
//         ->  z = (p - q W) / (1 - W)              sector to lune
//
// p, q are the corners where the two circles meet and alpha is the interior
// angle of the lune, alpha = pi - arccos(r / 2). zeta = -1 goes to p and
// zeta = 1 to q.

#include "hplateau/core.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace hplateau {

class LuneMap {
public:
  explicit LuneMap(double r) : r_(r) {
    if (!(r > 0.0 && r < 1.0))
      throw DomainError("lune_to_disc: radius must lie in (0, 1) so the circles bound a lune");
    const double x = 0.5 * r * r - 1.0;
    const double y = 0.5 * r * std::sqrt(4.0 - r * r); // sqrt(1 - x^2) without cancellation
    p_ = {x, y};
    q_ = {x, -y};
    const double pa = std::arg(moebius({-1.0, 0.0}));
    const double pb = std::arg(moebius({-1.0 + r, 0.0}));
    const double pc = std::arg(moebius({-1.0 + 0.5 * r, 0.0}));
    const double d = wrap(pb - pa);
    // the sector containing the image of an interior point of the lune
    theta_lo_ = wrap(pc - pa) < d ? pa : pb;
    alpha_ = alpha_closed_form(r);
  }

  double radius() const { return r_; }
  double alpha() const { return alpha_; }
  static double alpha_closed_form(double r) { return kPi - std::acos(0.5 * r); }
  Complex corner_p() const { return p_; }
  Complex corner_q() const { return q_; }

  /// Disc to lune.
  Complex forward(Complex zeta) const {
    const Complex i(0.0, 1.0);
    if (std::abs(zeta - 1.0) < 1e-300)
      return q_;
    const Complex w = i * (1.0 + zeta) / (1.0 - zeta);
    const double mod = std::pow(std::abs(w), alpha_ / kPi);
    double ang = std::arg(w);
    if (ang < 0.0) // closed upper half plane; -0 and tiny negatives from rounding
      ang = ang < -0.5 * kPi ? kPi : 0.0;
    const Complex W = std::polar(mod, theta_lo_ + ang * alpha_ / kPi);
    return (p_ - q_ * W) / (1.0 - W);
  }

  /// Lune to disc; refused within 1e-4 of the corners.
  Complex inverse(Complex z) const {
    if (std::abs(z - p_) < 1e-4 || std::abs(z - q_) < 1e-4) {
      std::ostringstream os;
      os << "lune_to_disc: inverse requested within 1e-4 of a corner at " << z;
      throw DomainError(os.str());
    }
    const Complex W = moebius(z) * std::polar(1.0, -theta_lo_);
    double ang = std::arg(W);
    if (ang < 0.0 && ang < -0.5 * (2.0 * kPi - alpha_))
      ang += 2.0 * kPi;
    const Complex w = std::polar(std::pow(std::abs(W), kPi / alpha_), ang * kPi / alpha_);
    const Complex i(0.0, 1.0);
    return (w - i) / (w + i);
  }

  /// True iff z lies in the closed lune (with slack eps).
  bool contains(Complex z, double eps = 0.0) const {
    return std::abs(z) <= 1.0 + eps && std::abs(z + 1.0) <= r_ + eps;
  }

private:
  Complex moebius(Complex z) const { return (z - p_) / (z - q_); }
  static double wrap(double a) {
    a = std::fmod(a, 2.0 * kPi);
    return a < 0 ? a + 2.0 * kPi : a;
  }

  double r_;
  Complex p_, q_;
  double theta_lo_ = 0.0, alpha_ = 0.0;
};

/// Disc automorphism z -> (z + c) / (1 + conj(c) z), sending 0 to c.
inline Complex disc_automorphism(Complex c, Complex z) {
  return (z + c) / (1.0 + std::conj(c) * z);
}

/// The orientation-preserving disc automorphism sending the three boundary
/// points a[k] to b[k] (both triples in counter-clockwise order), as the
/// composition of Cayley-type maps to the upper half plane.
class ThreePointAutomorphism {
public:
  ThreePointAutomorphism(std::array<Complex, 3> from, std::array<Complex, 3> to) {
    // Cross-ratio maps sending (z1, z2, z3) to (0, 1, inf).
    auto cross = [](const std::array<Complex, 3> &z) {
      // m(z) = ((z - z1)(z2 - z3)) / ((z - z3)(z2 - z1)) as 2x2 matrix
      std::array<Complex, 4> m{z[1] - z[2], -z[0] * (z[1] - z[2]), z[1] - z[0],
                               -z[2] * (z[1] - z[0])};
      return m;
    };
    const auto A = cross(from), B = cross(to);
    // total = B^{-1} A
    const std::array<Complex, 4> Binv{B[3], -B[1], -B[2], B[0]};
    m_ = {Binv[0] * A[0] + Binv[1] * A[2], Binv[0] * A[1] + Binv[1] * A[3],
          Binv[2] * A[0] + Binv[3] * A[2], Binv[2] * A[1] + Binv[3] * A[3]};
  }
  Complex operator()(Complex z) const { return (m_[0] * z + m_[1]) / (m_[2] * z + m_[3]); }

private:
  std::array<Complex, 4> m_;
};

} // namespace hplateau
