#pragma once

// Riemannian metric on the unit ball B of R^n of the form
//     <u, v>_x = f'(|x|)^2 <u, v>_b(x)
// where <,>_b is either Euclidean or a bounded perturbation registered from a
// small catalog. Every catalog perturbation fixes the radial direction
// (B(x) x = x), so radial segments stay unit speed and f(|x|) is the
// distance to the origin along them.

#include "hplateau/ball_model.hpp"

#include <functional>
#include <optional>

namespace hplateau {

/// B(x) symmetric with spectrum inside [m_lo, m_hi], 0 < m_lo <= 1 <= m_hi.
struct Perturbation {
  std::string name;
  double amplitude = 0.0;
  double m_lo = 1.0;
  double m_hi = 1.0;
  std::function<void(const Vec &x, Mat &B)> eval;
};

struct PerturbationInfo {
  std::string name;
  double default_amplitude;
  std::string bounds; ///< (m_lo, m_hi) as a function of the amplitude eps
  std::string formula;
};

inline std::vector<PerturbationInfo> perturbation_catalog() {
  return {
      {"identity", 0.0, "(1, 1)", "B = I"},
      {"diagonal-bump", 0.5, "(1, 1 + eps)",
       "B = I + eps * exp(-|x - c|^2 / 0.35^2) * w w^T, w = (|x|^2 I - x x^T) e1, "
       "c = 0.5 e_n"},
      {"rotation-shear", 0.3, "(1 - eps, 1 + eps), eps < 1",
       "B = I + eps * sin(pi x_n) * Q (e1 e2^T + e2 e1^T) Q, Q = |x|^2 I - x x^T"},
  };
}

inline Perturbation make_perturbation(const std::string &name, int dim,
                                      std::optional<double> amplitude = {}) {
  require(dim >= 3, "perturbation: dimension must be >= 3");
  Perturbation p;
  p.name = name;
  if (name == "identity") {
    p.eval = [](const Vec &x, Mat &B) { B.setIdentity(x.size(), x.size()); };
    return p;
  }
  if (name == "diagonal-bump") {
    const double eps = amplitude.value_or(0.5);
    require(eps >= 0.0, "diagonal-bump amplitude must be >= 0");
    p.amplitude = eps;
    p.m_lo = 1.0;
    p.m_hi = 1.0 + eps;
    p.eval = [eps](const Vec &x, Mat &B) {
      const auto n = x.size();
      Vec c = Vec::Zero(n);
      c(n - 1) = 0.5;
      const double bump = std::exp(-(x - c).squaredNorm() / (0.35 * 0.35));
      Vec w = -x(0) * x;
      w(0) += x.squaredNorm();
      B.setIdentity(n, n);
      B.noalias() += (eps * bump) * w * w.transpose();
    };
    return p;
  }
  if (name == "rotation-shear") {
    const double eps = amplitude.value_or(0.3);
    require(eps >= 0.0 && eps < 1.0, "rotation-shear amplitude must lie in [0, 1)");
    p.amplitude = eps;
    p.m_lo = 1.0 - eps;
    p.m_hi = 1.0 + eps;
    p.eval = [eps](const Vec &x, Mat &B) {
      const auto n = x.size();
      Mat Q = x.squaredNorm() * Mat::Identity(n, n) - x * x.transpose();
      Mat S = Mat::Zero(n, n);
      S(0, 1) = S(1, 0) = 1.0;
      B.setIdentity(n, n);
      B.noalias() += (eps * std::sin(kPi * x(n - 1))) * (Q * S * Q);
    };
    return p;
  }
  throw DomainError("unknown perturbation '" + name +
                    "' (catalog: identity, diagonal-bump, rotation-shear)");
}

class AmbientMetric {
public:
  AmbientMetric(std::shared_ptr<const BallModel> model, int dim,
                std::optional<Perturbation> perturbation = {}, int spot_checks = 512)
      : model_(std::move(model)), dim_(dim), pert_(std::move(perturbation)) {
    require(model_ != nullptr, "AmbientMetric: null ball model");
    require(dim_ >= 3, "AmbientMetric: dimension must be >= 3");
    if (pert_ && pert_->name == "identity")
      pert_.reset();
    if (pert_) {
      require(pert_->m_lo > 0.0 && pert_->m_lo <= 1.0 && pert_->m_hi >= 1.0,
              "AmbientMetric: perturbation bounds need 0 < m_lo <= 1 <= m_hi");
      spot_check_bounds(spot_checks);
    }
  }

  int dim() const { return dim_; }
  bool euclidean_b() const { return !pert_.has_value(); }
  const BallModel &model() const { return *model_; }
  std::shared_ptr<const BallModel> model_ptr() const { return model_; }
  const std::optional<Perturbation> &perturbation() const { return pert_; }
  double m_lo() const { return pert_ ? pert_->m_lo : 1.0; }
  double m_hi() const { return pert_ ? pert_->m_hi : 1.0; }
  std::string b_name() const { return pert_ ? pert_->name : "identity"; }
  double safe_radius() const { return 1.0 - model_->margin(); }

  void b_form(const Vec &x, Mat &B) const {
    if (pert_)
      pert_->eval(x, B);
    else
      B.setIdentity(x.size(), x.size());
  }

  /// f'(|x|)^2 B(x).
  Mat metric_tensor(const Vec &x) const {
    require(x.size() == dim_, "metric_tensor: dimension mismatch");
    const double lam = model_->lambda(x.norm()).value;
    Mat B(dim_, dim_);
    b_form(x, B);
    return lam * lam * B;
  }

  /// Distance to the origin along the radial segment, f(|x|).
  double geodesic_radius(const Vec &x) const {
    require(x.norm() < 1.0, "geodesic_radius: point outside the ball");
    return model_->f(x.norm());
  }

  /// Metric length of the vector v based at x.
  double length(const Vec &x, const Vec &v) const {
    const double lam = model_->lambda(x.norm()).value;
    if (!pert_)
      return lam * v.norm();
    Mat B(dim_, dim_);
    pert_->eval(x, B);
    return lam * std::sqrt(v.dot(B * v));
  }

private:
  void spot_check_bounds(int count) const {
    // Halton points mapped into the ball of radius 0.99.
    auto halton = [](int i, int base) {
      double f = 1.0, r = 0.0;
      for (int k = i; k > 0; k /= base) {
        f /= base;
        r += f * (k % base);
      }
      return r;
    };
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    Mat B(dim_, dim_);
    for (int i = 1; i <= count; ++i) {
      Vec x(dim_);
      for (int d = 0; d < dim_; ++d)
        x(d) = 2.0 * halton(i, primes[d % 10]) - 1.0;
      if (x.norm() >= 0.99)
        x *= 0.99 / x.norm();
      pert_->eval(x, B);
      require((B - B.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
              "perturbation '" + pert_->name + "' is not symmetric");
      Eigen::SelfAdjointEigenSolver<Mat> es(B);
      const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
      if (lo < pert_->m_lo - 1e-12 || hi > pert_->m_hi + 1e-12)
        throw DomainError("perturbation '" + pert_->name +
                          "' violates its declared bounds at a spot-check point");
    }
  }

  std::shared_ptr<const BallModel> model_;
  int dim_;
  std::optional<Perturbation> pert_;
};

/// Metric area of the flat triangle (p0, p1, p2) with the metric frozen at
/// the barycenter: (1/2) sqrt(det(D^T G D)), D = [p1 - p0, p2 - p0].
inline double triangle_metric_area(const AmbientMetric &metric, const Vec &p0,
                                   const Vec &p1, const Vec &p2) {
  const Vec d1 = p1 - p0, d2 = p2 - p0;
  const Vec bar = (p0 + p1 + p2) / 3.0;
  const double lam = metric.model().lambda(bar.norm()).value;
  double g11, g12, g22;
  if (metric.euclidean_b()) {
    g11 = d1.squaredNorm();
    g12 = d1.dot(d2);
    g22 = d2.squaredNorm();
  } else {
    Mat B(metric.dim(), metric.dim());
    metric.b_form(bar, B);
    g11 = d1.dot(B * d1);
    g12 = d1.dot(B * d2);
    g22 = d2.dot(B * d2);
  }
  return 0.5 * lam * lam * std::sqrt(std::max(0.0, g11 * g22 - g12 * g12));
}

struct SurfacePatch {
  std::vector<std::array<Vec, 3>> triangles;
};

struct PatchAreaResult {
  double area = 0.0;
  int skipped_degenerate = 0;
};

/// One-point (barycenter) quadrature of the metric area of a triangulated
/// patch; Euclidean-degenerate triangles are skipped and counted.
inline PatchAreaResult patch_area(const AmbientMetric &metric, const SurfacePatch &patch) {
  PatchAreaResult res;
  std::vector<double> parts;
  parts.reserve(patch.triangles.size());
  for (const auto &tri : patch.triangles) {
    for (const auto &p : tri)
      require(p.norm() < metric.safe_radius(), "patch_area: patch leaves the safe ball");
    const Vec d1 = tri[1] - tri[0], d2 = tri[2] - tri[0];
    const double e2 = d1.squaredNorm() * d2.squaredNorm() - std::pow(d1.dot(d2), 2);
    if (!(e2 > 1e-28 * d1.squaredNorm() * d2.squaredNorm()) || e2 <= 0.0) {
      ++res.skipped_degenerate;
      continue;
    }
    parts.push_back(triangle_metric_area(metric, tri[0], tri[1], tri[2]));
  }
  res.area = pairwise_sum(parts);
  return res;
}

struct JacobiNormReport {
  double numeric = 0.0;  ///< |d/de Exp(s (v + e w))| measured in the metric
  double analytic = 0.0; ///< F(s)
  double lower = 0.0;    ///< F0(s) e^{-C}
  double upper = 0.0;    ///< F0(s) e^{+C}, the bound used for pass/fail
  double upper_as_printed = 0.0; ///< F0(s) e^{-C}
  double C = 0.0;
};

/// Central difference of exp_point across a direction w perpendicular to
/// the unit direction v at radius s, measured in the metric at Exp(s v).
/// In the rotationally symmetric model this is the Jacobi-field norm F(s).
inline JacobiNormReport jacobi_norm_check(const AmbientMetric &metric, const Vec &direction,
                                          double s, double h, double C = 0.0) {
  require(metric.euclidean_b(), "jacobi_norm_check: needs a rotationally symmetric metric");
  require(h >= 1e-8, "jacobi_norm_check: step h below the precision floor 1e-8");
  require(std::abs(direction.norm() - 1.0) <= 1e-12, "jacobi_norm_check: unit direction");
  require(s > 0.0, "jacobi_norm_check: s must be positive");
  const auto &model = metric.model();
  // a unit vector perpendicular to direction
  Vec w = Vec::Zero(direction.size());
  Eigen::Index imin;
  direction.cwiseAbs().minCoeff(&imin);
  w(imin) = 1.0;
  w -= w.dot(direction) * direction;
  w.normalize();

  const Vec plus = exp_point(model, (direction + h * w).normalized(), s);
  const Vec minus = exp_point(model, (direction - h * w).normalized(), s);
  const Vec base = exp_point(model, direction, s);
  const Vec dJ = (plus - minus) / (2.0 * h);

  JacobiNormReport rep;
  rep.numeric = metric.length(base, dJ);
  rep.analytic = model.solution().eval_F(s);
  rep.C = C;
  rep.lower = rep.analytic * std::exp(-C);
  rep.upper = rep.analytic * std::exp(C);
  rep.upper_as_printed = rep.analytic * std::exp(-C);
  return rep;
}

} // namespace hplateau
