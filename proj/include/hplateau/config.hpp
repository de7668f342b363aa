#pragma once

// Run configuration: JSON with a versioned schema field. Every field has an
// explicit default and the echo-back (to_json) spells all of them out, so a
// config written by one run reproduces that run exactly.

#include "hplateau/expansion.hpp"
#include "hplateau/verification.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>

namespace hplateau {

using ojson = nlohmann::ordered_json;

inline constexpr const char *kConfigSchema = "hplateau.run/1";

class ConfigError : public DomainError {
public:
  using DomainError::DomainError;
};

struct ProfileConfig {
  std::string kind = "constant"; ///< constant | sampled | closed-form
  double value = -1.0;           ///< constant
  std::vector<double> grid;      ///< sampled
  std::vector<double> values;    ///< sampled
  std::string id;                ///< closed-form
  std::vector<double> params;    ///< closed-form
  double a = 1.0;
  bool monotone = true;
  double s_max = 30.0;
  double tol = 1e-10;
};

struct CurveConfig {
  std::string builtin = "equator"; ///< empty when `file` is used
  std::string file;
  int samples = 256;
  double beta = kPi / 3;
  double tilt = 0.3;
  int q = 3;
  double amp = 0.3;
};

struct VerifyConfig {
  double ratio_tol = 0.0; ///< resolved from the level when absent
  double capacity_rho = 0.5;
  double capacity_tol = 0.05;
  double radial_tol = 0.02;
  int hessian_samples = 16;
  double hessian_tol = 1e-4;
  double oscillation_s = 0.1; ///< D_s(0) must reach past the first mesh ring
  double polar_tol = 1e-6;
  int polar_samples = 64;
  double ode_tol = 1e-6;
  double b_spread_tol = 0.1;
  double b_spread_from = 3.0;
  double hausdorff_tol = 0.05;
};

struct BlowupConfig {
  int k = 8;
  double delta_max_fraction = 0.25;
  int oversample = 8;
  int max_depth = 3;
  double fixture_a = -0.985;
  double fixture_R = 2.0;
  int fixture_level = 7;
};

struct RunConfig {
  ProfileConfig profile;
  std::string perturbation = "identity";
  double perturbation_amplitude = 0.0;
  int dim = 3;
  CurveConfig curve;
  int level = 5;
  std::vector<double> schedule{1, 2, 3, 4, 5, 6};
  SolveOptions solver;
  ExpansionOptions expansion; ///< level, solve and blowup are filled from the fields above
  BlowupConfig blowup;
  VerifyConfig verify;
  std::string output_dir = "runs";
  std::uint64_t seed = 0;
  std::filesystem::path base_dir; ///< directory of the config file, for relative paths
};

namespace detail {

// Reads fields of one JSON object, remembering which were used so that
// anything left over is reported with its full path.
class FieldReader {
public:
  FieldReader(ojson j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
    if (!j_.is_object())
      fail(path_.empty() ? "config" : path_, "must be an object");
  }

  bool has(const std::string &key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T> void get(const std::string &key, T &out) {
    used_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null())
      return;
    const auto &v = j_.at(key);
    const std::string where = at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean())
        fail(where, "must be a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer())
        fail(where, "must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned())
          out = v.get<T>();
        else if (v.get<std::int64_t>() < 0)
          fail(where, "must be non-negative");
        else
          out = static_cast<T>(v.get<std::int64_t>());
      } else {
        out = v.get<T>();
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number())
        fail(where, "must be a number");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string())
        fail(where, "must be a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array())
        fail(where, "must be an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
          fail(where + "[" + std::to_string(i) + "]", "must be a number");
        out.push_back(v[i].get<double>());
      }
    }
  }

  /// Sub-object, or an empty object when absent.
  ojson child(const std::string &key) {
    used_.insert(key);
    return has(key) ? j_.at(key) : ojson::object();
  }

  std::string at(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto &[k, v] : j_.items())
      if (!used_.count(k))
        fail(at(k), "unknown field");
  }

  [[noreturn]] static void fail(const std::string &where, const std::string &what) {
    throw ConfigError("config: " + where + ": " + what);
  }

private:
  ojson j_;
  std::string path_;
  std::set<std::string> used_;
};

inline void require_positive(double v, const std::string &where) {
  if (!(v > 0.0))
    FieldReader::fail(where, "must be positive");
}

inline void read_profile(const ojson &j, ProfileConfig &p) {
  FieldReader r(j, "profile");
  r.get("kind", p.kind);
  if (p.kind == "constant") {
    r.get("value", p.value);
    if (!(p.value < 0.0))
      FieldReader::fail("profile.value", "curvature must be negative (got " +
                                             std::to_string(p.value) + ")");
    p.a = std::sqrt(-p.value);
  } else if (p.kind == "sampled") {
    r.get("grid", p.grid);
    r.get("values", p.values);
  } else if (p.kind == "closed-form") {
    r.get("id", p.id);
    r.get("params", p.params);
  } else {
    FieldReader::fail("profile.kind", "must be one of constant, sampled, closed-form");
  }
  r.get("s_max", p.s_max);
  r.get("tol", p.tol);
  require_positive(p.s_max, "profile.s_max");
  require_positive(p.tol, "profile.tol");

  // defaults that depend on the profile itself
  CurvatureProfile probe = [&] {
    try {
      if (p.kind == "constant")
        return CurvatureProfile::constant(p.value);
      if (p.kind == "sampled")
        return CurvatureProfile(SampledCurvature{p.grid, p.values}, 0.0, false);
      return CurvatureProfile(ClosedFormCurvature{p.id, p.params}, 0.0, false);
    } catch (const DomainError &e) {
      FieldReader::fail("profile", e.what());
    }
  }();
  double sup = -std::numeric_limits<double>::infinity();
  for (double s : probe.probe_points(p.s_max))
    sup = std::max(sup, probe(s));
  if (!(sup < 0.0))
    FieldReader::fail("profile", "curvature must be negative everywhere (sup k = " +
                                     std::to_string(sup) + ")");
  if (p.kind != "constant") {
    p.a = std::sqrt(-sup);
    p.monotone = probe.sampled_nonincreasing(p.s_max);
  }
  r.get("a", p.a);
  r.get("monotone", p.monotone);
  if (!(p.a > 0.0))
    FieldReader::fail("profile.a", "must be positive: the ball model needs k <= -a^2 with a > 0");
  r.finish();
}

inline CurvatureProfile build_profile_unchecked(const ProfileConfig &p) {
  if (p.kind == "constant")
    return CurvatureProfile({ConstantCurvature{p.value}}, p.a, true);
  if (p.kind == "sampled")
    return CurvatureProfile(SampledCurvature{p.grid, p.values}, p.a, p.monotone);
  return CurvatureProfile(ClosedFormCurvature{p.id, p.params}, p.a, p.monotone);
}

inline void read_curve(const ojson &j, CurveConfig &c) {
  if (j.is_string()) {
    c.builtin = j.get<std::string>();
  } else {
    FieldReader r(j, "curve");
    r.get("builtin", c.builtin);
    r.get("file", c.file);
    r.get("samples", c.samples);
    r.get("beta", c.beta);
    r.get("tilt", c.tilt);
    r.get("q", c.q);
    r.get("amp", c.amp);
    r.finish();
    if (!c.file.empty() && r.has("builtin"))
      FieldReader::fail("curve", "give either builtin or file, not both");
    if (!c.file.empty())
      c.builtin.clear();
  }
  if (c.file.empty() && c.builtin != "equator" && c.builtin != "tilted-circle" &&
      c.builtin != "torus-knot-projection")
    FieldReader::fail("curve.builtin",
                      "must be one of equator, tilted-circle, torus-knot-projection");
  if (c.samples < 8)
    FieldReader::fail("curve.samples", "must be at least 8");
}

inline void read_solver(const ojson &j, SolveOptions &s) {
  FieldReader r(j, "solver");
  r.get("max_iterations", s.max_iterations);
  r.get("gtol", s.gtol);
  r.get("ftol", s.ftol);
  r.get("stall_window", s.stall_window);
  r.get("memory", s.memory);
  r.get("max_gap_factor", s.max_gap_factor);
  r.get("optimize_params", s.optimize_params);
  r.finish();
  if (s.max_iterations < 1 || s.stall_window < 1 || s.memory < 1)
    FieldReader::fail("solver", "max_iterations, stall_window and memory must be >= 1");
  if (s.max_gap_factor != 0.0 && s.max_gap_factor < 1.0)
    FieldReader::fail("solver.max_gap_factor", "must be 0 (off) or at least 1");
}

inline void read_expansion(const ojson &j, ExpansionOptions &e) {
  FieldReader r(j, "expansion");
  r.get("rho", e.rho);
  r.get("area_step", e.area_step);
  r.get("area_tol", e.area_tol);
  r.get("recenter", e.recenter);
  r.get("window", e.window);
  r.get("threshold", e.threshold);
  r.get("clip_depth", e.clip.max_depth);
  r.get("clip_rel_tol", e.clip.rel_tol);
  r.finish();
  require_positive(e.rho, "expansion.rho");
  require_positive(e.area_step, "expansion.area_step");
}

inline void read_blowup(const ojson &j, BlowupConfig &b) {
  FieldReader r(j, "blowup");
  r.get("k", b.k);
  r.get("delta_max_fraction", b.delta_max_fraction);
  r.get("oversample", b.oversample);
  r.get("max_depth", b.max_depth);
  r.get("fixture_a", b.fixture_a);
  r.get("fixture_R", b.fixture_R);
  r.get("fixture_level", b.fixture_level);
  r.finish();
  if (b.k < 2)
    FieldReader::fail("blowup.k", "must be at least 2");
  if (!(std::abs(b.fixture_a) < 1.0))
    FieldReader::fail("blowup.fixture_a", "must lie in (-1, 1)");
}

inline void read_verify(const ojson &j, VerifyConfig &v) {
  FieldReader r(j, "verify");
  r.get("ratio_tol", v.ratio_tol);
  r.get("capacity_rho", v.capacity_rho);
  r.get("capacity_tol", v.capacity_tol);
  r.get("radial_tol", v.radial_tol);
  r.get("hessian_samples", v.hessian_samples);
  r.get("hessian_tol", v.hessian_tol);
  r.get("oscillation_s", v.oscillation_s);
  r.get("polar_tol", v.polar_tol);
  r.get("polar_samples", v.polar_samples);
  r.get("ode_tol", v.ode_tol);
  r.get("b_spread_tol", v.b_spread_tol);
  r.get("b_spread_from", v.b_spread_from);
  r.get("hausdorff_tol", v.hausdorff_tol);
  r.finish();
}

} // namespace detail

struct ConfigOverrides {
  std::optional<int> level;
  std::optional<std::vector<double>> schedule;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

/// Parses and validates a config document; overrides are applied before
/// the dependent defaults are resolved.
inline RunConfig parse_config(const ojson &j, const ConfigOverrides &ov = {},
                              const std::filesystem::path &base_dir = {}) {
  RunConfig c;
  c.base_dir = base_dir;
  detail::FieldReader r(j, "");
  std::string schema;
  r.get("schema", schema);
  if (schema != kConfigSchema)
    detail::FieldReader::fail("schema", std::string("must be \"") + kConfigSchema + "\"");
  detail::read_profile(r.child("profile"), c.profile);
  try {
    detail::build_profile_unchecked(c.profile).validate(c.profile.s_max);
  } catch (const DomainError &e) {
    detail::FieldReader::fail("profile", e.what());
  }
  {
    detail::FieldReader p(r.child("perturbation"), "perturbation");
    p.get("name", c.perturbation);
    const bool amp_given = p.has("amplitude");
    p.get("amplitude", c.perturbation_amplitude);
    p.finish();
    const auto cat = perturbation_catalog();
    const auto it = std::find_if(cat.begin(), cat.end(),
                                 [&](const auto &info) { return info.name == c.perturbation; });
    if (it == cat.end())
      detail::FieldReader::fail("perturbation.name",
                                "must be one of identity, diagonal-bump, rotation-shear");
    if (!amp_given)
      c.perturbation_amplitude = it->default_amplitude;
  }
  r.get("dim", c.dim);
  if (c.dim < 3)
    detail::FieldReader::fail("dim", "must be at least 3");
  if (r.has("curve"))
    detail::read_curve(r.child("curve"), c.curve);
  else
    r.child("curve");
  r.get("level", c.level);
  r.get("schedule", c.schedule);
  detail::read_solver(r.child("solver"), c.solver);
  detail::read_expansion(r.child("expansion"), c.expansion);
  detail::read_blowup(r.child("blowup"), c.blowup);
  const ojson vj = r.child("verify");
  const bool ratio_given = vj.contains("ratio_tol") && !vj.at("ratio_tol").is_null();
  detail::read_verify(vj, c.verify);
  {
    detail::FieldReader o(r.child("output"), "output");
    o.get("dir", c.output_dir);
    o.finish();
  }
  r.get("seed", c.seed);
  r.finish();

  if (ov.level)
    c.level = *ov.level;
  if (ov.schedule)
    c.schedule = *ov.schedule;
  if (ov.seed)
    c.seed = *ov.seed;
  if (ov.output_dir)
    c.output_dir = *ov.output_dir;

  if (c.level < 0 || c.level > 9)
    detail::FieldReader::fail("level", "must lie in [0, 9]");
  if (c.schedule.empty())
    detail::FieldReader::fail("schedule", "must not be empty");
  for (std::size_t i = 0; i < c.schedule.size(); ++i)
    if (!(c.schedule[i] > 0.0) || (i > 0 && !(c.schedule[i] > c.schedule[i - 1])))
      detail::FieldReader::fail("schedule", "must be positive and strictly increasing");
  if (c.schedule.back() >= c.profile.s_max)
    detail::FieldReader::fail("schedule", "largest R must stay below profile.s_max");
  if (!ratio_given)
    c.verify.ratio_tol = default_ratio_tol(c.level);

  c.expansion.level = c.level;
  c.expansion.solve = c.solver;
  c.expansion.blowup.k = c.blowup.k;
  c.expansion.blowup.delta_max_fraction = c.blowup.delta_max_fraction;
  c.expansion.blowup.oversample = c.blowup.oversample;
  c.expansion.blowup_depth = c.blowup.max_depth;
  return c;
}

inline RunConfig load_config(const std::filesystem::path &path, const ConfigOverrides &ov = {}) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("config: cannot open " + path.string());
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const ojson::parse_error &e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return parse_config(j, ov, path.parent_path());
}

/// Echo-back with every default spelled out.
inline ojson to_json(const RunConfig &c) {
  ojson j;
  j["schema"] = kConfigSchema;
  ojson p;
  p["kind"] = c.profile.kind;
  if (c.profile.kind == "constant") {
    p["value"] = c.profile.value;
  } else if (c.profile.kind == "sampled") {
    p["grid"] = c.profile.grid;
    p["values"] = c.profile.values;
  } else {
    p["id"] = c.profile.id;
    p["params"] = c.profile.params;
  }
  p["a"] = c.profile.a;
  p["monotone"] = c.profile.monotone;
  p["s_max"] = c.profile.s_max;
  p["tol"] = c.profile.tol;
  j["profile"] = p;
  j["perturbation"] = {{"name", c.perturbation}, {"amplitude", c.perturbation_amplitude}};
  j["dim"] = c.dim;
  ojson cv;
  if (!c.curve.file.empty()) {
    cv["file"] = c.curve.file;
  } else {
    cv["builtin"] = c.curve.builtin;
    cv["samples"] = c.curve.samples;
    if (c.curve.builtin == "tilted-circle") {
      cv["beta"] = c.curve.beta;
      cv["tilt"] = c.curve.tilt;
    } else if (c.curve.builtin == "torus-knot-projection") {
      cv["q"] = c.curve.q;
      cv["amp"] = c.curve.amp;
    }
  }
  j["curve"] = cv;
  j["level"] = c.level;
  j["schedule"] = c.schedule;
  j["solver"] = {{"max_iterations", c.solver.max_iterations}, {"gtol", c.solver.gtol},
                 {"ftol", c.solver.ftol},
                 {"stall_window", c.solver.stall_window},
                 {"memory", c.solver.memory},
                 {"max_gap_factor", c.solver.max_gap_factor},
                 {"optimize_params", c.solver.optimize_params}};
  const auto &e = c.expansion;
  j["expansion"] = {{"rho", e.rho},       {"area_step", e.area_step},
                    {"area_tol", e.area_tol}, {"recenter", e.recenter},
                    {"window", e.window}, {"threshold", e.threshold},
                    {"clip_depth", e.clip.max_depth}, {"clip_rel_tol", e.clip.rel_tol}};
  const auto &b = c.blowup;
  j["blowup"] = {{"k", b.k},
                 {"delta_max_fraction", b.delta_max_fraction},
                 {"oversample", b.oversample},
                 {"max_depth", b.max_depth},
                 {"fixture_a", b.fixture_a},
                 {"fixture_R", b.fixture_R},
                 {"fixture_level", b.fixture_level}};
  const auto &v = c.verify;
  j["verify"] = {{"ratio_tol", v.ratio_tol},
                 {"capacity_rho", v.capacity_rho},
                 {"capacity_tol", v.capacity_tol},
                 {"radial_tol", v.radial_tol},
                 {"hessian_samples", v.hessian_samples},
                 {"hessian_tol", v.hessian_tol},
                 {"oscillation_s", v.oscillation_s},
                 {"polar_tol", v.polar_tol},
                 {"polar_samples", v.polar_samples},
                 {"ode_tol", v.ode_tol},
                 {"b_spread_tol", v.b_spread_tol},
                 {"b_spread_from", v.b_spread_from},
                 {"hausdorff_tol", v.hausdorff_tol}};
  j["output"] = {{"dir", c.output_dir}};
  j["seed"] = c.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Building the pipeline objects

inline CurvatureProfile build_profile(const ProfileConfig &p) {
  return detail::build_profile_unchecked(p);
}

inline std::shared_ptr<const AmbientMetric> build_metric(const RunConfig &c,
                                                         std::shared_ptr<const BallModel> model) {
  if (c.perturbation == "identity")
    return std::make_shared<const AmbientMetric>(std::move(model), c.dim);
  return std::make_shared<const AmbientMetric>(
      std::move(model), c.dim, make_perturbation(c.perturbation, c.dim, c.perturbation_amplitude));
}

inline AsymptoticCurve build_curve(const RunConfig &c) {
  const auto &cc = c.curve;
  AsymptoticCurve curve;
  if (!cc.file.empty()) {
    const auto path = std::filesystem::path(cc.file).is_absolute() ? std::filesystem::path(cc.file)
                                                                    : c.base_dir / cc.file;
    std::ifstream in(path);
    if (!in)
      throw ConfigError("config: curve.file: cannot open " + path.string());
    curve = read_curve_samples(in, path.stem().string());
  } else if (cc.builtin == "equator") {
    curve = equator_curve(cc.samples);
  } else if (cc.builtin == "tilted-circle") {
    curve = tilted_circle_curve(cc.samples, cc.beta, cc.tilt);
  } else {
    curve = torus_knot_curve(cc.samples, cc.q, cc.amp);
  }
  if (curve.dim() == c.dim)
    return curve;
  // built-ins live in R^3; pad with zeros for higher dimensions
  require(curve.dim() < c.dim, "config: curve dimension exceeds dim");
  for (auto &p : curve.samples) {
    Vec q = Vec::Zero(c.dim);
    q.head(p.size()) = p;
    p = q;
  }
  return curve;
}

} // namespace hplateau
