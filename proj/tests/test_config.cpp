#include "hplateau/hplateau.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace hplateau;

namespace {

ojson minimal() {
  return ojson::parse(R"({"schema": "hplateau.run/1",
                          "profile": {"kind": "constant", "value": -1.0},
                          "curve": "equator", "level": 5, "schedule": [1, 2, 3, 4, 5, 6]})");
}

std::string error_of(const ojson &j) {
  try {
    parse_config(j);
  } catch (const ConfigError &e) {
    return e.what();
  }
  return {};
}

std::filesystem::path scratch(const std::string &name) {
  const auto p = std::filesystem::temp_directory_path() / ("hplateau-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

} // namespace

TEST(Config, MinimalIsValidWithExplicitDefaults) {
  const auto c = parse_config(minimal());
  EXPECT_EQ(c.profile.kind, "constant");
  EXPECT_DOUBLE_EQ(c.profile.a, 1.0);
  EXPECT_EQ(c.curve.builtin, "equator");
  EXPECT_EQ(c.level, 5);
  EXPECT_EQ(c.schedule, (std::vector<double>{1, 2, 3, 4, 5, 6}));
  EXPECT_DOUBLE_EQ(c.verify.ratio_tol, default_ratio_tol(5));
  const auto echo = to_json(c);
  for (const char *key : {"profile", "perturbation", "curve", "level", "schedule", "solver",
                          "expansion", "blowup", "verify", "output", "seed"})
    EXPECT_TRUE(echo.contains(key)) << key;
  EXPECT_TRUE(echo.at("solver").contains("max_gap_factor"));
}

TEST(Config, EchoIsAFixedPoint) {
  const auto once = to_json(parse_config(minimal()));
  const auto twice = to_json(parse_config(once));
  EXPECT_EQ(once.dump(2), twice.dump(2));
}

TEST(Config, RejectsFlatAndPositiveCurvature) {
  auto j = minimal();
  j["profile"]["value"] = 0.0;
  EXPECT_NE(error_of(j).find("profile.value"), std::string::npos);
  j["profile"]["value"] = 0.3;
  EXPECT_NE(error_of(j).find("curvature must be negative"), std::string::npos);
  j = minimal();
  j["profile"]["a"] = 0.0;
  EXPECT_NE(error_of(j).find("profile.a"), std::string::npos);
}

TEST(Config, UnknownFieldsNameTheirPath) {
  auto j = minimal();
  j["solver"] = {{"gtol", 1e-8}, {"gtoll", 1.0}};
  EXPECT_NE(error_of(j).find("solver.gtoll"), std::string::npos) << error_of(j);
  j = minimal();
  j["levels"] = 5;
  EXPECT_NE(error_of(j).find("levels"), std::string::npos);
}

TEST(Config, ScheduleAndOverrides) {
  auto j = minimal();
  j["schedule"] = {1, 3, 2};
  EXPECT_NE(error_of(j).find("schedule"), std::string::npos);
  ConfigOverrides ov;
  ov.level = 3;
  ov.schedule = std::vector<double>{0.5, 1.0};
  ov.seed = 9;
  const auto c = parse_config(minimal(), ov);
  EXPECT_EQ(c.level, 3);
  EXPECT_EQ(c.expansion.level, 3);
  EXPECT_DOUBLE_EQ(c.verify.ratio_tol, default_ratio_tol(3));
  EXPECT_EQ(c.schedule.back(), 1.0);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, SampledProfileAndBadSchema) {
  auto j = minimal();
  j["profile"] = {{"kind", "sampled"}, {"grid", {0.0, 5.0, 30.0}}, {"values", {-1.0, -2.0, -2.0}}};
  const auto c = parse_config(j);
  EXPECT_DOUBLE_EQ(c.profile.a, 1.0);
  EXPECT_TRUE(c.profile.monotone);
  j["schema"] = "other/1";
  EXPECT_NE(error_of(j).find("schema"), std::string::npos);
}

TEST(Io, CsvAndObjFormats) {
  CsvTable t({"a", "b"});
  t.row({1.0, 0.1});
  EXPECT_EQ(t.str(), "a,b\n1,0.10000000000000001\n");
  EXPECT_THROW(t.row({1.0}), DomainError);
  const auto model = BallModel::build(std::make_shared<const ComparisonSolution>(
      solve_comparison(CurvatureProfile::hyperbolic(1.0), 30.0, 1e-10)));
  auto metric = std::make_shared<const AmbientMetric>(model, 3);
  const auto map = initial_map(make_geometry(0), build_gamma_R(equator_curve(), *model, 1.0), metric);
  std::istringstream obj(obj_string(map));
  std::string line;
  int v = 0, f = 0;
  while (std::getline(obj, line)) {
    v += line.rfind("v ", 0) == 0;
    if (line.rfind("f ", 0) == 0) {
      ++f;
      int a, b, c;
      ASSERT_EQ(std::sscanf(line.c_str(), "f %d %d %d", &a, &b, &c), 3);
      EXPECT_GE(std::min({a, b, c}), 1);
      EXPECT_LE(std::max({a, b, c}), 7);
    }
  }
  EXPECT_EQ(v, 7);
  EXPECT_EQ(f, 6);
}

TEST(Io, RunDirectoriesAreFresh) {
  const auto root = scratch("rundirs");
  const auto a = make_run_dir(root, "plateau"), b = make_run_dir(root, "plateau");
  EXPECT_NE(a, b);
  EXPECT_EQ(a.filename().string().rfind("plateau-", 0), 0u);
  std::filesystem::remove_all(root);
}

TEST(Commands, PlateauRunWritesArtifactsAndVerifies) {
  const auto root = scratch("plateau");
  ConfigOverrides ov;
  ov.level = 3;
  ov.schedule = std::vector<double>{2.0};
  const auto cfg = parse_config(minimal(), ov);
  std::ostringstream log;
  const auto res = cmd_plateau(cfg, make_run_dir(root, "plateau"), log);
  for (const char *f : {"config.json", "manifest.json", "surface.obj", "plateau.json",
                        "boundary.csv", "monotonicity.csv"})
    EXPECT_TRUE(std::filesystem::exists(res.run_dir / f)) << f;
  const auto back = manifest_from_json(read_json(res.run_dir / "manifest.json"));
  ASSERT_EQ(back.size(), res.manifest.size());
  for (std::size_t i = 0; i < back.size(); ++i)
    EXPECT_EQ(back[i].tag, res.manifest[i].tag);
  EXPECT_EQ(back.front().tag, "mon");
  // the echo-back reloads to the same config
  const auto again = load_config(res.run_dir / "config.json");
  EXPECT_EQ(to_json(again).dump(), to_json(cfg).dump());
  std::filesystem::remove_all(root);
}

TEST(Commands, ExpandThenVerifyAgree) {
  const auto root = scratch("expand");
  ConfigOverrides ov;
  ov.level = 2;
  ov.schedule = std::vector<double>{1.0, 2.0};
  auto j = minimal();
  j["curve"] = "tilted-circle";
  const auto cfg = parse_config(j, ov);
  std::ostringstream log;
  const auto res = cmd_expand(cfg, make_run_dir(root, "expand"), log);
  for (const char *f : {"ledger.json", "entries.csv", "areas.csv", "surface_R1.obj", "surface_R2.obj"})
    EXPECT_TRUE(std::filesystem::exists(res.run_dir / f)) << f;
  const auto ver = cmd_verify(res.run_dir, make_run_dir(root, "verify"), log);
  const auto doc = read_json(ver.run_dir / "verify.json");
  EXPECT_TRUE(doc.contains("mismatches"));
  EXPECT_TRUE(doc.at("mismatches").empty()) << doc.dump();
  std::filesystem::remove_all(root);
}
