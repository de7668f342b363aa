#include "hplateau/hplateau.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::vector<double> parse_schedule(const std::string &csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
      ++used;
    if (used == 0 || used != item.size())
      throw hplateau::ConfigError("--schedule: '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

void print_manifest(const hplateau::CommandResult &res) {
  for (const auto &e : res.manifest)
    std::cout << (e.result.pass ? "  ok    " : "  FAIL  ") << e.tag << "  value " << e.result.value
              << "  tol " << e.result.tolerance << "\n";
  std::cout << "run directory: " << res.run_dir.string() << "\n";
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Asymptotic Plateau problem experiments in Hadamard ball models"};
  app.require_subcommand(1);

  std::string config_path, out_dir, schedule_csv, run_path;
  std::uint64_t seed = 0;
  int level = -1;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "parent directory for the run directory");
    sub->add_option("--seed", seed, "seed for randomized spot checks");
    sub->add_option("--level", level, "mesh refinement level (overrides the config)");
    sub->add_option("--schedule", schedule_csv, "comma-separated R values (overrides the config)");
  };
  auto *ode = app.add_subcommand("ode-check", "comparison ODE and its growth properties");
  auto *ball = app.add_subcommand("ball-model", "ball coordinates and conformal factor tables");
  auto *plateau = app.add_subcommand("plateau", "one Plateau solve at the last scheduled R");
  auto *expand = app.add_subcommand("expand", "solve along the R schedule and keep the ledger");
  auto *verify = app.add_subcommand("verify", "re-check a prior run directory without solving");
  auto *blowup = app.add_subcommand("blowup-demo", "rescale the synthetic concentration fixture");
  for (auto *sub : {ode, ball, plateau, expand, blowup})
    add_common(sub);
  verify->add_option("run", run_path, "prior run directory")->required()->check(CLI::ExistingDirectory);
  verify->add_option("--out", out_dir, "parent directory for the run directory");

  CLI11_PARSE(app, argc, argv);

  try {
    using namespace hplateau;
    auto *sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "verify") {
      const auto prior = std::filesystem::path(run_path);
      const auto dir = make_run_dir(out_dir.empty() ? prior.parent_path() : std::filesystem::path(out_dir), "verify");
      const auto res = cmd_verify(prior, dir);
      print_manifest(res);
      return res.exit_code;
    }
    ConfigOverrides ov;
    if (sub->count("--level"))
      ov.level = level;
    if (sub->count("--schedule"))
      ov.schedule = parse_schedule(schedule_csv);
    if (sub->count("--seed"))
      ov.seed = seed;
    if (sub->count("--out"))
      ov.output_dir = out_dir;
    const RunConfig cfg = config_path.empty()
                              ? parse_config(ojson{{"schema", kConfigSchema}}, ov)
                              : load_config(config_path, ov);
    const auto dir = make_run_dir(cfg.output_dir, name);
    CommandResult res;
    if (name == "ode-check")
      res = cmd_ode_check(cfg, dir);
    else if (name == "ball-model")
      res = cmd_ball_model(cfg, dir);
    else if (name == "plateau")
      res = cmd_plateau(cfg, dir);
    else if (name == "expand")
      res = cmd_expand(cfg, dir);
    else
      res = cmd_blowup_demo(cfg, dir);
    print_manifest(res);
    return res.exit_code;
  } catch (const hplateau::ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
