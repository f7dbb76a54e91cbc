// pitchfuse: simulate noisy IMU traces, run pitch estimators, score them.
//
//   pitchfuse simulate   --config run.cfg [--seed N] [--out DIR]
//   pitchfuse fuse       IMU.csv --estimator NAME [--config run.cfg] [--out DIR]
//   pitchfuse eval       ESTIMATES.csv TRUTH.csv [--seed N]
//   pitchfuse experiment --config run.cfg [--seed N] [--out DIR]
#include <CLI11.hpp>

#include <iostream>

#include "pitchfuse/commands.hpp"

int main(int argc, char** argv) {
  using namespace pitchfuse;

  CLI::App app{"Pitch estimation from simulated IMU data"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::string config, out, estimator;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_config_required) {
    auto* c = sub->add_option("--config", config, "run configuration (key = value)");
    if (with_config_required) c->required();
    sub->add_option("--seed", seed, "noise seed, overrides noise.seed");
    sub->add_option("--out", out, "output directory");
  };

  auto* simulate = app.add_subcommand("simulate", "write truth and IMU CSV traces");
  add_common(simulate, true);

  auto* fuse = app.add_subcommand("fuse", "run one estimator over an IMU CSV");
  add_common(fuse, false);
  fuse->add_option("imu", opt.inputs, "IMU CSV (t,ax,ay,az,gx,gy,gz)")->required()->expected(1);
  fuse->add_option("--estimator", estimator, "complementary | gyro_only | accel_only | kalman")->required();

  auto* eval = app.add_subcommand("eval", "score an estimates CSV against a truth CSV");
  eval->add_option("files", opt.inputs, "ESTIMATES.csv TRUTH.csv")->required()->expected(2);
  eval->add_option("--seed", seed, "seed recorded in the report");

  auto* experiment = app.add_subcommand("experiment", "simulate, fuse with every estimator, report");
  add_common(experiment, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  auto seen = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
  CLI::App* active = app.get_subcommands().front();
  if (seen(active, "--seed")) opt.seed = seed;
  if (active != eval) {
    if (seen(active, "--config")) opt.config = config;
    if (seen(active, "--out")) opt.out = out;
  }
  if (active == fuse) opt.estimator = estimator;

  if (active == simulate) return cmd_simulate(opt, std::cout, std::cerr);
  if (active == fuse) return cmd_fuse(opt, std::cout, std::cerr);
  if (active == eval) return cmd_eval(opt, std::cout, std::cerr);
  return cmd_experiment(opt, std::cout, std::cerr);
}
