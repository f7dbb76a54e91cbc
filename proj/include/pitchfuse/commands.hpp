// Batch commands behind the `pitchfuse` CLI: simulate, fuse, eval, experiment.
//
// Each command takes its options and two streams and returns the process
// exit code: 0 success, 1 usage/config error, 2 data error. Diagnostics go
// to `err` only.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pitchfuse/filters.hpp"
#include "pitchfuse/imu_sim.hpp"
#include "pitchfuse/io.hpp"

namespace pitchfuse {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

struct CommandOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> estimator;
  std::vector<std::string> inputs;  // positional file arguments
};

namespace detail {

inline RunConfig resolve_config(const CommandOptions& opt) {
  RunConfig cfg = opt.config ? load_config(*opt.config) : RunConfig{};
  if (opt.seed) cfg.noise.seed = *opt.seed;
  if (opt.out) cfg.output_dir = *opt.out;
  return cfg;
}

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw DataError("cannot create output directory '" + dir + "'");
  }
  return dir;
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  auto out = open_out(path.string());
  fn(out);
  out.flush();
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline std::string estimates_filename(EstimatorKind kind) {
  return "estimates_" + std::string(to_string(kind)) + ".csv";
}

/// Maps the error hierarchy onto exit codes; `stage` prefixes the message.
template <typename Fn>
int guarded(std::ostream& err, const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << stage << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << stage << ": " << e.what() << '\n';
    return kExitData;
  }
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Writes truth.csv, imu_ideal.csv and imu.csv (noisy) into the output dir.
inline int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, "simulate", [&] {
    const RunConfig cfg = detail::resolve_config(opt);
    const Scenario sc = simulate(cfg.trajectory, cfg.noise);
    const auto dir = detail::prepare_dir(cfg.output_dir);
    detail::write_file(dir / "truth.csv", [&](std::ostream& os) { write_truth_csv(os, sc.truth); });
    detail::write_file(dir / "imu_ideal.csv", [&](std::ostream& os) { write_imu_csv(os, sc.ideal); });
    detail::write_file(dir / "imu.csv", [&](std::ostream& os) { write_imu_csv(os, sc.noisy); });
    out << "wrote " << sc.truth.size() << " samples to " << dir.string() << '\n';
    return int{kExitOk};
  });
}

/// Runs one estimator over an IMU CSV; writes estimates_<name>.csv.
inline int cmd_fuse(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, "fuse", [&] {
    if (opt.inputs.size() != 1) throw ConfigError("expected exactly one IMU CSV path");
    if (!opt.estimator) throw ConfigError("--estimator is required");
    EstimatorKind kind;
    try {
      kind = parse_estimator(*opt.estimator);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const RunConfig cfg = detail::resolve_config(opt);

    auto in = detail::open_in(opt.inputs[0]);
    const auto samples = read_imu_csv(in);
    const EstimateSeries est = run_estimator(samples, kind, cfg.estimator_params());

    const auto dir = detail::prepare_dir(cfg.output_dir);
    const auto path = dir / detail::estimates_filename(kind);
    detail::write_file(path, [&](std::ostream& os) { write_estimates_csv(os, est); });
    out << "wrote " << est.pitch.size() << " estimates to " << path.string() << '\n';
    return int{kExitOk};
  });
}

/// Compares an estimates CSV against a truth CSV and prints the metrics.
inline int cmd_eval(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, "eval", [&] {
    if (opt.inputs.size() != 2) throw ConfigError("expected <estimates.csv> <truth.csv>");
    auto est_in = detail::open_in(opt.inputs[0]);
    auto truth_in = detail::open_in(opt.inputs[1]);
    const EstimateSeries est = read_estimates_csv(est_in);
    const auto truth = read_truth_csv(truth_in);

    MetricsReport report;
    report.seed = opt.seed;
    report.samples = truth.size();
    report.duration = truth.back().t - truth.front().t;
    report.dt = truth.size() > 1 ? report.duration / static_cast<double>(truth.size() - 1) : 0.0;
    try {
      report.entries.push_back(evaluate(est, truth));
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
    std::ostringstream text;
    write_report(text, report, /*prefix_names=*/false);
    out << text.str();
    return int{kExitOk};
  });
}

/// Results of one seed of the experiment.
struct ExperimentRun {
  Scenario scenario;
  std::vector<EstimateSeries> estimates;
  MetricsReport report;
};

inline ExperimentRun run_experiment_seed(const RunConfig& cfg, std::uint64_t seed) {
  NoiseConfig noise = cfg.noise;
  noise.seed = seed;
  ExperimentRun run;
  try {
    run.scenario = simulate(cfg.trajectory, noise);
  } catch (const std::exception& e) {
    throw DataError(std::string("simulate: ") + e.what());
  }
  EstimatorParams params = cfg.estimator_params();
  params.noise = noise;

  run.report.seed = seed;
  run.report.dt = cfg.trajectory.dt;
  run.report.duration = run.scenario.truth.back().t;
  run.report.samples = run.scenario.truth.size();
  for (auto kind : cfg.estimators) {
    EstimateSeries est;
    try {
      est = run_estimator(run.scenario.noisy, kind, params);
    } catch (const std::exception& e) {
      throw DataError("fuse(" + std::string(to_string(kind)) + "): " + e.what());
    }
    score(est, run.scenario.truth);
    run.report.entries.push_back(evaluate(est, run.scenario.truth));
    run.estimates.push_back(std::move(est));
  }
  return run;
}

/// Estimator names ordered by ascending rmse; ties keep config order.
inline std::string ranking(std::vector<EstimatorMetrics> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.rmse < b.rmse; });
  std::string s;
  for (const auto& e : entries) {
    if (!s.empty()) s += ',';
    s += e.name;
  }
  return s;
}

/// Per-seed reports in seed order. Seeds are spread over worker threads;
/// the result does not depend on scheduling.
inline std::vector<MetricsReport> run_seed_sweep(const RunConfig& cfg, std::uint64_t first_seed, std::uint64_t count) {
  std::vector<MetricsReport> reports(count);
  const std::uint64_t workers = std::max<std::uint64_t>(1, std::min<std::uint64_t>(count, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> jobs;
  for (std::uint64_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::uint64_t i = w; i < count; i += workers) {
        reports[i] = run_experiment_seed(cfg, first_seed + i).report;
      }
    }));
  }
  for (auto& j : jobs) j.get();
  return reports;
}

/// simulate -> fuse (all configured estimators) -> eval. Writes every CSV for
/// the configured seed plus report.txt, and prints the report. With
/// experiment.seeds > 1 the report also carries medians over consecutive seeds.
inline int cmd_experiment(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, "experiment", [&] {
    const RunConfig cfg = detail::resolve_config(opt);
    const ExperimentRun run = run_experiment_seed(cfg, cfg.noise.seed);

    const auto dir = detail::prepare_dir(cfg.output_dir);
    detail::write_file(dir / "truth.csv", [&](std::ostream& os) { write_truth_csv(os, run.scenario.truth); });
    detail::write_file(dir / "imu_ideal.csv", [&](std::ostream& os) { write_imu_csv(os, run.scenario.ideal); });
    detail::write_file(dir / "imu.csv", [&](std::ostream& os) { write_imu_csv(os, run.scenario.noisy); });
    for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
      detail::write_file(dir / detail::estimates_filename(cfg.estimators[i]),
                         [&](std::ostream& os) { write_estimates_csv(os, run.estimates[i]); });
    }

    std::ostringstream text;
    write_report(text, run.report);
    text << "ranking = " << ranking(run.report.entries) << '\n';

    if (cfg.seeds > 1) {
      const auto reports = run_seed_sweep(cfg, cfg.noise.seed, cfg.seeds);
      text << "seeds = " << cfg.seeds << '\n';
      std::vector<EstimatorMetrics> medians;
      for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
        std::vector<double> r, d;
        for (const auto& rep : reports) {
          r.push_back(rep.entries[i].rmse);
          d.push_back(rep.entries[i].final_drift);
        }
        const std::string name(to_string(cfg.estimators[i]));
        medians.push_back({name, detail::median(r), detail::median(d), 0.0});
        text << name << ".median_rmse = " << format_double(detail::median(r)) << '\n';
        text << name << ".median_final_drift = " << format_double(detail::median(d)) << '\n';
      }
      text << "median_ranking = " << ranking(medians) << '\n';
    }

    detail::write_file(dir / "report.txt", [&](std::ostream& os) { os << text.str(); });
    out << text.str();
    return int{kExitOk};
  });
}

}  // namespace pitchfuse
