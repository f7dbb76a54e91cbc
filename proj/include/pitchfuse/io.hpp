// CSV traces and the flat key-value run configuration.
//
// CSV schemas (header row mandatory, comma separated, '.' decimal point):
//   IMU        t,ax,ay,az,gx,gy,gz
//   truth      t,pitch,pitch_rate
//   estimates  t,pitch_est
// Numbers are written in shortest round-trip form and parsed locale-free.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pitchfuse/filters.hpp"
#include "pitchfuse/imu_sim.hpp"

namespace pitchfuse {

/// Bad or missing configuration / command-line input (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent data files (exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Rows of a numeric CSV with a fixed header.
inline std::vector<std::vector<double>> read_numeric_csv(std::istream& in, std::string_view expected_header) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) {
    throw DataError("line 1: missing header, expected '" + std::string(expected_header) + "'");
  }
  ++lineno;
  if (trim(line) != expected_header) {
    throw DataError("line 1: bad header '" + std::string(trim(line)) + "', expected '" +
                    std::string(expected_header) + "'");
  }
  const std::size_t ncols = split(expected_header, ',').size();
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != ncols) {
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(ncols) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<double> row(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
      if (!parse_double(fields[c], row[c]) || !std::isfinite(row[c])) {
        throw DataError("line " + std::to_string(lineno) + ": bad number '" + std::string(trim(fields[c])) + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
void check_uniform(const std::vector<T>& series) {
  try {
    uniform_spacing(std::span<const T>(series));
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace detail

inline constexpr std::string_view kImuHeader = "t,ax,ay,az,gx,gy,gz";
inline constexpr std::string_view kTruthHeader = "t,pitch,pitch_rate";
inline constexpr std::string_view kEstimateHeader = "t,pitch_est";

inline void write_imu_csv(std::ostream& out, std::span<const ImuSample> samples) {
  out << kImuHeader << '\n';
  for (const auto& s : samples) {
    out << format_double(s.t) << ',' << format_double(s.accel.x) << ',' << format_double(s.accel.y) << ','
        << format_double(s.accel.z) << ',' << format_double(s.gyro.x) << ',' << format_double(s.gyro.y) << ','
        << format_double(s.gyro.z) << '\n';
  }
}

inline void write_truth_csv(std::ostream& out, std::span<const GroundTruthSample> truth) {
  out << kTruthHeader << '\n';
  for (const auto& s : truth) {
    out << format_double(s.t) << ',' << format_double(s.pitch) << ',' << format_double(s.pitch_rate) << '\n';
  }
}

inline void write_estimates_csv(std::ostream& out, const EstimateSeries& est) {
  out << kEstimateHeader << '\n';
  for (std::size_t k = 0; k < est.pitch.size(); ++k) {
    out << format_double(est.times[k]) << ',' << format_double(est.pitch[k]) << '\n';
  }
}

/// Parses an IMU trace; rejects malformed rows and non-uniform spacing.
inline std::vector<ImuSample> read_imu_csv(std::istream& in) {
  std::vector<ImuSample> out;
  for (const auto& r : detail::read_numeric_csv(in, kImuHeader)) {
    out.push_back({r[0], {r[1], r[2], r[3]}, {r[4], r[5], r[6]}});
  }
  if (out.empty()) throw DataError("IMU trace has no samples");
  detail::check_uniform(out);
  return out;
}

inline std::vector<GroundTruthSample> read_truth_csv(std::istream& in) {
  std::vector<GroundTruthSample> out;
  for (const auto& r : detail::read_numeric_csv(in, kTruthHeader)) {
    out.push_back({r[0], r[1], r[2], Vec3{}});
  }
  if (out.empty()) throw DataError("truth trace has no samples");
  return out;
}

inline EstimateSeries read_estimates_csv(std::istream& in, std::string name = "estimate") {
  EstimateSeries out;
  out.name = std::move(name);
  for (const auto& r : detail::read_numeric_csv(in, kEstimateHeader)) {
    out.times.push_back(r[0]);
    out.pitch.push_back(r[1]);
  }
  if (out.pitch.empty()) throw DataError("estimate trace has no samples");
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  TrajectoryConfig trajectory;
  NoiseConfig noise;
  GammaConfig gamma;
  KalmanParams kalman;
  std::vector<EstimatorKind> estimators{std::begin(kAllEstimators), std::end(kAllEstimators)};
  std::string output_dir = "out";
  std::uint64_t seeds = 1;  // experiment: number of consecutive seeds starting at noise.seed

  EstimatorParams estimator_params() const { return {gamma, noise, kalman, std::nullopt}; }
};

inline void validate(const RunConfig& cfg) {
  try {
    validate(cfg.trajectory);
    validate(cfg.noise);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.gamma.accel_scale > 0.0)) throw ConfigError("gamma.accel_scale must be > 0");
  if (cfg.estimators.empty()) throw ConfigError("estimators: at least one estimator is required");
  if (cfg.seeds == 0) throw ConfigError("experiment.seeds must be >= 1");
}

/// Reads `key = value` lines. '#' starts a comment; blank lines are ignored.
/// Every key is optional; unknown keys are rejected.
inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const auto where = "line " + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError(where + "missing value for '" + key + "'");

    auto real = [&](double& dst) {
      if (!detail::parse_double(value, dst) || !std::isfinite(dst)) {
        throw ConfigError(where + "bad number for '" + key + "': '" + std::string(value) + "'");
      }
    };
    auto optional_real = [&](std::optional<double>& dst) {
      double v = 0.0;
      real(v);
      dst = v;
    };
    auto unsigned_int = [&](std::uint64_t& dst) {
      if (!detail::parse_u64(value, dst)) {
        throw ConfigError(where + "bad unsigned integer for '" + key + "': '" + std::string(value) + "'");
      }
    };

    if (key == "trajectory.amplitude") real(cfg.trajectory.amplitude);
    else if (key == "trajectory.frequency") real(cfg.trajectory.frequency);
    else if (key == "trajectory.duration") real(cfg.trajectory.duration);
    else if (key == "trajectory.dt") real(cfg.trajectory.dt);
    else if (key == "noise.sigma_accel") real(cfg.noise.sigma_accel);
    else if (key == "noise.sigma_gyro") real(cfg.noise.sigma_gyro);
    else if (key == "noise.sigma_rw") real(cfg.noise.sigma_rw);
    else if (key == "noise.seed") unsigned_int(cfg.noise.seed);
    else if (key == "gamma.accel_scale") real(cfg.gamma.accel_scale);
    else if (key == "kalman.p0_pitch") real(cfg.kalman.p0_pitch);
    else if (key == "kalman.p0_bias") real(cfg.kalman.p0_bias);
    else if (key == "kalman.q_pitch") optional_real(cfg.kalman.q_pitch);
    else if (key == "kalman.q_bias") optional_real(cfg.kalman.q_bias);
    else if (key == "kalman.r") optional_real(cfg.kalman.r);
    else if (key == "experiment.seeds") unsigned_int(cfg.seeds);
    else if (key == "output.dir") cfg.output_dir = std::string(value);
    else if (key == "estimators") {
      cfg.estimators.clear();
      for (auto name : detail::split(value, ',')) {
        try {
          cfg.estimators.push_back(parse_estimator(detail::trim(name)));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(where + e.what());
        }
      }
    } else {
      throw ConfigError(where + "unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Metrics report
// ---------------------------------------------------------------------------

struct EstimatorMetrics {
  std::string name;
  double rmse = 0.0;
  double final_drift = 0.0;
  double max_abs_error = 0.0;
};

struct MetricsReport {
  std::optional<std::uint64_t> seed;
  double dt = 0.0;
  double duration = 0.0;
  std::size_t samples = 0;
  std::vector<EstimatorMetrics> entries;
};

inline EstimatorMetrics evaluate(const EstimateSeries& est, std::span<const GroundTruthSample> truth) {
  return {est.name, rmse(est, truth), final_drift(est, truth), max_abs_error(est, truth)};
}

/// `key = value` lines in a fixed order. A single unnamed entry prints bare
/// metric keys; named entries are prefixed with `<name>.`.
inline void write_report(std::ostream& out, const MetricsReport& report, bool prefix_names = true) {
  if (report.seed) out << "seed = " << *report.seed << '\n';
  out << "dt = " << format_double(report.dt) << '\n';
  out << "duration = " << format_double(report.duration) << '\n';
  out << "samples = " << report.samples << '\n';
  for (const auto& e : report.entries) {
    const std::string p = prefix_names ? e.name + "." : "";
    out << p << "rmse = " << format_double(e.rmse) << '\n';
    out << p << "final_drift = " << format_double(e.final_drift) << '\n';
    out << p << "max_abs_error = " << format_double(e.max_abs_error) << '\n';
  }
}

}  // namespace pitchfuse
