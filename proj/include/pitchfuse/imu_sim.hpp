// Ground-truth trajectory, ideal IMU synthesis and sensor noise injection.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pitchfuse/attitude.hpp"

namespace pitchfuse {

/// Sinusoidal pitch oscillation, pitch(t) = amplitude * sin(2 pi frequency t).
struct TrajectoryConfig {
  double amplitude = 0.75;  // rad
  double frequency = 0.1;   // Hz
  double duration = 5.0;    // s
  double dt = 0.01;         // s
};

struct GroundTruthSample {
  double t = 0.0;
  double pitch = 0.0;       // rad
  double pitch_rate = 0.0;  // rad/s
  Vec3 linear_accel;        // m/s^2, body frame, gravity excluded
};

/// Sensor noise model. Gyro bias follows a random walk of intensity
/// sigma_rw, starting from zero.
struct NoiseConfig {
  double sigma_accel = 0.5;   // m/s^2, white, per axis
  double sigma_gyro = 0.02;   // rad/s, white, per axis
  double sigma_rw = 0.0675;   // rad/s/sqrt(s); calibrated by tools/calibrate_rw.cpp
  std::uint64_t seed = 1;
};

inline void validate(const TrajectoryConfig& cfg) {
  if (!(std::isfinite(cfg.dt) && cfg.dt > 0.0)) {
    throw std::invalid_argument("trajectory: dt must be > 0");
  }
  if (!(std::isfinite(cfg.duration) && cfg.duration >= cfg.dt)) {
    throw std::invalid_argument("trajectory: duration must be >= dt");
  }
  if (!(std::isfinite(cfg.amplitude) && cfg.amplitude >= 0.0 && cfg.amplitude < kPi / 2.0)) {
    throw std::invalid_argument("trajectory: amplitude must lie in [0, pi/2)");
  }
  if (!(std::isfinite(cfg.frequency) && cfg.frequency >= 0.0)) {
    throw std::invalid_argument("trajectory: frequency must be >= 0");
  }
}

inline void validate(const NoiseConfig& cfg) {
  auto ok = [](double s) { return std::isfinite(s) && s >= 0.0; };
  if (!ok(cfg.sigma_accel)) throw std::invalid_argument("noise: sigma_accel must be >= 0");
  if (!ok(cfg.sigma_gyro)) throw std::invalid_argument("noise: sigma_gyro must be >= 0");
  if (!ok(cfg.sigma_rw)) throw std::invalid_argument("noise: sigma_rw must be >= 0");
}

/// Number of samples covering [0, duration] at spacing dt.
inline std::size_t sample_count(const TrajectoryConfig& cfg) {
  // The epsilon absorbs representation error in duration/dt (5 / 0.01 etc).
  return static_cast<std::size_t>(std::floor(cfg.duration / cfg.dt + 1e-9)) + 1;
}

inline std::vector<GroundTruthSample> generate_trajectory(const TrajectoryConfig& cfg) {
  validate(cfg);
  const std::size_t n = sample_count(cfg);
  const double w = 2.0 * kPi * cfg.frequency;
  std::vector<GroundTruthSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    out.push_back({t, cfg.amplitude * std::sin(w * t), cfg.amplitude * w * std::cos(w * t), Vec3{}});
  }
  return out;
}

/// Series spacing, checked for uniformity to a relative tolerance of 1e-6.
template <typename Sample>
double uniform_spacing(std::span<const Sample> samples) {
  if (samples.size() < 2) {
    return 0.0;
  }
  const double dt = (samples.back().t - samples.front().t) / static_cast<double>(samples.size() - 1);
  if (!(dt > 0.0)) {
    throw std::invalid_argument("timestamps are not strictly increasing");
  }
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double step = samples[k].t - samples[k - 1].t;
    if (std::abs(step - dt) > 1e-6 * dt) {
      throw std::invalid_argument("non-uniform sample spacing at index " + std::to_string(k));
    }
  }
  return dt;
}

/// Noise-free accelerometer and gyroscope readings for a trajectory.
inline std::vector<ImuSample> ideal_imu(std::span<const GroundTruthSample> truth) {
  if (truth.empty()) {
    throw std::invalid_argument("ideal_imu: empty trajectory");
  }
  std::vector<ImuSample> out;
  out.reserve(truth.size());
  for (const auto& s : truth) {
    const Vec3 gravity{kGravity * std::sin(s.pitch), 0.0, kGravity * std::cos(s.pitch)};
    out.push_back({s.t, gravity + s.linear_accel, Vec3{0.0, s.pitch_rate, 0.0}});
  }
  return out;
}

/// Euler-Maruyama step of the gyro bias random walk.
inline double bias_walk_step(double prev_bias, double sigma_rw, double dt, double draw) {
  if (!(dt > 0.0)) {
    throw std::domain_error("bias_walk_step: non-positive timestep");
  }
  if (!(sigma_rw >= 0.0)) {
    throw std::domain_error("bias_walk_step: negative intensity");
  }
  return prev_bias + sigma_rw * std::sqrt(dt) * draw;
}

/// Independent normal streams derived from one seed.
///
/// Stream order: accel-x, accel-y, accel-z, gyro-x, gyro-y, gyro-z, bias.
/// Each stream is an mt19937_64 seeded from seed_seq{seed_lo, seed_hi, index},
/// so the realisation of one stream does not depend on how many draws the
/// others consumed. The bias stream yields the x, y, z walk increments in
/// that order at every step.
class NoiseStreams {
 public:
  enum Stream : std::size_t { kAccelX, kAccelY, kAccelZ, kGyroX, kGyroY, kGyroZ, kBias, kCount };

  explicit NoiseStreams(std::uint64_t seed) {
    for (std::size_t i = 0; i < kCount; ++i) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(i)};
      engines_[i].seed(seq);
    }
  }

  double normal(Stream s) { return normals_[s](engines_[s]); }

 private:
  std::array<std::mt19937_64, kCount> engines_;
  // One distribution per engine: normal_distribution caches a second variate.
  std::array<std::normal_distribution<double>, kCount> normals_;
};

/// Noisy samples together with the gyro bias that was added at each step.
struct NoiseRealization {
  std::vector<ImuSample> samples;
  std::vector<Vec3> gyro_bias;
};

inline NoiseRealization add_noise_traced(std::span<const ImuSample> samples, const NoiseConfig& cfg) {
  validate(cfg);
  NoiseRealization out;
  if (samples.empty()) {
    return out;
  }
  const double dt = uniform_spacing(samples);
  out.samples.reserve(samples.size());
  out.gyro_bias.reserve(samples.size());

  NoiseStreams rng(cfg.seed);
  using S = NoiseStreams;
  Vec3 bias{};
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (k > 0) {
      bias.x = bias_walk_step(bias.x, cfg.sigma_rw, dt, rng.normal(S::kBias));
      bias.y = bias_walk_step(bias.y, cfg.sigma_rw, dt, rng.normal(S::kBias));
      bias.z = bias_walk_step(bias.z, cfg.sigma_rw, dt, rng.normal(S::kBias));
    }
    ImuSample s = samples[k];
    s.accel.x += cfg.sigma_accel * rng.normal(S::kAccelX);
    s.accel.y += cfg.sigma_accel * rng.normal(S::kAccelY);
    s.accel.z += cfg.sigma_accel * rng.normal(S::kAccelZ);
    s.gyro.x += cfg.sigma_gyro * rng.normal(S::kGyroX) + bias.x;
    s.gyro.y += cfg.sigma_gyro * rng.normal(S::kGyroY) + bias.y;
    s.gyro.z += cfg.sigma_gyro * rng.normal(S::kGyroZ) + bias.z;
    out.samples.push_back(s);
    out.gyro_bias.push_back(bias);
  }
  return out;
}

/// White noise on every axis plus a random-walk gyro bias (b_0 = 0).
/// Deterministic in cfg.seed; timestamps are preserved.
inline std::vector<ImuSample> add_noise(std::span<const ImuSample> samples, const NoiseConfig& cfg) {
  return add_noise_traced(samples, cfg).samples;
}

/// Truth trajectory plus the noisy IMU series that observes it.
struct Scenario {
  std::vector<GroundTruthSample> truth;
  std::vector<ImuSample> ideal;
  std::vector<ImuSample> noisy;
};

inline Scenario simulate(const TrajectoryConfig& traj, const NoiseConfig& noise) {
  Scenario sc;
  sc.truth = generate_trajectory(traj);
  sc.ideal = ideal_imu(sc.truth);
  sc.noisy = add_noise(sc.ideal, noise);
  return sc;
}

}  // namespace pitchfuse
