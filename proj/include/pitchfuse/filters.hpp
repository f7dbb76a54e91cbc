// Pitch estimators: complementary blend, accelerometer tilt, gyro
// integration and a two-state linear Kalman filter (pitch, gyro bias).
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pitchfuse/attitude.hpp"
#include "pitchfuse/imu_sim.hpp"

namespace pitchfuse {

/// Normalisation of the dynamic-acceleration blend weight.
struct GammaConfig {
  double g = kGravity;
  double accel_scale = kGravity / 2.0;  // m/s^2
};

/// Blend weight in [0, 1]: 0 trusts the accelerometer, 1 trusts the gyro.
/// clamp(|g - a_z| / accel_scale, 0, 1).
inline double gamma(const Vec3& accel, const GammaConfig& cfg) {
  if (!accel.finite()) {
    throw std::domain_error("gamma: non-finite specific force");
  }
  if (!(cfg.accel_scale > 0.0)) {
    throw std::domain_error("gamma: accel_scale must be > 0");
  }
  return std::clamp(std::abs(cfg.g - accel.z) / cfg.accel_scale, 0.0, 1.0);
}

/// Convex blend of the two observers at the current sample.
inline Angle blend(Angle pitch_acc, Angle pitch_gyro, double weight) {
  return Angle{pitch_acc.rad * (1.0 - weight) + pitch_gyro.rad * weight};
}

inline Angle complementary_step(Angle prev_pitch, const ImuSample& sample, double dt, const GammaConfig& cfg) {
  const Angle acc = pitch_from_accel(sample.accel);
  const Angle gyro = integrate_gyro(prev_pitch, sample.gyro.y, dt);
  return blend(acc, gyro, gamma(sample.accel, cfg));
}

// ---------------------------------------------------------------------------
// Kalman filter
// ---------------------------------------------------------------------------

/// Linear state-space model over x = [pitch, gyro_bias].
///
///   x_k = F x_{k-1} + B u_{k-1} + w_{k-1},  F = [[1, -dt], [0, 1]], B = [dt, 0]
///   z_k = H x_k + v_k,                       H = [1, 0]
///
/// u is the measured pitch rate, z the accelerometer tilt.
struct KalmanModel {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  Eigen::Matrix2d P = Eigen::Vector2d(0.1, 0.01).asDiagonal();
  Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
  double R = 1.0;

  double pitch() const { return x(0); }
  double bias() const { return x(1); }
};

namespace detail {
inline Eigen::Matrix2d symmetrize(const Eigen::Matrix2d& m) { return 0.5 * (m + m.transpose()); }
}  // namespace detail

inline KalmanModel kf_predict(KalmanModel model, double gyro_y, double dt) {
  if (!(dt > 0.0)) {
    throw std::domain_error("kf_predict: non-positive timestep");
  }
  Eigen::Matrix2d F;
  F << 1.0, -dt, 0.0, 1.0;
  model.x(0) += (gyro_y - model.x(1)) * dt;
  model.P = detail::symmetrize(F * model.P * F.transpose() + model.Q);
  return model;
}

inline KalmanModel kf_update(KalmanModel model, Angle pitch_measurement) {
  if (!(model.R > 0.0)) {
    throw std::domain_error("kf_update: measurement variance R must be > 0");
  }
  if (!std::isfinite(pitch_measurement.rad)) {
    throw std::domain_error("kf_update: non-finite measurement");
  }
  const Eigen::RowVector2d H(1.0, 0.0);
  const double innovation_var = model.P(0, 0) + model.R;
  const Eigen::Vector2d K = model.P.col(0) / innovation_var;
  model.x += K * (pitch_measurement.rad - model.x(0));
  model.P = detail::symmetrize((Eigen::Matrix2d::Identity() - K * H) * model.P);
  return model;
}

/// Kalman tuning. Unset entries are derived from the noise model.
struct KalmanParams {
  double p0_pitch = 0.1;
  double p0_bias = 0.01;
  std::optional<double> q_pitch;  // rad^2 per step
  std::optional<double> q_bias;   // (rad/s)^2 per step
  std::optional<double> r;        // rad^2
};

/// Smallest measurement variance used when the accelerometer is noise-free.
inline constexpr double kMinMeasurementVariance = 1e-10;

/// Initial model for a series with spacing dt:
///   Q = diag(sigma_gyro^2 dt^2, sigma_rw^2 dt), R = (sigma_accel / g)^2.
inline KalmanModel make_kalman_model(double initial_pitch, double dt, const NoiseConfig& noise,
                                     const KalmanParams& params = {}) {
  KalmanModel m;
  m.x << initial_pitch, 0.0;
  m.P = Eigen::Vector2d(params.p0_pitch, params.p0_bias).asDiagonal();
  const double qp = params.q_pitch.value_or(noise.sigma_gyro * noise.sigma_gyro * dt * dt);
  const double qb = params.q_bias.value_or(noise.sigma_rw * noise.sigma_rw * dt);
  m.Q = Eigen::Vector2d(qp, qb).asDiagonal();
  const double sigma_tilt = noise.sigma_accel / kGravity;
  m.R = params.r.value_or(std::max(sigma_tilt * sigma_tilt, kMinMeasurementVariance));
  return m;
}

// ---------------------------------------------------------------------------
// Running estimators over a series
// ---------------------------------------------------------------------------

enum class EstimatorKind { complementary, gyro_only, accel_only, kalman };

inline constexpr EstimatorKind kAllEstimators[] = {EstimatorKind::complementary, EstimatorKind::gyro_only,
                                                   EstimatorKind::accel_only, EstimatorKind::kalman};

inline std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::complementary: return "complementary";
    case EstimatorKind::gyro_only: return "gyro_only";
    case EstimatorKind::accel_only: return "accel_only";
    case EstimatorKind::kalman: return "kalman";
  }
  return "unknown";
}

inline EstimatorKind parse_estimator(std::string_view name) {
  for (auto kind : kAllEstimators) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
}

struct EstimatorParams {
  GammaConfig gamma;
  NoiseConfig noise;  // feeds the Kalman defaults
  KalmanParams kalman;
  std::optional<double> initial_pitch;  // default: tilt of the first sample
};

struct EstimateSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> pitch;
  double rmse = 0.0;
  double final_error = 0.0;
};

/// Per-step failure inside run_estimator, carrying the sample index.
class StepError : public std::runtime_error {
 public:
  StepError(std::size_t index, const std::string& what)
      : std::runtime_error("sample " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// One pitch estimate per sample. Every estimator starts from the same
/// initial pitch; the gyro-based ones use the rate of the sample being
/// stepped to.
inline EstimateSeries run_estimator(std::span<const ImuSample> samples, EstimatorKind kind,
                                    const EstimatorParams& params = {}) {
  if (samples.empty()) {
    throw std::invalid_argument("run_estimator: empty sample series");
  }
  const double dt = uniform_spacing(samples);

  EstimateSeries out;
  out.name = std::string(to_string(kind));
  out.times.reserve(samples.size());
  out.pitch.reserve(samples.size());

  auto step = [&](std::size_t k, auto&& fn) {
    try {
      return fn();
    } catch (const std::domain_error& e) {
      throw StepError(k, e.what());
    }
  };

  Angle initial = params.initial_pitch ? Angle{*params.initial_pitch}
                                       : step(0, [&] { return pitch_from_accel(samples[0].accel); });

  KalmanModel kf;
  if (kind == EstimatorKind::kalman) {
    kf = make_kalman_model(initial.rad, dt, params.noise, params.kalman);
  }

  Angle pitch = initial;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const ImuSample& s = samples[k];
    if (k > 0) {
      switch (kind) {
        case EstimatorKind::gyro_only:
          pitch = step(k, [&] { return integrate_gyro(pitch, s.gyro.y, dt); });
          break;
        case EstimatorKind::accel_only:
          pitch = step(k, [&] { return pitch_from_accel(s.accel); });
          break;
        case EstimatorKind::complementary:
          pitch = step(k, [&] { return complementary_step(pitch, s, dt, params.gamma); });
          break;
        case EstimatorKind::kalman:
          kf = step(k, [&] { return kf_update(kf_predict(kf, s.gyro.y, dt), pitch_from_accel(s.accel)); });
          pitch = Angle{kf.pitch()};
          break;
      }
    } else if (kind == EstimatorKind::accel_only || kind == EstimatorKind::complementary) {
      // The tilt observer must be defined at every index, including the first.
      step(0, [&] { return pitch_from_accel(s.accel); });
    }
    out.times.push_back(s.t);
    out.pitch.push_back(pitch.rad);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace detail {
inline void check_aligned(const EstimateSeries& est, std::span<const GroundTruthSample> truth) {
  if (est.pitch.size() != truth.size() || est.times.size() != truth.size()) {
    throw std::invalid_argument("estimate/truth length mismatch: " + std::to_string(est.pitch.size()) + " vs " +
                                std::to_string(truth.size()));
  }
  if (truth.empty()) {
    throw std::invalid_argument("empty series");
  }
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (std::abs(est.times[k] - truth[k].t) > 1e-9 * std::max(1.0, std::abs(truth[k].t))) {
      throw std::invalid_argument("timestamp mismatch at index " + std::to_string(k));
    }
  }
}
}  // namespace detail

inline double rmse(const EstimateSeries& est, std::span<const GroundTruthSample> truth) {
  detail::check_aligned(est, truth);
  double sum = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double e = est.pitch[k] - truth[k].pitch;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

/// |estimate - truth| at the last timestamp.
inline double final_drift(const EstimateSeries& est, std::span<const GroundTruthSample> truth) {
  detail::check_aligned(est, truth);
  return std::abs(est.pitch.back() - truth.back().pitch);
}

inline double max_abs_error(const EstimateSeries& est, std::span<const GroundTruthSample> truth) {
  detail::check_aligned(est, truth);
  double worst = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    worst = std::max(worst, std::abs(est.pitch[k] - truth[k].pitch));
  }
  return worst;
}

/// Fills the series' rmse and final_error fields from truth.
inline EstimateSeries& score(EstimateSeries& est, std::span<const GroundTruthSample> truth) {
  est.rmse = rmse(est, truth);
  est.final_error = final_drift(est, truth);
  return est;
}

}  // namespace pitchfuse
