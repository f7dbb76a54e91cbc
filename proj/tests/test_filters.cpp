#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pitchfuse/filters.hpp"
#include "pitchfuse/imu_sim.hpp"

using namespace pitchfuse;

namespace {

EstimateSeries series_from(const std::vector<GroundTruthSample>& truth, double offset) {
  EstimateSeries e;
  for (const auto& s : truth) {
    e.times.push_back(s.t);
    e.pitch.push_back(s.pitch + offset);
  }
  return e;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

}  // namespace

// --- gamma -----------------------------------------------------------------

TEST(Gamma, ZeroAtRest) {
  for (double scale : {0.1, 1.0, 4.905, 100.0}) {
    EXPECT_EQ(gamma({0.3, -0.2, 9.81}, {9.81, scale}), 0.0);
  }
}

TEST(Gamma, LinearMidpointAndClamp) {
  const GammaConfig cfg{9.81, 2.0};
  EXPECT_NEAR(gamma({0.0, 0.0, 9.81 - 0.5 * 2.0}, cfg), 0.5, 1e-12);
  EXPECT_EQ(gamma({0.0, 0.0, 9.81 + 10.0 * 2.0}, cfg), 1.0);
  // Deceleration counts the same as acceleration.
  EXPECT_NEAR(gamma({0.0, 0.0, 9.81 + 0.5 * 2.0}, cfg), 0.5, 1e-12);
}

TEST(Gamma, RangeAndMonotone) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> az(-50.0, 50.0), scale(1e-3, 20.0);
  for (int i = 0; i < 10000; ++i) {
    const GammaConfig cfg{kGravity, scale(rng)};
    const double a = az(rng), b = az(rng);
    const double ga = gamma({0.0, 0.0, a}, cfg), gb = gamma({0.0, 0.0, b}, cfg);
    EXPECT_GE(ga, 0.0);
    EXPECT_LE(ga, 1.0);
    if (std::abs(kGravity - a) <= std::abs(kGravity - b)) {
      EXPECT_LE(ga, gb);
    }
  }
}

TEST(Gamma, RejectsBadInput) {
  EXPECT_THROW(gamma({0.0, 0.0, NAN}, {}), std::domain_error);
  EXPECT_THROW(gamma({0.0, 0.0, 9.0}, {9.81, 0.0}), std::domain_error);
}

// --- complementary_step ------------------------------------------------------

TEST(ComplementaryStep, GammaZeroIsAccelerometer) {
  const ImuSample s{0.0, {1.0, 0.0, 9.81}, {0.0, 0.7, 0.0}};
  EXPECT_EQ(complementary_step(Angle{0.4}, s, 0.01, {}).rad, pitch_from_accel(s.accel).rad);
}

TEST(ComplementaryStep, GammaOneIsGyro) {
  const ImuSample s{0.0, {1.0, 0.0, 30.0}, {0.0, 0.7, 0.0}};
  EXPECT_EQ(complementary_step(Angle{0.4}, s, 0.01, {}).rad, integrate_gyro(Angle{0.4}, 0.7, 0.01).rad);
}

TEST(ComplementaryStep, QuarterBlend) {
  EXPECT_NEAR(blend(Angle{0.2}, Angle{0.4}, 0.25).rad, 0.25, 1e-12);

  // Same numbers through the full step: a_z chosen for gamma = 0.25,
  // a_x for a tilt of 0.2 rad, and the gyro for prev + w dt = 0.4.
  const GammaConfig cfg{9.81, 4.0};
  const double az = 9.81 - 1.0;
  const double ax = az * std::tan(0.2);
  const ImuSample s{0.0, {ax, 0.0, az}, {0.0, 10.0, 0.0}};
  EXPECT_NEAR(complementary_step(Angle{0.3}, s, 0.01, cfg).rad, 0.25, 1e-12);
}

TEST(ComplementaryStep, ConvexBlendProperty) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> c(-15.0, 15.0), p(-1.5, 1.5), w(-3.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const ImuSample s{0.0, {c(rng), c(rng), c(rng)}, {0.0, w(rng), 0.0}};
    const Angle prev{p(rng)};
    const double acc = pitch_from_accel(s.accel).rad;
    const double gyr = integrate_gyro(prev, s.gyro.y, 0.01).rad;
    const double out = complementary_step(prev, s, 0.01, {}).rad;
    EXPECT_GE(out, std::min(acc, gyr) - 1e-15);
    EXPECT_LE(out, std::max(acc, gyr) + 1e-15);
  }
}

TEST(ComplementaryStep, ZeroAccelPropagates) {
  const ImuSample s{0.0, {0.0, 0.0, 0.0}, {0.0, 0.1, 0.0}};
  EXPECT_THROW(complementary_step(Angle{0.0}, s, 0.01, {}), std::domain_error);
}

// --- run_estimator -----------------------------------------------------------

TEST(RunEstimator, NoiseFreeGyroOnlyMatchesEulerRecurrence) {
  const auto truth = generate_trajectory({});
  const auto imu = ideal_imu(truth);
  const auto est = run_estimator(imu, EstimatorKind::gyro_only);
  ASSERT_EQ(est.pitch.size(), imu.size());
  double p = std::atan2(imu[0].accel.x, std::hypot(imu[0].accel.y, imu[0].accel.z));
  EXPECT_EQ(est.pitch[0], p);
  for (std::size_t k = 1; k < imu.size(); ++k) {
    p += imu[k].gyro.y * 0.01;
    EXPECT_NEAR(est.pitch[k], p, 1e-12);
  }
}

TEST(RunEstimator, NoiseFreeAccelOnlyMatchesTruth) {
  const auto truth = generate_trajectory({});
  const auto est = run_estimator(ideal_imu(truth), EstimatorKind::accel_only);
  EXPECT_LE(max_abs_error(est, truth), 1e-9);
}

TEST(RunEstimator, OutputAlignedWithInput) {
  const auto sc = simulate({}, {});
  for (auto kind : kAllEstimators) {
    const auto est = run_estimator(sc.noisy, kind, {.noise = NoiseConfig{}});
    EXPECT_EQ(est.name, to_string(kind));
    ASSERT_EQ(est.times.size(), sc.noisy.size());
    for (std::size_t k = 0; k < sc.noisy.size(); ++k) EXPECT_EQ(est.times[k], sc.noisy[k].t);
  }
}

TEST(RunEstimator, GammaEndpointsReduceToSingleObservers) {
  const auto sc = simulate({}, {});
  // accel_scale -> 0+ with a_z != g: gamma = 1, pure gyro.
  EstimatorParams tiny;
  tiny.gamma.accel_scale = 1e-300;
  const auto comp = run_estimator(sc.noisy, EstimatorKind::complementary, tiny);
  const auto gyro = run_estimator(sc.noisy, EstimatorKind::gyro_only);
  for (std::size_t k = 0; k < comp.pitch.size(); ++k) EXPECT_NEAR(comp.pitch[k], gyro.pitch[k], 1e-12);

  // a_z == g at every sample: gamma = 0, pure accelerometer.
  auto level = sc.noisy;
  for (auto& s : level) s.accel.z = kGravity;
  const auto comp0 = run_estimator(level, EstimatorKind::complementary);
  const auto acc0 = run_estimator(level, EstimatorKind::accel_only);
  for (std::size_t k = 0; k < comp0.pitch.size(); ++k) EXPECT_NEAR(comp0.pitch[k], acc0.pitch[k], 1e-12);
}

TEST(RunEstimator, InitialPitchOverride) {
  const auto imu = ideal_imu(generate_trajectory({}));
  EstimatorParams params;
  params.initial_pitch = 0.25;
  EXPECT_EQ(run_estimator(imu, EstimatorKind::gyro_only, params).pitch[0], 0.25);
}

TEST(RunEstimator, ZeroAccelFailsWithIndex) {
  auto imu = ideal_imu(generate_trajectory({}));
  imu[17].accel = {};
  for (auto kind : {EstimatorKind::accel_only, EstimatorKind::complementary, EstimatorKind::kalman}) {
    try {
      run_estimator(imu, kind);
      FAIL() << "expected failure for " << to_string(kind);
    } catch (const StepError& e) {
      EXPECT_EQ(e.index(), 17u);
    }
  }
  // The gyro-only path never consults the accelerometer after the first sample.
  EXPECT_NO_THROW(run_estimator(imu, EstimatorKind::gyro_only));

  imu = ideal_imu(generate_trajectory({}));
  imu[0].accel = {};
  try {
    run_estimator(imu, EstimatorKind::gyro_only);
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.index(), 0u);
  }
}

TEST(RunEstimator, RejectsEmptyAndNonUniform) {
  EXPECT_THROW(run_estimator(std::vector<ImuSample>{}, EstimatorKind::gyro_only), std::invalid_argument);
  auto imu = ideal_imu(generate_trajectory({}));
  imu[3].t += 0.003;
  EXPECT_THROW(run_estimator(imu, EstimatorKind::gyro_only), std::invalid_argument);
}

TEST(RunEstimator, SingleSampleSeries) {
  const std::vector<ImuSample> one{{0.0, {0.0, 0.0, 9.81}, {}}};
  for (auto kind : kAllEstimators) {
    const auto est = run_estimator(one, kind);
    ASSERT_EQ(est.pitch.size(), 1u);
    EXPECT_EQ(est.pitch[0], 0.0);
  }
}

TEST(ParseEstimator, NamesRoundTripAndUnknownFails) {
  for (auto kind : kAllEstimators) EXPECT_EQ(parse_estimator(to_string(kind)), kind);
  EXPECT_THROW(parse_estimator("madgwick"), std::invalid_argument);
}

// --- metrics -----------------------------------------------------------------

TEST(Metrics, IdenticalIsZero) {
  const auto truth = generate_trajectory({});
  const auto est = series_from(truth, 0.0);
  EXPECT_EQ(rmse(est, truth), 0.0);
  EXPECT_EQ(final_drift(est, truth), 0.0);
}

TEST(Metrics, ConstantOffset) {
  const auto truth = generate_trajectory({});
  EXPECT_NEAR(rmse(series_from(truth, 0.3), truth), 0.3, 1e-12);
  EXPECT_NEAR(final_drift(series_from(truth, 0.3), truth), 0.3, 1e-12);
  EXPECT_NEAR(final_drift(series_from(truth, -0.3), truth), 0.3, 1e-12);
  EXPECT_NEAR(max_abs_error(series_from(truth, -0.3), truth), 0.3, 1e-12);
}

TEST(Metrics, RmseMatchesElementwiseReference) {
  // Ten arbitrary pairs; reference computed in long double, one term at a time.
  const double est_v[10] = {0.12, -0.5, 0.33, 1.01, -0.07, 0.0, 0.9, -1.2, 0.41, 0.05};
  const double tru_v[10] = {0.1, -0.45, 0.4, 0.95, 0.02, -0.03, 0.88, -1.1, 0.5, 0.0};
  EstimateSeries est;
  std::vector<GroundTruthSample> truth;
  long double acc = 0.0L;
  for (int i = 0; i < 10; ++i) {
    est.times.push_back(0.1 * i);
    est.pitch.push_back(est_v[i]);
    truth.push_back({0.1 * i, tru_v[i], 0.0, {}});
    const long double d = static_cast<long double>(est_v[i]) - tru_v[i];
    acc += d * d;
  }
  const double reference = static_cast<double>(std::sqrt(acc / 10.0L));
  EXPECT_NEAR(rmse(est, truth), reference, 1e-12);
}

TEST(Metrics, MismatchErrors) {
  const auto truth = generate_trajectory({});
  auto est = series_from(truth, 0.0);
  est.pitch.pop_back();
  est.times.pop_back();
  EXPECT_THROW(rmse(est, truth), std::invalid_argument);
  EXPECT_THROW(final_drift(est, truth), std::invalid_argument);

  auto shifted = series_from(truth, 0.0);
  shifted.times[4] += 0.001;
  EXPECT_THROW(rmse(shifted, truth), std::invalid_argument);
}

// --- drift growth laws --------------------------------------------------------

TEST(GyroDrift, AngleRandomWalkGrowsAsSqrtT) {
  // White rate noise only, integrated from the true initial pitch: the
  // pitch error is a discrete random walk, so its spread grows as sqrt(t).
  const NoiseConfig noise{0.0, 0.02, 0.0, 0};
  auto median_drift = [&](double duration) {
    const auto truth = generate_trajectory({0.0, 0.0, duration, 0.01});
    const auto ideal = ideal_imu(truth);
    std::vector<double> d;
    for (std::uint64_t s = 1; s <= 400; ++s) {
      NoiseConfig n = noise;
      n.seed = s;
      EstimatorParams params;
      params.initial_pitch = 0.0;
      d.push_back(final_drift(run_estimator(add_noise(ideal, n), EstimatorKind::gyro_only, params), truth));
    }
    return median(d);
  };
  const double ratio = median_drift(20.0) / median_drift(5.0);
  EXPECT_NEAR(ratio, 2.0, 0.25 * 2.0);
}

TEST(GyroDrift, BiasRandomWalkGrowsFasterThanSqrtT) {
  // Integrating a random-walk bias gives Var[drift] = sigma_rw^2 t^3 / 3.
  // sigma_rw is kept small so the 20 s drift stays far from the +-pi wrap.
  const double sigma_rw = 0.01;
  const NoiseConfig noise{0.0, 0.0, sigma_rw, 0};
  auto median_drift = [&](double duration) {
    const auto truth = generate_trajectory({0.0, 0.0, duration, 0.01});
    const auto ideal = ideal_imu(truth);
    std::vector<double> d;
    for (std::uint64_t s = 1; s <= 1000; ++s) {
      NoiseConfig n = noise;
      n.seed = s;
      d.push_back(final_drift(run_estimator(add_noise(ideal, n), EstimatorKind::gyro_only), truth));
    }
    return median(d);
  };
  const double m5 = median_drift(5.0);
  const double m20 = median_drift(20.0);
  // Median of |N(0, s^2)| is 0.6745 s.
  EXPECT_NEAR(m5, 0.6745 * sigma_rw * std::sqrt(125.0 / 3.0), 0.1 * m5);
  EXPECT_NEAR(m20, 0.6745 * sigma_rw * std::sqrt(8000.0 / 3.0), 0.1 * m20);
  EXPECT_GT(m20 / m5, 2.0 * 1.25);
}
