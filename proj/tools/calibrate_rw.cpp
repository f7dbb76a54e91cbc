// Finds the gyro bias random-walk intensity for which the median gyro-only
// pitch drift after the default 5 s run is 0.3 rad. The result is the
// NoiseConfig::sigma_rw default.
//
//   calibrate_rw [--seeds N] [--target RAD] [--duration S]
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <vector>

#include "pitchfuse/filters.hpp"
#include "pitchfuse/imu_sim.hpp"

namespace {

double median_gyro_drift(const pitchfuse::TrajectoryConfig& traj, pitchfuse::NoiseConfig noise, int seeds) {
  using namespace pitchfuse;
  const auto truth = generate_trajectory(traj);
  const auto ideal = ideal_imu(truth);
  std::vector<double> drift;
  drift.reserve(seeds);
  for (int s = 1; s <= seeds; ++s) {
    noise.seed = static_cast<std::uint64_t>(s);
    EstimatorParams params;
    params.noise = noise;
    const auto est = run_estimator(add_noise(ideal, noise), EstimatorKind::gyro_only, params);
    drift.push_back(final_drift(est, truth));
  }
  std::nth_element(drift.begin(), drift.begin() + drift.size() / 2, drift.end());
  return drift[drift.size() / 2];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrate sigma_rw against a target median gyro drift"};
  int seeds = 4001;
  double target = 0.3;
  double duration = 5.0;
  app.add_option("--seeds", seeds, "Monte Carlo seeds");
  app.add_option("--target", target, "target median |drift| in rad");
  app.add_option("--duration", duration, "run length in s");
  CLI11_PARSE(app, argc, argv);

  pitchfuse::TrajectoryConfig traj;
  traj.duration = duration;
  pitchfuse::NoiseConfig noise;

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    noise.sigma_rw = 0.5 * (lo + hi);
    const double m = median_gyro_drift(traj, noise, seeds);
    (m < target ? lo : hi) = noise.sigma_rw;
  }
  noise.sigma_rw = 0.5 * (lo + hi);
  std::printf("sigma_rw = %.6g\nmedian_drift = %.6g\n", noise.sigma_rw, median_gyro_drift(traj, noise, seeds));
  return 0;
}
