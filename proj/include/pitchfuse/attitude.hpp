// Frame conventions, angle arithmetic and the two primitive pitch observers.
//
// Body frame: x forward, y right wing, z down-to-up such that a level body
// at rest reads specific force (0, 0, +g). Pitch is the rotation about the
// body y-axis, positive nose-up; at pitch theta the ideal accelerometer
// reading is (g sin(theta), 0, g cos(theta)).
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pitchfuse {

/// Gravitational constant used by the tilt observer and the blend schedule.
inline constexpr double kGravity = 9.81;

inline constexpr double kPi = std::numbers::pi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr bool operator==(const Vec3&) const = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3 operator*(double k, const Vec3& a) { return {k * a.x, k * a.y, k * a.z}; }

/// Angle in radians. Holds whatever value it was given; `wrapped()` yields
/// the (-pi, pi] representative.
struct Angle {
  double rad = 0.0;

  constexpr Angle() = default;
  constexpr explicit Angle(double radians) : rad(radians) {}

  constexpr double value() const { return rad; }
  constexpr auto operator<=>(const Angle&) const = default;
};

/// One timestamped accelerometer + gyroscope reading in the body frame.
struct ImuSample {
  double t = 0.0;  // s
  Vec3 accel;      // specific force, m/s^2
  Vec3 gyro;       // angular rate, rad/s

  bool operator==(const ImuSample&) const = default;
};

/// Representative of theta in (-pi, pi]. Idempotent.
inline Angle wrap_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("wrap_angle: non-finite angle");
  }
  if (theta > -kPi && theta <= kPi) {
    return Angle{theta};
  }
  double r = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) {
    r += 2.0 * kPi;
  }
  return Angle{r};
}

/// Pitch from the gravity reference: atan2(a_x, hypot(a_y, a_z)).
///
/// The two-argument form keeps a_y = a_z = 0 well defined (+-pi/2). The
/// result always lies in [-pi/2, pi/2] because the second argument is
/// non-negative.
inline Angle pitch_from_accel(const Vec3& accel) {
  if (!accel.finite()) {
    throw std::domain_error("pitch_from_accel: non-finite specific force");
  }
  if (accel.x == 0.0 && accel.y == 0.0 && accel.z == 0.0) {
    throw std::domain_error("pitch_from_accel: indeterminate orientation (zero specific force)");
  }
  return Angle{std::atan2(accel.x, std::hypot(accel.y, accel.z))};
}

/// One explicit Euler step of the pitch rate, wrapped to (-pi, pi].
inline Angle integrate_gyro(Angle prev_pitch, double omega_y, double dt) {
  if (!(dt > 0.0)) {
    throw std::domain_error("integrate_gyro: non-positive timestep");
  }
  return wrap_angle(prev_pitch.rad + omega_y * dt);
}

}  // namespace pitchfuse
