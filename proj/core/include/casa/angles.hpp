#pragma once

#include <cmath>
#include <numbers>

namespace casa {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to [-pi, pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w - kPi;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

/// Absolute source azimuth from a head-relative estimate and the look
/// direction, wrapped to [-pi, pi).
inline double to_absolute(double relative, double look_direction) {
  return wrap_angle(relative + look_direction);
}

/// Wrapped difference a - b in [-pi, pi).
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

}  // namespace casa
