#pragma once

#include <numbers>

namespace parfluor {

/// CODATA speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double omega_from_wavelength(double lambda_m) {
  return 2.0 * kPi * kSpeedOfLight / lambda_m;
}
inline constexpr double wavelength_from_omega(double omega) {
  return 2.0 * kPi * kSpeedOfLight / omega;
}

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace parfluor
