#pragma once

#include <cmath>
#include <numbers>

namespace dmaloc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Thermal noise floor -174 dBm/Hz integrated over the bandwidth.
inline double thermal_noise_dbm(double bandwidth_hz) { return -174.0 + 10.0 * std::log10(bandwidth_hz); }

}  // namespace dmaloc
