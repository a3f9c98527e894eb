#pragma once

#include <cmath>

namespace fedcell {

// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

// dBm -> W.
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

}  // namespace fedcell
