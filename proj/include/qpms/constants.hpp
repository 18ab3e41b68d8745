#pragma once

namespace qpms {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double speed_of_light = 2.99792458e8;   // m/s
inline constexpr double planck = 6.62607015e-34;         // J s

// Time-bandwidth convention for the transform-limited transmit pulse:
// sigma * T_p = 2.356 (rad/s * s), chosen so a 200 ps pulse maps to
// sigma = 1.178e10 rad/s (0.00708 nm at 1064 nm).
inline constexpr double time_bandwidth_product = 2.356;

}  // namespace qpms
