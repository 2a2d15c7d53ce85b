#pragma once

#include <numbers>

namespace angcorr {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double four_pi = 4.0 * std::numbers::pi;

// Internal angles are radians; degrees only at I/O boundaries.
constexpr double deg_to_rad(double deg) noexcept { return deg * (pi / 180.0); }
constexpr double rad_to_deg(double rad) noexcept { return rad * (180.0 / pi); }

}  // namespace angcorr
