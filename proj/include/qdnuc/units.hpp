#pragma once

// Internal unit system: times in ns, angular frequencies in rad/ns, rates in 1/ns.
// Ordinary frequencies enter through the GHz helpers below.

#include <numbers>

namespace qdnuc {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[nodiscard]] constexpr double ghz_to_rad_per_ns(double f_ghz) { return kTwoPi * f_ghz; }
[[nodiscard]] constexpr double rad_per_ns_to_ghz(double w) { return w / kTwoPi; }

namespace constants {
/// Vacuum permeability [T m / A], CODATA 2018.
inline constexpr double kMu0 = 1.25663706212e-6;
/// Bohr magneton [J / T], CODATA 2018.
inline constexpr double kBohrMagneton = 9.2740100783e-24;
inline constexpr double kPerNm3ToPerM3 = 1e27;
inline constexpr double kNsPerS = 1e9;
}  // namespace constants

}  // namespace qdnuc
