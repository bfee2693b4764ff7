#pragma once

#include <cmath>
#include <numbers>

namespace doa {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wrap an angle to (-pi, pi].
inline double wrap_pi(double rad) {
    double x = std::fmod(rad, kTwoPi);
    if (x <= -kPi) x += kTwoPi;
    if (x > kPi) x -= kTwoPi;
    return x;
}

/// Wrap an angle to [0, 2*pi).
inline double wrap_two_pi(double rad) {
    double x = std::fmod(rad, kTwoPi);
    if (x < 0.0) x += kTwoPi;
    if (x >= kTwoPi) x -= kTwoPi;
    return x;
}

/// Signed angular difference a - b in degrees, wrapped to (-180, 180].
inline double circular_diff_deg(double a_deg, double b_deg) {
    double d = std::fmod(a_deg - b_deg, 360.0);
    if (d <= -180.0) d += 360.0;
    if (d > 180.0) d -= 360.0;
    return d;
}

}  // namespace doa
