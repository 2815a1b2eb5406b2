#pragma once

// Unit convention used throughout the library:
//   wavelength        nm
//   time / delay      ps
//   frequency         THz (= 1/ps), ordinary, not angular
//   angular frequency rad/ps = 2*pi*THz (only inside phase factors)

#include <numbers>

namespace homqd {

inline constexpr double kSpeedOfLight = 299792.458;  // nm/ps
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
// FWHM = kFwhmPerSigma * sigma for a Gaussian.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2*sqrt(2 ln 2)

// nu = c / lambda. Throws ConfigError for non-positive or non-finite input.
double wavelength_to_frequency(double wavelength_nm);
double frequency_to_wavelength(double frequency_thz);

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace homqd
