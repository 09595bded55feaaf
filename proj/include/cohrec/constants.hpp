#pragma once

#include <complex>

namespace cohrec {

using complexd = std::complex<double>;

/// Speed of light in vacuum [m/s], exact by SI definition.
inline constexpr double c_light = 2.99792458e8;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

/// Library version, recorded in run manifests.
inline constexpr const char* version = "0.1.0";

} // namespace cohrec
