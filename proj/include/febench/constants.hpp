#pragma once

// CODATA 2018 exact / recommended values, SI units.
namespace febench::phys {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double h = 6.62607015e-34;
inline constexpr double hbar = h / (2.0 * pi);
inline constexpr double e = 1.602176634e-19;
inline constexpr double kB = 1.380649e-23;
inline constexpr double eps0 = 8.8541878128e-12;
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double me = 9.1093837015e-31;
inline constexpr double muB = 9.2740100783e-24;
inline constexpr double g_free = 2.0023;
// Rydberg energy R_inf * h * c
inline constexpr double rydberg_J = 2.1798723611035e-18;
inline constexpr double eV = e;

}  // namespace febench::phys
