#pragma once

#include <numbers>

namespace qhall::constants {

// CODATA 2018 exact / recommended values, SI.
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double hbar = 1.054571817e-34;               // J s
inline constexpr double electron_mass = 9.1093837015e-31;     // kg
inline constexpr double boltzmann = 1.380649e-23;             // J/K

inline constexpr double pi = std::numbers::pi;

inline constexpr double meV = 1e-3 * elementary_charge;  // J
inline constexpr double eV = elementary_charge;          // J

/// h / e^2, the quantum of Hall resistance (ohm).
inline constexpr double von_klitzing = 2.0 * pi * hbar / (elementary_charge * elementary_charge);

}  // namespace qhall::constants
