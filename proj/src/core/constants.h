// Physical constants, pinned in one place.
//
// Circuit energies are handled in GHz throughout the library (E/h convention),
// so most conversions funnel through h * 1e9.  The Boltzmann constant enters
// only through the ratio kB/h, which is what thermal occupation factors need.
#pragma once

namespace fluxmol::constants {

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double two_pi = 2.0 * pi;

// SI defining constants (exact since the 2019 redefinition).
inline constexpr double h_Js = 6.62607015e-34;      // Planck constant, J s
inline constexpr double hbar_Js = 1.054571817e-34;  // reduced Planck constant, J s
inline constexpr double e_C = 1.602176634e-19;      // elementary charge, C
inline constexpr double h_eVs = 4.135667696e-15;    // Planck constant, eV s

// kB/h in GHz per kelvin: converts a temperature straight into the frequency
// units the rest of the library uses.
inline constexpr double kB_over_h_GHz_per_K = 20.836619;

// Derived quantities.
inline constexpr double GHz_to_J = h_Js * 1e9;                      // energy of h * 1 GHz
inline constexpr double kB_J_per_K = kB_over_h_GHz_per_K * GHz_to_J;
inline constexpr double phi0_Wb = hbar_Js / (2.0 * e_C);            // reduced flux quantum
inline constexpr double R_K_Ohm = h_Js / (e_C * e_C);               // resistance quantum h/e^2

}  // namespace fluxmol::constants
