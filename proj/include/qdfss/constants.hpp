#pragma once

#include <numbers>

// Working units throughout the library: lengths in nm, energies in eV,
// potentials in V, masses in units of the free-electron mass m0.
namespace qdfss::constants {

inline constexpr double pi = std::numbers::pi;

// CODATA 2018, SI.
inline constexpr double hbar_si = 1.054571817e-34;        // J s
inline constexpr double electron_mass_si = 9.1093837015e-31;  // kg
inline constexpr double elementary_charge_si = 1.602176634e-19;  // C
inline constexpr double vacuum_permittivity_si = 8.8541878128e-12;  // F/m

/// hbar^2 / (2 m0) in eV nm^2.
inline constexpr double hbar2_over_2m0 =
    hbar_si * hbar_si / (2.0 * electron_mass_si) / elementary_charge_si * 1e18;

/// e^2 / (4 pi eps0) in eV nm.
inline constexpr double coulomb_eV_nm =
    elementary_charge_si / (4.0 * pi * vacuum_permittivity_si) * 1e9;

/// e / eps0 in V nm, so that rho[e/nm^3] * e_over_eps0 has units V/nm^2.
inline constexpr double e_over_eps0_V_nm = elementary_charge_si / vacuum_permittivity_si * 1e9;

}  // namespace qdfss::constants
