// units.hpp - atomic-unit conversions used at the configuration boundary

#pragma once

#include <numbers>

namespace heom::units {

inline constexpr double hartree_eV = 27.211386;
inline constexpr double au_time_fs = 0.02418884;
inline constexpr double boltzmann_eV_per_K = 8.617333262e-5;

constexpr double eV_to_au(double e) { return e / hartree_eV; }
constexpr double au_to_eV(double e) { return e * hartree_eV; }
constexpr double fs_to_au(double t) { return t / au_time_fs; }
constexpr double au_to_fs(double t) { return t * au_time_fs; }

// Thermal energy k_B T in hartree.
constexpr double thermal_energy_au(double kelvin) { return eV_to_au(boltzmann_eV_per_K * kelvin); }

// n-th Matsubara frequency 2 pi n / beta in hartree.
constexpr double matsubara_frequency_au(int n, double kelvin) {
    return 2.0 * std::numbers::pi * n * thermal_energy_au(kelvin);
}

} // namespace heom::units
