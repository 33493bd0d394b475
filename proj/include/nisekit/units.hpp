#pragma once

// Internal unit system: energies and angular frequencies in cm^-1, times in fs,
// temperatures in K. Every phase or exponent is E*t/hbar with hbar in cm^-1*fs,
// i.e. the wavenumber-energy convention common in exciton spectroscopy.

namespace nisekit::units {

inline constexpr double hbar_cm1_fs = 5308.8;       // cm^-1 * fs
inline constexpr double kB_cm1_per_K = 0.695035;    // cm^-1 / K
inline constexpr double cm1_per_eV = 8065.544;

/// Lorentzian half-width (cm^-1) for a peak width stated as a time constant.
inline constexpr double width_from_time_fs(double tau_fs) {
    return hbar_cm1_fs / tau_fs;
}

/// beta = 1/(kB T) in 1/cm^-1.
inline constexpr double beta_from_temperature(double temperature_K) {
    return 1.0 / (kB_cm1_per_K * temperature_K);
}

/// Largest resolvable angular frequency (cm^-1) for sampling step dt (fs).
inline constexpr double nyquist_cm1(double dt_fs) {
    return 3.14159265358979323846 * hbar_cm1_fs / dt_fs;
}

}  // namespace nisekit::units
