#pragma once

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <vector>

#include "nisekit/nise.hpp"

namespace nisekit {

/// Per-site transition dipole vectors d_{0,n}.
struct DipoleSet {
    std::vector<Eigen::Vector3d> d;

    std::size_t n_sites() const { return d.size(); }
};

DipoleSet read_dipoles_csv(const std::filesystem::path& path);

/// Time-domain response of one realization:
/// sigma(t_i) = sum_axes sum_{m,n} d_m U_{mn}(t_i,0) d_n
/// (isotropic orientational handling as the Cartesian-component sum).
std::vector<std::complex<double>> sigma_t(const PropagatorSeries& series, const DipoleSet& dipoles);

struct AbsorptionSpectrum {
    std::vector<double> omega_cm1;  // uniform ascending, two-sided
    std::vector<double> intensity;
    double shift_cm1 = 0.0;
    bool normalized = false;
};

/// Re{ sum_i sigma(t_i) exp(+i w t_i/hbar) dt } on the two-sided FFT frequency
/// grid, sorted ascending. Optional raised-cosine apodization; an additive
/// shift is applied to the grid and recorded.
AbsorptionSpectrum absorption_spectrum(const std::vector<std::complex<double>>& sigma, double dt_fs,
                                       bool apodize = false, double shift_cm1 = 0.0);

AbsorptionSpectrum normalize_peak(AbsorptionSpectrum spectrum);

/// Best integer-bin shift (cm^-1) aligning `spectrum` onto `reference` by
/// maximizing the intensity inner product within [omega_min, omega_max].
double align_shift(const AbsorptionSpectrum& spectrum, const AbsorptionSpectrum& reference,
                   double omega_min_cm1, double omega_max_cm1);

AbsorptionSpectrum apply_shift(AbsorptionSpectrum spectrum, double shift_cm1);

/// Site populations rho_nn(t).
std::vector<Eigen::VectorXd> populations(const DensitySeries& series);

/// CSV "omega_cm1,intensity" with shift/normalization metadata.
void write_spectrum_csv(const std::filesystem::path& path, const AbsorptionSpectrum& spectrum);
AbsorptionSpectrum read_spectrum_csv(const std::filesystem::path& path);

/// CSV "t_fs,pop_site1,...".
void write_populations_csv(const std::filesystem::path& path, const DensitySeries& series);

}  // namespace nisekit
