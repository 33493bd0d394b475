#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "nisekit/noise.hpp"
#include "nisekit/spectral_density.hpp"

namespace nisekit {

/// Bath autocorrelation C(t_j) (cm^-2) on uniform lags j*dt.
struct AutocorrelationSeries {
    enum class Provenance { theoretical, estimated };
    std::vector<double> values;
    double dt_fs = 0.0;
    Provenance provenance = Provenance::estimated;
};

/// Multiplicative damping exp(-(t/t_c)^b): gaussian b=2, exponential b=1,
/// step = indicator t <= t_c, general uses the stored exponent.
struct DampingSpec {
    enum class Kind { gaussian, exponential, step, general };
    Kind kind = Kind::gaussian;
    double t_c_fs = 0.0;
    double b = 2.0;  // general kind only
};

struct CutoffSuggestion {
    double t_c_fs = 0.0;
    bool warning = false;  // no clean crossover into a flat noise floor
};

/// Unbiased lag estimator on a mean-subtracted single-site trajectory:
/// C(t_j) = (1/(N-j)) sum_i dE(t_i+t_j) dE(t_i), lags j < N/2 only.
AutocorrelationSeries autocorrelation(const NoiseTrajectory& traj);

AutocorrelationSeries average_autocorrelations(std::span<const AutocorrelationSeries> series);

AutocorrelationSeries apply_damping(const AutocorrelationSeries& c, const DampingSpec& spec);

/// Crossover of the |C| moving average (window_fs wide) into the noise floor,
/// the floor being the moving-average mean over the last quarter of lags.
CutoffSuggestion suggest_cutoff(const AutocorrelationSeries& c, double window_fs = 500.0,
                                double floor_factor = 2.0);

/// DCT-I route: symmetric extension, FFT, J = w dtau/(2 pi kB T) Re{...} on the
/// nonnegative-frequency grid w_k = pi hbar k/((n-1) dt). Output is tagged as
/// an estimate (noisy inputs produce small negative excursions).
SpectralDensity sd_from_autocorrelation(const AutocorrelationSeries& c, double temperature_K);

/// Inverse route: C(t) = 2 pi kB T/dtau * Re{IFFT((J/w)_ext,sym)} on n_lags lags.
AutocorrelationSeries autocorrelation_from_sd(const SpectralDensity& model, double temperature_K,
                                              double dt_fs, std::size_t n_lags);

/// Frequency-domain upsampling by symmetric zero-padding. Values at coincident
/// sample times are preserved; optional raised-cosine taper near the old
/// Nyquist edge suppresses ringing when out-of-band content is present.
NoiseTrajectory resample(const NoiseTrajectory& traj, double dt_target_fs, bool taper = false);

/// Mean absolute error between two spectral densities over [omega_min, omega_max].
double mae_sd(const SpectralDensity& a, const SpectralDensity& b, double omega_min_cm1,
              double omega_max_cm1);

/// Mean absolute error between autocorrelations over [0, t_max] (default 20 ps).
double mae_c(const AutocorrelationSeries& a, const AutocorrelationSeries& b,
             double t_max_fs = 20000.0);

/// CSV "t_fs,C_cm2".
void write_autocorrelation_csv(const std::filesystem::path& path, const AutocorrelationSeries& c);
AutocorrelationSeries read_autocorrelation_csv(const std::filesystem::path& path);

}  // namespace nisekit
