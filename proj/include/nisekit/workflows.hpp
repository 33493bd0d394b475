#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "nisekit/bath_analysis.hpp"
#include "nisekit/config.hpp"
#include "nisekit/nise.hpp"
#include "nisekit/observables.hpp"
#include "nisekit/thermal_averaging.hpp"

namespace nisekit {

// End-to-end ensemble pipelines shared by the CLI and the acceptance suite.
// Everything is deterministic in (config, seed); realization r draws its noise
// from rng::split_seed(seed, r) no matter which worker runs it.

struct PropagateResult {
    DensitySeries plain;                       // plain average in the configured mode
    std::optional<DensitySeries> constructed;  // exp-mean-log average
    std::optional<DensitySeries> interpolated;
    std::optional<DensitySeries> nise_plain;   // plain NISE average (lifetime source)
    std::optional<LifetimeSet> lifetimes;
    std::size_t degeneracy_warnings = 0;
};

PropagateResult run_propagate(const RunConfig& config);

/// Ensemble-averaged time-domain response sigma(t). When out_dt_fs is given it
/// receives the sampling step after any windowing/resampling.
std::vector<std::complex<double>> run_absorption_sigma(const RunConfig& config,
                                                       double* out_dt_fs = nullptr);

/// Builds the spectrum from sigma(t) honoring the presentation options
/// (normalization, explicit shift, alignment to a reference).
AbsorptionSpectrum run_absorption(const RunConfig& config);

/// Writes one trajectory CSV per realization plus a manifest; returns paths.
std::vector<std::filesystem::path> run_gen_noise(const RunConfig& config);

struct EstimateSdOptions {
    DampingSpec damping{DampingSpec::Kind::gaussian, 0.0, 2.0};  // t_c <= 0: auto cutoff
    double cutoff_window_fs = 500.0;
    double cutoff_floor_factor = 2.0;
    double temperature_K = 300.0;
};

struct EstimateSdResult {
    SpectralDensity sd = SpectralDensity::drude_lorentz({});
    AutocorrelationSeries autocorrelation;
    double t_c_fs = 0.0;
    bool cutoff_warning = false;
};

/// Autocorrelation (averaged over every site column of every trajectory),
/// cutoff selection, damping, Appendix-style transform.
EstimateSdResult estimate_sd(const std::vector<NoiseTrajectory>& trajectories,
                             const EstimateSdOptions& options);

void write_manifest(const std::filesystem::path& path, const RunConfig& config,
                    const std::string& command, std::size_t n_outputs);

void write_lifetimes_csv(const std::filesystem::path& path, const LifetimeSet& lifetimes);

void write_density_csv(const std::filesystem::path& path, const DensitySeries& series);

}  // namespace nisekit
