#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nisekit/spectral_density.hpp"

namespace nisekit {

/// Two-sided target power spectrum C~(w) = 2 pi kB T J(w)/w on the FFT bin
/// grid for 2*n_steps points at step dt. Bin k carries
/// omega_k = 2 pi hbar k / (2 n dt) for k <= n, mirrored for k > n.
struct PowerSpectrum {
    std::vector<double> values;  // size 2*n_steps, >= 0
    std::size_t n_steps = 0;
    double dt_fs = 0.0;

    double omega_at(std::size_t k) const;  // signed bin frequency, cm^-1
};

/// Per-site site-energy fluctuation time series dE_n(t_i), cm^-1.
/// samples(site, step); all sites share the uniform step dt_fs.
struct NoiseTrajectory {
    Eigen::MatrixXd samples;   // n_sites x n_steps
    double dt_fs = 0.0;
    std::uint64_t seed = 0;    // seed that produced this trajectory (0 if read from file)
    std::uint64_t model_hash = 0;

    std::size_t n_sites() const { return static_cast<std::size_t>(samples.rows()); }
    std::size_t n_steps() const { return static_cast<std::size_t>(samples.cols()); }
};

PowerSpectrum target_power_spectrum(const SpectralDensity& model, double temperature_K,
                                    std::size_t n_steps, double dt_fs);

/// FFT-filter synthesis of one site's noise: draw 2*n_steps unit Gaussians,
/// forward-FFT, divide by sqrt(dt/hbar), multiply by sqrt(C~(w)), inverse-FFT,
/// take the real part, keep the first n_steps samples (the second half is
/// dropped to break the periodicity of the construction). Identical seed
/// gives bit-identical output.
NoiseTrajectory generate_noise(const PowerSpectrum& ps, std::size_t n_steps, double dt_fs,
                               std::uint64_t seed);

/// N independent sites; site n uses rng::split_seed(base_seed, n).
NoiseTrajectory generate_site_noise(const std::vector<SpectralDensity>& models,
                                    double temperature_K, std::size_t n_steps, double dt_fs,
                                    std::uint64_t base_seed);

/// Overlapping windows: floor((len - window_len)/stride) + 1 windows in order.
std::vector<NoiseTrajectory> windows_from_trajectory(const NoiseTrajectory& traj,
                                                     std::size_t window_len, std::size_t stride);

/// CSV: columns "t_fs,dE_site1_cm1,..."; metadata lines carry dt, seed, model hash.
void write_noise_csv(const std::filesystem::path& path, const NoiseTrajectory& traj);
NoiseTrajectory read_noise_csv(const std::filesystem::path& path);

}  // namespace nisekit
