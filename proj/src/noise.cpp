#include "nisekit/noise.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "nisekit/csv.hpp"
#include "nisekit/errors.hpp"
#include "nisekit/fft.hpp"
#include "nisekit/rng.hpp"
#include "nisekit/units.hpp"

namespace nisekit {

namespace {
constexpr double two_pi = 6.28318530717958647692;
}

double PowerSpectrum::omega_at(std::size_t k) const {
    const std::size_t m = 2 * n_steps;
    const double base = two_pi * units::hbar_cm1_fs / (static_cast<double>(m) * dt_fs);
    if (k <= n_steps) return base * static_cast<double>(k);
    return base * (static_cast<double>(k) - static_cast<double>(m));
}

PowerSpectrum target_power_spectrum(const SpectralDensity& model, double temperature_K,
                                    std::size_t n_steps, double dt_fs) {
    if (!(temperature_K > 0.0)) throw std::invalid_argument("temperature must be > 0");
    if (n_steps < 2) throw std::invalid_argument("need n_steps >= 2");
    if (!(dt_fs > 0.0)) throw std::invalid_argument("need dt > 0");
    if (model.is_estimate())
        throw std::invalid_argument("noise target requires a nonnegative spectral density; clamp first");

    const double kT = units::kB_cm1_per_K * temperature_K;
    const std::size_t m = 2 * n_steps;
    PowerSpectrum ps;
    ps.n_steps = n_steps;
    ps.dt_fs = dt_fs;
    ps.values.resize(m);
    // C real and even: negative-frequency bins mirror positive ones.
    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double w = ps.omega_at(k);
        double value;
        if (k == 0) {
            value = two_pi * kT * model.j_over_omega_limit0();
        } else {
            value = two_pi * kT * model(w) / w;
        }
        if (!std::isfinite(value)) throw NumericalError("target power spectrum not finite");
        ps.values[k] = std::max(value, 0.0);
        if (k > 0 && k < n_steps) ps.values[m - k] = ps.values[k];
    }
    return ps;
}

NoiseTrajectory generate_noise(const PowerSpectrum& ps, std::size_t n_steps, double dt_fs,
                               std::uint64_t seed) {
    if (n_steps < 2) throw std::invalid_argument("need n_steps >= 2");
    const std::size_t m = 2 * n_steps;
    if (ps.values.size() != m) throw std::invalid_argument("power spectrum sized for wrong n_steps");
    for (double v : ps.values) {
        if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("negative power spectrum entry");
    }

    rng::GaussianStream gauss(seed);
    std::vector<std::complex<double>> white(m);
    for (auto& w : white) w = gauss.next();

    auto spectrum = fft::forward(white);
    // The white noise lives on the hbar-scaled time grid dtau = dt/hbar, the
    // same convention the power-spectrum values use.
    const double inv_sqrt_dtau = 1.0 / std::sqrt(dt_fs / units::hbar_cm1_fs);
    for (std::size_t k = 0; k < m; ++k) spectrum[k] *= inv_sqrt_dtau * std::sqrt(ps.values[k]);
    auto colored = fft::inverse(spectrum);

    NoiseTrajectory traj;
    traj.dt_fs = dt_fs;
    traj.seed = seed;
    traj.samples.resize(1, static_cast<Eigen::Index>(n_steps));
    for (std::size_t i = 0; i < n_steps; ++i) traj.samples(0, static_cast<Eigen::Index>(i)) = colored[i].real();
    return traj;
}

NoiseTrajectory generate_site_noise(const std::vector<SpectralDensity>& models,
                                    double temperature_K, std::size_t n_steps, double dt_fs,
                                    std::uint64_t base_seed) {
    if (models.empty()) throw std::invalid_argument("need one spectral density per site");
    NoiseTrajectory traj;
    traj.dt_fs = dt_fs;
    traj.seed = base_seed;
    traj.samples.resize(static_cast<Eigen::Index>(models.size()), static_cast<Eigen::Index>(n_steps));
    std::uint64_t h = 0;
    for (std::size_t n = 0; n < models.size(); ++n) {
        const auto ps = target_power_spectrum(models[n], temperature_K, n_steps, dt_fs);
        const auto site = generate_noise(ps, n_steps, dt_fs, rng::split_seed(base_seed, n));
        traj.samples.row(static_cast<Eigen::Index>(n)) = site.samples.row(0);
        h = rng::mix64(h ^ models[n].hash());
    }
    traj.model_hash = h;
    return traj;
}

std::vector<NoiseTrajectory> windows_from_trajectory(const NoiseTrajectory& traj,
                                                     std::size_t window_len, std::size_t stride) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1 step");
    if (window_len < 1) throw std::invalid_argument("window length must be >= 1 step");
    std::vector<NoiseTrajectory> windows;
    if (window_len > traj.n_steps()) return windows;
    const std::size_t count = (traj.n_steps() - window_len) / stride + 1;
    windows.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        NoiseTrajectory win;
        win.dt_fs = traj.dt_fs;
        win.seed = traj.seed;
        win.model_hash = traj.model_hash;
        win.samples = traj.samples.middleCols(static_cast<Eigen::Index>(w * stride),
                                              static_cast<Eigen::Index>(window_len));
        windows.push_back(std::move(win));
    }
    return windows;
}

void write_noise_csv(const std::filesystem::path& path, const NoiseTrajectory& traj) {
    csv::Table t;
    t.metadata["dt_fs"] = csv::format_double(traj.dt_fs);
    t.metadata["seed"] = std::to_string(traj.seed);
    t.metadata["model_hash"] = std::to_string(traj.model_hash);
    t.columns.push_back("t_fs");
    for (std::size_t n = 0; n < traj.n_sites(); ++n)
        t.columns.push_back("dE_site" + std::to_string(n + 1) + "_cm1");
    t.rows.reserve(traj.n_steps());
    for (std::size_t i = 0; i < traj.n_steps(); ++i) {
        std::vector<double> row;
        row.reserve(traj.n_sites() + 1);
        row.push_back(static_cast<double>(i) * traj.dt_fs);
        for (std::size_t n = 0; n < traj.n_sites(); ++n)
            row.push_back(traj.samples(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)));
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

NoiseTrajectory read_noise_csv(const std::filesystem::path& path) {
    csv::Table t = csv::read_file(path);
    if (t.columns.empty() || t.columns[0] != "t_fs")
        throw ConfigError(path.string() + ": expected first column t_fs");
    const std::size_t n_sites = t.columns.size() - 1;
    if (n_sites == 0) throw ConfigError(path.string() + ": no site columns");
    if (t.rows.size() < 2) throw ConfigError(path.string() + ": need at least 2 samples");

    NoiseTrajectory traj;
    if (auto it = t.metadata.find("dt_fs"); it != t.metadata.end()) {
        traj.dt_fs = std::stod(it->second);
    } else {
        traj.dt_fs = t.rows[1][0] - t.rows[0][0];
    }
    if (!(traj.dt_fs > 0.0)) throw ConfigError(path.string() + ": non-positive time step");
    if (auto it = t.metadata.find("seed"); it != t.metadata.end()) traj.seed = std::stoull(it->second);
    if (auto it = t.metadata.find("model_hash"); it != t.metadata.end())
        traj.model_hash = std::stoull(it->second);

    traj.samples.resize(static_cast<Eigen::Index>(n_sites), static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t n = 0; n < n_sites; ++n)
            traj.samples(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) = t.rows[i][n + 1];
    return traj;
}

}  // namespace nisekit
