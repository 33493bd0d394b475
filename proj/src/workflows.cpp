#include "nisekit/workflows.hpp"

#include <cmath>
#include <fstream>
#include <functional>

#include "nisekit/csv.hpp"
#include "nisekit/errors.hpp"
#include "nisekit/parallel.hpp"
#include "nisekit/rng.hpp"

namespace nisekit {

namespace {

// Per-realization noise source: generated from the bath models or cut out of
// one long trajectory file as overlapping windows.
class NoiseSource {
public:
    explicit NoiseSource(const RunConfig& config) : config_(config) {
        if (!config.noise_csv.empty()) {
            NoiseTrajectory full = read_noise_csv(config.noise_csv);
            if (full.n_sites() != config.n_sites())
                throw ConfigError("noise file has " + std::to_string(full.n_sites()) +
                                  " sites, expected " + std::to_string(config.n_sites()));
            std::size_t window_len = config.n_steps;
            std::size_t stride = 1;
            if (config.window_len_fs > 0.0)
                window_len = static_cast<std::size_t>(std::llround(config.window_len_fs / full.dt_fs)) + 1;
            if (config.stride_fs > 0.0)
                stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.stride_fs / full.dt_fs)));
            windows_ = windows_from_trajectory(full, window_len, stride);
            if (windows_.size() < config.n_realizations)
                throw ConfigError("noise file yields " + std::to_string(windows_.size()) +
                                  " windows, need " + std::to_string(config.n_realizations));
        }
    }

    NoiseTrajectory get(std::size_t realization) const {
        NoiseTrajectory traj;
        if (windows_.empty()) {
            traj = generate_site_noise(config_.site_models, config_.temperature_K, config_.n_steps,
                                       config_.dt_fs, rng::split_seed(config_.seed, realization));
        } else {
            traj = windows_[realization];
        }
        if (config_.resample_dt_fs > 0.0 && config_.resample_dt_fs < traj.dt_fs)
            traj = resample(traj, config_.resample_dt_fs);
        return traj;
    }

private:
    const RunConfig& config_;
    std::vector<NoiseTrajectory> windows_;
};

struct DensityBlock {
    std::vector<ComplexMatrix> main;
    std::vector<ComplexMatrix> nise;
    std::size_t warnings = 0;
};

}  // namespace

PropagateResult run_propagate(const RunConfig& config) {
    if (config.hamiltonian.size() == 0) throw ConfigError("propagate requires a Hamiltonian");
    const Eigen::Index dim = config.hamiltonian.rows();
    const bool want_interpolated = config.averaging == DensitySeries::Averaging::interpolated;
    const bool want_constructed = want_interpolated ||
                                  config.averaging == DensitySeries::Averaging::constructed;
    // Lifetimes come from plain NISE dynamics; a TNISE run needs a second
    // propagation over the same noise.
    const bool need_separate_nise = want_interpolated && config.mode == PropagationMode::tnise;

    NoiseSource noise(config);
    ComplexVector psi0 = ComplexVector::Zero(dim);
    psi0(static_cast<Eigen::Index>(config.initial_site)) = 1.0;

    std::vector<ComplexMatrix> sum_main;
    std::vector<ComplexMatrix> sum_nise;
    std::size_t warnings = 0;
    double out_dt = 0.0;

    auto per_block = [&](std::size_t first, std::size_t last) {
        DensityBlock block;
        for (std::size_t r = first; r < last; ++r) {
            const NoiseTrajectory traj = noise.get(r);
            const PropagatorSeries prop =
                propagate_realization(config.hamiltonian, traj, config.temperature_K, config.mode);
            block.warnings += prop.degeneracy_warnings;
            if (block.main.empty())
                block.main.assign(prop.u.size(), ComplexMatrix::Zero(dim, dim));
            for (std::size_t i = 0; i < prop.u.size(); ++i) {
                const ComplexVector psi = prop.u[i] * psi0;
                block.main[i].noalias() += psi * psi.adjoint();
            }
            if (need_separate_nise) {
                const PropagatorSeries pn =
                    propagate_realization(config.hamiltonian, traj, config.temperature_K,
                                          PropagationMode::nise);
                if (block.nise.empty())
                    block.nise.assign(pn.u.size(), ComplexMatrix::Zero(dim, dim));
                for (std::size_t i = 0; i < pn.u.size(); ++i) {
                    const ComplexVector psi = pn.u[i] * psi0;
                    block.nise[i].noalias() += psi * psi.adjoint();
                }
            }
        }
        return block;
    };
    auto fold = [&](DensityBlock&& block) {
        warnings += block.warnings;
        if (sum_main.empty()) {
            sum_main = std::move(block.main);
        } else {
            for (std::size_t i = 0; i < sum_main.size(); ++i) sum_main[i] += block.main[i];
        }
        if (need_separate_nise) {
            if (sum_nise.empty()) {
                sum_nise = std::move(block.nise);
            } else {
                for (std::size_t i = 0; i < sum_nise.size(); ++i) sum_nise[i] += block.nise[i];
            }
        }
    };
    for_each_block_ordered(config.n_realizations, config.workers, per_block, fold);
    out_dt = noise.get(0).dt_fs;  // the step after any windowing/resampling

    PropagateResult result;
    result.degeneracy_warnings = warnings;
    result.plain.dt_fs = out_dt;
    result.plain.tag = DensitySeries::Averaging::plain;
    const double inv = 1.0 / static_cast<double>(config.n_realizations);
    result.plain.rho.reserve(sum_main.size());
    for (auto& m : sum_main) result.plain.rho.push_back(m * inv);

    if (want_constructed)
        result.constructed = constructed_series_from_mean(result.plain, config.eps_floor);

    if (want_interpolated) {
        if (need_separate_nise) {
            DensitySeries nise_series;
            nise_series.dt_fs = out_dt;
            nise_series.tag = DensitySeries::Averaging::plain;
            nise_series.rho.reserve(sum_nise.size());
            for (auto& m : sum_nise) nise_series.rho.push_back(m * inv);
            result.nise_plain = std::move(nise_series);
        } else {
            result.nise_plain = result.plain;
        }
        result.lifetimes = fit_lifetimes(*result.nise_plain);
        result.interpolated = interpolated_populations(result.plain, *result.constructed,
                                                       *result.lifetimes, config.interpolation_factor);
    }
    return result;
}

std::vector<std::complex<double>> run_absorption_sigma(const RunConfig& config, double* out_dt_fs) {
    if (config.hamiltonian.size() == 0) throw ConfigError("absorption requires a Hamiltonian");
    const DipoleSet dipoles = read_dipoles_csv(config.dipoles_csv);
    if (dipoles.n_sites() != config.n_sites())
        throw ConfigError("dipole count does not match the Hamiltonian dimension");

    Eigen::MatrixXd h = config.hamiltonian;
    if (config.subtract_mean_site_energy) {
        const double mean = h.diagonal().mean();
        h.diagonal().array() -= mean;
    }

    NoiseSource noise(config);
    std::vector<std::complex<double>> sum;

    auto per_block = [&](std::size_t first, std::size_t last) {
        std::vector<std::complex<double>> block;
        for (std::size_t r = first; r < last; ++r) {
            const NoiseTrajectory traj = noise.get(r);
            const PropagatorSeries prop = propagate_realization(h, traj, config.temperature_K, config.mode);
            const auto sigma = sigma_t(prop, dipoles);
            if (block.empty()) block.assign(sigma.size(), {0.0, 0.0});
            for (std::size_t i = 0; i < sigma.size(); ++i) block[i] += sigma[i];
        }
        return block;
    };
    auto fold = [&](std::vector<std::complex<double>>&& block) {
        if (sum.empty()) {
            sum = std::move(block);
        } else {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += block[i];
        }
    };
    for_each_block_ordered(config.n_realizations, config.workers, per_block, fold);
    if (out_dt_fs) *out_dt_fs = noise.get(0).dt_fs;

    const double inv = 1.0 / static_cast<double>(config.n_realizations);
    for (auto& v : sum) v *= inv;
    return sum;
}

AbsorptionSpectrum run_absorption(const RunConfig& config) {
    double dt = config.dt_fs;
    const auto sigma = run_absorption_sigma(config, &dt);
    AbsorptionSpectrum spectrum = absorption_spectrum(sigma, dt, config.apodize, config.shift_cm1);
    if (!config.align_to_csv.empty()) {
        const AbsorptionSpectrum reference = read_spectrum_csv(config.align_to_csv);
        const double lo = std::max(spectrum.omega_cm1.front(), reference.omega_cm1.front());
        const double hi = std::min(spectrum.omega_cm1.back(), reference.omega_cm1.back());
        const double shift = align_shift(spectrum, reference, lo, hi);
        spectrum = apply_shift(std::move(spectrum), shift);
    }
    if (config.normalize) spectrum = normalize_peak(std::move(spectrum));
    return spectrum;
}

std::vector<std::filesystem::path> run_gen_noise(const RunConfig& config) {
    std::filesystem::create_directories(config.out_dir);
    std::vector<std::filesystem::path> files;
    files.reserve(config.n_realizations);

    std::vector<NoiseTrajectory> results(config.n_realizations);
    auto per_block = [&](std::size_t first, std::size_t last) {
        for (std::size_t r = first; r < last; ++r) {
            results[r] = generate_site_noise(config.site_models, config.temperature_K, config.n_steps,
                                             config.dt_fs, rng::split_seed(config.seed, r));
        }
        return first;
    };
    for_each_block_ordered(config.n_realizations, config.workers, per_block, [](std::size_t) {});

    for (std::size_t r = 0; r < config.n_realizations; ++r) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_noise_r%05zu.csv", config.prefix.c_str(), r);
        const auto path = config.out_dir / name;
        write_noise_csv(path, results[r]);
        files.push_back(path);
    }
    write_manifest(config.out_dir / (config.prefix + "_manifest.txt"), config, "gen-noise", files.size());
    return files;
}

EstimateSdResult estimate_sd(const std::vector<NoiseTrajectory>& trajectories,
                             const EstimateSdOptions& options) {
    if (trajectories.empty()) throw ConfigError("no trajectories given");
    std::vector<AutocorrelationSeries> series;
    for (const auto& traj : trajectories) {
        if (traj.dt_fs != trajectories.front().dt_fs)
            throw ConfigError("trajectories have mismatched time steps");
        for (std::size_t s = 0; s < traj.n_sites(); ++s) {
            NoiseTrajectory one;
            one.dt_fs = traj.dt_fs;
            one.samples = traj.samples.row(static_cast<Eigen::Index>(s));
            series.push_back(autocorrelation(one));
        }
    }
    EstimateSdResult result;
    result.autocorrelation = average_autocorrelations(series);

    DampingSpec damping = options.damping;
    if (damping.t_c_fs <= 0.0) {
        const CutoffSuggestion cut = suggest_cutoff(result.autocorrelation, options.cutoff_window_fs,
                                                    options.cutoff_floor_factor);
        damping.t_c_fs = cut.t_c_fs;
        result.cutoff_warning = cut.warning;
    }
    result.t_c_fs = damping.t_c_fs;
    const AutocorrelationSeries damped = apply_damping(result.autocorrelation, damping);
    result.sd = sd_from_autocorrelation(damped, options.temperature_K);
    return result;
}

void write_manifest(const std::filesystem::path& path, const RunConfig& config,
                    const std::string& command, std::size_t n_outputs) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path.string());
    out << "command = " << command << "\n";
    out << "version = " << kVersion << "\n";
    out << "config_hash = " << config.config_hash << "\n";
    out << "seed = " << config.seed << "\n";
    out << "n_outputs = " << n_outputs << "\n";
}

void write_lifetimes_csv(const std::filesystem::path& path, const LifetimeSet& lifetimes) {
    csv::Table t;
    t.columns = {"site", "tau_fs", "flag"};
    for (std::size_t s = 0; s < lifetimes.tau_fs.size(); ++s) {
        t.rows.push_back({static_cast<double>(s + 1), lifetimes.tau_fs[s],
                          static_cast<double>(static_cast<int>(lifetimes.flags[s]))});
    }
    csv::write_file(path, t);
}

void write_density_csv(const std::filesystem::path& path, const DensitySeries& series) {
    csv::Table t;
    const Eigen::Index dim = series.rho.empty() ? 0 : series.rho.front().rows();
    t.columns.push_back("t_fs");
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const std::string tag = std::to_string(i + 1) + "_" + std::to_string(j + 1);
            t.columns.push_back("rho" + tag + "_re");
            t.columns.push_back("rho" + tag + "_im");
        }
    }
    for (std::size_t k = 0; k < series.rho.size(); ++k) {
        std::vector<double> row;
        row.reserve(1 + 2 * static_cast<std::size_t>(dim * dim));
        row.push_back(static_cast<double>(k) * series.dt_fs);
        for (Eigen::Index i = 0; i < dim; ++i) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                row.push_back(series.rho[k](i, j).real());
                row.push_back(series.rho[k](i, j).imag());
            }
        }
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

}  // namespace nisekit
