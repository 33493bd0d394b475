#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <vector>

#include "nisekit/config.hpp"
#include "nisekit/csv.hpp"
#include "nisekit/errors.hpp"
#include "nisekit/superres.hpp"
#include "nisekit/units.hpp"
#include "nisekit/workflows.hpp"

namespace fs = std::filesystem;
using namespace nisekit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct SharedArgs {
    std::string config_path;
};

void cmd_gen_noise(const SharedArgs& args) {
    const RunConfig config = load_run_config_file(args.config_path, Command::gen_noise);
    const auto files = run_gen_noise(config);
    std::cout << "wrote " << files.size() << " trajectory file(s) under " << config.out_dir.string()
              << "\n";
}

void cmd_propagate(const SharedArgs& args) {
    const RunConfig config = load_run_config_file(args.config_path, Command::propagate);
    const PropagateResult result = run_propagate(config);
    fs::create_directories(config.out_dir);
    std::size_t n_outputs = 0;
    const auto out = [&](const std::string& name) { return config.out_dir / (config.prefix + name); };

    write_populations_csv(out("_populations_plain.csv"), result.plain);
    ++n_outputs;
    if (result.constructed) {
        write_populations_csv(out("_populations_constructed.csv"), *result.constructed);
        ++n_outputs;
    }
    if (result.interpolated) {
        write_populations_csv(out("_populations_interpolated.csv"), *result.interpolated);
        ++n_outputs;
    }
    if (result.lifetimes) {
        write_lifetimes_csv(out("_lifetimes.csv"), *result.lifetimes);
        ++n_outputs;
    }
    if (config.write_density) {
        write_density_csv(out("_density.csv"), result.plain);
        ++n_outputs;
    }
    write_manifest(out("_manifest.txt"), config, "propagate", n_outputs);
    if (result.degeneracy_warnings > 0) {
        std::cerr << "warning: " << result.degeneracy_warnings
                  << " step(s) saw severe eigenframe rotation (possible degenerate crossing)\n";
    }
    std::cout << "wrote " << n_outputs << " file(s) under " << config.out_dir.string() << "\n";
}

void cmd_absorption(const SharedArgs& args) {
    const RunConfig config = load_run_config_file(args.config_path, Command::absorption);
    const AbsorptionSpectrum spectrum = run_absorption(config);
    fs::create_directories(config.out_dir);
    const auto path = config.out_dir / (config.prefix + "_spectrum.csv");
    write_spectrum_csv(path, spectrum);
    write_manifest(config.out_dir / (config.prefix + "_manifest.txt"), config, "absorption", 1);
    std::cout << "wrote " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nisekit: structured-noise synthesis, bath spectral-density estimation, and "
                 "NISE/TNISE exciton dynamics"};
    app.require_subcommand(1);

    SharedArgs gen_args, prop_args, abs_args;

    auto* gen = app.add_subcommand("gen-noise", "generate noise trajectories from a spectral density");
    gen->add_option("-c,--config", gen_args.config_path, "run configuration file")->required();

    auto* prop = app.add_subcommand("propagate", "NISE/TNISE population dynamics");
    prop->add_option("-c,--config", prop_args.config_path, "run configuration file")->required();

    auto* absn = app.add_subcommand("absorption", "linear absorption spectrum");
    absn->add_option("-c,--config", abs_args.config_path, "run configuration file")->required();

    // estimate-sd
    std::vector<std::string> est_inputs;
    std::string est_output = "sd_estimate.csv";
    std::string est_damping = "gaussian";
    double est_tc = 0.0, est_b = 2.0, est_window = 500.0, est_floor = 2.0, est_temp = 300.0;
    std::string est_autocorr_out;
    auto* est = app.add_subcommand("estimate-sd",
                                   "estimate a spectral density from noise trajectory files");
    est->add_option("inputs", est_inputs, "trajectory CSV files")->required()->expected(-1);
    est->add_option("-o,--output", est_output, "output spectral density CSV");
    est->add_option("--damping", est_damping, "gaussian|exponential|step|general");
    est->add_option("--tc-fs", est_tc, "damping cutoff time (fs); omit for automatic detection");
    est->add_option("--b", est_b, "exponent for --damping general");
    est->add_option("--cutoff-window-fs", est_window, "moving-average window for cutoff detection");
    est->add_option("--cutoff-floor-factor", est_floor, "floor multiple marking the crossover");
    est->add_option("--temperature-K", est_temp, "bath temperature");
    est->add_option("--autocorrelation-out", est_autocorr_out, "also write the averaged C(t) CSV");

    // resample
    std::string res_input, res_output = "resampled.csv";
    double res_dt = 0.0;
    bool res_taper = false;
    auto* res = app.add_subcommand("resample", "upsample a noise trajectory by zero-padding");
    res->add_option("input", res_input, "trajectory CSV")->required();
    res->add_option("-o,--output", res_output, "output CSV");
    res->add_option("--dt-fs", res_dt, "target time step (fs)")->required();
    res->add_flag("--taper", res_taper, "raised-cosine rolloff at the old Nyquist edge");

    // superres-fit
    std::string sr_input, sr_output = "superres.csv", sr_grid = "desk", sr_sd_out;
    double sr_a = 1e4, sr_b = 1.0, sr_c = 0.1, sr_tc = 0.0, sr_threshold = 5e-8;
    double sr_sd_wmax = 0.2 * units::cm1_per_eV, sr_sd_wstep = 2.0;
    auto* sr = app.add_subcommand("superres-fit",
                                  "sparse damped-cosine fit of an autocorrelation function");
    sr->add_option("input", sr_input, "autocorrelation CSV (t_fs,C_cm2)")->required();
    sr->add_option("-o,--output", sr_output, "output CSV of (gamma, Omega, lambda) triples");
    sr->add_option("--grid", sr_grid, "desk|paper");
    sr->add_option("--a", sr_a, "data-fidelity weight");
    sr->add_option("--b", sr_b, "l1 weight");
    sr->add_option("--c", sr_c, "negative-peak penalty weight");
    sr->add_option("--tc-fs", sr_tc, "include lags up to this time (default: all)");
    sr->add_option("--threshold", sr_threshold, "debias retention threshold");
    sr->add_option("--sd-out", sr_sd_out, "also write the reconstructed spectral density CSV");
    sr->add_option("--sd-omega-max", sr_sd_wmax, "reconstruction grid maximum (cm^-1)");
    sr->add_option("--sd-omega-step", sr_sd_wstep, "reconstruction grid step (cm^-1)");

    // equilibrium
    std::string eq_hamiltonian, eq_output = "equilibrium.csv";
    double eq_temp = 300.0;
    auto* eq = app.add_subcommand("equilibrium", "Boltzmann-Gibbs site populations of a Hamiltonian");
    eq->add_option("hamiltonian", eq_hamiltonian, "Hamiltonian CSV")->required();
    eq->add_option("-o,--output", eq_output, "output CSV");
    eq->add_option("--temperature-K", eq_temp, "temperature");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gen->parsed()) cmd_gen_noise(gen_args);
        if (prop->parsed()) cmd_propagate(prop_args);
        if (absn->parsed()) cmd_absorption(abs_args);

        if (est->parsed()) {
            std::vector<NoiseTrajectory> trajectories;
            trajectories.reserve(est_inputs.size());
            for (const auto& p : est_inputs) trajectories.push_back(read_noise_csv(p));
            EstimateSdOptions options;
            options.temperature_K = est_temp;
            options.cutoff_window_fs = est_window;
            options.cutoff_floor_factor = est_floor;
            options.damping.t_c_fs = est_tc;
            options.damping.b = est_b;
            if (est_damping == "gaussian") {
                options.damping.kind = DampingSpec::Kind::gaussian;
            } else if (est_damping == "exponential") {
                options.damping.kind = DampingSpec::Kind::exponential;
            } else if (est_damping == "step") {
                options.damping.kind = DampingSpec::Kind::step;
            } else if (est_damping == "general") {
                options.damping.kind = DampingSpec::Kind::general;
            } else {
                throw ConfigError("unknown damping kind: " + est_damping);
            }
            const EstimateSdResult result = estimate_sd(trajectories, options);
            result.sd.write_csv(est_output);
            if (!est_autocorr_out.empty()) write_autocorrelation_csv(est_autocorr_out, result.autocorrelation);
            if (result.cutoff_warning)
                std::cerr << "warning: no clean noise-floor crossover; cutoff defaulted to half the series\n";
            std::cout << "t_c = " << result.t_c_fs << " fs; wrote " << est_output << "\n";
        }

        if (res->parsed()) {
            const NoiseTrajectory traj = read_noise_csv(res_input);
            const NoiseTrajectory dense = resample(traj, res_dt, res_taper);
            write_noise_csv(res_output, dense);
            std::cout << "wrote " << res_output << " (" << dense.n_steps() << " samples at "
                      << dense.dt_fs << " fs)\n";
        }

        if (sr->parsed()) {
            const AutocorrelationSeries c = read_autocorrelation_csv(sr_input);
            const SuperResGrid grid =
                sr_grid == "paper" ? SuperResGrid::paper_grid() : SuperResGrid::desk_default();
            SuperResSolution solution = fit(c, grid, sr_a, sr_b, sr_c, sr_tc);
            solution = debias(solution, c, sr_threshold);
            write_solution_csv(sr_output, solution);
            if (solution.warning)
                std::cerr << "warning: debias threshold removed every mode; solution is zero\n";
            if (!sr_sd_out.empty()) {
                std::vector<double> wgrid;
                for (double w = 0.0; w <= sr_sd_wmax; w += sr_sd_wstep) wgrid.push_back(w);
                reconstruct_sd(solution, std::move(wgrid)).write_csv(sr_sd_out);
            }
            std::cout << "retained " << solution.retained(0.0).size() << " mode(s); wrote " << sr_output
                      << "\n";
        }

        if (eq->parsed()) {
            const Eigen::MatrixXd h = read_hamiltonian_csv(eq_hamiltonian);
            const ComplexMatrix rho = boltzmann_density(h, eq_temp);
            csv::Table t;
            t.columns = {"site", "population"};
            for (Eigen::Index i = 0; i < rho.rows(); ++i)
                t.rows.push_back({static_cast<double>(i + 1), rho(i, i).real()});
            csv::write_file(eq_output, t);
            std::cout << "wrote " << eq_output << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
