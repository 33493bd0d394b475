#include <doctest.h>

#include <cmath>
#include <random>

#include "nisekit/bath_analysis.hpp"
#include "nisekit/fft.hpp"
#include "nisekit/rng.hpp"
#include "nisekit/units.hpp"
#include "support.hpp"

using namespace nisekit;
namespace units = nisekit::units;

TEST_CASE("autocorrelation of an alternating sequence is (-1)^j") {
    std::vector<double> x(64);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;
    auto c = autocorrelation(testsupport::make_trajectory(x, 1.0));
    REQUIRE(c.values.size() == 32);
    for (std::size_t j = 0; j < c.values.size(); ++j) {
        const double expected = (j % 2 == 0) ? 1.0 : -1.0;
        CHECK(c.values[j] == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("autocorrelation of a constant sequence is zero") {
    std::vector<double> x(32, 3.7);
    auto c = autocorrelation(testsupport::make_trajectory(x, 1.0));
    for (double v : c.values) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("autocorrelation equals the direct lag sums") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.5, 2.0);
    std::vector<double> x(301);
    for (auto& v : x) v = g(rng);
    auto fftc = autocorrelation(testsupport::make_trajectory(x, 2.0));
    auto direct = testsupport::direct_autocorrelation(x, 2.0);
    REQUIRE(fftc.values.size() == direct.values.size());
    for (std::size_t j = 0; j < fftc.values.size(); ++j)
        CHECK(fftc.values[j] == doctest::Approx(direct.values[j]).epsilon(1e-9));
}

TEST_CASE("white gaussian noise: C(0) near 1, later lags near 0") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t n = 100000;
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    auto c = autocorrelation(testsupport::make_trajectory(x, 1.0));
    CHECK(c.values[0] == doctest::Approx(1.0).epsilon(0.02));
    std::size_t violations = 0;
    for (std::size_t j = 1; j < 200; ++j) {
        const double se = 1.0 / std::sqrt(static_cast<double>(n - j));
        if (std::abs(c.values[j]) > 3.0 * se) ++violations;
    }
    CHECK(violations <= 2);
}

TEST_CASE("autocorrelation requires at least 4 samples and one site") {
    CHECK_THROWS_AS(autocorrelation(testsupport::make_trajectory({1.0, 2.0, 3.0}, 1.0)),
                    std::invalid_argument);
    NoiseTrajectory two;
    two.dt_fs = 1.0;
    two.samples = Eigen::MatrixXd::Zero(2, 16);
    CHECK_THROWS_AS(autocorrelation(two), std::invalid_argument);
}

TEST_CASE("average_autocorrelations") {
    std::vector<double> x{1.0, -1.0, 0.5, 2.0, -0.5, 1.5, 0.0, -2.0};
    auto c = autocorrelation(testsupport::make_trajectory(x, 1.0));
    std::vector<AutocorrelationSeries> one{c};
    auto same = average_autocorrelations(one);
    for (std::size_t j = 0; j < c.values.size(); ++j) CHECK(same.values[j] == c.values[j]);

    std::vector<AutocorrelationSeries> copies{c, c, c};
    auto avg = average_autocorrelations(copies);
    for (std::size_t j = 0; j < c.values.size(); ++j)
        CHECK(avg.values[j] == doctest::Approx(c.values[j]).epsilon(1e-15));

    AutocorrelationSeries other = c;
    other.dt_fs = 2.0;
    std::vector<AutocorrelationSeries> bad{c, other};
    CHECK_THROWS_AS(average_autocorrelations(bad), std::invalid_argument);
}

TEST_CASE("damping kinds") {
    AutocorrelationSeries c;
    c.dt_fs = 10.0;
    c.values.assign(101, 1.0);

    auto step = apply_damping(c, {DampingSpec::Kind::step, 1000.0, 2.0});
    for (std::size_t j = 0; j <= 100; ++j) CHECK(step.values[j] == (j * 10.0 <= 1000.0 ? 1.0 : 0.0));

    // step with t_c beyond the last lag is the identity
    auto wide = apply_damping(c, {DampingSpec::Kind::step, 2000.0, 2.0});
    for (double v : wide.values) CHECK(v == 1.0);

    auto gauss = apply_damping(c, {DampingSpec::Kind::gaussian, 500.0, 2.0});
    CHECK(gauss.values[50] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    auto expd = apply_damping(c, {DampingSpec::Kind::exponential, 500.0, 2.0});
    CHECK(expd.values[50] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    // general b = 100 approximates the step away from the cutoff region
    auto sharp = apply_damping(c, {DampingSpec::Kind::general, 500.0, 100.0});
    for (std::size_t j = 0; j <= 100; ++j) {
        const double t = 10.0 * static_cast<double>(j);
        if (std::abs(t - 500.0) <= 25.0) continue;  // skip t_c +- 5%
        const double expected = t <= 500.0 ? 1.0 : 0.0;
        CHECK(std::abs(sharp.values[j] - expected) < 0.02);
    }
}

TEST_CASE("suggest_cutoff finds the noise-floor crossover") {
    AutocorrelationSeries c;
    c.dt_fs = 10.0;
    const std::size_t n = 2000;
    c.values.resize(n);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = 10.0 * static_cast<double>(j);
        c.values[j] = 100.0 * std::exp(-t / 1500.0) + 0.5 * g(rng);
    }
    auto cut = suggest_cutoff(c);
    CHECK_FALSE(cut.warning);
    // The decay meets twice the ~0.4 floor around t ~ 1500 ln(100/0.8) ~ 7 ps.
    CHECK(cut.t_c_fs > 3000.0);
    CHECK(cut.t_c_fs < 12000.0);
}

TEST_CASE("suggest_cutoff warns on a pure decay with no floor") {
    AutocorrelationSeries c;
    c.dt_fs = 10.0;
    const std::size_t n = 2000;
    c.values.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        c.values[j] = std::exp(-static_cast<double>(j) * 10.0 / 1000.0);
    auto cut = suggest_cutoff(c);
    CHECK(cut.warning);
    CHECK(cut.t_c_fs == doctest::Approx(0.5 * static_cast<double>(n) * 10.0));
}

TEST_CASE("suggest_cutoff on pure noise triggers within the first few lags") {
    AutocorrelationSeries c;
    c.dt_fs = 10.0;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    c.values.resize(2000);
    for (auto& v : c.values) v = g(rng);
    c.values[0] = 50.0;  // the variance spike at lag zero
    auto cut = suggest_cutoff(c);
    CHECK_FALSE(cut.warning);
    CHECK(cut.t_c_fs < 500.0);
}

TEST_CASE("sd_from_autocorrelation reproduces the Lorentzian of an exponential C") {
    const double c0 = 1000.0, tau = 100.0, temperature = 300.0, dt = 1.0;
    const std::size_t n = 8192;
    AutocorrelationSeries c;
    c.dt_fs = dt;
    c.values.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        c.values[j] = c0 * std::exp(-static_cast<double>(j) * dt / tau);
    auto sd = sd_from_autocorrelation(c, temperature);

    const double beta = units::beta_from_temperature(temperature);
    const double tau_red = tau / units::hbar_cm1_fs;  // hbar-scaled decay time
    for (double w : {10.0, 53.0, 106.0, 200.0, 330.0, 480.0, 530.0}) {
        const double expected = beta * w / 3.14159265358979323846 * c0 * tau_red /
                                (1.0 + w * w * tau_red * tau_red);
        CHECK(sd(w) == doctest::Approx(expected).epsilon(0.01));
    }
}

TEST_CASE("zero autocorrelation gives zero spectral density") {
    AutocorrelationSeries c;
    c.dt_fs = 1.0;
    c.values.assign(64, 0.0);
    auto sd = sd_from_autocorrelation(c, 300.0);
    for (double w : sd.grid()) CHECK(sd(w) == 0.0);
}

TEST_CASE("C -> J -> C round trip is exact") {
    const std::size_t n = 512;
    AutocorrelationSeries c;
    c.dt_fs = 2.0;
    c.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = 2.0 * static_cast<double>(j);
        c.values[j] = 4.0e4 * std::exp(-t / 150.0) * std::cos(t * 400.0 / units::hbar_cm1_fs) +
                      1.0e4 * std::exp(-t / 60.0);
    }
    auto sd = sd_from_autocorrelation(c, 300.0);
    auto back = autocorrelation_from_sd(sd, 300.0, c.dt_fs, n);
    for (std::size_t j = 0; j < n; ++j)
        CHECK(std::abs(back.values[j] - c.values[j]) < 1e-8 * std::abs(c.values[0]));
}

TEST_CASE("J -> C -> J duality on grid-aligned tabulated models") {
    const std::size_t n = 256;
    const double dt = 2.0;
    const double domega = 3.14159265358979323846 * units::hbar_cm1_fs / ((n - 1) * dt);
    std::vector<double> omega(n), j(n);
    for (std::size_t k = 0; k < n; ++k) {
        omega[k] = domega * static_cast<double>(k);
        j[k] = omega[k] * std::exp(-omega[k] / 400.0);  // smooth bump, zero at DC
    }
    auto model = SpectralDensity::tabulated(omega, j);
    auto c = autocorrelation_from_sd(model, 300.0, dt, n);
    auto back = sd_from_autocorrelation(c, 300.0);
    for (std::size_t k = 1; k < n; ++k)
        CHECK(back(omega[k]) == doctest::Approx(j[k]).epsilon(1e-6));
}

TEST_CASE("autocorrelation_from_sd: C(0) equals 2 kB T lambda") {
    auto sd = SpectralDensity::drude_lorentz({{0.0, 100.0, 60.0}});
    auto c = autocorrelation_from_sd(sd, 300.0, 1.0, 16384);
    const double expected = 2.0 * units::kB_cm1_per_K * 300.0 * 100.0;
    CHECK(c.values[0] == doctest::Approx(expected).epsilon(0.01));

    auto zero = SpectralDensity::drude_lorentz({});
    auto cz = autocorrelation_from_sd(zero, 300.0, 1.0, 64);
    for (double v : cz.values) CHECK(v == 0.0);
}

TEST_CASE("fmo-like autocorrelation decays to a small tail on the ps scale") {
    auto sd = testsupport::fmo_like_sd();
    auto c = autocorrelation_from_sd(sd, 300.0, 10.0, 4096);  // ~41 ps of lags
    const double c0 = c.values[0];
    CHECK(c0 > 0.0);
    double tail = 0.0;
    for (std::size_t j = 2000; j < 2100; ++j) tail = std::max(tail, std::abs(c.values[j]));
    CHECK(tail < 0.05 * c0);
    double early = 0.0;
    for (std::size_t j = 0; j < 100; ++j) early = std::max(early, std::abs(c.values[j]));
    CHECK(early == doctest::Approx(c0));
}

TEST_CASE("resample: identity at the same step") {
    auto sd = testsupport::three_peak_sd();
    auto ps = target_power_spectrum(sd, 300.0, 64, 2.0);
    auto traj = generate_noise(ps, 64, 2.0, 5);
    auto same = resample(traj, 2.0);
    CHECK((same.samples.array() == traj.samples.array()).all());
}

TEST_CASE("resample: band-limited cosine upsamples exactly") {
    const std::size_t n = 128;
    const double dt = 10.0;
    std::vector<double> x(n);
    const double freq_bin = 13.0;
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::cos(2.0 * 3.14159265358979323846 * freq_bin * static_cast<double>(i) /
                        static_cast<double>(n));
    auto traj = testsupport::make_trajectory(x, dt);
    auto dense = resample(traj, 1.0);
    CHECK(dense.n_steps() == 1280);
    CHECK(dense.dt_fs == doctest::Approx(1.0));
    for (std::size_t i = 0; i < dense.n_steps(); ++i) {
        const double t = static_cast<double>(i) * dense.dt_fs;
        const double expected = std::cos(2.0 * 3.14159265358979323846 * freq_bin * t /
                                         (static_cast<double>(n) * dt));
        CHECK(std::abs(dense.samples(0, static_cast<Eigen::Index>(i)) - expected) < 1e-8);
    }
}

TEST_CASE("resample preserves the power spectrum below the old Nyquist") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t n = 256;
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    auto traj = testsupport::make_trajectory(x, 4.0);
    auto dense = resample(traj, 1.0);
    const std::size_t m = dense.n_steps();

    auto spec_old = fft::forward_real(x);
    std::vector<double> xd(m);
    for (std::size_t i = 0; i < m; ++i) xd[i] = dense.samples(0, static_cast<Eigen::Index>(i));
    auto spec_new = fft::forward_real(xd);
    for (std::size_t k = 1; k < n / 2; ++k) {
        const double p_old = std::norm(spec_old[k]) / static_cast<double>(n * n);
        const double p_new = std::norm(spec_new[k]) / static_cast<double>(m * m);
        CHECK(p_new == doctest::Approx(p_old).epsilon(1e-6));
    }
}

TEST_CASE("resample rejects downsampling and non-representable ratios") {
    auto traj = testsupport::make_trajectory(std::vector<double>(100, 1.0), 10.0);
    CHECK_THROWS_AS(resample(traj, 20.0), std::invalid_argument);
    CHECK_THROWS_AS(resample(traj, 7.7), std::invalid_argument);
}

TEST_CASE("mae metrics") {
    auto a = SpectralDensity::tabulated({0.0, 100.0, 200.0}, {0.0, 5.0, 2.0});
    CHECK(mae_sd(a, a, 0.0, 200.0) == 0.0);
    auto b = SpectralDensity::tabulated_estimate({0.0, 100.0, 200.0}, {0.5, 5.5, 2.5});
    CHECK(mae_sd(a, b, 0.0, 200.0) == doctest::Approx(0.5).epsilon(1e-12));

    AutocorrelationSeries ca, cb;
    ca.dt_fs = cb.dt_fs = 10.0;
    ca.values.assign(100, 2.0);
    cb.values.assign(100, 2.25);
    CHECK(mae_c(ca, ca) == 0.0);
    CHECK(mae_c(ca, cb) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("step damping with t_c at the window edge has zero MAE on that window") {
    auto sd = testsupport::fmo_like_sd();
    auto c = autocorrelation_from_sd(sd, 300.0, 10.0, 2049);
    auto damped = apply_damping(c, {DampingSpec::Kind::step, 20480.0, 2.0});
    CHECK(mae_c(damped, c, 20000.0) == 0.0);
}

TEST_CASE("damping ordering on the clean fmo-like autocorrelation") {
    auto sd = testsupport::fmo_like_sd();
    auto c = autocorrelation_from_sd(sd, 300.0, 10.0, 4096);
    for (double tc : {1000.0, 3000.0, 7000.0, 15000.0}) {
        const double m_step = mae_c(apply_damping(c, {DampingSpec::Kind::step, tc, 2.0}), c);
        const double m_gauss = mae_c(apply_damping(c, {DampingSpec::Kind::gaussian, tc, 2.0}), c);
        const double m_exp = mae_c(apply_damping(c, {DampingSpec::Kind::exponential, tc, 2.0}), c);
        CHECK(m_step <= m_gauss + 1e-12);
        CHECK(m_gauss <= m_exp + 1e-12);
    }
}

TEST_CASE("windowed averaging equals the full-trajectory estimator up to end effects") {
    auto sd = SpectralDensity::drude_lorentz({{0.0, 100.0, 60.0}});
    const std::size_t n = 16384;
    auto ps = target_power_spectrum(sd, 300.0, n, 2.0);
    auto traj = generate_noise(ps, n, 2.0, 77);

    auto full = autocorrelation(traj);
    const std::size_t window = 4096, stride = 256;
    auto windows = windows_from_trajectory(traj, window, stride);
    std::vector<AutocorrelationSeries> parts;
    for (const auto& w : windows) parts.push_back(autocorrelation(w));
    auto averaged = average_autocorrelations(parts);

    // Windowing re-weights the same lag pairs; it buys no new information.
    const double c0 = full.values[0];
    double max_dev = 0.0;
    for (std::size_t j = 0; j < averaged.values.size(); ++j)
        max_dev = std::max(max_dev, std::abs(averaged.values[j] - full.values[j]));
    CHECK(max_dev < 0.05 * c0);
}

TEST_CASE("estimator consistency: more realizations shrink the error") {
    auto sd = SpectralDensity::drude_lorentz({{0.0, 100.0, 60.0}});
    const std::size_t n = 2048;
    auto ps = target_power_spectrum(sd, 300.0, n, 2.0);
    auto theory = autocorrelation_from_sd(sd, 300.0, 2.0, n / 2);

    auto mean_estimate = [&](std::size_t count, std::uint64_t salt) {
        std::vector<AutocorrelationSeries> parts;
        for (std::uint64_t r = 0; r < count; ++r)
            parts.push_back(autocorrelation(generate_noise(ps, n, 2.0, rng::split_seed(salt, r))));
        return average_autocorrelations(parts);
    };
    const double err_small = mae_c(mean_estimate(10, 1), theory);
    const double err_large = mae_c(mean_estimate(100, 2), theory);
    CHECK(err_large < err_small);
}

TEST_CASE("autocorrelation csv round trip") {
    AutocorrelationSeries c;
    c.dt_fs = 2.5;
    c.provenance = AutocorrelationSeries::Provenance::theoretical;
    c.values = {4.0, 3.0, 1.0, -0.5, 0.25};
    const auto path = std::filesystem::temp_directory_path() / "nisekit_autocorr_roundtrip.csv";
    write_autocorrelation_csv(path, c);
    auto back = read_autocorrelation_csv(path);
    CHECK(back.dt_fs == c.dt_fs);
    CHECK(back.provenance == c.provenance);
    REQUIRE(back.values.size() == c.values.size());
    for (std::size_t j = 0; j < c.values.size(); ++j) CHECK(back.values[j] == c.values[j]);
    std::filesystem::remove(path);
}
