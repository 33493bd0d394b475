#include "nisekit/bath_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "nisekit/csv.hpp"
#include "nisekit/errors.hpp"
#include "nisekit/fft.hpp"
#include "nisekit/units.hpp"

namespace nisekit {

namespace {
constexpr double pi = 3.14159265358979323846;
constexpr double two_pi = 2.0 * pi;

// C extended to a symmetric sequence: append the reverse without the first
// and last element, total length 2(n-1).
std::vector<std::complex<double>> symmetric_extension(const std::vector<double>& c) {
    const std::size_t n = c.size();
    std::vector<std::complex<double>> ext;
    ext.reserve(2 * (n - 1));
    for (double v : c) ext.emplace_back(v, 0.0);
    for (std::size_t j = n - 2; j >= 1; --j) ext.emplace_back(c[j], 0.0);
    return ext;
}
}  // namespace

AutocorrelationSeries autocorrelation(const NoiseTrajectory& traj) {
    if (traj.n_sites() != 1) throw std::invalid_argument("autocorrelation expects a one-site trajectory");
    const std::size_t n = traj.n_steps();
    if (n < 4) throw std::invalid_argument("autocorrelation needs at least 4 samples");

    const double mean = traj.samples.row(0).mean();
    // Linear (zero-padded) correlation via FFT; equals the direct lag sums.
    std::vector<std::complex<double>> padded(2 * n, std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) padded[i] = traj.samples(0, static_cast<Eigen::Index>(i)) - mean;
    auto spec = fft::forward(padded);
    for (auto& v : spec) v = std::norm(v);
    auto corr = fft::inverse(spec);

    AutocorrelationSeries out;
    out.dt_fs = traj.dt_fs;
    out.provenance = AutocorrelationSeries::Provenance::estimated;
    const std::size_t n_lags = std::max<std::size_t>(n / 2, 2);
    out.values.resize(n_lags);
    for (std::size_t j = 0; j < n_lags; ++j)
        out.values[j] = corr[j].real() / static_cast<double>(n - j);
    return out;
}

AutocorrelationSeries average_autocorrelations(std::span<const AutocorrelationSeries> series) {
    if (series.empty()) throw std::invalid_argument("nothing to average");
    const auto& first = series.front();
    AutocorrelationSeries out;
    out.dt_fs = first.dt_fs;
    out.provenance = first.provenance;
    out.values.assign(first.values.size(), 0.0);
    for (const auto& s : series) {
        if (s.values.size() != first.values.size() || s.dt_fs != first.dt_fs)
            throw std::invalid_argument("autocorrelation grids do not match");
        for (std::size_t j = 0; j < s.values.size(); ++j) out.values[j] += s.values[j];
    }
    const double inv = 1.0 / static_cast<double>(series.size());
    for (auto& v : out.values) v *= inv;
    return out;
}

AutocorrelationSeries apply_damping(const AutocorrelationSeries& c, const DampingSpec& spec) {
    if (!(spec.t_c_fs > 0.0)) throw std::invalid_argument("damping cutoff must be > 0");
    double b = 0.0;
    switch (spec.kind) {
        case DampingSpec::Kind::gaussian: b = 2.0; break;
        case DampingSpec::Kind::exponential: b = 1.0; break;
        case DampingSpec::Kind::general:
            if (!(spec.b > 0.0)) throw std::invalid_argument("damping exponent must be > 0");
            b = spec.b;
            break;
        case DampingSpec::Kind::step: b = 0.0; break;
    }
    AutocorrelationSeries out = c;
    for (std::size_t j = 0; j < out.values.size(); ++j) {
        const double t = static_cast<double>(j) * c.dt_fs;
        if (spec.kind == DampingSpec::Kind::step) {
            if (t > spec.t_c_fs) out.values[j] = 0.0;
        } else {
            out.values[j] *= std::exp(-std::pow(t / spec.t_c_fs, b));
        }
    }
    return out;
}

CutoffSuggestion suggest_cutoff(const AutocorrelationSeries& c, double window_fs,
                                double floor_factor) {
    const std::size_t n = c.values.size();
    const std::size_t w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_fs / c.dt_fs)));
    if (n <= w) throw std::invalid_argument("series shorter than the moving-average window");

    // Centered moving average of |C|, window clipped at the ends.
    std::vector<double> mov(n);
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + std::abs(c.values[j]);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t lo = j >= w / 2 ? j - w / 2 : 0;
        const std::size_t hi = std::min(n, j + w / 2 + 1);
        mov[j] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }

    const std::size_t floor_start = (3 * n) / 4;
    double floor = 0.0;
    for (std::size_t j = floor_start; j < n; ++j) floor += mov[j];
    floor /= static_cast<double>(n - floor_start);

    const double threshold = floor_factor * floor;
    // Earliest lag after which the moving average stays at the floor. A real
    // crossover must happen before the region the floor was estimated from.
    std::size_t j_star = n;
    for (std::size_t j = n; j-- > 0;) {
        if (mov[j] > threshold) {
            j_star = j + 1;
            break;
        }
        if (j == 0) j_star = 0;
    }

    CutoffSuggestion out;
    if (j_star >= floor_start) {
        out.warning = true;
        out.t_c_fs = 0.5 * static_cast<double>(n) * c.dt_fs;
    } else {
        out.t_c_fs = static_cast<double>(j_star) * c.dt_fs;
    }
    return out;
}

SpectralDensity sd_from_autocorrelation(const AutocorrelationSeries& c, double temperature_K) {
    if (!(temperature_K > 0.0)) throw std::invalid_argument("temperature must be > 0");
    const std::size_t n = c.values.size();
    if (n < 3) throw std::invalid_argument("autocorrelation series shorter than 3");

    auto spec = fft::forward(symmetric_extension(c.values));
    const double dtau = c.dt_fs / units::hbar_cm1_fs;
    const double kT = units::kB_cm1_per_K * temperature_K;
    const double domega = pi * units::hbar_cm1_fs / (static_cast<double>(n - 1) * c.dt_fs);

    std::vector<double> omega(n), j(n);
    for (std::size_t k = 0; k < n; ++k) {
        omega[k] = domega * static_cast<double>(k);
        j[k] = omega[k] * dtau / (two_pi * kT) * spec[k].real();
    }
    SpectralDensity sd = SpectralDensity::tabulated_estimate(std::move(omega), std::move(j));
    // J = w * s zeroes the DC bin; keep it so the inverse transform is exact.
    sd.set_j_over_omega_limit0(dtau / (two_pi * kT) * spec[0].real());
    return sd;
}

AutocorrelationSeries autocorrelation_from_sd(const SpectralDensity& model, double temperature_K,
                                              double dt_fs, std::size_t n_lags) {
    if (!(temperature_K > 0.0)) throw std::invalid_argument("temperature must be > 0");
    if (n_lags < 3) throw std::invalid_argument("need at least 3 lags");
    if (!(dt_fs > 0.0)) throw std::invalid_argument("need dt > 0");

    const double domega = pi * units::hbar_cm1_fs / (static_cast<double>(n_lags - 1) * dt_fs);
    std::vector<double> j_over_w(n_lags);
    j_over_w[0] = model.j_over_omega_limit0();
    for (std::size_t k = 1; k < n_lags; ++k) {
        const double w = domega * static_cast<double>(k);
        j_over_w[k] = model(w) / w;
    }

    auto back = fft::inverse(symmetric_extension(j_over_w));
    const double dtau = dt_fs / units::hbar_cm1_fs;
    const double scale = two_pi * units::kB_cm1_per_K * temperature_K / dtau;

    AutocorrelationSeries out;
    out.dt_fs = dt_fs;
    out.provenance = AutocorrelationSeries::Provenance::theoretical;
    out.values.resize(n_lags);
    for (std::size_t jj = 0; jj < n_lags; ++jj) out.values[jj] = scale * back[jj].real();
    return out;
}

NoiseTrajectory resample(const NoiseTrajectory& traj, double dt_target_fs, bool taper) {
    if (!(dt_target_fs > 0.0)) throw std::invalid_argument("target step must be > 0");
    if (dt_target_fs > traj.dt_fs) throw std::invalid_argument("downsampling not supported");
    const std::size_t n = traj.n_steps();
    const double z_real = static_cast<double>(n) * (traj.dt_fs / dt_target_fs - 1.0);
    const double z_round = std::round(z_real);
    if (std::abs(z_real - z_round) > 1e-6 * std::max(1.0, std::abs(z_real)))
        throw std::invalid_argument("step ratio not representable: non-integer pad length");
    const std::size_t z = static_cast<std::size_t>(z_round);
    if (z == 0) return traj;

    const std::size_t m = n + z;
    NoiseTrajectory out;
    out.dt_fs = static_cast<double>(n) * traj.dt_fs / static_cast<double>(m);
    out.seed = traj.seed;
    out.model_hash = traj.model_hash;
    out.samples.resize(static_cast<Eigen::Index>(traj.n_sites()), static_cast<Eigen::Index>(m));

    const std::size_t half = n / 2;
    for (std::size_t s = 0; s < traj.n_sites(); ++s) {
        std::vector<std::complex<double>> in(n);
        for (std::size_t i = 0; i < n; ++i) in[i] = traj.samples(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i));
        auto spec = fft::forward(in);
        if (taper) {
            // Raised-cosine rolloff over the top 10% of the original band.
            const std::size_t k0 = (9 * half) / 10;
            for (std::size_t k = k0; k <= half && k < n; ++k) {
                const double x = half == k0 ? 1.0 : static_cast<double>(k - k0) / static_cast<double>(half - k0);
                const double wgt = 0.5 * (1.0 + std::cos(pi * x));
                spec[k] *= wgt;
                if (k > 0 && n - k != k) spec[n - k] *= wgt;
            }
        }
        std::vector<std::complex<double>> padded(m, std::complex<double>(0.0, 0.0));
        for (std::size_t k = 0; k <= half && k < n; ++k) padded[k] = spec[k];
        for (std::size_t k = half + 1; k < n; ++k) padded[k + z] = spec[k];
        auto dense = fft::inverse(padded);
        const double scale = static_cast<double>(m) / static_cast<double>(n);
        for (std::size_t i = 0; i < m; ++i)
            out.samples(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = scale * dense[i].real();
    }
    return out;
}

double mae_sd(const SpectralDensity& a, const SpectralDensity& b, double omega_min_cm1,
              double omega_max_cm1) {
    if (!(omega_max_cm1 > omega_min_cm1)) throw std::invalid_argument("empty frequency range");
    // Common grid: tabulated grid points inside the range, else uniform sampling.
    std::vector<double> grid;
    for (const auto* m : {&a, &b}) {
        if (!m->is_analytic()) {
            for (double w : m->grid())
                if (w >= omega_min_cm1 && w <= omega_max_cm1) grid.push_back(w);
        }
    }
    if (grid.empty()) {
        const std::size_t k = 2000;
        grid.reserve(k + 1);
        for (std::size_t i = 0; i <= k; ++i)
            grid.push_back(omega_min_cm1 + (omega_max_cm1 - omega_min_cm1) * static_cast<double>(i) / k);
    } else {
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
    if (grid.empty()) throw std::invalid_argument("no overlapping grid points in range");
    double acc = 0.0;
    for (double w : grid) acc += std::abs(a(w) - b(w));
    return acc / static_cast<double>(grid.size());
}

double mae_c(const AutocorrelationSeries& a, const AutocorrelationSeries& b, double t_max_fs) {
    if (a.values.empty() || b.values.empty()) throw std::invalid_argument("empty autocorrelation");
    const double t_hi = std::min({t_max_fs,
                                  static_cast<double>(a.values.size() - 1) * a.dt_fs,
                                  static_cast<double>(b.values.size() - 1) * b.dt_fs});
    if (t_hi < 0.0) throw std::invalid_argument("no overlapping lags");
    // Evaluate on the finer of the two lag grids, linear interpolation on the other.
    const AutocorrelationSeries& fine = a.dt_fs <= b.dt_fs ? a : b;
    const AutocorrelationSeries& coarse = a.dt_fs <= b.dt_fs ? b : a;
    auto interp = [](const AutocorrelationSeries& s, double t) {
        const double x = t / s.dt_fs;
        const std::size_t lo = std::min(static_cast<std::size_t>(x), s.values.size() - 2);
        const double f = x - static_cast<double>(lo);
        return s.values[lo] + f * (s.values[lo + 1] - s.values[lo]);
    };
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < fine.values.size(); ++j) {
        const double t = static_cast<double>(j) * fine.dt_fs;
        if (t > t_hi) break;
        acc += std::abs(fine.values[j] - interp(coarse, t));
        ++count;
    }
    if (count == 0) throw std::invalid_argument("no overlapping lags");
    return acc / static_cast<double>(count);
}

void write_autocorrelation_csv(const std::filesystem::path& path, const AutocorrelationSeries& c) {
    csv::Table t;
    t.metadata["provenance"] =
        c.provenance == AutocorrelationSeries::Provenance::theoretical ? "theoretical" : "estimated";
    t.columns = {"t_fs", "C_cm2"};
    t.rows.reserve(c.values.size());
    for (std::size_t j = 0; j < c.values.size(); ++j)
        t.rows.push_back({static_cast<double>(j) * c.dt_fs, c.values[j]});
    csv::write_file(path, t);
}

AutocorrelationSeries read_autocorrelation_csv(const std::filesystem::path& path) {
    csv::Table t = csv::read_file(path);
    auto time = t.column(t.column_index("t_fs"));
    auto vals = t.column(t.column_index("C_cm2"));
    if (time.size() < 2) throw ConfigError(path.string() + ": need at least 2 lags");
    AutocorrelationSeries c;
    c.dt_fs = time[1] - time[0];
    if (!(c.dt_fs > 0.0)) throw ConfigError(path.string() + ": non-positive lag step");
    c.values = std::move(vals);
    if (auto it = t.metadata.find("provenance"); it != t.metadata.end() && it->second == "theoretical")
        c.provenance = AutocorrelationSeries::Provenance::theoretical;
    return c;
}

}  // namespace nisekit
