#include "nisekit/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "nisekit/csv.hpp"
#include "nisekit/errors.hpp"
#include "nisekit/fft.hpp"
#include "nisekit/units.hpp"

namespace nisekit {

namespace {
constexpr double pi = 3.14159265358979323846;
}

DipoleSet read_dipoles_csv(const std::filesystem::path& path) {
    csv::Table t = csv::read_file(path);
    const std::size_t jx = t.column_index("dx");
    const std::size_t jy = t.column_index("dy");
    const std::size_t jz = t.column_index("dz");
    DipoleSet dip;
    dip.d.reserve(t.n_rows());
    for (const auto& row : t.rows) dip.d.emplace_back(row[jx], row[jy], row[jz]);
    if (dip.d.empty()) throw ConfigError(path.string() + ": no dipoles");
    return dip;
}

std::vector<std::complex<double>> sigma_t(const PropagatorSeries& series, const DipoleSet& dipoles) {
    const Eigen::Index dim = static_cast<Eigen::Index>(series.dim());
    if (static_cast<Eigen::Index>(dipoles.n_sites()) != dim)
        throw std::invalid_argument("dipole count does not match dimension");
    Eigen::MatrixXcd d(dim, 3);
    for (Eigen::Index n = 0; n < dim; ++n)
        for (int ax = 0; ax < 3; ++ax) d(n, ax) = dipoles.d[static_cast<std::size_t>(n)](ax);

    std::vector<std::complex<double>> sigma(series.u.size());
    for (std::size_t i = 0; i < series.u.size(); ++i) {
        std::complex<double> acc = 0.0;
        for (int ax = 0; ax < 3; ++ax)
            acc += (d.col(ax).transpose() * series.u[i] * d.col(ax)).value();
        sigma[i] = acc;
    }
    return sigma;
}

AbsorptionSpectrum absorption_spectrum(const std::vector<std::complex<double>>& sigma, double dt_fs,
                                       bool apodize, double shift_cm1) {
    if (sigma.size() < 4) throw std::invalid_argument("need at least 4 response samples");
    if (!(dt_fs > 0.0)) throw std::invalid_argument("need dt > 0");
    const std::size_t n = sigma.size();

    std::vector<std::complex<double>> in(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (apodize) w = 0.5 * (1.0 + std::cos(pi * static_cast<double>(i) / static_cast<double>(n - 1)));
        // Positive-exponent transform = FFT of the conjugate, conjugated.
        in[i] = std::conj(sigma[i]) * w;
    }
    auto spec = fft::forward(in);

    AbsorptionSpectrum out;
    out.shift_cm1 = shift_cm1;
    out.omega_cm1.resize(n);
    out.intensity.resize(n);
    const double domega = 2.0 * pi * units::hbar_cm1_fs / (static_cast<double>(n) * dt_fs);
    // fftshift so the emitted grid ascends through zero.
    const std::size_t half = (n + 1) / 2;  // first index of the negative block
    std::size_t o = 0;
    for (std::size_t k = half; k < n; ++k, ++o) {
        out.omega_cm1[o] = domega * (static_cast<double>(k) - static_cast<double>(n)) + shift_cm1;
        out.intensity[o] = spec[k].real() * dt_fs;
    }
    for (std::size_t k = 0; k < half; ++k, ++o) {
        out.omega_cm1[o] = domega * static_cast<double>(k) + shift_cm1;
        out.intensity[o] = spec[k].real() * dt_fs;
    }
    return out;
}

AbsorptionSpectrum normalize_peak(AbsorptionSpectrum spectrum) {
    if (spectrum.intensity.empty()) throw std::invalid_argument("empty spectrum");
    const double peak = *std::max_element(spectrum.intensity.begin(), spectrum.intensity.end());
    if (!(peak > 0.0)) throw NumericalError("cannot normalize an all-zero spectrum");
    for (auto& v : spectrum.intensity) v /= peak;
    spectrum.normalized = true;
    return spectrum;
}

double align_shift(const AbsorptionSpectrum& spectrum, const AbsorptionSpectrum& reference,
                   double omega_min_cm1, double omega_max_cm1) {
    if (spectrum.omega_cm1.size() < 2 || reference.omega_cm1.size() < 2)
        throw std::invalid_argument("spectra too short");
    const double dw = spectrum.omega_cm1[1] - spectrum.omega_cm1[0];

    auto interp = [](const AbsorptionSpectrum& s, double w) {
        if (w < s.omega_cm1.front() || w > s.omega_cm1.back()) return 0.0;
        const double x = (w - s.omega_cm1.front()) / (s.omega_cm1[1] - s.omega_cm1[0]);
        const std::size_t lo = std::min(static_cast<std::size_t>(x), s.omega_cm1.size() - 2);
        const double f = x - static_cast<double>(lo);
        return s.intensity[lo] + f * (s.intensity[lo + 1] - s.intensity[lo]);
    };

    std::vector<double> grid;
    for (double w = omega_min_cm1; w <= omega_max_cm1; w += dw) {
        if (w >= reference.omega_cm1.front() && w <= reference.omega_cm1.back()) grid.push_back(w);
    }
    if (grid.empty()) throw std::invalid_argument("empty overlap between spectra");

    const long max_bins = static_cast<long>(spectrum.omega_cm1.size());
    double best_shift = 0.0, best_score = -std::numeric_limits<double>::infinity();
    for (long k = -max_bins; k <= max_bins; ++k) {
        const double shift = static_cast<double>(k) * dw;
        double score = 0.0;
        for (double w : grid) score += interp(spectrum, w - shift) * interp(reference, w);
        if (score > best_score) {
            best_score = score;
            best_shift = shift;
        }
    }
    return best_shift;
}

AbsorptionSpectrum apply_shift(AbsorptionSpectrum spectrum, double shift_cm1) {
    for (auto& w : spectrum.omega_cm1) w += shift_cm1;
    spectrum.shift_cm1 += shift_cm1;
    return spectrum;
}

std::vector<Eigen::VectorXd> populations(const DensitySeries& series) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(series.rho.size());
    for (const auto& rho : series.rho) out.push_back(rho.diagonal().real());
    return out;
}

void write_spectrum_csv(const std::filesystem::path& path, const AbsorptionSpectrum& spectrum) {
    csv::Table t;
    t.metadata["shift_cm1"] = csv::format_double(spectrum.shift_cm1);
    t.metadata["normalized"] = spectrum.normalized ? "true" : "false";
    t.columns = {"omega_cm1", "intensity"};
    t.rows.reserve(spectrum.omega_cm1.size());
    for (std::size_t i = 0; i < spectrum.omega_cm1.size(); ++i)
        t.rows.push_back({spectrum.omega_cm1[i], spectrum.intensity[i]});
    csv::write_file(path, t);
}

AbsorptionSpectrum read_spectrum_csv(const std::filesystem::path& path) {
    csv::Table t = csv::read_file(path);
    AbsorptionSpectrum s;
    s.omega_cm1 = t.column(t.column_index("omega_cm1"));
    s.intensity = t.column(t.column_index("intensity"));
    if (auto it = t.metadata.find("shift_cm1"); it != t.metadata.end()) s.shift_cm1 = std::stod(it->second);
    if (auto it = t.metadata.find("normalized"); it != t.metadata.end()) s.normalized = it->second == "true";
    return s;
}

void write_populations_csv(const std::filesystem::path& path, const DensitySeries& series) {
    csv::Table t;
    switch (series.tag) {
        case DensitySeries::Averaging::plain: t.metadata["averaging"] = "plain"; break;
        case DensitySeries::Averaging::constructed: t.metadata["averaging"] = "constructed"; break;
        case DensitySeries::Averaging::interpolated: t.metadata["averaging"] = "interpolated"; break;
    }
    const Eigen::Index dim = series.rho.empty() ? 0 : series.rho.front().rows();
    t.columns.push_back("t_fs");
    for (Eigen::Index s = 0; s < dim; ++s) t.columns.push_back("pop_site" + std::to_string(s + 1));
    for (std::size_t i = 0; i < series.rho.size(); ++i) {
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(dim) + 1);
        row.push_back(static_cast<double>(i) * series.dt_fs);
        for (Eigen::Index s = 0; s < dim; ++s) row.push_back(series.rho[i](s, s).real());
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

}  // namespace nisekit
