#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <vector>

#include "nisekit/bath_analysis.hpp"
#include "nisekit/noise.hpp"
#include "nisekit/spectral_density.hpp"
#include "nisekit/units.hpp"

namespace testsupport {

// Three broad peaks at 0, 725 and 1200 cm^-1, reorganization energy 20 cm^-1
// each, 100 fs width.
inline nisekit::SpectralDensity three_peak_sd(std::size_t n_peaks = 3) {
    const double nu = nisekit::units::width_from_time_fs(100.0);
    std::vector<nisekit::DrudeLorentzPeak> peaks = {
        {0.0, 20.0, nu}, {725.0, 20.0, nu}, {1200.0, 20.0, nu}};
    peaks.resize(n_peaks);
    return nisekit::SpectralDensity::drude_lorentz(std::move(peaks));
}

// Stand-in for the experimental FMO curve: one broad low-frequency component
// plus narrow vibrational peaks whose few-cm^-1 widths give the multi-ps
// autocorrelation tail the cutoff heuristics are probed with.
inline nisekit::SpectralDensity fmo_like_sd() {
    std::vector<nisekit::DrudeLorentzPeak> peaks = {
        {0.0, 35.0, 35.0},
        {118.0, 4.0, 3.0},
        {185.0, 5.0, 3.0},
        {260.0, 6.0, 4.0},
        {365.0, 4.0, 3.0},
        {480.0, 3.0, 3.0},
        {570.0, 4.0, 3.0},
        {725.0, 5.0, 4.0},
        {800.0, 3.0, 3.0},
        {920.0, 3.0, 3.0},
        {1110.0, 4.0, 4.0},
        {1250.0, 3.0, 4.0},
        {1370.0, 3.0, 4.0},
        {1520.0, 2.0, 4.0},
    };
    return nisekit::SpectralDensity::drude_lorentz(std::move(peaks));
}

// 7-site FMO Hamiltonian (cm^-1), the standard literature parameterization.
inline Eigen::MatrixXd fmo7_hamiltonian() {
    Eigen::MatrixXd h(7, 7);
    h << 12410.0, -87.7, 5.5, -5.9, 6.7, -13.7, -9.9,
        -87.7, 12530.0, 30.8, 8.2, 0.7, 11.8, 4.3,
        5.5, 30.8, 12210.0, -53.5, -2.2, -9.6, 6.0,
        -5.9, 8.2, -53.5, 12320.0, -70.7, -17.0, -63.3,
        6.7, 0.7, -2.2, -70.7, 12480.0, 81.1, -1.3,
        -13.7, 11.8, -9.6, -17.0, 81.1, 12630.0, 39.7,
        -9.9, 4.3, 6.0, -63.3, 39.7, 12440.0, -9.9;
    return h;
}

// Direct evaluation of the lag sums; the independent oracle for the
// FFT-based estimator.
inline nisekit::AutocorrelationSeries direct_autocorrelation(const std::vector<double>& x,
                                                             double dt_fs) {
    const std::size_t n = x.size();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    nisekit::AutocorrelationSeries c;
    c.dt_fs = dt_fs;
    const std::size_t n_lags = n / 2;
    c.values.resize(n_lags);
    for (std::size_t j = 0; j < n_lags; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i + j < n; ++i) acc += (x[i + j] - mean) * (x[i] - mean);
        c.values[j] = acc / static_cast<double>(n - j);
    }
    return c;
}

// Trapezoid quadrature of f over [a, b]; the oracle for integral identities.
template <class F>
double trapezoid(F&& f, double a, double b, std::size_t n = 20000) {
    double acc = 0.5 * (f(a) + f(b));
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 1; i < n; ++i) acc += f(a + h * static_cast<double>(i));
    return acc * h;
}

inline std::vector<double> site_row(const nisekit::NoiseTrajectory& traj, std::size_t site = 0) {
    std::vector<double> out(traj.n_steps());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = traj.samples(static_cast<Eigen::Index>(site), static_cast<Eigen::Index>(i));
    return out;
}

inline nisekit::NoiseTrajectory make_trajectory(const std::vector<double>& x, double dt_fs) {
    nisekit::NoiseTrajectory traj;
    traj.dt_fs = dt_fs;
    traj.samples.resize(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) traj.samples(0, static_cast<Eigen::Index>(i)) = x[i];
    return traj;
}

}  // namespace testsupport
