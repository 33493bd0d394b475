#include "nisekit/thermal_averaging.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nisekit/errors.hpp"

namespace nisekit {

namespace {

void require_hermitian(const ComplexMatrix& rho) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
    const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw std::invalid_argument("density matrix must be Hermitian");
}

ComplexMatrix exp_hermitian_normalized(const ComplexMatrix& log_mean) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(log_mean);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    // Shift before exponentiating; the trace normalization cancels the shift.
    Eigen::VectorXd q = solver.eigenvalues();
    const double qmax = q.maxCoeff();
    Eigen::VectorXd w = (q.array() - qmax).exp();
    w /= w.sum();
    return solver.eigenvectors() * w.asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace

ComplexMatrix density_log(const ComplexMatrix& rho, double eps_floor) {
    require_hermitian(rho);
    if (!(eps_floor > 0.0)) throw std::invalid_argument("eps_floor must be > 0");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    Eigen::VectorXd lv = solver.eigenvalues();
    for (Eigen::Index i = 0; i < lv.size(); ++i) lv(i) = std::log(std::max(lv(i), eps_floor));
    return solver.eigenvectors() * lv.asDiagonal() * solver.eigenvectors().adjoint();
}

ComplexMatrix constructed_density(std::span<const ComplexMatrix> realizations, double eps_floor) {
    if (realizations.empty()) throw std::invalid_argument("empty realization list");
    const Eigen::Index dim = realizations.front().rows();
    ComplexMatrix log_sum = ComplexMatrix::Zero(dim, dim);
    for (const auto& rho : realizations) {
        if (rho.rows() != dim || rho.cols() != dim)
            throw std::invalid_argument("realization dimension mismatch");
        log_sum += density_log(rho, eps_floor);
    }
    log_sum /= static_cast<double>(realizations.size());
    return exp_hermitian_normalized(log_sum);
}

ComplexMatrix constructed_density_from_mean(const ComplexMatrix& rho_bar, double eps_floor) {
    require_hermitian(rho_bar);
    const double log_eps = std::log(eps_floor);
    const Eigen::Index dim = rho_bar.rows();
    ComplexMatrix log_mean =
        log_eps * (ComplexMatrix::Identity(dim, dim) - rho_bar);
    return exp_hermitian_normalized(log_mean);
}

DensitySeries constructed_series_from_mean(const DensitySeries& plain, double eps_floor) {
    DensitySeries out;
    out.dt_fs = plain.dt_fs;
    out.tag = DensitySeries::Averaging::constructed;
    out.rho.reserve(plain.rho.size());
    for (const auto& rho : plain.rho) out.rho.push_back(constructed_density_from_mean(rho, eps_floor));
    return out;
}

namespace {

struct ExpFit {
    double tau = 0.0;
    double p_inf = 0.0;
    double rms = 0.0;
};

// For fixed tau the optimal asymptote is a linear solve; tau itself is found
// by a coarse log-grid scan refined with golden-section.
ExpFit fit_single_exponential(const std::vector<double>& t, const std::vector<double>& p,
                              double tau_min, double tau_max, double p_inf_init) {
    const double p0 = p.front();
    auto sse_for_tau = [&](double tau, double* p_inf_out) {
        double swp = 0.0, sww = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double e = std::exp(-t[i] / tau);
            const double w = 1.0 - e;
            swp += w * (p[i] - p0 * e);
            sww += w * w;
        }
        const double p_inf = sww > 0.0 ? swp / sww : p_inf_init;
        double sse = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double e = std::exp(-t[i] / tau);
            const double model = p_inf + (p0 - p_inf) * e;
            sse += (p[i] - model) * (p[i] - model);
        }
        if (p_inf_out) *p_inf_out = p_inf;
        return sse;
    };

    const int n_scan = 60;
    double best_tau = tau_min, best_sse = std::numeric_limits<double>::infinity();
    const double log_lo = std::log(tau_min), log_hi = std::log(tau_max);
    for (int k = 0; k <= n_scan; ++k) {
        const double tau = std::exp(log_lo + (log_hi - log_lo) * k / n_scan);
        const double sse = sse_for_tau(tau, nullptr);
        if (sse < best_sse) {
            best_sse = sse;
            best_tau = tau;
        }
    }
    // Golden-section refine in log space around the scan winner.
    double a = std::log(best_tau) - (log_hi - log_lo) / n_scan;
    double b = std::log(best_tau) + (log_hi - log_lo) / n_scan;
    a = std::max(a, log_lo);
    b = std::min(b, log_hi);
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = sse_for_tau(std::exp(x1), nullptr), f2 = sse_for_tau(std::exp(x2), nullptr);
    for (int it = 0; it < 60 && (b - a) > 1e-10; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a);
            f1 = sse_for_tau(std::exp(x1), nullptr);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a);
            f2 = sse_for_tau(std::exp(x2), nullptr);
        }
    }
    ExpFit fit;
    fit.tau = std::exp(0.5 * (a + b));
    fit.rms = std::sqrt(sse_for_tau(fit.tau, &fit.p_inf) / static_cast<double>(t.size()));
    return fit;
}

}  // namespace

LifetimeSet fit_lifetimes(const DensitySeries& plain_nise) {
    if (plain_nise.rho.size() < 10) throw std::invalid_argument("series shorter than 10 points");
    const Eigen::Index dim = plain_nise.rho.front().rows();
    const std::size_t n = plain_nise.rho.size();
    const double t_max = static_cast<double>(n - 1) * plain_nise.dt_fs;
    const double tau_min = plain_nise.dt_fs;
    const double tau_max = 100.0 * t_max;

    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * plain_nise.dt_fs;

    LifetimeSet out;
    out.tau_fs.resize(static_cast<std::size_t>(dim));
    out.rms_residual.resize(static_cast<std::size_t>(dim));
    out.flags.resize(static_cast<std::size_t>(dim));

    for (Eigen::Index s = 0; s < dim; ++s) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = plain_nise.rho[i](s, s).real();
        // Asymptote initialized from the final 10% of the series.
        const std::size_t tail = std::max<std::size_t>(1, n / 10);
        double p_inf_init = 0.0;
        for (std::size_t i = n - tail; i < n; ++i) p_inf_init += p[i];
        p_inf_init /= static_cast<double>(tail);

        double spread = 0.0;
        for (double v : p) spread = std::max(spread, std::abs(v - p[0]));
        const std::size_t idx = static_cast<std::size_t>(s);
        if (spread < 1e-12) {
            out.tau_fs[idx] = t_max;
            out.rms_residual[idx] = 0.0;
            out.flags[idx] = LifetimeSet::Flag::fallback;
            continue;
        }

        ExpFit fit = fit_single_exponential(t, p, tau_min, tau_max, p_inf_init);
        const bool on_bound = fit.tau <= tau_min * 1.0001 || fit.tau >= tau_max * 0.9999;
        if (!std::isfinite(fit.tau) || on_bound) {
            out.tau_fs[idx] = t_max;
            out.rms_residual[idx] = fit.rms;
            out.flags[idx] = LifetimeSet::Flag::fallback;
        } else {
            out.tau_fs[idx] = fit.tau;
            out.rms_residual[idx] = fit.rms;
            out.flags[idx] = fit.tau > t_max ? LifetimeSet::Flag::short_series : LifetimeSet::Flag::ok;
        }
    }
    return out;
}

double interpolation_weight(double t_fs, double tau_fs, double factor) {
    if (!(tau_fs > 0.0)) throw std::invalid_argument("lifetime must be > 0");
    if (!(factor > 0.0)) throw std::invalid_argument("factor must be > 0");
    return 1.0 - std::exp(-t_fs / (factor * tau_fs));
}

DensitySeries interpolated_populations(const DensitySeries& tnise, const DensitySeries& constructed,
                                       const LifetimeSet& lifetimes, double factor) {
    if (tnise.rho.size() != constructed.rho.size() || tnise.dt_fs != constructed.dt_fs)
        throw std::invalid_argument("misaligned density series");
    const Eigen::Index dim = tnise.rho.empty() ? 0 : tnise.rho.front().rows();
    if (lifetimes.tau_fs.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("lifetime count does not match dimension");

    DensitySeries out;
    out.dt_fs = tnise.dt_fs;
    out.tag = DensitySeries::Averaging::interpolated;
    out.rho.reserve(tnise.rho.size());
    for (std::size_t i = 0; i < tnise.rho.size(); ++i) {
        const double t = static_cast<double>(i) * tnise.dt_fs;
        ComplexMatrix rho = tnise.rho[i];
        double total = 0.0;
        Eigen::VectorXd pops(dim);
        for (Eigen::Index s = 0; s < dim; ++s) {
            const double w = interpolation_weight(t, lifetimes.tau_fs[static_cast<std::size_t>(s)], factor);
            pops(s) = w * constructed.rho[i](s, s).real() + (1.0 - w) * tnise.rho[i](s, s).real();
            total += pops(s);
        }
        if (!(total > 0.0)) throw NumericalError("interpolated populations sum to zero");
        for (Eigen::Index s = 0; s < dim; ++s) rho(s, s) = pops(s) / total;
        out.rho.push_back(std::move(rho));
    }
    return out;
}

}  // namespace nisekit
