#pragma once

#include <span>
#include <vector>

#include "nisekit/nise.hpp"

namespace nisekit {

/// Eigenbasis matrix logarithm with eigenvalues clamped below at eps_floor.
ComplexMatrix density_log(const ComplexMatrix& rho, double eps_floor = 1e-10);

/// Constructed ensemble average: exponentiate the mean of the clamped logs of
/// the per-realization densities, then normalize by trace.
ComplexMatrix constructed_density(std::span<const ComplexMatrix> realizations,
                                  double eps_floor = 1e-10);

/// Same construction when every realization is a unit-norm pure state: the
/// mean log is ln(eps_floor) (I - rho_bar) exactly, so the constructed density
/// follows from the plain-averaged density alone. This is the path the
/// streaming ensemble pipeline uses.
ComplexMatrix constructed_density_from_mean(const ComplexMatrix& rho_bar,
                                            double eps_floor = 1e-10);

DensitySeries constructed_series_from_mean(const DensitySeries& plain, double eps_floor = 1e-10);

/// Per-site exponential lifetimes fitted to plain-NISE population dynamics.
struct LifetimeSet {
    enum class Flag { ok, fallback, short_series };
    std::vector<double> tau_fs;
    std::vector<double> rms_residual;
    std::vector<Flag> flags;
};

/// Fit P_n(t) = Pinf + (P_n(0) - Pinf) exp(-t/tau) per site; failed fits fall
/// back to tau = t_max with a flag.
LifetimeSet fit_lifetimes(const DensitySeries& plain_nise);

/// w_n(t) = 1 - exp(-t/(factor tau_n)).
double interpolation_weight(double t_fs, double tau_fs, double factor = 5.0);

/// Diagonal interpolation P_n = w_n P^c_nn + (1-w_n) P^TNISE_nn, renormalized
/// to unit total population. Off-diagonals are copied from the TNISE series
/// (coherences are not interpolated).
DensitySeries interpolated_populations(const DensitySeries& tnise, const DensitySeries& constructed,
                                       const LifetimeSet& lifetimes, double factor = 5.0);

}  // namespace nisekit
