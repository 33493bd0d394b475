#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nisekit/bath_analysis.hpp"
#include "nisekit/spectral_density.hpp"

namespace nisekit {

/// Dictionary grid of damped cosines: linewidths gamma_i and frequencies
/// Omega_j, both cm^-1, both strictly increasing.
struct SuperResGrid {
    std::vector<double> gammas;
    std::vector<double> omegas;

    /// Coarse grid usable interactively: Omega in [0, 0.2 eV] step 2 cm^-1,
    /// gamma in [1, 200] cm^-1 step 5 cm^-1.
    static SuperResGrid desk_default();
    /// The fine grid: Omega step 5e-5 eV, gamma step 0.5 cm^-1. Expensive.
    static SuperResGrid paper_grid();
    static SuperResGrid custom(double gamma_min, double gamma_max, double gamma_step,
                               double omega_min, double omega_max, double omega_step);

    std::size_t n_modes() const { return gammas.size() * omegas.size(); }
    /// Flat index layout: gamma-major, i*n_omegas + j.
    std::size_t index(std::size_t i, std::size_t j) const { return i * omegas.size() + j; }
};

/// Explicit dictionary A[k, ij] = exp(-gamma_i t_k/hbar) cos(Omega_j t_k/hbar).
Eigen::MatrixXd design_matrix(const SuperResGrid& grid, const std::vector<double>& lags_fs);

struct SuperResMode {
    double gamma_cm1 = 0.0;
    double omega_cm1 = 0.0;
    double coeff_cm2 = 0.0;
};

struct SuperResSolution {
    SuperResGrid grid;
    Eigen::VectorXd coeffs;            // flat, grid.index layout
    double a = 1e4, b = 1.0, c = 0.1;  // objective weights
    double t_c_fs = 0.0;
    double debias_threshold = 5e-8;
    bool debiased = false;
    bool warning = false;              // debias retained nothing
    std::vector<double> objective_trace;

    std::vector<SuperResMode> retained(double threshold = 0.0) const;
};

struct FitOptions {
    std::size_t max_iterations = 4000;
    double tolerance = 1e-12;      // relative objective change
    std::uint64_t init_seed = 0;   // 0: start from zero; else random start
};

/// Minimize a ||A lam - C||_2 + b ||lam||_1 + c sum(|lam| - lam) over the lags
/// t <= t_c, by monotone accelerated proximal gradient (the penalty prox is an
/// asymmetric soft threshold). The objective is convex, so restarts agree on
/// the objective value.
SuperResSolution fit(const AutocorrelationSeries& c, const SuperResGrid& grid, double a = 1e4,
                     double b = 1.0, double penalty_c = 0.1, double t_c_fs = 0.0,
                     const FitOptions& options = {});

/// Keep modes with |coeff| > threshold and refit them by non-negative least
/// squares against the same lags.
SuperResSolution debias(const SuperResSolution& solution, const AutocorrelationSeries& c,
                        double threshold = 5e-8);

/// J(w) = 2 pi w sum_ij lam_ij [ g_i/(g_i^2+(w+W_j)^2) + g_i/(g_i^2+(w-W_j)^2) ].
SpectralDensity reconstruct_sd(const SuperResSolution& solution, std::vector<double> omega_grid_cm1);

/// Lawson-Hanson active-set NNLS; terminates with KKT residual <= kkt_tol
/// relative to ||A^T b||_inf.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double kkt_tol = 1e-10);

/// CSV of retained (gamma_cm1, Omega_cm1, lambda_cm2) triples.
void write_solution_csv(const std::filesystem::path& path, const SuperResSolution& solution);

}  // namespace nisekit
