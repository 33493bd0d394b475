#pragma once

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <span>
#include <vector>

#include "nisekit/noise.hpp"

namespace nisekit {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Instantaneous eigenframe of a real symmetric Hamiltonian: ascending
/// eigenvalues, orthogonal eigenvectors as columns. Signs are fixed so each
/// column's largest-magnitude component is positive (before any continuity
/// fixing done during propagation).
struct EigenFrame {
    Eigen::VectorXd energies;   // cm^-1, ascending
    Eigen::MatrixXd vectors;    // columns are eigenstates
};

EigenFrame eigh(const Eigen::MatrixXd& hamiltonian);

/// Eigenbasis phase step: multiply component alpha by exp(-i eps_alpha dt/hbar).
ComplexVector nise_step(const ComplexVector& psi_eigenbasis, const EigenFrame& frame, double dt_fs);

/// Non-adiabatic coupling S = W(t+dt) W^dagger(t) between consecutive frames,
/// after flipping eigenvector signs of `to` columnwise so diag(S) >= 0.
/// Row = destination eigenstate, column = source eigenstate.
Eigen::MatrixXd nonadiabatic_S(const EigenFrame& from, EigenFrame& to);

/// Severe frame rotation within one step (possible degenerate crossing).
bool severe_rotation(const Eigen::MatrixXd& s);

/// Boltzmann scaling of the off-diagonals: entry (alpha, beta) scaled by
/// exp((eps_beta - eps_alpha)/(4 kB T)), so transfer into lower-energy
/// eigenstates is enhanced. Diagonal unchanged.
Eigen::MatrixXd thermal_factor(const Eigen::MatrixXd& s, const Eigen::VectorXd& energies,
                               double temperature_K);

enum class PropagationMode { nise, tnise };

/// Site-basis time-evolution operators U(t_i, 0), i = 0..n_steps.
/// NISE propagators are unitary; TNISE propagators have unit-norm columns
/// (each column renormalized after the thermal correction).
struct PropagatorSeries {
    std::vector<ComplexMatrix> u;
    double dt_fs = 0.0;
    PropagationMode mode = PropagationMode::nise;
    std::size_t degeneracy_warnings = 0;

    std::size_t n_steps() const { return u.empty() ? 0 : u.size() - 1; }
    std::size_t dim() const { return u.empty() ? 0 : static_cast<std::size_t>(u.front().rows()); }
};

/// Propagate under H_eff(t_i) = H + diag(dE(t_i)), held piecewise-constant
/// over each noise step. Finer time resolution is obtained by resampling the
/// noise (bath_analysis::resample) before propagating.
PropagatorSeries propagate_realization(const Eigen::MatrixXd& hamiltonian,
                                       const NoiseTrajectory& window, double temperature_K,
                                       PropagationMode mode);

/// Time series of Hermitian site-basis density matrices.
struct DensitySeries {
    enum class Averaging { plain, constructed, interpolated };
    std::vector<ComplexMatrix> rho;
    double dt_fs = 0.0;
    Averaging tag = Averaging::plain;
};

/// rho(t) = mean over realizations of U(t,0) psi0 (U(t,0) psi0)^dagger.
DensitySeries ensemble_density(std::span<const PropagatorSeries> realizations,
                               const ComplexVector& psi0);

/// exp(-beta H)/Tr exp(-beta H).
ComplexMatrix boltzmann_density(const Eigen::MatrixXd& hamiltonian, double temperature_K);

/// Square real symmetric matrix from a headerless or headered CSV.
Eigen::MatrixXd read_hamiltonian_csv(const std::filesystem::path& path);

}  // namespace nisekit
