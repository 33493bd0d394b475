#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace nisekit {

/// One Drude-Lorentz component of an analytic spectral density:
/// center Omega (cm^-1), reorganization energy lambda (cm^-1), width nu (cm^-1).
/// Widths stated as correlation times tau convert via nu = hbar/tau
/// (units::width_from_time_fs).
struct DrudeLorentzPeak {
    double omega0_cm1 = 0.0;
    double lambda_cm1 = 0.0;
    double nu_cm1 = 0.0;
};

/// Bath spectral density J(omega): either a sum of Drude-Lorentz peaks
///
///   J(w) = (1/pi) sum_k [ nu_k l_k w / (nu_k^2 + (w - W_k)^2)
///                       + nu_k l_k w / (nu_k^2 + (w + W_k)^2) ]
///
/// or a tabulated curve with linear interpolation, zero outside the grid.
/// Models are immutable values; every operation is const and thread-safe.
///
/// A tabulated model built from a noisy estimate (sd_from_autocorrelation)
/// may carry small negative values; such models are tagged is_estimate()
/// and are rejected where a physical density is required (noise targets,
/// reorganization-energy rescaling). clamped_nonnegative() converts.
class SpectralDensity {
public:
    static SpectralDensity drude_lorentz(std::vector<DrudeLorentzPeak> peaks);
    static SpectralDensity tabulated(std::vector<double> omega_cm1, std::vector<double> j_cm1);
    static SpectralDensity tabulated_estimate(std::vector<double> omega_cm1, std::vector<double> j_cm1);

    /// Record the exact lim J(w)/w (transforms producing tabulated output know
    /// it; J = w * s destroys the DC bin otherwise).
    void set_j_over_omega_limit0(double value) { j_over_omega_dc_ = value; }

    /// J(omega); omega must be >= 0.
    double operator()(double omega_cm1) const;

    /// Reorganization energy lambda = int_0^inf J(w)/w dw. Analytic sum of
    /// lambda_k for Drude-Lorentz models, adaptive quadrature otherwise.
    double reorganization_energy() const;

    /// Same shape, scaled so reorganization_energy() == lambda_target.
    SpectralDensity rescaled_to(double lambda_target_cm1) const;

    /// lim_{w->0} J(w)/w. Analytic for Drude-Lorentz; linear extrapolation
    /// from the two smallest positive grid points for tabulated input.
    double j_over_omega_limit0() const;

    bool is_analytic() const { return analytic_; }
    bool is_estimate() const { return estimate_; }
    const std::vector<DrudeLorentzPeak>& peaks() const { return peaks_; }
    const std::vector<double>& grid() const { return omega_; }
    const std::vector<double>& values() const { return j_; }

    SpectralDensity clamped_nonnegative() const;

    /// Stable content hash, recorded in trajectory metadata.
    std::uint64_t hash() const;

    /// Two-column CSV "omega_cm1,J_cm1".
    static SpectralDensity read_csv(const std::filesystem::path& path, bool estimate = false);
    void write_csv(const std::filesystem::path& path) const;

private:
    SpectralDensity() = default;

    bool analytic_ = false;
    bool estimate_ = false;
    std::vector<DrudeLorentzPeak> peaks_;
    std::vector<double> omega_;
    std::vector<double> j_;
    std::optional<double> j_over_omega_dc_;
};

}  // namespace nisekit
