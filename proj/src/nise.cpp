#include "nisekit/nise.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nisekit/errors.hpp"
#include "nisekit/units.hpp"

namespace nisekit {

namespace {

void require_symmetric(const Eigen::MatrixXd& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("Hamiltonian must be square");
    if (!h.allFinite()) throw std::invalid_argument("Hamiltonian has non-finite entries");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("Hamiltonian must be symmetric");
}

}  // namespace

EigenFrame eigh(const Eigen::MatrixXd& hamiltonian) {
    require_symmetric(hamiltonian);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    EigenFrame frame{solver.eigenvalues(), solver.eigenvectors()};
    for (Eigen::Index c = 0; c < frame.vectors.cols(); ++c) {
        Eigen::Index imax = 0;
        frame.vectors.col(c).cwiseAbs().maxCoeff(&imax);
        if (frame.vectors(imax, c) < 0.0) frame.vectors.col(c) = -frame.vectors.col(c);
    }
    return frame;
}

ComplexVector nise_step(const ComplexVector& psi, const EigenFrame& frame, double dt_fs) {
    if (psi.size() != frame.energies.size()) throw std::invalid_argument("dimension mismatch");
    ComplexVector out(psi.size());
    for (Eigen::Index a = 0; a < psi.size(); ++a) {
        const double phase = -frame.energies(a) * dt_fs / units::hbar_cm1_fs;
        out(a) = psi(a) * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return out;
}

Eigen::MatrixXd nonadiabatic_S(const EigenFrame& from, EigenFrame& to) {
    if (from.vectors.rows() != to.vectors.rows())
        throw std::invalid_argument("frames of unequal dimension");
    Eigen::MatrixXd s = to.vectors.transpose() * from.vectors;
    for (Eigen::Index a = 0; a < s.rows(); ++a) {
        if (s(a, a) < 0.0) {
            to.vectors.col(a) = -to.vectors.col(a);
            s.row(a) = -s.row(a);
        }
    }
    return s;
}

bool severe_rotation(const Eigen::MatrixXd& s) {
    for (Eigen::Index a = 0; a < s.rows(); ++a) {
        if (std::abs(s(a, a)) < 0.5) return true;
    }
    return false;
}

Eigen::MatrixXd thermal_factor(const Eigen::MatrixXd& s, const Eigen::VectorXd& energies,
                               double temperature_K) {
    if (!(temperature_K > 0.0)) throw std::invalid_argument("temperature must be > 0");
    if (s.rows() != energies.size()) throw std::invalid_argument("dimension mismatch");
    const double denom = 4.0 * units::kB_cm1_per_K * temperature_K;
    Eigen::MatrixXd out = s;
    for (Eigen::Index a = 0; a < s.rows(); ++a) {
        for (Eigen::Index b = 0; b < s.cols(); ++b) {
            if (a == b) continue;
            out(a, b) *= std::exp((energies(b) - energies(a)) / denom);
        }
    }
    return out;
}

PropagatorSeries propagate_realization(const Eigen::MatrixXd& hamiltonian,
                                       const NoiseTrajectory& window, double temperature_K,
                                       PropagationMode mode) {
    require_symmetric(hamiltonian);
    const Eigen::Index dim = hamiltonian.rows();
    if (static_cast<Eigen::Index>(window.n_sites()) != dim)
        throw std::invalid_argument("noise site count does not match Hamiltonian dimension");
    if (!window.samples.allFinite()) throw NumericalError("NaN in noise trajectory");
    const std::size_t n = window.n_steps();
    const double dt = window.dt_fs;

    PropagatorSeries series;
    series.dt_fs = dt;
    series.mode = mode;
    series.u.reserve(n + 1);
    series.u.push_back(ComplexMatrix::Identity(dim, dim));

    Eigen::MatrixXd h_eff = hamiltonian;
    h_eff.diagonal() = hamiltonian.diagonal() + window.samples.col(0);
    EigenFrame frame = eigh(h_eff);

    // u_tilde holds U in mixed representation: rows in the current eigenbasis,
    // columns in the site basis at t=0.
    ComplexMatrix u_tilde = frame.vectors.transpose().cast<std::complex<double>>();

    for (std::size_t i = 0; i < n; ++i) {
        // Phase evolution under the instantaneous eigenenergies.
        for (Eigen::Index a = 0; a < dim; ++a) {
            const double phase = -frame.energies(a) * dt / units::hbar_cm1_fs;
            u_tilde.row(a) *= std::complex<double>(std::cos(phase), std::sin(phase));
        }

        if (i + 1 < n) {
            h_eff.diagonal() = hamiltonian.diagonal() + window.samples.col(static_cast<Eigen::Index>(i + 1));
            EigenFrame next = eigh(h_eff);
            Eigen::MatrixXd s = nonadiabatic_S(frame, next);
            if (severe_rotation(s)) ++series.degeneracy_warnings;
            if (mode == PropagationMode::tnise) {
                s = thermal_factor(s, frame.energies, temperature_K);
            }
            u_tilde = s.cast<std::complex<double>>() * u_tilde;
            frame = std::move(next);
        }

        ComplexMatrix u_site = frame.vectors.cast<std::complex<double>>() * u_tilde;
        if (mode == PropagationMode::tnise) {
            // The thermal correction breaks unitarity; keep every propagated
            // state normalized.
            for (Eigen::Index c = 0; c < dim; ++c) {
                const double norm = u_site.col(c).norm();
                if (norm > 0.0) u_site.col(c) /= norm;
            }
            u_tilde = frame.vectors.transpose().cast<std::complex<double>>() * u_site;
        }
        series.u.push_back(std::move(u_site));
    }
    return series;
}

DensitySeries ensemble_density(std::span<const PropagatorSeries> realizations,
                               const ComplexVector& psi0) {
    if (realizations.empty()) throw std::invalid_argument("empty realization list");
    const auto& first = realizations.front();
    const std::size_t steps = first.u.size();
    const Eigen::Index dim = first.u.front().rows();
    if (psi0.size() != dim) throw std::invalid_argument("initial state dimension mismatch");

    DensitySeries out;
    out.dt_fs = first.dt_fs;
    out.tag = DensitySeries::Averaging::plain;
    out.rho.assign(steps, ComplexMatrix::Zero(dim, dim));
    for (const auto& r : realizations) {
        if (r.u.size() != steps || r.u.front().rows() != dim || r.dt_fs != first.dt_fs)
            throw std::invalid_argument("inconsistent realization series");
        for (std::size_t i = 0; i < steps; ++i) {
            const ComplexVector psi = r.u[i] * psi0;
            out.rho[i].noalias() += psi * psi.adjoint();
        }
    }
    const double inv = 1.0 / static_cast<double>(realizations.size());
    for (auto& r : out.rho) r *= inv;
    return out;
}

ComplexMatrix boltzmann_density(const Eigen::MatrixXd& hamiltonian, double temperature_K) {
    if (!(temperature_K > 0.0)) throw std::invalid_argument("temperature must be > 0");
    EigenFrame frame = eigh(hamiltonian);
    // Shift by the ground-state energy before exponentiating.
    const double e0 = frame.energies.minCoeff();
    const double beta = units::beta_from_temperature(temperature_K);
    Eigen::VectorXd w = (-(frame.energies.array() - e0) * beta).exp();
    w /= w.sum();
    Eigen::MatrixXd rho = frame.vectors * w.asDiagonal() * frame.vectors.transpose();
    return rho.cast<std::complex<double>>();
}

Eigen::MatrixXd read_hamiltonian_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open Hamiltonian file: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        bool numeric = true;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(tok, &pos));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) continue;  // header line
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": ragged matrix row");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.size() != rows.front().size())
        throw ConfigError(path.string() + ": expected a square numeric matrix");
    Eigen::MatrixXd h(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    try {
        require_symmetric(h);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return h;
}

}  // namespace nisekit
