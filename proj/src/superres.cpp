#include "nisekit/superres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nisekit/csv.hpp"
#include "nisekit/errors.hpp"
#include "nisekit/rng.hpp"
#include "nisekit/units.hpp"

namespace nisekit {

namespace {
constexpr double two_pi = 6.28318530717958647692;

std::vector<double> arange(double lo, double hi, double step) {
    std::vector<double> v;
    for (double x = lo; x <= hi + 1e-9 * step; x += step) v.push_back(x);
    return v;
}

double damp_exp(double gamma, double t_fs) {
    const double x = std::min(gamma * t_fs / units::hbar_cm1_fs, 700.0);
    return std::exp(-x);
}

// Separable form of the dictionary: A[k, ij] = E[k,i] Q[k,j] with
// E = exp(-gamma t/hbar) and Q = cos(Omega t/hbar); products and adjoints run
// through the factors instead of the full K x (G*W) matrix.
struct SeparableDesign {
    Eigen::MatrixXd e;  // K x G
    Eigen::MatrixXd q;  // K x W

    SeparableDesign(const SuperResGrid& grid, const std::vector<double>& lags_fs) {
        const auto k = static_cast<Eigen::Index>(lags_fs.size());
        const auto g = static_cast<Eigen::Index>(grid.gammas.size());
        const auto w = static_cast<Eigen::Index>(grid.omegas.size());
        e.resize(k, g);
        q.resize(k, w);
        for (Eigen::Index kk = 0; kk < k; ++kk) {
            const double t = lags_fs[static_cast<std::size_t>(kk)];
            for (Eigen::Index i = 0; i < g; ++i) e(kk, i) = damp_exp(grid.gammas[static_cast<std::size_t>(i)], t);
            for (Eigen::Index j = 0; j < w; ++j)
                q(kk, j) = std::cos(grid.omegas[static_cast<std::size_t>(j)] * t / units::hbar_cm1_fs);
        }
    }

    // y_k = E.row(k) * L * Q.row(k)^T for L = reshape(lambda, G x W).
    Eigen::VectorXd apply(const Eigen::VectorXd& lambda) const {
        const Eigen::Index g = e.cols(), w = q.cols();
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> l(
            lambda.data(), g, w);
        Eigen::MatrixXd p = l * q.transpose();            // G x K
        return (e.cwiseProduct(p.transpose())).rowwise().sum();
    }

    // grad_ij = sum_k E[k,i] r_k Q[k,j].
    Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& r) const {
        Eigen::MatrixXd grad = e.transpose() * r.asDiagonal() * q;  // G x W
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = grad;
        return Eigen::Map<Eigen::VectorXd>(rm.data(), rm.size());
    }
};

// prox of t * (b|x| + c(|x| - x)): asymmetric soft threshold with slope b on
// the positive side and b + 2c on the negative side.
inline double prox_penalty(double v, double t, double b, double c) {
    const double up = t * b;
    const double dn = t * (b + 2.0 * c);
    if (v > up) return v - up;
    if (v < -dn) return v + dn;
    return 0.0;
}

inline double penalty_value(const Eigen::VectorXd& x, double b, double c) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double ax = std::abs(x(i));
        s += b * ax + c * (ax - x(i));
    }
    return s;
}

}  // namespace

SuperResGrid SuperResGrid::desk_default() {
    return custom(1.0, 200.0, 5.0, 0.0, 0.2 * units::cm1_per_eV, 2.0);
}

SuperResGrid SuperResGrid::paper_grid() {
    return custom(1.0, 200.0, 0.5, 0.0, 0.2 * units::cm1_per_eV, 5e-5 * units::cm1_per_eV);
}

SuperResGrid SuperResGrid::custom(double gamma_min, double gamma_max, double gamma_step,
                                  double omega_min, double omega_max, double omega_step) {
    if (!(gamma_min > 0.0)) throw std::invalid_argument("gamma grid must be positive");
    SuperResGrid grid;
    grid.gammas = arange(gamma_min, gamma_max, gamma_step);
    grid.omegas = arange(omega_min, omega_max, omega_step);
    if (grid.gammas.empty() || grid.omegas.empty()) throw std::invalid_argument("empty grid");
    return grid;
}

Eigen::MatrixXd design_matrix(const SuperResGrid& grid, const std::vector<double>& lags_fs) {
    if (lags_fs.empty()) throw std::invalid_argument("empty lag grid");
    if (grid.gammas.empty() || grid.omegas.empty()) throw std::invalid_argument("empty grid");
    SeparableDesign d(grid, lags_fs);
    Eigen::MatrixXd a(lags_fs.size(), grid.n_modes());
    for (std::size_t i = 0; i < grid.gammas.size(); ++i)
        for (std::size_t j = 0; j < grid.omegas.size(); ++j)
            a.col(static_cast<Eigen::Index>(grid.index(i, j))) =
                d.e.col(static_cast<Eigen::Index>(i)).cwiseProduct(d.q.col(static_cast<Eigen::Index>(j)));
    return a;
}

std::vector<SuperResMode> SuperResSolution::retained(double threshold) const {
    std::vector<SuperResMode> modes;
    for (std::size_t i = 0; i < grid.gammas.size(); ++i) {
        for (std::size_t j = 0; j < grid.omegas.size(); ++j) {
            const double v = coeffs(static_cast<Eigen::Index>(grid.index(i, j)));
            if (std::abs(v) > threshold) modes.push_back({grid.gammas[i], grid.omegas[j], v});
        }
    }
    return modes;
}

SuperResSolution fit(const AutocorrelationSeries& c, const SuperResGrid& grid, double a, double b,
                     double penalty_c, double t_c_fs, const FitOptions& options) {
    if (c.values.empty()) throw std::invalid_argument("empty autocorrelation");
    for (double v : c.values)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite autocorrelation value");
    if (t_c_fs <= 0.0) t_c_fs = static_cast<double>(c.values.size() - 1) * c.dt_fs;

    std::vector<double> lags;
    Eigen::VectorXd target;
    {
        std::vector<double> vals;
        for (std::size_t j = 0; j < c.values.size(); ++j) {
            const double t = static_cast<double>(j) * c.dt_fs;
            if (t > t_c_fs) break;
            lags.push_back(t);
            vals.push_back(c.values[j]);
        }
        target = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    }
    if (lags.empty()) throw std::invalid_argument("cutoff excludes every lag");

    SeparableDesign design(grid, lags);
    const auto n = static_cast<Eigen::Index>(grid.n_modes());

    auto smooth = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        Eigen::VectorXd r = design.apply(x) - target;
        const double nrm = r.norm();
        if (grad) {
            if (nrm > 1e-300) {
                *grad = design.apply_adjoint(r) * (a / nrm);
            } else {
                grad->setZero(n);
            }
        }
        return a * nrm;
    };
    auto objective = [&](const Eigen::VectorXd& x) {
        return smooth(x, nullptr) + penalty_value(x, b, penalty_c);
    };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (options.init_seed != 0) {
        rng::GaussianStream gs(options.init_seed);
        const double scale = target.cwiseAbs().maxCoeff() / std::max<double>(1, n);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = scale * gs.next();
    }

    SuperResSolution sol;
    sol.grid = grid;
    sol.a = a;
    sol.b = b;
    sol.c = penalty_c;
    sol.t_c_fs = t_c_fs;

    // Monotone FISTA: accelerated candidate, but the kept iterate never
    // increases the objective.
    Eigen::VectorXd x_prev = x, z = x, y = x, grad(n);
    double tk = 1.0;
    double step = 1.0;
    double fx = objective(x);
    sol.objective_trace.push_back(fx);
    std::size_t stall = 0;

    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const double fy = smooth(y, &grad);
        // Backtrack on the majorization at y.
        for (int bt = 0; bt < 60; ++bt) {
            for (Eigen::Index i = 0; i < n; ++i)
                z(i) = prox_penalty(y(i) - step * grad(i), step, b, penalty_c);
            const double fz = smooth(z, nullptr);
            const Eigen::VectorXd dz = z - y;
            if (fz <= fy + grad.dot(dz) + dz.squaredNorm() / (2.0 * step) + 1e-12 * std::abs(fy)) break;
            step *= 0.5;
        }
        const double fz_total = objective(z);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        x_prev = x;
        double fx_new;
        if (fz_total <= fx) {
            x = z;
            fx_new = fz_total;
        } else {
            fx_new = fx;  // keep the previous iterate
        }
        y = x + (tk / t_next) * (z - x) + ((tk - 1.0) / t_next) * (x - x_prev);
        tk = t_next;
        sol.objective_trace.push_back(fx_new);

        const double change = std::abs(fx - fx_new);
        if (change <= options.tolerance * std::max(1.0, std::abs(fx))) {
            if (++stall >= 5) {
                fx = fx_new;
                break;
            }
        } else {
            stall = 0;
        }
        fx = fx_new;
        step = std::min(step * 2.0, 1e6);  // let the step recover between iterations
    }
    sol.coeffs = x;
    return sol;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double kkt_tol) {
    const Eigen::Index n = a.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    Eigen::VectorXd w = a.transpose() * b;
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());

    auto solve_passive = [&](const std::vector<Eigen::Index>& idx) {
        Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
        return Eigen::VectorXd(ap.colPivHouseholderQr().solve(b));
    };

    for (int outer = 0; outer < 30 * static_cast<int>(n) + 100; ++outer) {
        w = a.transpose() * (b - a * x);
        Eigen::Index best = -1;
        double best_w = kkt_tol * scale;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!passive[static_cast<std::size_t>(i)] && w(i) > best_w) {
                best_w = w(i);
                best = i;
            }
        }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;

        for (int inner = 0; inner < 30 * static_cast<int>(n) + 100; ++inner) {
            std::vector<Eigen::Index> idx;
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
            if (idx.empty()) break;
            Eigen::VectorXd z = solve_passive(idx);
            double zmin = z.minCoeff();
            if (zmin > 0.0) {
                x.setZero();
                for (std::size_t k = 0; k < idx.size(); ++k) x(idx[k]) = z(static_cast<Eigen::Index>(k));
                break;
            }
            // Step toward z until the first passive coefficient hits zero.
            double alpha = 1.0;
            for (std::size_t k = 0; k < idx.size(); ++k) {
                if (z(static_cast<Eigen::Index>(k)) <= 0.0) {
                    const double xi = x(idx[k]);
                    const double denom = xi - z(static_cast<Eigen::Index>(k));
                    if (denom > 0.0) alpha = std::min(alpha, xi / denom);
                }
            }
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const Eigen::Index i = idx[k];
                x(i) += alpha * (z(static_cast<Eigen::Index>(k)) - x(i));
                if (x(i) <= 1e-14 * scale) {
                    x(i) = 0.0;
                    passive[static_cast<std::size_t>(i)] = false;
                }
            }
        }
    }
    return x;
}

SuperResSolution debias(const SuperResSolution& solution, const AutocorrelationSeries& c,
                        double threshold) {
    std::vector<std::size_t> keep;
    for (Eigen::Index i = 0; i < solution.coeffs.size(); ++i)
        if (std::abs(solution.coeffs(i)) > threshold) keep.push_back(static_cast<std::size_t>(i));

    SuperResSolution out = solution;
    out.debiased = true;
    out.debias_threshold = threshold;
    out.objective_trace.clear();
    out.coeffs = Eigen::VectorXd::Zero(solution.coeffs.size());
    if (keep.empty()) {
        out.warning = true;
        return out;
    }

    std::vector<double> lags, vals;
    for (std::size_t j = 0; j < c.values.size(); ++j) {
        const double t = static_cast<double>(j) * c.dt_fs;
        if (t > solution.t_c_fs) break;
        lags.push_back(t);
        vals.push_back(c.values[j]);
    }
    Eigen::VectorXd target = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));

    Eigen::MatrixXd a_keep(lags.size(), keep.size());
    SeparableDesign design(solution.grid, lags);
    const std::size_t n_omegas = solution.grid.omegas.size();
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const std::size_t i = keep[k] / n_omegas;
        const std::size_t j = keep[k] % n_omegas;
        a_keep.col(static_cast<Eigen::Index>(k)) =
            design.e.col(static_cast<Eigen::Index>(i)).cwiseProduct(design.q.col(static_cast<Eigen::Index>(j)));
    }
    Eigen::VectorXd z = nnls(a_keep, target);
    for (std::size_t k = 0; k < keep.size(); ++k)
        out.coeffs(static_cast<Eigen::Index>(keep[k])) = z(static_cast<Eigen::Index>(k));
    return out;
}

SpectralDensity reconstruct_sd(const SuperResSolution& solution, std::vector<double> omega_grid) {
    const auto modes = solution.retained(0.0);
    std::vector<double> values(omega_grid.size(), 0.0);
    for (std::size_t k = 0; k < omega_grid.size(); ++k) {
        const double w = omega_grid[k];
        double j = 0.0;
        for (const auto& m : modes) {
            const double dp = w + m.omega_cm1;
            const double dm = w - m.omega_cm1;
            j += m.coeff_cm2 * (m.gamma_cm1 / (m.gamma_cm1 * m.gamma_cm1 + dp * dp) +
                                m.gamma_cm1 / (m.gamma_cm1 * m.gamma_cm1 + dm * dm));
        }
        values[k] = two_pi * w * j;
    }
    if (solution.debiased && !solution.warning) {
        return SpectralDensity::tabulated(std::move(omega_grid), std::move(values));
    }
    return SpectralDensity::tabulated_estimate(std::move(omega_grid), std::move(values));
}

void write_solution_csv(const std::filesystem::path& path, const SuperResSolution& solution) {
    csv::Table t;
    t.metadata["a"] = csv::format_double(solution.a);
    t.metadata["b"] = csv::format_double(solution.b);
    t.metadata["c"] = csv::format_double(solution.c);
    t.metadata["t_c_fs"] = csv::format_double(solution.t_c_fs);
    t.metadata["debiased"] = solution.debiased ? "true" : "false";
    t.columns = {"gamma_cm1", "Omega_cm1", "lambda_cm2"};
    for (const auto& m : solution.retained(0.0)) t.rows.push_back({m.gamma_cm1, m.omega_cm1, m.coeff_cm2});
    csv::write_file(path, t);
}

}  // namespace nisekit
