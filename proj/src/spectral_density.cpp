#include "nisekit/spectral_density.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nisekit/csv.hpp"
#include "nisekit/errors.hpp"

namespace nisekit {

namespace {
constexpr double pi = 3.14159265358979323846;

double eval_drude_lorentz(const std::vector<DrudeLorentzPeak>& peaks, double w) {
    double j = 0.0;
    for (const auto& p : peaks) {
        const double dm = w - p.omega0_cm1;
        const double dp = w + p.omega0_cm1;
        j += p.nu_cm1 * p.lambda_cm1 * w / (p.nu_cm1 * p.nu_cm1 + dm * dm) +
             p.nu_cm1 * p.lambda_cm1 * w / (p.nu_cm1 * p.nu_cm1 + dp * dp);
    }
    return j / pi;
}

double interp_tabulated(const std::vector<double>& x, const std::vector<double>& y, double w) {
    if (x.empty() || w < x.front() || w > x.back()) return 0.0;
    auto it = std::upper_bound(x.begin(), x.end(), w);
    if (it == x.begin()) return y.front();
    if (it == x.end()) return y.back();
    const std::size_t hi = static_cast<std::size_t>(it - x.begin());
    const std::size_t lo = hi - 1;
    const double f = (w - x[lo]) / (x[hi] - x[lo]);
    return y[lo] + f * (y[hi] - y[lo]);
}
}  // namespace

SpectralDensity SpectralDensity::drude_lorentz(std::vector<DrudeLorentzPeak> peaks) {
    for (const auto& p : peaks) {
        if (!(p.lambda_cm1 >= 0.0)) throw std::invalid_argument("Drude-Lorentz peak needs lambda >= 0");
        if (!(p.nu_cm1 > 0.0)) throw std::invalid_argument("Drude-Lorentz peak needs nu > 0");
        if (!(p.omega0_cm1 >= 0.0)) throw std::invalid_argument("Drude-Lorentz peak needs Omega >= 0");
    }
    SpectralDensity sd;
    sd.analytic_ = true;
    sd.peaks_ = std::move(peaks);
    return sd;
}

SpectralDensity SpectralDensity::tabulated(std::vector<double> omega, std::vector<double> j) {
    if (omega.size() != j.size()) throw std::invalid_argument("tabulated model: grid/value size mismatch");
    if (omega.size() < 2) throw std::invalid_argument("tabulated model needs at least 2 samples");
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!std::isfinite(omega[i]) || !std::isfinite(j[i]))
            throw std::invalid_argument("tabulated model: non-finite entry");
        if (omega[i] < 0.0) throw std::invalid_argument("tabulated model: negative frequency");
        if (i > 0 && !(omega[i] > omega[i - 1]))
            throw std::invalid_argument("tabulated model: grid must be strictly increasing");
        if (j[i] < 0.0) throw std::invalid_argument("tabulated model: negative J(omega)");
    }
    if (omega.front() == 0.0 && j.front() != 0.0)
        throw std::invalid_argument("tabulated model: J(0) must be 0");
    SpectralDensity sd;
    sd.omega_ = std::move(omega);
    sd.j_ = std::move(j);
    return sd;
}

SpectralDensity SpectralDensity::tabulated_estimate(std::vector<double> omega, std::vector<double> j) {
    if (omega.size() != j.size()) throw std::invalid_argument("tabulated model: grid/value size mismatch");
    if (omega.size() < 2) throw std::invalid_argument("tabulated model needs at least 2 samples");
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!std::isfinite(omega[i]) || !std::isfinite(j[i]))
            throw std::invalid_argument("tabulated model: non-finite entry");
        if (omega[i] < 0.0) throw std::invalid_argument("tabulated model: negative frequency");
        if (i > 0 && !(omega[i] > omega[i - 1]))
            throw std::invalid_argument("tabulated model: grid must be strictly increasing");
    }
    SpectralDensity sd;
    sd.estimate_ = true;
    sd.omega_ = std::move(omega);
    sd.j_ = std::move(j);
    return sd;
}

double SpectralDensity::operator()(double w) const {
    if (w < 0.0) throw std::invalid_argument("spectral density evaluated at negative frequency");
    if (analytic_) return eval_drude_lorentz(peaks_, w);
    return interp_tabulated(omega_, j_, w);
}

double SpectralDensity::reorganization_energy() const {
    if (analytic_) {
        double sum = 0.0;
        for (const auto& p : peaks_) sum += p.lambda_cm1;  // each symmetric pair integrates to lambda_k
        return sum;
    }
    if (estimate_) throw std::invalid_argument("reorganization energy requires a nonnegative model");
    // J/omega is bounded for valid models (J(0)=0, linear interpolation), so the
    // integrand is piecewise smooth on the grid.
    const double w_max = omega_.back();
    if (w_max <= 0.0) return 0.0;
    auto integrand = [this](double w) {
        if (w <= 0.0) return j_over_omega_limit0();
        return (*this)(w) / w;
    };
    double error = 0.0;
    double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, 0.0, w_max, 12, 1e-10, &error);
    if (!std::isfinite(val)) throw NumericalError("divergent reorganization-energy integrand");
    return val;
}

SpectralDensity SpectralDensity::rescaled_to(double lambda_target) const {
    if (lambda_target < 0.0) throw std::invalid_argument("rescale target must be >= 0");
    const double lambda0 = reorganization_energy();
    if (!(lambda0 > 0.0)) throw std::invalid_argument("rescale requires positive reorganization energy");
    const double c = lambda_target / lambda0;
    if (analytic_) {
        auto peaks = peaks_;
        for (auto& p : peaks) p.lambda_cm1 *= c;
        return drude_lorentz(std::move(peaks));
    }
    auto values = j_;
    for (auto& v : values) v *= c;
    SpectralDensity out = tabulated(omega_, std::move(values));
    if (j_over_omega_dc_) out.j_over_omega_dc_ = *j_over_omega_dc_ * c;
    return out;
}

double SpectralDensity::j_over_omega_limit0() const {
    if (j_over_omega_dc_) return *j_over_omega_dc_;
    if (analytic_) {
        double s = 0.0;
        for (const auto& p : peaks_) {
            s += 2.0 * p.nu_cm1 * p.lambda_cm1 /
                 (pi * (p.nu_cm1 * p.nu_cm1 + p.omega0_cm1 * p.omega0_cm1));
        }
        return s;
    }
    // Linear extrapolation of J(w)/w from the two smallest positive grid points.
    std::vector<std::pair<double, double>> pos;
    for (std::size_t i = 0; i < omega_.size() && pos.size() < 2; ++i) {
        if (omega_[i] > 0.0) pos.emplace_back(omega_[i], j_[i] / omega_[i]);
    }
    if (pos.empty()) return 0.0;
    if (pos.size() == 1) return pos[0].second;
    const auto [w1, r1] = pos[0];
    const auto [w2, r2] = pos[1];
    const double r0 = r1 - w1 * (r2 - r1) / (w2 - w1);
    if (!std::isfinite(r0)) throw NumericalError("J(omega)/omega diverges at omega = 0");
    return r0;
}

SpectralDensity SpectralDensity::clamped_nonnegative() const {
    if (analytic_) return *this;
    auto values = j_;
    for (auto& v : values) v = std::max(v, 0.0);
    if (omega_.front() == 0.0) values.front() = 0.0;
    SpectralDensity out = tabulated(omega_, std::move(values));
    if (j_over_omega_dc_) out.j_over_omega_dc_ = std::max(*j_over_omega_dc_, 0.0);
    return out;
}

std::uint64_t SpectralDensity::hash() const {
    std::ostringstream os;
    if (analytic_) {
        os << "dl";
        for (const auto& p : peaks_)
            os << ";" << csv::format_double(p.omega0_cm1) << "," << csv::format_double(p.lambda_cm1)
               << "," << csv::format_double(p.nu_cm1);
    } else {
        os << (estimate_ ? "est" : "tab");
        for (std::size_t i = 0; i < omega_.size(); ++i)
            os << ";" << csv::format_double(omega_[i]) << "," << csv::format_double(j_[i]);
    }
    return csv::fnv1a(os.str());
}

SpectralDensity SpectralDensity::read_csv(const std::filesystem::path& path, bool estimate) {
    csv::Table t = csv::read_file(path);
    auto omega = t.column(t.column_index("omega_cm1"));
    auto j = t.column(t.column_index("J_cm1"));
    try {
        SpectralDensity sd = estimate ? tabulated_estimate(std::move(omega), std::move(j))
                                      : tabulated(std::move(omega), std::move(j));
        if (auto it = t.metadata.find("J_over_omega_dc"); it != t.metadata.end())
            sd.j_over_omega_dc_ = std::stod(it->second);
        return sd;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void SpectralDensity::write_csv(const std::filesystem::path& path) const {
    csv::Table t;
    t.columns = {"omega_cm1", "J_cm1"};
    if (analytic_) throw std::invalid_argument("write_csv expects a tabulated model; sample it first");
    if (j_over_omega_dc_) t.metadata["J_over_omega_dc"] = csv::format_double(*j_over_omega_dc_);
    t.rows.reserve(omega_.size());
    for (std::size_t i = 0; i < omega_.size(); ++i) t.rows.push_back({omega_[i], j_[i]});
    csv::write_file(path, t);
}

}  // namespace nisekit
