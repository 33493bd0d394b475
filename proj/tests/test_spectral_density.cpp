#include <doctest.h>

#include <cmath>
#include <random>

#include "nisekit/spectral_density.hpp"
#include "nisekit/units.hpp"
#include "support.hpp"

using nisekit::DrudeLorentzPeak;
using nisekit::SpectralDensity;
namespace units = nisekit::units;

namespace {
constexpr double pi = 3.14159265358979323846;
}

TEST_CASE("single zero-centered peak evaluates to lambda/pi at omega = nu") {
    const double nu = units::width_from_time_fs(100.0);
    auto sd = SpectralDensity::drude_lorentz({{0.0, 20.0, nu}});
    CHECK(sd(nu) == doctest::Approx(20.0 / pi).epsilon(1e-12));
}

TEST_CASE("J(0) = 0 and negative frequencies are rejected") {
    auto sd = testsupport::three_peak_sd();
    CHECK(sd(0.0) == 0.0);
    CHECK_THROWS_AS(sd(-1.0), std::invalid_argument);
}

TEST_CASE("three-peak model shows three humps") {
    auto sd = testsupport::three_peak_sd();
    const double j_low = sd(53.0);
    const double j_dip1 = sd(400.0);
    const double j_peak2 = sd(725.0);
    const double j_dip2 = sd(960.0);
    const double j_peak3 = sd(1200.0);
    CHECK(j_low > j_dip1);
    CHECK(j_peak2 > j_dip1);
    CHECK(j_peak2 > j_dip2);
    CHECK(j_peak3 > j_dip2);
    for (double w : {53.0, 400.0, 725.0, 960.0, 1200.0, 1600.0}) CHECK(sd(w) >= 0.0);
}

TEST_CASE("reorganization energy of the three-peak model is 60") {
    auto sd = testsupport::three_peak_sd();
    CHECK(sd.reorganization_energy() == doctest::Approx(60.0).epsilon(1e-12));
    // Quadrature agrees with the analytic shortcut to 0.1%.
    const double quad = testsupport::trapezoid(
        [&](double w) { return w > 0.0 ? sd(w) / w : sd.j_over_omega_limit0(); }, 0.0, 2e5, 2000000);
    CHECK(quad == doctest::Approx(60.0).epsilon(1e-3));
}

TEST_CASE("zero model has zero reorganization energy") {
    auto sd = SpectralDensity::drude_lorentz({});
    CHECK(sd.reorganization_energy() == 0.0);
    CHECK(sd(100.0) == 0.0);
}

TEST_CASE("single zero-centered peak integrates to its lambda") {
    auto sd = SpectralDensity::drude_lorentz({{0.0, 20.0, units::width_from_time_fs(100.0)}});
    CHECK(sd.reorganization_energy() == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("drude-lorentz quadrature check across widths") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> width(1.0, 500.0);
    std::uniform_real_distribution<double> center(0.0, 1500.0);
    std::uniform_real_distribution<double> reorg(0.5, 100.0);
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<DrudeLorentzPeak> peaks;
        double lambda_sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            DrudeLorentzPeak p{center(rng), reorg(rng), width(rng)};
            lambda_sum += p.lambda_cm1;
            peaks.push_back(p);
        }
        auto sd = SpectralDensity::drude_lorentz(peaks);
        const double quad = testsupport::trapezoid(
            [&](double w) { return w > 0.0 ? sd(w) / w : sd.j_over_omega_limit0(); }, 0.0, 5e5,
            4000000);
        CHECK(quad == doctest::Approx(lambda_sum).epsilon(1e-3));
    }
}

TEST_CASE("rescaling multiplies pointwise and hits the target") {
    auto sd = testsupport::three_peak_sd();
    auto scaled = sd.rescaled_to(200.0);
    CHECK(scaled.reorganization_energy() == doctest::Approx(200.0).epsilon(1e-10));
    for (double w : {10.0, 100.0, 725.0, 1200.0, 1500.0})
        CHECK(scaled(w) == doctest::Approx(sd(w) * 200.0 / 60.0).epsilon(1e-12));

    auto identity = sd.rescaled_to(60.0);
    for (double w : {10.0, 725.0}) CHECK(identity(w) == doctest::Approx(sd(w)).epsilon(1e-12));

    auto low = sd.rescaled_to(6.0);
    CHECK(low.reorganization_energy() == doctest::Approx(6.0).epsilon(1e-10));
    CHECK_THROWS_AS(sd.rescaled_to(-1.0), std::invalid_argument);
}

TEST_CASE("tabulated models interpolate linearly with zero extension") {
    auto sd = SpectralDensity::tabulated({0.0, 100.0, 200.0}, {0.0, 10.0, 4.0});
    CHECK(sd(0.0) == 0.0);
    CHECK(sd(50.0) == doctest::Approx(5.0));
    CHECK(sd(150.0) == doctest::Approx(7.0));
    CHECK(sd(250.0) == 0.0);  // outside the grid

    CHECK_THROWS_AS(SpectralDensity::tabulated({0.0, 100.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(SpectralDensity::tabulated({100.0, 50.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(SpectralDensity::tabulated({0.0, 100.0}, {0.0, -2.0}), std::invalid_argument);
    // Estimates may carry negative excursions but are rejected for rescaling.
    auto est = SpectralDensity::tabulated_estimate({0.0, 100.0}, {0.0, -2.0});
    CHECK(est.is_estimate());
    CHECK_THROWS(est.rescaled_to(10.0));
    auto clamped = est.clamped_nonnegative();
    CHECK(clamped(100.0) == 0.0);
}

TEST_CASE("tabulated rescale preserves shape") {
    auto sd = SpectralDensity::tabulated({0.0, 50.0, 100.0, 400.0}, {0.0, 8.0, 6.0, 0.5});
    const double lambda = sd.reorganization_energy();
    CHECK(lambda > 0.0);
    auto scaled = sd.rescaled_to(2.0 * lambda);
    CHECK(scaled.reorganization_energy() == doctest::Approx(2.0 * lambda).epsilon(1e-6));
    CHECK(scaled(50.0) == doctest::Approx(16.0).epsilon(1e-9));
}

TEST_CASE("csv round trip") {
    auto sd = SpectralDensity::tabulated({0.0, 1.5, 3.25, 10.0}, {0.0, 0.125, 2.5, 0.0});
    const auto path = std::filesystem::temp_directory_path() / "nisekit_sd_roundtrip.csv";
    sd.write_csv(path);
    auto back = SpectralDensity::read_csv(path);
    for (double w : {0.0, 0.75, 1.5, 3.25, 5.0, 10.0}) CHECK(back(w) == sd(w));
    std::filesystem::remove(path);
}
