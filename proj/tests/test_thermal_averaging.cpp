#include <doctest.h>

#include <cmath>
#include <random>

#include "nisekit/thermal_averaging.hpp"
#include "nisekit/units.hpp"
#include "support.hpp"

using namespace nisekit;

namespace {

ComplexMatrix random_full_rank_density(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = std::complex<double>(g(rng), g(rng));
    ComplexMatrix rho = a * a.adjoint() + 0.05 * ComplexMatrix::Identity(dim, dim);
    return rho / rho.trace().real();
}

ComplexMatrix matrix_exp_hermitian(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    Eigen::VectorXd w = es.eigenvalues().array().exp();
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("density_log of the maximally mixed state") {
    const int n = 4;
    ComplexMatrix rho = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
    auto log = density_log(rho);
    CHECK((log + std::log(static_cast<double>(n)) * ComplexMatrix::Identity(n, n))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("density_log clamps the zero eigenvalues of a pure state") {
    ComplexVector psi(2);
    psi << 1.0, 0.0;
    ComplexMatrix rho = psi * psi.adjoint();
    auto log = density_log(rho, 1e-10);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(log);
    CHECK(es.eigenvalues()(0) == doctest::Approx(std::log(1e-10)).epsilon(1e-12));
    CHECK(std::abs(es.eigenvalues()(1)) < 1e-12);
}

TEST_CASE("exp(density_log(rho)) recovers full-rank rho") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        auto rho = random_full_rank_density(rng, 4);
        auto back = matrix_exp_hermitian(density_log(rho));
        CHECK((back - rho).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("density_log rejects non-Hermitian input") {
    ComplexMatrix bad(2, 2);
    bad << 1.0, std::complex<double>(0.0, 1.0), std::complex<double>(0.0, 1.0), 0.0;
    CHECK_THROWS_AS(density_log(bad), std::invalid_argument);
}

TEST_CASE("constructed_density recovers identical full-rank realizations") {
    std::mt19937_64 rng(23);
    auto rho = random_full_rank_density(rng, 3);
    std::vector<ComplexMatrix> list{rho, rho, rho};
    auto built = constructed_density(list);
    CHECK((built - rho).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("two orthogonal pure states average to the maximally mixed support") {
    ComplexVector e1(2), e2(2);
    e1 << 1.0, 0.0;
    e2 << 0.0, 1.0;
    std::vector<ComplexMatrix> list{e1 * e1.adjoint(), e2 * e2.adjoint()};
    auto built = constructed_density(list);
    CHECK(built(0, 0).real() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(built(1, 1).real() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(built(0, 1)) < 1e-12);
}

TEST_CASE("beta cancels in the artificial-Hamiltonian route") {
    // Build rho^c the long way: H_A = -(1/beta) ln rho per realization, average,
    // then the Boltzmann state of the averaged H_A with the same beta. Any beta
    // gives the constructed density.
    std::mt19937_64 rng(29);
    std::vector<ComplexMatrix> list{random_full_rank_density(rng, 3),
                                    random_full_rank_density(rng, 3)};
    auto direct = constructed_density(list);

    for (double beta : {0.1, 3.7}) {
        ComplexMatrix h_mean = ComplexMatrix::Zero(3, 3);
        for (const auto& rho : list) h_mean += (-1.0 / beta) * density_log(rho);
        h_mean /= static_cast<double>(list.size());
        ComplexMatrix num = matrix_exp_hermitian(-beta * h_mean);
        num /= num.trace().real();
        CHECK((num - direct).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("constructed average differs from the arithmetic mean for distinct states") {
    std::mt19937_64 rng(31);
    auto a = random_full_rank_density(rng, 3);
    auto b = random_full_rank_density(rng, 3);
    std::vector<ComplexMatrix> list{a, b};
    auto built = constructed_density(list);
    ComplexMatrix mean = 0.5 * (a + b);
    CHECK((built - mean).cwiseAbs().maxCoeff() > 1e-6);

    // equality when realizations are identical (and hence commute)
    std::vector<ComplexMatrix> same{a, a};
    auto built_same = constructed_density(same);
    CHECK((built_same - a).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pure-state shortcut equals the general path") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<ComplexMatrix> list;
    ComplexMatrix mean = ComplexMatrix::Zero(3, 3);
    for (int r = 0; r < 6; ++r) {
        ComplexVector psi(3);
        for (int i = 0; i < 3; ++i) psi(i) = std::complex<double>(g(rng), g(rng));
        psi.normalize();
        list.push_back(psi * psi.adjoint());
        mean += list.back();
    }
    mean /= 6.0;
    auto general = constructed_density(list);
    auto shortcut = constructed_density_from_mean(mean);
    CHECK((general - shortcut).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fit_lifetimes recovers a synthetic exponential") {
    DensitySeries series;
    series.dt_fs = 10.0;
    const std::size_t n = 600;
    const double tau = 500.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 10.0 * static_cast<double>(i);
        const double p1 = 0.35 + 0.65 * std::exp(-t / tau);
        ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
        rho(0, 0) = p1;
        rho(1, 1) = 1.0 - p1;
        series.rho.push_back(rho);
    }
    auto lifetimes = fit_lifetimes(series);
    CHECK(lifetimes.flags[0] == LifetimeSet::Flag::ok);
    CHECK(lifetimes.tau_fs[0] == doctest::Approx(tau).epsilon(0.02));
    // the complementary (rising) population carries the same time constant
    CHECK(lifetimes.tau_fs[1] == doctest::Approx(tau).epsilon(0.02));
}

TEST_CASE("fit_lifetimes falls back on constant populations and short series") {
    DensitySeries series;
    series.dt_fs = 1.0;
    for (std::size_t i = 0; i < 50; ++i) {
        ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
        rho(0, 0) = 0.5;
        rho(1, 1) = 0.5;
        series.rho.push_back(rho);
    }
    auto lifetimes = fit_lifetimes(series);
    CHECK(lifetimes.flags[0] == LifetimeSet::Flag::fallback);
    CHECK(lifetimes.tau_fs[0] == doctest::Approx(49.0));

    DensitySeries tiny;
    tiny.dt_fs = 1.0;
    tiny.rho.assign(5, ComplexMatrix::Identity(2, 2) * 0.5);
    CHECK_THROWS_AS(fit_lifetimes(tiny), std::invalid_argument);
}

TEST_CASE("interpolation weight") {
    CHECK(interpolation_weight(0.0, 500.0) == 0.0);
    CHECK(interpolation_weight(1e12, 500.0) == doctest::Approx(1.0));
    CHECK(interpolation_weight(2500.0, 500.0, 5.0) == doctest::Approx(1.0 - std::exp(-1.0)));
    // a smaller factor switches earlier
    CHECK(interpolation_weight(1000.0, 500.0, 1.0) > interpolation_weight(1000.0, 500.0, 5.0));
    CHECK_THROWS_AS(interpolation_weight(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("interpolated_populations blends and renormalizes") {
    const std::size_t n = 40;
    DensitySeries tnise, constructed;
    tnise.dt_fs = constructed.dt_fs = 10.0;
    for (std::size_t i = 0; i < n; ++i) {
        ComplexMatrix a = ComplexMatrix::Zero(2, 2);
        a(0, 0) = 0.8;
        a(1, 1) = 0.2;
        a(0, 1) = std::complex<double>(0.05, 0.02);
        a(1, 0) = std::conj(a(0, 1));
        ComplexMatrix b = ComplexMatrix::Zero(2, 2);
        b(0, 0) = 0.4;
        b(1, 1) = 0.6;
        tnise.rho.push_back(a);
        constructed.rho.push_back(b);
    }
    LifetimeSet lifetimes;
    lifetimes.tau_fs = {100.0, 100.0};
    lifetimes.rms_residual = {0.0, 0.0};
    lifetimes.flags = {LifetimeSet::Flag::ok, LifetimeSet::Flag::ok};

    // gigantic lifetimes: w ~ 0 everywhere -> TNISE populations
    LifetimeSet huge = lifetimes;
    huge.tau_fs = {1e15, 1e15};
    auto as_tnise = interpolated_populations(tnise, constructed, huge, 5.0);
    CHECK(as_tnise.rho[10](0, 0).real() == doctest::Approx(0.8).epsilon(1e-9));
    // off-diagonals are passed through from the TNISE series
    CHECK(as_tnise.rho[10](0, 1) == tnise.rho[10](0, 1));

    // tiny lifetimes: w ~ 1 -> constructed populations
    LifetimeSet tiny = lifetimes;
    tiny.tau_fs = {1e-9, 1e-9};
    auto as_constructed = interpolated_populations(tnise, constructed, tiny, 5.0);
    CHECK(as_constructed.rho[10](0, 0).real() == doctest::Approx(0.4).epsilon(1e-9));

    // generic weights: populations sum to exactly one
    auto blended = interpolated_populations(tnise, constructed, lifetimes, 5.0);
    for (const auto& rho : blended.rho)
        CHECK(rho(0, 0).real() + rho(1, 1).real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(blended.tag == DensitySeries::Averaging::interpolated);

    DensitySeries misaligned = constructed;
    misaligned.dt_fs = 20.0;
    CHECK_THROWS_AS(interpolated_populations(tnise, misaligned, lifetimes, 5.0),
                    std::invalid_argument);
}
