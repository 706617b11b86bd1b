#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/Dense>

#include "elliptic_lab/lsvlab.hpp"
#include "elliptic_lab/spectra.hpp"

using namespace ell;

TEST_CASE("tail curves are monotone and huge thresholds saturate") {
    const auto spec = EnsembleSpec::make(30, AtomPairSpec::gaussian_real(0.0), 11);
    const auto report = lsv_tail(spec, {1e-8, 1e-3, 1e-1, 1e3}, 200, 2);
    CHECK(report.failures == 0);
    for (std::size_t k = 1; k < report.points.size(); ++k)
        CHECK(report.points[k].p >= report.points[k - 1].p);
    CHECK(report.points.back().p == doctest::Approx(1.0));
    for (const auto& pt : report.points) {
        CHECK(pt.ci_lo <= pt.p);
        CHECK(pt.p <= pt.ci_hi);
    }
    CHECK_THROWS_AS(lsv_tail(spec, {1e-3}, 10, 1), std::invalid_argument);
}

TEST_CASE("polynomial tail bound at n=100 scale (small version)") {
    const auto spec = EnsembleSpec::make(50, AtomPairSpec::gaussian_real(0.0), 17);
    const double t = std::pow(50.0, -3.0);
    const auto report = lsv_tail(spec, {t}, 200, 2);
    CHECK(report.points.front().p <= 0.05);
}

TEST_CASE("sigma_n is the minimum of ||Mx|| over unit vectors") {
    // Randomized check through inverse power iteration on (M^*M)^{-1}.
    const auto spec = EnsembleSpec::make(25, AtomPairSpec::gaussian_real(0.3), 23);
    const ComplexMatrix m = generate(spec);
    const double sigma_n = singular_values(m).back();

    RandomStream rng(5);
    Eigen::VectorXcd v(25);
    for (int i = 0; i < 25; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    v.normalize();
    const Eigen::PartialPivLU<ComplexMatrix> lu(m.adjoint() * m);
    for (int it = 0; it < 200; ++it) {
        v = lu.solve(v);
        v.normalize();
    }
    const double rayleigh = std::sqrt(std::real((v.adjoint() * (m.adjoint() * m) * v)(0)));
    CHECK(sigma_n == doctest::Approx(rayleigh).epsilon(1e-6));
    // And no unit vector found by sampling beats it.
    for (int k = 0; k < 200; ++k) {
        Eigen::VectorXcd w(25);
        for (int i = 0; i < 25; ++i) w(i) = Complex(rng.gaussian(), rng.gaussian());
        w.normalize();
        CHECK((m * w).norm() >= sigma_n - 1e-10);
    }
}

TEST_CASE("singularity rate: n=2 all-Bernoulli oracle") {
    // Full +-1 matrix: singular iff ad = bc; enumerate the 16 sign patterns.
    std::size_t singular = 0;
    for (int mask = 0; mask < 16; ++mask) {
        const double a = (mask & 1) ? 1 : -1, b = (mask & 2) ? 1 : -1;
        const double c = (mask & 4) ? 1 : -1, d = (mask & 8) ? 1 : -1;
        if (a * d - b * c == 0.0) ++singular;
    }
    const double oracle = static_cast<double>(singular) / 16.0;
    CHECK(oracle == doctest::Approx(0.5));

    // Symmetric-coupling model with independent Bernoulli pair and diagonal.
    auto spec = EnsembleSpec::make(2, AtomPairSpec::discrete_mix(0.0), 29);
    spec.diagonal = ScalarAtomSpec::bernoulli();
    const auto rate = singularity_rate(spec, 4000, 2);
    CHECK(rate.rate == doctest::Approx(oracle).epsilon(0.05));
}

TEST_CASE("gaussian ensembles are never singular") {
    const auto spec = EnsembleSpec::make(20, AtomPairSpec::gaussian_real(0.5), 31);
    CHECK(singularity_rate(spec, 300, 2).rate == doctest::Approx(0.0));
}

TEST_CASE("discrete n=50 near-singularity is rare") {
    auto spec = EnsembleSpec::make(50, AtomPairSpec::discrete_mix(0.0), 37);
    spec.diagonal = ScalarAtomSpec::bernoulli();
    CHECK(singularity_rate(spec, 200, 2).rate <= 0.01);
}

TEST_CASE("fitted exponent reflects the tail slope") {
    // sigma_n of a Ginibre-type ensemble scales linearly in t for small t,
    // so log P / log t has slope near 1 where resolved.
    const auto spec = EnsembleSpec::make(40, AtomPairSpec::gaussian_real(0.0), 41);
    const auto report = lsv_tail(spec, {5e-4, 2e-3, 1e-2, 5e-2, 2e-1}, 400, 2);
    if (report.fitted_exponent) CHECK(*report.fitted_exponent > 0.5);
}

TEST_CASE("tail csv export") {
    const auto spec = EnsembleSpec::make(10, AtomPairSpec::gaussian_real(0.0), 43);
    const auto report = lsv_tail(spec, {1e-4, 1e-2}, 100, 2);
    const auto path = std::filesystem::temp_directory_path() / "elab_tail.csv";
    write_tail_csv(path.string(), report);
    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    CHECK(header == "t,p,ci_lo,ci_hi");
    std::filesystem::remove(path);
}
