#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "elliptic_lab/ensemble.hpp"
#include "elliptic_lab/spectra.hpp"

using namespace ell;

namespace {

// Smallest distance from each expected value to some computed eigenvalue.
double match_distance(std::vector<Complex> got, const std::vector<Complex>& expected) {
    double worst = 0.0;
    for (const Complex& e : expected) {
        double best = 1e300;
        for (const Complex& g : got) best = std::min(best, std::abs(g - e));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

TEST_CASE("diagonal and nilpotent eigenvalues") {
    ComplexMatrix d = ComplexMatrix::Zero(3, 3);
    d(0, 0) = Complex(1, 0);
    d(1, 1) = Complex(0, 2);
    d(2, 2) = Complex(-3, 0);
    CHECK(match_distance(eigenvalues(d), {{1, 0}, {0, 2}, {-3, 0}}) < 1e-12);

    ComplexMatrix nil = ComplexMatrix::Zero(2, 2);
    nil(0, 1) = Complex(1, 0);
    CHECK(match_distance(eigenvalues(nil), {{0, 0}, {0, 0}}) < 1e-12);
}

TEST_CASE("companion matrix of lambda^3 - 1 gives the cube roots of unity") {
    ComplexMatrix c = ComplexMatrix::Zero(3, 3);
    c(0, 2) = Complex(1, 0);  // coefficients of x^3 = 1
    c(1, 0) = Complex(1, 0);
    c(2, 1) = Complex(1, 0);
    // Oracle: closed-form roots e^{2 pi i k / 3}.
    std::vector<Complex> roots;
    for (int k = 0; k < 3; ++k) roots.push_back(std::polar(1.0, 2.0 * M_PI * k / 3.0));
    CHECK(match_distance(eigenvalues(c), roots) < 1e-10);
}

TEST_CASE("singular value basics") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 1) = Complex(2, 0);
    const auto sv = singular_values(a);
    CHECK(sv[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sv[1] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("unitary factor has unit singular values") {
    const auto spec = EnsembleSpec::make(8, AtomPairSpec::gaussian_real(0.0), 21);
    const ComplexMatrix a = generate(spec);
    const Eigen::HouseholderQR<ComplexMatrix> qr(a);
    const ComplexMatrix q = qr.householderQ();
    for (double s : singular_values(q)) CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("singular values match the hermitian eigen-oracle") {
    const auto spec = EnsembleSpec::make(6, AtomPairSpec::gaussian_complex(0.5, 0.3), 33);
    const ComplexMatrix a = generate(spec);
    const auto sv = singular_values(a);
    // Oracle: sqrt of eigenvalues of A^* A via the self-adjoint solver.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.adjoint() * a);
    std::vector<double> oracle;
    for (Eigen::Index i = 0; i < 6; ++i)
        oracle.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
    std::sort(oracle.begin(), oracle.end(), std::greater<double>());
    for (int i = 0; i < 6; ++i) CHECK(sv[i] == doctest::Approx(oracle[i]).epsilon(1e-8));
}

TEST_CASE("esd evaluation") {
    const std::vector<Complex> eigs{{1, 1}, {-1, -1}};
    CHECK(esd_eval(eigs, 0, 0) == doctest::Approx(0.5));
    CHECK(esd_eval(eigs, 1e18, 1e18) == doctest::Approx(1.0));
    // Fourth roots of unity at corner (0,0): direct enumeration oracle.
    const std::vector<Complex> roots{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::size_t expect = 0;
    for (const Complex& r : roots)
        if (r.real() <= 0.0 && r.imag() <= 0.0) ++expect;  // -1 and -i
    CHECK(esd_eval(roots, 0, 0) == doctest::Approx(static_cast<double>(expect) / 4.0));
    CHECK(expect == 2);
}

TEST_CASE("scaled measures") {
    ComplexMatrix zero = ComplexMatrix::Zero(4, 4);
    const auto [mu0, nu0] = scaled_measures(zero, Complex(1, 0));
    for (const Complex& p : mu0.points) CHECK(std::abs(p) < 1e-14);
    for (double s : nu0.points) CHECK(s == doctest::Approx(1.0).epsilon(1e-14));

    // n=2, A=[[0,2],[0,0]], z=0: sigma(A/sqrt(2)) = {sqrt(2), 0}.
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 1) = Complex(2, 0);
    const auto [mu, nu] = scaled_measures(a, Complex(0, 0));
    CHECK(nu.points.front() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(nu.points.back() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("spectral invariants on random matrices") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto spec = EnsembleSpec::make(12, AtomPairSpec::gaussian_complex(0.4, -0.3), seed);
        const ComplexMatrix a = generate(spec);
        const SpectralData sd = compute_spectral_data(a);

        // Weyl: spectral radius below the largest singular value.
        double rad = 0;
        for (const Complex& l : sd.eigenvalues) rad = std::max(rad, std::abs(l));
        CHECK(rad <= sd.singular_values.front() * (1 + 1e-10));

        // Trace identity.
        Complex tr{0, 0};
        for (const Complex& l : sd.eigenvalues) tr += l;
        CHECK(std::abs(tr - a.trace()) <= 1e-8 * 12 * sd.singular_values.front());

        // sum sigma^2 = ||A||_2^2.
        double ss = 0;
        for (double s : sd.singular_values) ss += s * s;
        CHECK(ss == doctest::Approx(hs_norm(a) * hs_norm(a)).epsilon(1e-8));

        // |prod lambda| = prod sigma via log sums.
        double log_eig = 0, log_sv = 0;
        bool ok = true;
        for (const Complex& l : sd.eigenvalues) {
            if (std::abs(l) < 1e-12) ok = false;
            log_eig += std::log(std::abs(l));
        }
        for (double s : sd.singular_values) {
            if (s < 1e-12) ok = false;
            log_sv += std::log(s);
        }
        if (ok) CHECK(log_eig == doctest::Approx(log_sv).epsilon(1e-6));
    }
}

TEST_CASE("permutation similarity leaves the spectrum unchanged") {
    const auto spec = EnsembleSpec::make(10, AtomPairSpec::gaussian_real(0.5), 77);
    const ComplexMatrix a = generate(spec);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(10);
    perm.setIdentity();
    RandomStream rng(3);
    for (int i = 9; i > 0; --i)
        std::swap(perm.indices()(i), perm.indices()(rng.index(static_cast<std::size_t>(i + 1))));
    const ComplexMatrix b = perm * a * perm.inverse();
    auto ea = eigenvalues(a);
    auto eb = eigenvalues(b);
    auto key = [](const Complex& x, const Complex& y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    };
    std::sort(ea.begin(), ea.end(), key);
    std::sort(eb.begin(), eb.end(), key);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(ea[i] - eb[i]) < 1e-8);
}

TEST_CASE("non-finite input is rejected") {
    ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
    bad(0, 0) = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(eigenvalues(bad), std::invalid_argument);
    CHECK_THROWS_AS(singular_values(bad), std::invalid_argument);
}
