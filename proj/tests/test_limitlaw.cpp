#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "elliptic_lab/limitlaw.hpp"
#include "elliptic_lab/spectra.hpp"

using namespace ell;

namespace {

// Scalar-equation oracle for rho = 0: f(s) = s^2 + alpha s + 1 - |z|^2 s/(alpha+s),
// solved by Newton continuation down the same vertical path but in one variable.
Complex reduced_root_oracle(double abs_z_sq, Complex alpha) {
    auto f = [&](Complex s, Complex a) {
        return s * s + a * s + 1.0 - abs_z_sq * s / (a + s);
    };
    auto fp = [&](Complex s, Complex a) {
        return 2.0 * s + a - abs_z_sq * (a / ((a + s) * (a + s)));
    };
    double im = 100.0;
    Complex s = -1.0 / Complex(alpha.real(), im);
    while (true) {
        const Complex a(alpha.real(), im);
        for (int it = 0; it < 80; ++it) {
            const Complex step = f(s, a) / fp(s, a);
            s -= step;
            if (std::abs(step) < 1e-15) break;
        }
        if (im <= alpha.imag()) break;
        im = std::max(alpha.imag(), 0.8 * im);
    }
    REQUIRE(std::abs(f(s, alpha)) < 1e-11);
    REQUIRE(s.imag() > 0.0);
    return s;
}

EmpiricalMeasure1D measure(std::vector<double> pts) {
    std::sort(pts.begin(), pts.end());
    return {std::move(pts)};
}

}  // namespace

TEST_CASE("log potential closed cases") {
    CHECK(log_potential(measure({1, 1, 1})) == doctest::Approx(0.0));
    CHECK(log_potential(measure({2, 0.5})) == doctest::Approx(0.0).epsilon(1e-14));
    // A = 0 shifted by z: all sigmas equal |z|.
    ComplexMatrix zero = ComplexMatrix::Zero(5, 5);
    const auto nu = scaled_measures(zero, Complex(3, 0)).second;
    CHECK(log_potential(nu) == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(log_potential(measure({0.0, 1.0})), std::runtime_error);
}

TEST_CASE("uniform integrability diagnostics") {
    const auto one = uniform_integrability_diag(measure({1, 1}), 0.5);
    CHECK(one.moment_p == doctest::Approx(1.0));
    CHECK(one.moment_neg_p == doctest::Approx(1.0));
    const auto two = uniform_integrability_diag(measure({0.25, 4.0}), 0.5);
    CHECK(two.moment_p == doctest::Approx(1.25));
    CHECK(two.moment_neg_p == doctest::Approx(1.25));
    CHECK_THROWS_AS(uniform_integrability_diag(measure({0.0, 1.0}), 0.5), std::runtime_error);
}

TEST_CASE("uniform integrability on a generated ensemble") {
    const auto spec = EnsembleSpec::make(500, AtomPairSpec::gaussian_real(0.5), 808);
    const auto nu = scaled_measures(generate(spec), Complex(0.3, 0.2)).second;
    const auto diag = uniform_integrability_diag(nu, 0.2);
    CHECK(diag.moment_p < 10.0);
    CHECK(diag.moment_neg_p < 10.0);
}

TEST_CASE("small sigma profile") {
    const int n = 100;
    // Linear ramp sigma_{n-i} = i/n, i.e. descending {1, (n-1)/n, ..., 1/n}.
    std::vector<double> ramp;
    for (int i = n; i >= 1; --i) ramp.push_back(static_cast<double>(i) / n);
    CHECK(small_sigma_profile(ramp, 0.5, 0.4).empty());

    std::vector<double> flat(n, 1.0);
    CHECK(small_sigma_profile(flat, 0.5, 0.9).empty());

    // A crushed tail triggers violations.
    std::vector<double> crushed = ramp;
    for (int k = 0; k < 40; ++k) crushed[static_cast<std::size_t>(n - 1 - k)] = 1e-9;
    CHECK(!small_sigma_profile(crushed, 0.5, 0.4).empty());
}

TEST_CASE("hermitized block structure and symmetry") {
    const auto spec = EnsembleSpec::make(12, AtomPairSpec::gaussian_complex(0.6, 0.2), 4);
    const ComplexMatrix x = generate(spec);
    const Complex z(0.4, -0.3);
    const ComplexMatrix v = hermitized_block(x, z);
    CHECK((v - v.adjoint()).norm() < 1e-12 * v.norm());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(v);
    const auto& ev = es.eigenvalues();
    for (Eigen::Index k = 0; k < 12; ++k)
        CHECK(ev(k) == doctest::Approx(-ev(2 * 12 - 1 - k)).epsilon(1e-8));
}

TEST_CASE("empirical stu closed forms") {
    // X/sqrt(n) = zI exactly: V(z) = 0, R = -I/alpha.
    const int n = 6;
    const Complex z(0.7, 0.1), alpha(0.3, 1.2);
    const ComplexMatrix x = std::sqrt(static_cast<double>(n)) * z *
                            ComplexMatrix::Identity(n, n);
    const auto stu = empirical_stu(x, z, alpha);
    CHECK(std::abs(stu.s - (-1.0 / alpha)) < 1e-12);
    CHECK(std::abs(stu.t) < 1e-12);
    CHECK(std::abs(stu.u) < 1e-12);

    // n=1, x = z + sqrt(n) w: eigenvalues of V(z) are +-|w|.
    const Complex w(0.8, -0.5);
    ComplexMatrix x1(1, 1);
    x1(0, 0) = z + w;
    const auto stu1 = empirical_stu(x1, z, alpha);
    const double aw = std::abs(w);
    const Complex expect = 0.5 * (1.0 / (aw - alpha) + 1.0 / (-aw - alpha));
    CHECK(std::abs(stu1.s - expect) < 1e-12);
}

TEST_CASE("resolvent trace has positive imaginary part") {
    const auto spec = EnsembleSpec::make(30, AtomPairSpec::gaussian_real(0.4), 9);
    const ComplexMatrix x = generate(spec);
    for (double im : {0.1, 0.5, 2.0}) {
        const auto stu = empirical_stu(x, Complex(0.3, 0.2), Complex(0.0, im));
        CHECK(stu.s.imag() > 0.0);
    }
    CHECK_THROWS_AS(empirical_stu(x, Complex(0, 0), Complex(1.0, -0.5)), std::invalid_argument);
}

TEST_CASE("solver: semicircle point value") {
    // rho=0, z=0, alpha=2i: s^2 + alpha s + 1 = 0, root i(sqrt(2)-1).
    const auto st = solve_stu_system(0.0, Complex(0, 0), Complex(0, 2));
    CHECK(std::abs(st.s - Complex(0, std::sqrt(2.0) - 1.0)) < 1e-10);
    CHECK(std::abs(st.t) < 1e-10);
    CHECK(std::abs(st.u) < 1e-10);
    CHECK(st.residual <= 1e-12);
}

TEST_CASE("solver: resolvent expansion at huge alpha") {
    for (double rho : {0.0, 0.5, -0.7}) {
        const Complex z(1.2, -0.4), alpha(3.0, 1e6);
        const auto st = solve_stu_system(rho, z, alpha);
        CHECK(std::abs(st.s - (-1.0 / alpha)) < 1e-5 * std::abs(1.0 / alpha));
        CHECK(std::abs(st.t) < 1e-5);
        CHECK(std::abs(st.u) < 1e-5);
    }
}

TEST_CASE("solver matches the reduced scalar equation at rho=0") {
    const Complex z(1.0, 0.0), alpha(0.0, 0.5);
    const auto st = solve_stu_system(0.0, z, alpha);
    const Complex oracle = reduced_root_oracle(std::norm(z), alpha);
    CHECK(std::abs(st.s - oracle) < 1e-10);
    // And the eliminated variables satisfy their defining relations.
    CHECK(std::abs(st.t - (-std::conj(z) * st.s / (alpha + st.s))) < 1e-10);
    CHECK(std::abs(st.u - (-z * st.s / (alpha + st.s))) < 1e-10);
}

TEST_CASE("solver residual and plug-back defect stay at 1e-12 across a sweep") {
    for (double rho : {0.0, 0.5, -0.5, 0.9}) {
        for (const Complex z : {Complex(0, 0), Complex(1, 0.5), Complex(-2, 1)}) {
            for (const Complex alpha : {Complex(0, 2), Complex(0.4, 0.05), Complex(-1, 1)}) {
                const auto st = solve_stu_system(rho, z, alpha);
                CHECK(st.residual <= 1e-12);
                CHECK(st.s.imag() > 0.0);
                // Plug back into the noiseless system.
                const Complex zb = std::conj(z);
                const Complex f1 = st.s * st.s + alpha * st.s + 1.0 +
                                   0.5 * rho * (st.t * st.t + st.u * st.u) + 0.5 * z * st.t +
                                   0.5 * zb * st.u;
                const Complex f2 = (alpha + st.s) * st.t + rho * st.s * st.u + zb * st.s;
                const Complex f3 = (alpha + st.s) * st.u + rho * st.s * st.t + z * st.s;
                CHECK(std::abs(f1) <= 1e-12);
                CHECK(std::abs(f2) <= 1e-12);
                CHECK(std::abs(f3) <= 1e-12);
            }
        }
    }
    CHECK_THROWS_AS(solve_stu_system(0.0, Complex(0, 0), Complex(0, -1)), std::invalid_argument);
    CHECK_THROWS_AS(solve_stu_system(1.5, Complex(0, 0), Complex(0, 1)), std::invalid_argument);
}

TEST_CASE("empirical s_n approaches the solver value") {
    const auto spec = EnsembleSpec::make(500, AtomPairSpec::gaussian_real(0.0), 2024);
    const ComplexMatrix x = generate(spec);
    const auto stu = empirical_stu(x, Complex(0, 0), Complex(0, 2));
    CHECK(std::abs(stu.s - Complex(0, std::sqrt(2.0) - 1.0)) < 0.1);
}

TEST_CASE("nu_z density: semicircle recovery at rho=0, z=0") {
    std::vector<double> grid;
    for (int k = -250; k <= 250; ++k) grid.push_back(k * 0.01);
    const NuZ nu = nu_z_density(0.0, Complex(0, 0), grid, 1e-3);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = grid[k];
        const double semi = (std::abs(x) <= 2.0)
                                ? std::sqrt(4.0 - x * x) / (2.0 * M_PI)
                                : 0.0;
        worst = std::max(worst, std::abs(nu.density[k] - semi));
    }
    CHECK(worst < 2e-2);
    // Even in x by construction.
    for (std::size_t k = 0; k < grid.size() / 2; ++k)
        CHECK(nu.density[k] == nu.density[grid.size() - 1 - k]);
}

TEST_CASE("nu_z density integrates to one") {
    for (double rho : {0.0, 0.5, -0.5}) {
        for (const Complex z : {Complex(0, 0), Complex(1, 1), Complex(3, 0)}) {
            const double hi = std::abs(z) + 3.0;
            std::vector<double> grid;
            for (double x = -hi; x <= hi + 1e-9; x += 0.01) grid.push_back(x);
            const NuZ nu = nu_z_density(rho, z, grid, 1e-3);
            double mass = 0.0;
            for (double dens : nu.density) mass += dens * 0.01;
            CHECK(std::abs(mass - 1.0) < 1e-3);
        }
    }
}

TEST_CASE("nu_z mass concentrates near |z| for large z") {
    std::vector<double> grid;
    for (double x = 0.0; x <= 13.0 + 1e-9; x += 0.02) grid.push_back(x);
    const NuZ nu = nu_z_density(0.0, Complex(10, 0), grid, 1e-3);
    std::size_t peak = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (nu.density[k] > nu.density[peak]) peak = k;
    CHECK(std::abs(grid[peak] - 10.0) < 0.1);
}

TEST_CASE("potential match: empirical-only mode and the disk exterior value") {
    ComplexMatrix zero = ComplexMatrix::Zero(16, 16);
    const auto pm0 = potential_match(zero, std::nullopt, Complex(2, 0));
    CHECK(pm0.empirical_only);
    CHECK(pm0.u_emp == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

    // Circular-law exterior potential at z=2 is -log 2.
    const auto spec = EnsembleSpec::make(800, AtomPairSpec::gaussian_real(0.0), 31);
    const ComplexMatrix x = generate(spec);
    const auto pm = potential_match(x, 0.0, Complex(2, 0));
    CHECK(std::abs(pm.u_emp + std::log(2.0)) < 0.05);
    CHECK(pm.gap < 0.05);
}

TEST_CASE("potential match at rho=0.5, z=3") {
    const auto spec = EnsembleSpec::make(800, AtomPairSpec::gaussian_real(0.5), 77);
    const ComplexMatrix x = generate(spec);
    const auto pm = potential_match(x, 0.5, Complex(3, 0));
    CHECK(pm.gap < 0.05);
}

TEST_CASE("levy distance") {
    CHECK(levy_distance(measure({0.1, 0.5, 0.9}), measure({0.1, 0.5, 0.9})) ==
          doctest::Approx(0.0));
    // Two-sided sandwich at eps = 0.3 exactly.
    CHECK(levy_distance(measure({0.0}), measure({0.3})) == doctest::Approx(0.3).epsilon(1e-9));
    // Empirical uniforms against the exact CDF.
    RandomStream rng(55);
    std::vector<double> sample;
    for (int k = 0; k < 1000; ++k) sample.push_back(rng.uniform());
    const double d = levy_distance(measure(sample),
                                   [](double x) { return std::clamp(x, 0.0, 1.0); }, -0.5, 1.5);
    CHECK(d < 0.05);
}

TEST_CASE("variance probe basics") {
    auto spec = EnsembleSpec::make(40, AtomPairSpec::gaussian_real(0.5), 3);
    const auto probe = variance_scaling_probe(spec, Complex(0, 0), Complex(0, 1), 100, 2);
    CHECK(probe.var_n >= 0.0);
    CHECK(probe.var_2n >= 0.0);
    CHECK(probe.ratio > 0.0);
}

TEST_CASE("moment matching") {
    const auto g = AtomPairSpec::gaussian_real(0.5);
    const auto d = AtomPairSpec::discrete_mix(0.5);
    const auto rep = moments_match(g, d, 2);
    CHECK(rep.match);
    CHECK(rep.max_defect <= 1e-12);

    CHECK(moments_match(g, g, 4).match);
    CHECK(moments_match(d, d, 6).match);

    const auto mismatch = moments_match(g, AtomPairSpec::gaussian_real(0.6), 2);
    CHECK(!mismatch.match);
    CHECK(mismatch.max_defect == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(mismatch.worst_i == 1);
    CHECK(mismatch.worst_l == 1);
}

TEST_CASE("replacement property: matched ensembles drift together") {
    // Order-2-matched atom laws give s_n values that converge to each other.
    const Complex z(0.3, 0.2), alpha(0.0, 1.0);
    auto mean_abs_diff = [&](int n, std::size_t trials) {
        double acc = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto sg = EnsembleSpec::make(
                n, AtomPairSpec::gaussian_real(0.5), 9000 + t);
            const auto sd = EnsembleSpec::make(
                n, AtomPairSpec::discrete_mix(0.5), 9100 + t);
            const auto a = empirical_stu(generate(sg), z, alpha);
            const auto b = empirical_stu(generate(sd), z, alpha);
            acc += std::abs(a.s - b.s);
        }
        return acc / static_cast<double>(trials);
    };
    const double d100 = mean_abs_diff(100, 6);
    const double d400 = mean_abs_diff(400, 6);
    CHECK(d400 < d100);
    CHECK(d400 < 0.05);
}
