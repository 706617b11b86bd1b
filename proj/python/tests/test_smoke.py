import cmath
import math

import numpy as np
import pytest

import elliptic_lab as el


def test_pair_spec_covariance():
    spec = el.AtomPairSpec("gaussian_real", rho=0.5)
    cov = np.asarray(spec.covariance())
    assert cov.shape == (4, 4)
    assert cov[0, 2] == pytest.approx(0.5)
    assert spec.moment(1, 0, 1, 0) == pytest.approx(0.5)


def test_generate_and_spectra():
    spec = el.EnsembleSpec(n=50, pair=el.AtomPairSpec("gaussian_real", rho=0.5), seed=7)
    m = np.asarray(el.generate(spec))
    assert m.shape == (50, 50)
    # Deterministic given the seed.
    m2 = np.asarray(el.generate(spec))
    assert np.array_equal(m, m2)

    eigs = el.eigenvalues(m / math.sqrt(50))
    assert len(eigs) == 50
    sv = el.singular_values(m)
    assert sv == sorted(sv, reverse=True)
    assert el.hs_norm(m) == pytest.approx(math.sqrt(sum(s * s for s in sv)), rel=1e-9)


def test_elliptic_law_metrics():
    law = el.EllipticLaw(0.5)
    assert law.contains(1.5 + 0j)
    assert not law.contains(1.6 + 0j)
    assert law.cdf(0.0, 1e9) == pytest.approx(0.5, abs=1e-8)

    spec = el.EnsembleSpec(n=300, pair=el.AtomPairSpec("gaussian_real", rho=0.5), seed=3)
    eigs = el.eigenvalues(np.asarray(el.generate(spec)) / math.sqrt(300))
    assert el.inside_fraction(eigs, law, 1.1) > 0.9
    assert el.discrepancy(eigs, law, 15) < 0.2


def test_stieltjes_solver():
    st = el.solve_stu_system(0.0, 0j, 2j)
    assert st.s == pytest.approx(1j * (math.sqrt(2.0) - 1.0), abs=1e-10)
    assert st.residual <= 1e-12

    grid = [k * 0.05 for k in range(-50, 51)]
    xs, dens = el.nu_z_density(0.0, 0j, grid)
    semicircle = [math.sqrt(max(0.0, 4 - x * x)) / (2 * math.pi) for x in xs]
    assert max(abs(a - b) for a, b in zip(dens, semicircle)) < 2e-2


def test_small_ball():
    gamma = el.small_ball_exact([1 + 0j] * 10, 0.5)
    assert gamma == pytest.approx(252.0 / 1024.0, abs=0)
    hat, lo, hi = el.small_ball_mc([1 + 0j] * 10, 0.5, trials=5000, seed=2)
    assert lo <= gamma <= hi or abs(hat - gamma) < 0.05


def test_cofactor_identity():
    m = np.array([[3, -2], [5, 7]], dtype=complex)
    lhs, rhs, defect, exact = el.cofactor_bilinear_identity(m)
    assert exact
    assert lhs == 31 + 0j
    assert rhs == 31 + 0j
    assert defect == 0.0


def test_lsv_tail_smoke():
    spec = el.EnsembleSpec(n=20, pair=el.AtomPairSpec("gaussian_real", rho=0.0), seed=5)
    rep = el.lsv_tail(spec, [1e-8, 1.0], 100)
    assert rep.failures == 0
    pts = rep.points
    assert pts[0][1] <= pts[1][1]


def test_levy_and_log_potential():
    assert el.levy_distance([0.0], [0.3]) == pytest.approx(0.3, abs=1e-9)
    assert el.log_potential([2.0, 0.5]) == pytest.approx(0.0, abs=1e-12)


def test_moment_matching():
    g = el.AtomPairSpec("gaussian_real", rho=0.5)
    d = el.AtomPairSpec("discrete_mix", rho=0.5)
    ok, defect = el.moments_match(g, d, 2)
    assert ok
    assert defect <= 1e-12
