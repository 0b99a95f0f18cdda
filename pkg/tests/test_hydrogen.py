import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import genlaguerre, sph_harm_y

from fsperturb import helium, hydrogen, quadrature
from fsperturb.errors import InvalidDegree, InvalidOrbital, InvalidOrder, InvalidQuantumNumber
from fsperturb.hydrogen import GROUND, N2_ORBITALS, Orbital

ALL5 = (GROUND,) + N2_ORBITALS


@pytest.fixture(scope="module")
def grid5():
    return quadrature.build_grid(quadrature.indexed_spec(5))


def test_energy():
    assert hydrogen.energy(1) == -0.5
    assert hydrogen.energy(2) == -0.125
    assert hydrogen.energy(3) == pytest.approx(-1 / 18, abs=1e-16)
    with pytest.raises(InvalidQuantumNumber):
        hydrogen.energy(0)


@pytest.mark.parametrize("args", [(0, 0, 0), (1, 1, 0), (2, 1, 2), (2, 1, -2), (3, -1, 0)])
def test_orbital_validation(args):
    with pytest.raises(InvalidQuantumNumber):
        Orbital(*args)


def test_laguerre_pins():
    assert hydrogen.laguerre(0, 1, 3.7) == 1.0
    assert hydrogen.laguerre(1, 1, 2.0) == 0.0
    assert hydrogen.laguerre(2, 1, 1.0) == pytest.approx(0.5, abs=1e-15)
    rho = np.linspace(0, 5, 11)
    # L_1^1(rho) = 2 - rho, without any (n + l)! factor
    np.testing.assert_allclose(hydrogen.laguerre(1, 1, rho), 2 - rho, atol=1e-15)
    with pytest.raises(InvalidDegree):
        hydrogen.laguerre(-1, 0, 1.0)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 8), st.integers(0, 6), st.floats(0, 30))
def test_laguerre_matches_scipy(q, alpha, rho):
    ref = genlaguerre(q, alpha)(rho)
    assert hydrogen.laguerre(q, alpha, rho) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_real_harmonic_values():
    assert hydrogen.real_sph_harm(0, 0, 0.3, 1.2) == pytest.approx(1 / math.sqrt(4 * math.pi), abs=1e-15)
    assert hydrogen.real_sph_harm(1, 0, 0.0, 0.0) == pytest.approx(math.sqrt(3 / (4 * math.pi)), abs=1e-15)
    with pytest.raises(InvalidOrder):
        hydrogen.real_sph_harm(1, 2, 0.0, 0.0)
    with pytest.raises(InvalidDegree):
        hydrogen.real_sph_harm(-1, 0, 0.0, 0.0)


def test_p_harmonics_are_yzx():
    s = np.random.default_rng(0).normal(size=(20, 3))
    s /= np.linalg.norm(s, axis=1)[:, None]
    c = math.sqrt(3 / (4 * math.pi))
    for k, col in ((-1, 1), (0, 2), (1, 0)):
        np.testing.assert_allclose(hydrogen.real_sph_harm_xyz(1, k, s), c * s[:, col], atol=1e-14)


@pytest.mark.parametrize("ell", range(5))
def test_real_harmonics_match_scipy(ell):
    rng = np.random.default_rng(ell)
    theta = rng.uniform(0, np.pi, 30)
    phi = rng.uniform(0, 2 * np.pi, 30)
    for k in range(-ell, ell + 1):
        y = sph_harm_y(ell, abs(k), theta, phi)  # includes the Condon-Shortley phase
        sign = (-1) ** abs(k)
        if k > 0:
            ref = sign * math.sqrt(2) * y.real
        elif k < 0:
            ref = sign * math.sqrt(2) * y.imag
        else:
            ref = y.real
        np.testing.assert_allclose(hydrogen.real_sph_harm(ell, k, theta, phi), ref, atol=1e-12)


def test_harmonic_gram_on_exact_rule():
    rule = quadrature.product_rule(4)  # exact to degree 7 >= 2 * 3
    basis = [(l, k) for l in range(4) for k in range(-l, l + 1)]
    vals = np.array([hydrogen.real_sph_harm_xyz(l, k, rule.points) for l, k in basis])
    gram = (vals * rule.weights) @ vals.T
    assert np.abs(gram - np.eye(len(basis))).max() <= 1e-10


def test_psi_values():
    assert hydrogen.psi(GROUND, [0.0, 0.0, 0.0]) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-15)
    assert hydrogen.psi(GROUND, [1.0, 0.0, 0.0]) == pytest.approx(math.exp(-1) / math.sqrt(math.pi), abs=1e-15)
    assert hydrogen.psi(GROUND, [0.0, 0.0, 1.0]) == pytest.approx(0.2075537, abs=1e-7)
    # p orbitals vanish at the nucleus
    assert hydrogen.psi(Orbital(2, 1, 0), np.zeros(3)) == 0.0


def test_psi_matches_closed_forms():
    """Generic Laguerre/harmonic route against the hand-written orbitals used in the kernel sums."""
    x = np.random.default_rng(5).normal(size=(200, 3)) * 3
    p1, p2 = helium.orbital_stack(x)
    np.testing.assert_allclose(hydrogen.psi(GROUND, x), p1, rtol=1e-13, atol=1e-16)
    for j, orb in enumerate(N2_ORBITALS):
        np.testing.assert_allclose(hydrogen.psi(orb, x), p2[j], rtol=1e-12, atol=1e-16)


def test_radial_closed_forms():
    r = np.linspace(0.01, 20, 50)
    np.testing.assert_allclose(hydrogen.radial(1, 0, r), 2 * np.exp(-r), rtol=1e-14)
    np.testing.assert_allclose(hydrogen.radial(2, 0, r), (2 - r) * np.exp(-r / 2) / (2 * math.sqrt(2)),
                               rtol=1e-12, atol=1e-16)
    np.testing.assert_allclose(hydrogen.radial(2, 1, r), r * np.exp(-r / 2) / (2 * math.sqrt(6)), rtol=1e-13)


def test_gram_matrix_index5(grid5):
    vals = np.array([hydrogen.psi(o, grid5.points) for o in ALL5])
    gram = np.array([[quadrature.integrate(a * b, grid5) for b in vals] for a in vals])
    assert np.abs(gram - np.eye(5)).max() <= 1e-4


@pytest.mark.xfail(strict=True, reason="the radial grid starts at 1/R_max and misses about 5e-5 of the 1s mass")
def test_ground_normalization_to_1e6(grid5):
    assert abs(quadrature.integrate(lambda x: hydrogen.psi(GROUND, x) ** 2, grid5) - 1) <= 1e-6


# analytic radial derivatives of R_{n l}
_DR = {
    (1, 0): lambda r: -2 * np.exp(-r),
    (2, 0): lambda r: (r / 2 - 2) * np.exp(-r / 2) / (2 * math.sqrt(2)),
    (2, 1): lambda r: (1 - r / 2) * np.exp(-r / 2) / (2 * math.sqrt(6)),
}


@pytest.fixture(scope="module")
def energy_grid():
    # the table grids stop at r = 1/R_max, which drops about 2/R_max^2 of the 1s potential energy
    return quadrature.build_grid(quadrature.GridSpec(80, 60.0, quadrature.product_rule(2)))


@pytest.mark.parametrize("orb", ALL5, ids=str)
def test_energy_expectation(orb, energy_grid):
    grid5 = energy_grid
    r = grid5.norms
    rad = hydrogen.radial(orb.n, orb.ell, r)
    ang = hydrogen.real_sph_harm_xyz(orb.ell, orb.k, grid5.points / r[:, None]) ** 2
    dr = _DR[(orb.n, orb.ell)](r)
    # |grad psi|^2 averaged over angles: R'^2 Y^2 + l(l+1) R^2 / r^2 / (4 pi)
    kin = 0.5 * (dr ** 2 * ang + orb.ell * (orb.ell + 1) * rad ** 2 / r ** 2 / (4 * math.pi))
    pot = -(rad ** 2) * ang / r
    e = quadrature.integrate(kin + pot, grid5)
    assert e == pytest.approx(hydrogen.energy(orb.n), abs=1e-3)


def test_pair_antisym():
    rng = np.random.default_rng(2)
    x1, x2 = rng.normal(size=(2, 30, 3))
    for orb in N2_ORBITALS:
        a = hydrogen.pair_antisym(orb, x1, x2)
        b = hydrogen.pair_antisym(orb, x2, x1)
        assert np.array_equal(a, -b)
        assert np.all(hydrogen.pair_antisym(orb, x1, x1) == 0.0)
    with pytest.raises(InvalidOrbital):
        hydrogen.pair_antisym(GROUND, x1, x2)


def test_pair_functions_orthonormal(grid5):
    # over R^6 the pair Gram factorizes into one-electron overlaps
    vals = np.array([hydrogen.psi(o, grid5.points) for o in ALL5])
    s = np.array([[quadrature.integrate(a * b, grid5) for b in vals] for a in vals])
    gram = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            a, b = i + 1, j + 1
            gram[i, j] = s[0, 0] * s[a, b] - s[0, b] * s[a, 0]
    assert np.abs(gram - np.eye(4)).max() <= 1e-3
