"""Hydrogen-like bound states with nuclear charge rescaled to 1.

Orbitals are real: the angular part uses real orthonormal spherical
harmonics without the Condon-Shortley phase, so that ``Y_{1,-1}, Y_{1,0},
Y_{1,1}`` are proportional to ``y, z, x``.  Laguerre polynomials follow the
convention ``L_0^a = 1, L_1^a(rho) = 1 + a - rho``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDegree, InvalidOrbital, InvalidOrder, InvalidQuantumNumber


@dataclass(frozen=True)
class Orbital:
    n: int
    ell: int
    k: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.ell <= self.n - 1 or not -self.ell <= self.k <= self.ell:
            raise InvalidQuantumNumber(f"invalid orbital (n, ell, k) = ({self.n}, {self.ell}, {self.k})")


# the four n = 2 states in the channel order used by the helium matrices
N2_ORBITALS = (Orbital(2, 0, 0), Orbital(2, 1, -1), Orbital(2, 1, 0), Orbital(2, 1, 1))
GROUND = Orbital(1, 0, 0)


def energy(n: int) -> float:
    """``e_n = -1/(2 n^2)``."""
    if n < 1:
        raise InvalidQuantumNumber(f"n must be >= 1, got {n}")
    return -1.0 / (2.0 * n * n)


def laguerre(q: int, alpha: float, rho):
    """Generalized Laguerre polynomial ``L_q^alpha(rho)`` by the three-term recurrence."""
    if q < 0:
        raise InvalidDegree(f"degree must be >= 0, got {q}")
    rho = np.asarray(rho, dtype=float)
    prev = np.ones_like(rho)
    if q == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - rho
    for j in range(1, q):
        prev, cur = cur, ((2 * j + 1 + alpha - rho) * cur - (j + alpha) * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


def _legendre_bar(ell: int, m: int, ct, st):
    """Fully normalized associated Legendre function (unit norm over the sphere for m = 0)."""
    pmm = np.full_like(ct, 1.0 / math.sqrt(4.0 * math.pi))
    for j in range(1, m + 1):
        pmm = math.sqrt((2 * j + 1) / (2 * j)) * st * pmm
    if ell == m:
        return pmm
    p1 = math.sqrt(2 * m + 3) * ct * pmm
    p0 = pmm
    for j in range(m + 2, ell + 1):
        a = math.sqrt((4 * j * j - 1) / (j * j - m * m))
        b = math.sqrt(((j - 1) ** 2 - m * m) / (4 * (j - 1) ** 2 - 1))
        p0, p1 = p1, a * (ct * p1 - b * p0)
    return p1


def real_sph_harm(ell: int, k: int, theta, phi):
    """Real orthonormal spherical harmonic; ``theta`` is the polar angle."""
    if ell < 0:
        raise InvalidDegree(f"degree must be >= 0, got {ell}")
    if abs(k) > ell:
        raise InvalidOrder(f"|k| must be <= ell, got ell={ell}, k={k}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    p = _legendre_bar(ell, abs(k), np.cos(theta), np.sin(theta))
    if k > 0:
        p = math.sqrt(2.0) * p * np.cos(k * phi)
    elif k < 0:
        p = math.sqrt(2.0) * p * np.sin(-k * phi)
    else:
        p = p * np.ones_like(phi)
    return p if p.ndim else float(p)


def real_sph_harm_xyz(ell: int, k: int, s):
    """Same as :func:`real_sph_harm` on unit vectors ``s`` of shape (..., 3)."""
    s = np.asarray(s, dtype=float)
    theta = np.arccos(np.clip(s[..., 2], -1.0, 1.0))
    phi = np.arctan2(s[..., 1], s[..., 0])
    return real_sph_harm(ell, k, theta, phi)


def radial(n: int, ell: int, r):
    """Normalized radial factor ``R_{n ell}(r)`` with z = 1 (so that ``int R^2 r^2 dr = 1``)."""
    r = np.asarray(r, dtype=float)
    rho = 2.0 * r / n
    norm = math.sqrt((2.0 / n) ** 3 * math.factorial(n - ell - 1) / (2.0 * n * math.factorial(n + ell)))
    return norm * np.exp(-rho / 2.0) * rho ** ell * laguerre(n - ell - 1, 2 * ell + 1, rho)


def psi(orb: Orbital, x):
    """Evaluate the real orbital at points ``x`` of shape (3,) or (N, 3)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    rad = radial(orb.n, orb.ell, r)
    if orb.ell == 0:
        return rad / math.sqrt(4.0 * math.pi)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = x / r[..., None]
    s = np.where(r[..., None] > 0, s, np.array([0.0, 0.0, 1.0]))
    return rad * real_sph_harm_xyz(orb.ell, orb.k, s)


def pair_antisym(orb2: Orbital, x1, x2):
    """``(psi_1s(x1) psi_2(x2) - psi_2(x1) psi_1s(x2)) / sqrt(2)`` for an n = 2 orbital."""
    if orb2.n != 2:
        raise InvalidOrbital(f"pair functions need an n = 2 orbital, got n = {orb2.n}")
    a = psi(GROUND, x1) * psi(orb2, x2)
    b = psi(orb2, x1) * psi(GROUND, x2)
    return (a - b) / math.sqrt(2.0)
