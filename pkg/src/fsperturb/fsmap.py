"""Feshbach-Schur map for a finite symmetric perturbation problem ``H = H0 + W``.

All block operators are stored in the eigenbasis of ``H0``: the columns of
the ``H0`` eigenvector matrix belonging to the selected cluster span
``Ran P`` and the remaining columns span ``Ran P_perp``.  In that basis
``H_perp`` is the dense ``(n - m) x (n - m)`` block ``Hqq`` and the map

    F_P(H - lam) = Hpp - lam - Hpq (Hqq - lam)^{-1} Hqp

is an ``m x m`` symmetric matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import densela
from .densela import EigDecomp, OrthProjector
from .errors import (InvalidCertificate, InvalidProblem, LeftTrustRegion, NoConvergence,
                     NotPositiveDefinite, ResolventSingular)

RESOLVENT_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class PerturbationProblem:
    H0: np.ndarray
    W: np.ndarray
    lam0: float
    m: int
    gam0: float
    lam_star: float
    P: OrthProjector
    Pperp: OrthProjector
    h0_eig: EigDecomp
    cluster: np.ndarray  # indices of the cluster in h0_eig
    is_ground: bool  # lam0 is the lowest eigenvalue of H0
    # blocks of H = H0 + W and W in the (P, Pperp) basis
    Hpp: np.ndarray = field(repr=False)
    Hpq: np.ndarray = field(repr=False)
    Hqq: np.ndarray = field(repr=False)
    hqq_eig: EigDecomp = field(repr=False)
    Wpp: np.ndarray = field(repr=False)
    Wpq: np.ndarray = field(repr=False)
    Wqq: np.ndarray = field(repr=False)
    lam_p: np.ndarray = field(repr=False)  # H0 eigenvalues inside the cluster
    lam_q: np.ndarray = field(repr=False)  # H0 eigenvalues outside the cluster

    @property
    def n(self) -> int:
        return self.H0.shape[0]

    @property
    def H(self) -> np.ndarray:
        return self.H0 + self.W

    @cached_property
    def h_norm(self) -> float:
        return densela.op_norm(self.H)


def clusters(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group ascending eigenvalues whose consecutive gaps are at most ``tol``."""
    groups, start = [], 0
    for j in range(1, len(values) + 1):
        if j == len(values) or values[j] - values[j - 1] > tol:
            groups.append(np.arange(start, j))
            start = j
    return groups


def make_problem(H0, W, *, lam0_index: Optional[int] = None, lam0_value: Optional[float] = None,
                 cluster_tol: float = 1e-9) -> PerturbationProblem:
    """Assemble a problem around one eigenvalue cluster of ``H0``.

    ``lam0_index`` counts distinct eigenvalues of ``H0`` from 1 (ascending);
    ``lam0_value`` selects the cluster within ``cluster_tol * ||H0||`` of the
    value.  Exactly one selector must be given.
    """
    H0 = densela.as_sym(H0, "H0")
    W = densela.as_sym(W, "W")
    if H0.shape != W.shape:
        raise InvalidProblem(f"H0 is {H0.shape} but W is {W.shape}")
    if (lam0_index is None) == (lam0_value is None):
        raise InvalidProblem("give exactly one of lam0_index and lam0_value")

    eig = densela.sym_eig(H0)
    if eig.values[0] <= 0.0:
        raise NotPositiveDefinite(f"H0 must be positive definite (smallest eigenvalue {eig.values[0]:.6g})")
    norm0 = densela.op_norm(H0, eig)
    tol = cluster_tol * norm0
    groups = clusters(eig.values, tol)

    if lam0_index is not None:
        if not 1 <= lam0_index <= len(groups):
            raise InvalidProblem(f"lam0_index must be in 1..{len(groups)}, got {lam0_index}")
        sel = groups[lam0_index - 1]
    else:
        hits = [g for g in groups if np.all(np.abs(eig.values[g] - lam0_value) <= tol)]
        if not hits:
            raise InvalidProblem(f"{lam0_value!r} is not an eigenvalue of H0 within {tol:.3e}")
        sel = hits[0]
    if len(sel) == H0.shape[0]:
        raise InvalidProblem("H0 has a single eigenvalue cluster; the gap is undefined")

    rest = np.setdiff1d(np.arange(H0.shape[0]), sel)
    lam_p = eig.values[sel]
    lam_q = eig.values[rest]
    lam0 = float(np.mean(lam_p))
    gam0 = float(np.min(np.abs(lam_q - lam0)))
    basis_p = eig.vectors[:, sel]
    basis_q = eig.vectors[:, rest]

    Wr = eig.vectors.T @ W @ eig.vectors
    Wr = 0.5 * (Wr + Wr.T)
    Wpp = Wr[np.ix_(sel, sel)]
    Wpq = Wr[np.ix_(sel, rest)]
    Wqq = Wr[np.ix_(rest, rest)]
    Hpp = np.diag(lam_p) + Wpp
    Hqq = np.diag(lam_q) + Wqq
    return PerturbationProblem(
        H0=H0, W=W, lam0=lam0, m=len(sel), gam0=gam0, lam_star=lam0 + gam0,
        P=OrthProjector(basis_p), Pperp=OrthProjector(basis_q), h0_eig=eig, cluster=sel,
        is_ground=bool(sel[0] == 0),
        Hpp=Hpp, Hpq=Wpq, Hqq=Hqq, hqq_eig=densela.sym_eig(Hqq),
        Wpp=Wpp, Wpq=Wpq, Wqq=Wqq, lam_p=lam_p, lam_q=lam_q,
    )


def _resolvent_times(prob: PerturbationProblem, lam: float, rhs: np.ndarray, power: int = 1) -> np.ndarray:
    vals, vecs = prob.hqq_eig
    gaps = vals - lam
    dist = float(np.min(np.abs(gaps)))
    if dist <= RESOLVENT_RTOL * max(prob.h_norm, np.finfo(float).tiny):
        raise ResolventSingular(f"lambda = {lam!r} is {dist:.3e} from the spectrum of H_perp", dist)
    coeff = (vecs.T @ rhs) / gaps[:, None] ** power
    return vecs @ coeff


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def effective_interaction(prob: PerturbationProblem, lam: float) -> np.ndarray:
    """``U(lam) = -Hpq (Hqq - lam)^{-1} Hqp`` in the P-basis."""
    return -_sym(prob.Hpq @ _resolvent_times(prob, lam, prob.Hpq.T))


def effective_interaction_derivative(prob: PerturbationProblem, lam: float) -> np.ndarray:
    """``U'(lam) = -Hpq (Hqq - lam)^{-2} Hqp``."""
    return -_sym(prob.Hpq @ _resolvent_times(prob, lam, prob.Hpq.T, power=2))


def effective_hamiltonian(prob: PerturbationProblem, lam: float) -> np.ndarray:
    return prob.Hpp + effective_interaction(prob, lam)


def feshbach_map(prob: PerturbationProblem, lam: float) -> np.ndarray:
    return prob.Hpp - lam * np.eye(prob.m) + effective_interaction(prob, lam)


def branch_eigenvalues(prob: PerturbationProblem, lam: float) -> np.ndarray:
    return densela.sym_eig(effective_hamiltonian(prob, lam)).values


def q_operator_apply(prob: PerturbationProblem, lam: float, phi) -> np.ndarray:
    """Lift a P-basis vector to ``P phi - P_perp (H_perp - lam)^{-1} P_perp H P phi``."""
    phi = np.asarray(phi, dtype=float).reshape(prob.m)
    tail = _resolvent_times(prob, lam, (prob.Hpq.T @ phi)[:, None])[:, 0]
    return prob.P.basis @ phi - prob.Pperp.basis @ tail


@dataclass(frozen=True)
class BranchSolution:
    index: int
    lam: float
    iterations: int
    residual: float
    eigenvector: np.ndarray
    method: str  # "picard" or "bisection"


def _eigenvector(prob: PerturbationProblem, i: int, lam: float) -> np.ndarray:
    phi = densela.sym_eig(effective_hamiltonian(prob, lam)).vectors[:, i - 1]
    psi = q_operator_apply(prob, lam, phi)
    psi = psi / np.linalg.norm(psi)
    pivot = int(np.argmax(np.abs(psi)))
    return psi if psi[pivot] >= 0 else -psi


def trust_radius(prob: PerturbationProblem, params=None, cert=None, force: bool = False) -> float:
    from . import certify

    params = params or certify.CertifyParams()
    if force:
        return params.a * prob.gam0
    cert = cert or certify.check_conditions(prob, params)
    if not cert.valid:
        raise InvalidCertificate("perturbation conditions fail; pass force=True to iterate anyway")
    return cert.r * prob.gam0


def solve_fixed_point(prob: PerturbationProblem, i: int, *, params=None, cert=None, force: bool = False,
                      tol: Optional[float] = None, max_iter: int = 200) -> BranchSolution:
    """Solve ``nu_i(lam) = lam`` by Picard iteration started at ``lam0``.

    Iterates must stay in the real trust interval ``|lam - lam0| <= r gam0``
    (radius ``a gam0`` when ``force`` skips certification).  If Picard does
    not converge in ``max_iter`` steps, bisection on ``nu_i(lam) - lam`` over
    the same interval is tried before giving up.
    """
    if not 1 <= i <= prob.m:
        raise InvalidProblem(f"branch index must be in 1..{prob.m}, got {i}")
    if tol is None:
        tol = 1e-12 * max(1.0, abs(prob.lam0))
    radius = trust_radius(prob, params, cert, force)
    # round-off slack so that the boundary case r = 0 still admits lam0
    slack = radius * (1.0 + 1e-9) + 4.0 * np.finfo(float).eps * max(1.0, abs(prob.lam0))

    lam = prob.lam0
    for it in range(1, max_iter + 1):
        nu = float(branch_eigenvalues(prob, lam)[i - 1])
        res = abs(nu - lam)
        if res <= tol:
            # the last image is closer to the fixed point by the contraction factor
            if res > 0.0:
                res_nu = abs(float(branch_eigenvalues(prob, nu)[i - 1]) - nu)
                if res_nu <= res:
                    lam, res = nu, res_nu
            return BranchSolution(i, lam, it, res, _eigenvector(prob, i, lam), "picard")
        lam = nu
        if abs(lam - prob.lam0) > slack:
            raise LeftTrustRegion(f"iterate {lam!r} left |lam - lam0| <= {radius:.6g} at step {it}")

    lo, hi = prob.lam0 - radius, prob.lam0 + radius

    def g(x):
        return float(branch_eigenvalues(prob, x)[i - 1]) - x

    glo, ghi = g(lo), g(hi)
    if glo < 0.0 or ghi > 0.0:
        raise NoConvergence(f"no convergence after {max_iter} Picard steps and no sign change for bisection")
    for it in range(max_iter):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm) <= tol:
            return BranchSolution(i, mid, max_iter + it + 1, abs(gm), _eigenvector(prob, i, mid), "bisection")
        if gm > 0.0:
            lo = mid
        else:
            hi = mid
    raise NoConvergence(f"branch {i}: bisection did not reach tolerance {tol:.3e}")


def solve_all(prob: PerturbationProblem, **kwargs) -> list[BranchSolution]:
    return [solve_fixed_point(prob, i, **kwargs) for i in range(1, prob.m + 1)]
