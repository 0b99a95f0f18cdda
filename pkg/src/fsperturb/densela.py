"""Dense real-symmetric linear algebra.

Everything downstream (Feshbach-Schur map, certificates, helium pair
matrices) runs on the handful of routines here.  Matrices are plain
``numpy`` arrays; :func:`as_sym` is the gatekeeper that validates and
symmetrizes them.

The eigensolver is a cyclic Jacobi method with round-robin (Brent-Luk)
ordering: each step applies ``n // 2`` disjoint rotations at once, so a
sweep is ``n - 1`` vectorized steps.  It is deterministic for a fixed input.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidMatrix, NoConvergence, NotPositiveDefinite, SingularShift

SYM_RTOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
DENSE_ROUND_MAX = 64  # above this, rotate rows and columns in place instead of forming J


class EigDecomp(NamedTuple):
    values: np.ndarray  # ascending
    vectors: np.ndarray  # orthonormal columns


def as_sym(a, name: str = "matrix") -> np.ndarray:
    """Validate a real symmetric matrix and return an exactly symmetric copy."""
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidMatrix(f"{name}: expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix(f"{name}: non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYM_RTOL * scale:
        raise InvalidMatrix(f"{name}: not symmetric (max |a_ij - a_ji| = {asym:.3e})")
    return 0.5 * (a + a.T)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for one sweep: every (p, q) with p < q appears exactly once."""
    players = list(range(n + (n % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        p, q = [], []
        for k in range(size // 2):
            i, j = players[k], players[size - 1 - k]
            if i < n and j < n:
                p.append(min(i, j))
                q.append(max(i, j))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def sym_eig(a, *, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigDecomp:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Iterates sweeps until the off-diagonal Frobenius norm drops to
    ``tol * ||A||_F``.  Eigenvalues are returned ascending, with the
    eigenvectors permuted accordingly.
    """
    a = as_sym(a)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return EigDecomp(a.diagonal().copy(), v)

    fro = np.linalg.norm(a)
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= tol * fro:
            break
        for p, q in rounds:
            apq = a[p, q]
            app = a[p, p]
            aqq = a[q, q]
            # tiny couplings give t = 0 (no rotation) rather than overflow
            active = np.abs(apq) > 1e-300 * np.maximum(np.abs(app - aqq), 1.0)
            safe = np.where(active, 2.0 * apq, 1.0)
            theta = np.where(active, (aqq - app) / safe, 0.0)
            sgn = np.where(theta >= 0.0, 1.0, -1.0)
            t = np.where(active, sgn / (np.abs(theta) + np.hypot(1.0, theta)), 0.0)
            c = 1.0 / np.hypot(1.0, t)
            s = t * c

            if n <= DENSE_ROUND_MAX:
                # the rotations of a round are disjoint, so they form one orthogonal J
                j = np.eye(n)
                j[p, p] = c
                j[q, q] = c
                j[p, q] = s
                j[q, p] = -s
                a = j.T @ a @ j
                v = v @ j
            else:
                cols_p = a[:, p].copy()
                cols_q = a[:, q]
                a[:, p] = c * cols_p - s * cols_q
                a[:, q] = s * cols_p + c * cols_q
                rows_p = a[p, :].copy()
                rows_q = a[q, :]
                a[p, :] = c[:, None] * rows_p - s[:, None] * rows_q
                a[q, :] = s[:, None] * rows_p + c[:, None] * rows_q
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
            a[p, p] = app - t * apq
            a[q, q] = aqq + t * apq
            a[p, q] = 0.0
            a[q, p] = 0.0
    else:
        raise NoConvergence(f"Jacobi eigensolver: no convergence within {max_sweeps} sweeps")

    values = a.diagonal().copy()
    order = np.argsort(values, kind="stable")
    return EigDecomp(values[order], v[:, order])


def op_norm(a, eig: EigDecomp | None = None) -> float:
    """Operator 2-norm of a symmetric matrix, ``max |lambda_i|``."""
    if eig is None:
        eig = sym_eig(a)
    return float(np.max(np.abs(eig.values)))


def spectral_apply(a, f: Callable[[np.ndarray], np.ndarray], *, positive: bool = False,
                   eig: EigDecomp | None = None) -> np.ndarray:
    """Return ``Q f(Lambda) Q^T``.

    With ``positive=True`` every eigenvalue must be strictly positive, which
    is what singular functions such as ``x**-0.5`` need.
    """
    if eig is None:
        eig = sym_eig(a)
    lam, q = eig
    if positive and lam[0] <= 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {lam[0]:.6g} is not positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        flam = np.asarray(f(lam), dtype=float)
    if not np.all(np.isfinite(flam)):
        if lam[0] <= 0.0:
            raise NotPositiveDefinite(f"f is singular on the spectrum (smallest eigenvalue {lam[0]:.6g})")
        raise InvalidMatrix("f produced non-finite values on the spectrum")
    out = (q * flam) @ q.T
    return 0.5 * (out + out.T)


def inv_sqrt(a, eig: EigDecomp | None = None) -> np.ndarray:
    return spectral_apply(a, lambda x: x ** -0.5, positive=True, eig=eig)


def solve_shifted(a, shift: float, b, *, eig: EigDecomp | None = None,
                  rtol: float = 1e-12) -> np.ndarray:
    """Solve ``(A - shift) x = b`` through the spectral factorization of A.

    ``b`` may be a vector or a matrix of right-hand sides.  Raises
    :class:`SingularShift` when the shift is within ``rtol * ||A||`` of an
    eigenvalue.
    """
    if eig is None:
        eig = sym_eig(a)
    lam, q = eig
    gaps = lam - shift
    dist = float(np.min(np.abs(gaps)))
    scale = max(float(np.max(np.abs(lam))), abs(shift), np.finfo(float).tiny)
    if dist <= rtol * scale:
        raise SingularShift(f"shift {shift!r} is {dist:.3e} from the spectrum", dist)
    b = np.asarray(b, dtype=float)
    coeff = q.T @ b
    coeff = coeff / (gaps if b.ndim == 1 else gaps[:, None])
    return q @ coeff


@dataclass(frozen=True)
class OrthProjector:
    """Orthogonal projector represented by an orthonormal basis of its range."""

    basis: np.ndarray  # n x m

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[1] > b.shape[0]:
            raise InvalidMatrix(f"projector basis must be n x m with m <= n, got {b.shape}")
        gram = b.T @ b
        if b.shape[1] and np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e-10:
            raise InvalidMatrix("projector basis is not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def matrix(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def apply(self, x):
        return self.basis @ (self.basis.T @ x)

    def complement(self) -> "OrthProjector":
        q, _ = np.linalg.qr(self.basis, mode="complete")
        return OrthProjector(q[:, self.rank:])


def read_matrix(path) -> np.ndarray:
    """Read the text format: first line ``n``, then n rows of n numbers."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidMatrix(f"{path}: empty file")
    try:
        n = int(lines[0].split()[0])
        rows = [[float(tok) for tok in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise InvalidMatrix(f"{path}: {exc}") from None
    if n < 1 or len(rows) != n or any(len(r) != n for r in rows):
        raise InvalidMatrix(f"{path}: expected {n} rows of {n} entries")
    return as_sym(rows, name=str(path))


def format_matrix(a) -> str:
    a = np.asarray(a, dtype=float)
    body = "\n".join(" ".join(repr(float(x)) for x in row) for row in a)
    return f"{a.shape[0]}\n{body}\n"


def write_matrix(path, a) -> None:
    Path(path).write_text(format_matrix(a))
