"""Product quadrature on R^3: logarithmic radial grid times a sphere rule.

Grid points are ``x_{i,n} = r_i s_n`` with

    r_i = exp(-ln R_max + (i - 1) h),   h = 2 ln(R_max) / (N_r - 1),
    w_{i,n} = h r_i^3 w_n,

which is the trapezoidal rule in ``t = ln r`` for ``int f r^2 dr``.  The
sphere factor is either a Lebedev rule read from a text file (the twelve
sizes of the standard parameter table ship with the package) or a
Gauss-Legendre by uniform-azimuth product rule.

:func:`kernel_convolve` evaluates the shifted-kernel sums

    Phi_alpha(x) = sum_z w_z g(x - z) / |z|^alpha

at every grid point.  The kernel singularity sits at ``z = 0``, which the
grid never samples because ``r_1 = 1 / R_max``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np

from .errors import InvalidGrid, InvalidSphereRule, IoError, NonFiniteIntegrand

# index -> (R_max, N_r, N_leb)
GRID_TABLE = {
    1: (16.0, 10, 194), 2: (18.0, 12, 266), 3: (20.0, 14, 350), 4: (22.0, 16, 590),
    5: (24.0, 18, 974), 6: (26.0, 20, 1454), 7: (28.0, 22, 2030), 8: (30.0, 24, 2702),
    9: (32.0, 26, 3470), 10: (34.0, 28, 4334), 11: (34.0, 30, 5294), 12: (34.0, 32, 5810),
}

# Lebedev point count -> polynomial exactness degree
LEBEDEV_DEGREE = {
    6: 3, 14: 5, 26: 7, 38: 9, 50: 11, 74: 13, 86: 15, 110: 17, 146: 19, 170: 21, 194: 23,
    230: 25, 266: 27, 302: 29, 350: 31, 434: 35, 590: 41, 770: 47, 974: 53, 1202: 59,
    1454: 65, 1730: 71, 2030: 77, 2354: 83, 2702: 89, 3074: 95, 3470: 101, 3890: 107,
    4334: 113, 4802: 119, 5294: 125, 5810: 131,
}

ROW_CHUNK = 128
COL_BLOCK = 2048


@dataclass(frozen=True, eq=False)
class SphereRule:
    points: np.ndarray  # (N, 3) unit vectors
    weights: np.ndarray  # (N,), summing to 4 pi
    exactness_degree: int
    name: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or w.shape != (pts.shape[0],) or len(w) == 0:
            raise InvalidSphereRule(f"{self.name or 'sphere rule'}: need (N, 3) points and N weights")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise InvalidSphereRule(f"{self.name or 'sphere rule'}: non-finite entries")
        dev = float(np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)))
        if dev > 1e-12:
            raise InvalidSphereRule(f"{self.name or 'sphere rule'}: point off the unit sphere by {dev:.3e}")
        total = math.fsum(w)
        if abs(total - 4.0 * math.pi) > 1e-9:
            raise InvalidSphereRule(f"{self.name or 'sphere rule'}: weights sum to {total!r}, expected 4 pi")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def count(self) -> int:
        return len(self.weights)

    def rotated(self, rot) -> "SphereRule":
        """The same rule with every point mapped by the orthogonal matrix ``rot``."""
        pts = self.points @ np.asarray(rot, dtype=float).T
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        return SphereRule(pts, self.weights, self.exactness_degree, self.name + "+rot")


def product_rule(L: int) -> SphereRule:
    """Gauss-Legendre in cos(theta) (L nodes) times 2L uniform azimuths; exact to degree 2L - 1."""
    if L < 1:
        raise InvalidSphereRule(f"product rule needs L >= 1, got {L}")
    ct, wt = np.polynomial.legendre.leggauss(L)
    st = np.sqrt(1.0 - ct * ct)
    ph = np.pi * np.arange(2 * L) / L
    pts = np.stack([
        (st[:, None] * np.cos(ph)[None, :]).ravel(),
        (st[:, None] * np.sin(ph)[None, :]).ravel(),
        np.repeat(ct, 2 * L),
    ], axis=1)
    w = np.repeat(wt * (np.pi / L), 2 * L)
    return SphereRule(pts, w, 2 * L - 1, f"product:{L}")


def load_lebedev(path) -> SphereRule:
    """Read ``x y z w`` lines; ``#`` starts a comment and ``# degree D`` sets the exactness degree."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoError(f"cannot read sphere rule {path}: {exc}") from None
    rows, degree = [], None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("#"):
            tok = s[1:].split()
            if len(tok) == 2 and tok[0] == "degree":
                degree = int(tok[1])
            continue
        if not s:
            continue
        try:
            vals = [float(t) for t in s.split()]
        except ValueError:
            raise InvalidSphereRule(f"{path}:{lineno}: not a number") from None
        if len(vals) != 4:
            raise InvalidSphereRule(f"{path}:{lineno}: expected 4 columns, got {len(vals)}")
        rows.append(vals)
    if not rows:
        raise InvalidSphereRule(f"{path}: no points")
    arr = np.array(rows)
    if degree is None:
        degree = LEBEDEV_DEGREE.get(len(arr), 0)
    return SphereRule(arr[:, :3], arr[:, 3], degree, f"lebedev:{path.name}")


def lebedev(count: int) -> SphereRule:
    """One of the bundled Lebedev rules, by point count."""
    res = resources.files("fsperturb") / "data" / f"lebedev_{count:04d}.txt"
    if not res.is_file():
        raise InvalidSphereRule(f"no bundled Lebedev rule with {count} points")
    with resources.as_file(res) as p:
        return load_lebedev(p)


def parse_sphere(text: str) -> SphereRule:
    """``product:L`` or ``lebedev:PATH`` (PATH may also be a bundled point count)."""
    kind, _, arg = text.partition(":")
    if kind == "product":
        try:
            return product_rule(int(arg))
        except ValueError:
            raise InvalidSphereRule(f"bad product rule size {arg!r}") from None
    if kind == "lebedev":
        if arg.isdigit():
            return lebedev(int(arg))
        return load_lebedev(arg)
    raise InvalidSphereRule(f"unknown sphere rule {text!r}; use product:L or lebedev:PATH")


@dataclass(frozen=True, eq=False)
class GridSpec:
    n_r: int
    r_max: float
    sphere: SphereRule

    def __post_init__(self):
        if self.n_r < 2 or not self.r_max > 1.0:
            raise InvalidGrid(f"need N_r >= 2 and R_max > 1, got N_r={self.n_r}, R_max={self.r_max}")


def indexed_spec(index: int, sphere: SphereRule | None = None) -> GridSpec:
    if index not in GRID_TABLE:
        raise InvalidGrid(f"quadrature index must be in 1..{len(GRID_TABLE)}, got {index}")
    r_max, n_r, n_leb = GRID_TABLE[index]
    return GridSpec(n_r, r_max, sphere if sphere is not None else lebedev(n_leb))


@dataclass(frozen=True, eq=False)
class Grid:
    spec: GridSpec
    h: float
    radii: np.ndarray  # (N_r,)
    points: np.ndarray  # (N_r * N_sphere, 3), radial index outermost
    weights: np.ndarray
    norms: np.ndarray  # |x| per point

    @property
    def size(self) -> int:
        return len(self.weights)


def build_grid(spec: GridSpec) -> Grid:
    log_r = math.log(spec.r_max)
    h = 2.0 * log_r / (spec.n_r - 1)
    radii = np.exp(-log_r + np.arange(spec.n_r) * h)
    # pin the endpoints exactly
    radii[0] = 1.0 / spec.r_max
    radii[-1] = spec.r_max
    s, w = spec.sphere.points, spec.sphere.weights
    pts = (radii[:, None, None] * s[None, :, :]).reshape(-1, 3)
    wts = (h * radii[:, None] ** 3 * w[None, :]).reshape(-1)
    norms = np.repeat(radii, len(w))
    return Grid(spec, h, radii, pts, wts, norms)


Integrand = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def _check_finite(vals: np.ndarray, points: np.ndarray):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = np.unravel_index(int(np.argmax(bad)), vals.shape)[-1]
        raise NonFiniteIntegrand(f"non-finite integrand at grid point {points[idx].tolist()}", points[idx])


def integrate(f: Integrand, grid: Grid) -> float:
    """``sum_{i,n} w_{i,n} f(x_{i,n})`` accumulated exactly rounded in grid order.

    ``f`` is either a vectorized callable on (N, 3) points or the array of
    its values at the grid points.
    """
    vals = np.asarray(f(grid.points) if callable(f) else f, dtype=float)
    if vals.shape != grid.weights.shape:
        raise InvalidGrid(f"integrand has shape {vals.shape}, grid has {grid.weights.shape}")
    _check_finite(vals, grid.points)
    return math.fsum((grid.weights * vals).tolist())


def _neumaier_add(total: np.ndarray, comp: np.ndarray, x: np.ndarray):
    t = total + x
    big = np.abs(total) >= np.abs(x)
    comp += np.where(big, (total - t) + x, (x - t) + total)
    total[...] = t


def convolve_many(g: Callable[[np.ndarray], np.ndarray], alphas: Sequence[float], grid: Grid, *,
                  threads: int = 1, row_chunk: int = ROW_CHUNK, col_block: int = COL_BLOCK) -> np.ndarray:
    """Shifted-kernel sums for a stack of integrands and several kernel powers.

    ``g`` maps difference vectors of shape (R, N, 3) to values of shape
    (K, R, N).  Returns an array of shape (K, len(alphas), N_grid) with
    ``out[k, a, i] = sum_j w_j g_k(x_i - x_j) / |x_j|^alpha_a``.

    Rows are processed in fixed chunks; within a row the sum runs over fixed
    column blocks whose partial sums are combined with Neumaier compensation,
    so the result does not depend on ``threads``.  Memory is
    O(row_chunk * N_grid); the N_grid^2 kernel is never stored.
    """
    X, n = grid.points, grid.size
    wa = np.stack([grid.weights / grid.norms ** a for a in alphas], axis=1)  # (N, A)
    starts = list(range(0, n, row_chunk))
    blocks = [(c, min(c + col_block, n)) for c in range(0, n, col_block)]

    def run(start):
        stop = min(start + row_chunk, n)
        total = comp = None
        for c0, c1 in blocks:
            d = X[start:stop, None, :] - X[None, c0:c1, :]
            vals = np.asarray(g(d), dtype=float)
            if vals.ndim == 2:
                vals = vals[None]
            if not np.all(np.isfinite(vals)):
                bad = np.argwhere(~np.isfinite(vals))[0]
                pt = d[bad[1], bad[2]]
                raise NonFiniteIntegrand(f"non-finite shifted integrand at difference {pt.tolist()}", pt)
            part = vals @ wa[c0:c1]  # (K, R, A)
            if total is None:
                total, comp = part.copy(), np.zeros_like(part)
            else:
                _neumaier_add(total, comp, part)
        return start, stop, total + comp

    out = None
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    for start, stop, block in results:
        if out is None:
            out = np.empty((block.shape[0], len(alphas), n))
        out[:, :, start:stop] = np.transpose(block, (0, 2, 1))
    return out


def kernel_convolve(g: Callable[[np.ndarray], np.ndarray], alpha: float, grid: Grid, *,
                    threads: int = 1) -> np.ndarray:
    """``Phi_alpha(x) = sum_z w_z g(x - z) / |z|^alpha`` at every grid point (O(N^2) work)."""
    if alpha not in (1, 2):
        raise InvalidGrid(f"kernel power must be 1 or 2, got {alpha}")
    return convolve_many(g, [alpha], grid, threads=threads)[0, 0]
