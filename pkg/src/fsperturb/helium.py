"""Ground-state energy enclosures for helium-like ions.

After rescaling lengths by the nuclear charge z, the two-electron operator is
``H0 + W/z`` with ``H0`` a sum of two hydrogen operators and ``W`` the
electron repulsion.  With a = 0.1, b = 0.8 (k = 10) the enclosure is

    -c z^2 + w1 z - k w2 / gam0  <=  E(z)  <=  -c z^2 + w1 z

in units of one Hartree, with

    symmetric:       c = 1,    gam0 = 3/8,   w1 = <1/r12>_{1s1s},  w2 = its variance
    antisymmetric:   c = 5/8,  gam0 = 5/72,  w1_as = min eig M,   w2_as = max eig Q.

``M``, ``N`` and ``Q = N - M^2`` are 4x4 matrices over the n = 2 channels
``(l, k) in {(0,0), (1,-1), (1,0), (1,1)}`` built from direct (A, C) and
exchange (B, D) integrals with kernels 1/r12 and 1/r12^2.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import densela, quadrature
from .errors import InvalidProblem

K_FACTOR = 10.0  # 1 / (1 - a - b) with a = 0.1, b = 0.8
B_PARAM = 0.8
GAMMA0_SYM = 3.0 / 8.0
GAMMA0_AS = 5.0 / 72.0
C_SYM = 1.0
C_AS = 5.0 / 8.0

# -E_exact from high-precision variational calculations, for z = 10..50
REFERENCE_ENERGIES = {10: -93.9, 20: -387.7, 30: -881.4, 40: -1575.2, 50: -2468.9}

CHANNELS = ((0, 0), (1, -1), (1, 0), (1, 1))

_C1 = 1.0 / math.sqrt(math.pi)
_C2 = 1.0 / (4.0 * math.sqrt(2.0 * math.pi))


@dataclass(frozen=True)
class HeliumConstants:
    w1: float
    w2: float
    w1_as: float
    w2_as: float
    source: str = ""


# rounded values quoted alongside the energy enclosure statement
ROUNDED_CONSTANTS = HeliumConstants(0.6, 0.27, 0.20, 0.01, "rounded (w2 = 0.27)")
# values that reproduce the printed comparison table
TABLE_CONSTANTS = HeliumConstants(0.6, 0.3, 0.20, 0.01, "rounded (w2 = 0.3)")


@dataclass(frozen=True, eq=False)
class PairMatrices:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    orientation: str = "swapped"

    @property
    def M(self) -> np.ndarray:
        return self.A - self.B

    @property
    def N(self) -> np.ndarray:
        return self.C - self.D

    @property
    def Q(self) -> np.ndarray:
        m = self.M
        q = self.N - m @ m
        return 0.5 * (q + q.T)


@dataclass(frozen=True)
class EnergyEnclosure:
    z: float
    symmetry: str
    lower: float
    upper: float
    c: float
    gam0: float
    w1: float
    w2: float
    k: float = K_FACTOR

    @property
    def width(self) -> float:
        return self.upper - self.lower


def orbital_stack(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``psi_1s`` and the four real n = 2 orbitals at points of shape (..., 3).

    Closed forms of the hydrogen module's orbitals, written out for speed in
    the O(N^2) kernel sums.
    """
    r = np.sqrt(np.einsum("...i,...i->...", x, x))
    p1 = _C1 * np.exp(-r)
    e = _C2 * np.exp(-0.5 * r)
    p2 = np.stack([(2.0 - r) * e, x[..., 1] * e, x[..., 2] * e, x[..., 0] * e])
    return p1, p2


_PAIRS = [(a, b) for a in range(4) for b in range(a, 4)]


def _shifted_integrands(with_products: bool):
    def g(d):
        p1, p2 = orbital_stack(d)
        parts = [p1 * p1, *(p1 * p2[a] for a in range(4))]
        if with_products:
            parts += [p2[a] * p2[b] for a, b in _PAIRS]
        return np.stack(parts)
    return g


def _unpack_pairs(vals: np.ndarray) -> np.ndarray:
    out = np.empty((4, 4) + vals.shape[1:])
    for idx, (a, b) in enumerate(_PAIRS):
        out[a, b] = out[b, a] = vals[idx]
    return out


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def compute_w1_w2(grid: quadrature.Grid, *, threads: int = 1) -> tuple[float, float]:
    """``w1 = C_1`` and ``w2 = C_2 - C_1^2`` with ``C_alpha = <|x - y|^-alpha>`` in the 1s1s state."""
    g = lambda d: _C1 ** 2 * np.exp(-2.0 * np.sqrt(np.einsum("...i,...i->...", d, d)))
    phi = quadrature.convolve_many(g, [1, 2], grid, threads=threads)[0]
    dens = orbital_stack(grid.points)[0] ** 2
    c1 = quadrature.integrate(dens * phi[0], grid)
    c2 = quadrature.integrate(dens * phi[1], grid)
    return c1, c2 - c1 * c1


def _assemble(grid, phi, orientation):
    """Contract kernel sums ``phi[f, alpha, point]`` into (w1, w2, PairMatrices)."""
    p1, p2 = orbital_stack(grid.points)
    dens = p1 * p1
    c1 = quadrature.integrate(dens * phi[0, 0], grid)
    c2 = quadrature.integrate(dens * phi[0, 1], grid)

    def contract(outer, inner):
        return quadrature.integrate(outer * inner, grid)

    # exchange: psi_1 psi_2b (x) against the kernel sum of psi_1 psi_2a
    ex = [[[contract(p1 * p2[b], phi[1 + a, al]) for b in range(4)] for a in range(4)] for al in (0, 1)]
    if orientation == "swapped":
        prod = _unpack_pairs(phi[5:])  # (4, 4, alpha, point)
        direct = [[[contract(dens, prod[a, b, al]) for b in range(4)] for a in range(4)] for al in (0, 1)]
    else:
        direct = [[[contract(p2[a] * p2[b], phi[0, al]) for b in range(4)] for a in range(4)] for al in (0, 1)]
    pm = PairMatrices(_sym(np.array(direct[0])), _sym(np.array(ex[0])),
                      _sym(np.array(direct[1])), _sym(np.array(ex[1])), orientation)
    return c1, c2 - c1 * c1, pm


def _check_orientation(orientation):
    if orientation not in ("swapped", "literal"):
        raise InvalidProblem(f"orientation must be 'swapped' or 'literal', got {orientation!r}")


def compute_pair_matrices(grid: quadrature.Grid, *, orientation: str = "swapped",
                          threads: int = 1) -> PairMatrices:
    """Direct and exchange matrices A, B (kernel 1/r12) and C, D (kernel 1/r12^2).

    ``orientation`` picks which factor of the direct integrals is shifted.
    ``"swapped"`` weights the outer sum by the compact 1s density and shifts
    the n = 2 product, which converges much faster on the logarithmic grid;
    ``"literal"`` shifts the 1s density instead.  Exchange integrals are the
    same in both.
    """
    _check_orientation(orientation)
    return compute_constants(grid, orientation=orientation, threads=threads)[1]


def compute_w_as(pm: PairMatrices) -> tuple[float, float]:
    """Smallest eigenvalue of M and largest eigenvalue of Q."""
    return float(densela.sym_eig(pm.M).values[0]), float(densela.sym_eig(pm.Q).values[-1])


def compute_constants(grid: quadrature.Grid, *, orientation: str = "swapped", threads: int = 1,
                      source: str = "") -> tuple[HeliumConstants, PairMatrices]:
    """All four constants from a single pass of kernel sums."""
    _check_orientation(orientation)
    g = _shifted_integrands(with_products=orientation == "swapped")
    phi = quadrature.convolve_many(g, [1, 2], grid, threads=threads)
    w1, w2, pm = _assemble(grid, phi, orientation)
    w1_as, w2_as = compute_w_as(pm)
    return HeliumConstants(w1, w2, w1_as, w2_as, source), pm


def _select(symmetry: str, constants: HeliumConstants):
    if symmetry == "sym":
        return C_SYM, GAMMA0_SYM, constants.w1, constants.w2
    if symmetry == "antisym":
        return C_AS, GAMMA0_AS, constants.w1_as, constants.w2_as
    raise InvalidProblem(f"symmetry must be 'sym' or 'antisym', got {symmetry!r}")


def energy_bounds(z: float, symmetry: str = "sym", constants: Optional[HeliumConstants] = None,
                  rounding: str = "full") -> EnergyEnclosure:
    """Enclosure of the ground-state energy (Hartree) for nuclear charge ``z``.

    ``rounding="paper"`` substitutes the rounded constants behind the printed
    comparison table; ``"full"`` uses ``constants``.
    """
    if not z > 0:
        raise InvalidProblem(f"z must be positive, got {z}")
    if rounding == "paper":
        constants = TABLE_CONSTANTS
    elif rounding != "full":
        raise InvalidProblem(f"rounding must be 'paper' or 'full', got {rounding!r}")
    elif constants is None:
        raise InvalidProblem("rounding='full' needs computed constants")
    c, gam0, w1, w2 = _select(symmetry, constants)
    upper = -c * z * z + w1 * z
    lower = upper - K_FACTOR * w2 / gam0
    return EnergyEnclosure(z, symmetry, lower, upper, c, gam0, w1, w2)


def crossover(constants: HeliumConstants, coefficient: float) -> float:
    """Positive root of ``(1 - 5/8) z^2 - (w1 - w1_as) z - coefficient * w2_as = 0``.

    Above it the symmetric upper bound lies below the antisymmetric lower
    bound, so the ground state is symmetric (spin 0).
    """
    qa = C_SYM - C_AS
    qb = -(constants.w1 - constants.w1_as)
    qc = -coefficient * constants.w2_as
    return (-qb + math.sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa)


@dataclass(frozen=True)
class Thresholds:
    z_min_sym: float
    z_min_as: float
    z_star: float
    z_crossover: float  # with the k / gam0_as coefficient (144)
    z_crossover_160: float  # with the coefficient 160 as printed


def thresholds(constants: HeliumConstants = ROUNDED_CONSTANTS) -> Thresholds:
    # the validity thresholds are rational; evaluate them exactly
    b, g_sym, g_as = Fraction(4, 5), Fraction(3, 8), Fraction(5, 72)
    return Thresholds(
        z_min_sym=float((9 + g_sym) / (b * g_sym)),
        z_min_as=float((9 + g_sym + g_as) / (b * g_as)),
        z_star=K_FACTOR * constants.w2 / (constants.w1 * GAMMA0_SYM),
        z_crossover=crossover(constants, K_FACTOR / GAMMA0_AS),
        z_crossover_160=crossover(constants, 160.0),
    )


@dataclass(frozen=True)
class TableRow:
    z: int
    E_exact: float
    E_lead: float
    delta_pct: float
    err_pct: float
    lower: float
    upper: float
    in_interval: bool


def table1(reference_energies: Optional[dict] = None, rounding: str = "paper",
           constants: Optional[HeliumConstants] = None) -> list[TableRow]:
    refs = REFERENCE_ENERGIES if reference_energies is None else reference_energies
    rows = []
    for z, e_exact in sorted(refs.items()):
        enc = energy_bounds(z, "sym", constants, rounding)
        lead = enc.upper
        rows.append(TableRow(
            z=z, E_exact=e_exact, E_lead=lead,
            delta_pct=100.0 * K_FACTOR * enc.w2 / (-lead * GAMMA0_SYM),
            err_pct=100.0 * abs(e_exact - lead) / (-lead),
            lower=enc.lower, upper=enc.upper,
            in_interval=bool(enc.lower <= e_exact <= enc.upper),
        ))
    return rows


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def rows_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


TABLE_HEADER = ("z", "E_exact", "E_lead", "delta_pct", "err_pct", "lower", "upper", "in_interval")
CONVERGENCE_HEADER = ("index", "w1", "w2", "w1_as", "w2_as")


def table1_csv(rows: Sequence[TableRow]) -> str:
    return rows_to_csv(TABLE_HEADER, [[getattr(r, h) for h in TABLE_HEADER] for r in rows])


def convergence(indices: Sequence[int], *, sphere: Optional[quadrature.SphereRule] = None,
                orientation: str = "swapped", threads: int = 1) -> list[tuple[int, HeliumConstants]]:
    """Constants for a sequence of parameter-table grids."""
    out = []
    for idx in indices:
        grid = quadrature.build_grid(quadrature.indexed_spec(idx, sphere))
        consts, _ = compute_constants(grid, orientation=orientation, threads=threads, source=f"index {idx}")
        out.append((idx, consts))
    return out


def convergence_csv(results: Sequence[tuple[int, HeliumConstants]]) -> str:
    return rows_to_csv(CONVERGENCE_HEADER, [[i, c.w1, c.w2, c.w1_as, c.w2_as] for i, c in results])
