"""Certified eigenvalue and eigenvector enclosures for ``H = H0 + W``.

Given ``0 < b < 1`` and ``0 < a < 1 - b`` (so ``k = 1/(1 - a - b)``) the
three smallness conditions are

    cond1:  ||Pperp W Pperp||_{H0}   <= b gam0 / lam_star
    cond2:  ||PWP|| + k Phi(W)       <  a gam0
    cond3:  k Phi(W)                 <  (a gam0 - ||PWP||) / 2

where ``||X||_{H0} = ||H0^{-1/2} X H0^{-1/2}||`` and
``Phi(W) = (lam0 lam_star / gam0) ||Pperp W P||_{H0}^2``.  When all hold,
the m eigenvalues of H near ``lam0`` lie within ``||PWP|| + k Phi`` of it
and the eigenvectors move by at most ``k sqrt(Phi / gam0)``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from . import densela
from .errors import InvalidCertificate, InvalidProblem
from .fsmap import PerturbationProblem


@dataclass(frozen=True)
class CertifyParams:
    a: float = 0.1
    b: float = 0.8

    def __post_init__(self):
        if not (0.0 < self.b < 1.0 and 0.0 < self.a < 1.0 - self.b):
            raise InvalidProblem(f"need 0 < b < 1 and 0 < a < 1 - b, got a={self.a}, b={self.b}")

    @property
    def k(self) -> float:
        return 1.0 / (1.0 - self.a - self.b)


def form_norm(W, H0) -> float:
    """``||H0^{-1/2} W H0^{-1/2}||``."""
    W = densela.as_sym(W, "W")
    s = densela.inv_sqrt(densela.as_sym(H0, "H0"))
    return densela.op_norm(densela.as_sym(s @ W @ s))


def _scaled_blocks(prob: PerturbationProblem):
    dp = prob.lam_p ** -0.5
    dq = prob.lam_q ** -0.5
    return dp, dq


def form_norm_perp(prob: PerturbationProblem) -> float:
    """``||Pperp W Pperp||_{H0}`` evaluated in the H0 eigenbasis."""
    _, dq = _scaled_blocks(prob)
    return densela.op_norm(dq[:, None] * prob.Wqq * dq[None, :])


def offdiag_form_norm(prob: PerturbationProblem) -> float:
    """``||Pperp W P||_{H0}``: largest singular value of the scaled off-diagonal block."""
    dp, dq = _scaled_blocks(prob)
    x = dq[:, None] * prob.Wpq.T * dp[None, :]
    return float(np.sqrt(densela.op_norm(densela.as_sym(x.T @ x))))


def phi(prob: PerturbationProblem) -> float:
    return prob.lam0 * prob.lam_star / prob.gam0 * offdiag_form_norm(prob) ** 2


def phi_upper(prob: PerturbationProblem) -> float:
    """``||P W Pperp W P|| / gam0``.

    Dominates :func:`phi` when ``lam0`` is the bottom of the spectrum of H0,
    since then every excluded level is at least ``lam_star``.
    """
    return densela.op_norm(densela.as_sym(prob.Wpq @ prob.Wpq.T)) / prob.gam0


@dataclass(frozen=True)
class Certificate:
    cond1: bool
    cond2: bool
    cond3: bool
    a: float
    b: float
    k: float
    r: float
    phi: float
    pwp_norm: float
    delta: float
    vec_bound: float
    form_norm_Wperp: float
    lam0: float
    gam0: float
    lam_star: float
    m: int
    mu_min: float  # smallest eigenvalue of PWP
    w_mean: float  # <W> when m == 1, else nan
    phi_upper: float

    @property
    def valid(self) -> bool:
        return self.cond1 and self.cond2 and self.cond3

    @property
    def eig_interval(self) -> tuple[float, float]:
        return self.lam0 - self.delta, self.lam0 + self.delta

    def to_text(self) -> str:
        lines = [f"valid={str(self.valid).lower()}"]
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        raw = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            raw[key.strip()] = val.strip()
        kw = {}
        for f in fields(cls):
            if f.name not in raw:
                raise InvalidCertificate(f"missing key {f.name!r}")
            v = raw[f.name]
            if f.type == "bool":
                if v not in ("true", "false"):
                    raise InvalidCertificate(f"{f.name}: expected true/false, got {v!r}")
                kw[f.name] = v == "true"
            elif f.type == "int":
                kw[f.name] = int(v)
            else:
                kw[f.name] = float(v)
        return cls(**kw)


def check_conditions(prob: PerturbationProblem, params: Optional[CertifyParams] = None) -> Certificate:
    """Evaluate the three conditions and every derived constant.

    Failures are reported in the returned certificate rather than raised.
    """
    params = params or CertifyParams()
    a, b, k = params.a, params.b, params.k
    fn_perp = form_norm_perp(prob)
    wpp_eig = densela.sym_eig(prob.Wpp)
    pwp = densela.op_norm(prob.Wpp, wpp_eig)
    ph = phi(prob)
    g = prob.gam0
    return Certificate(
        cond1=bool(fn_perp <= b * g / prob.lam_star),
        cond2=bool(pwp + k * ph < a * g),
        cond3=bool(k * ph < 0.5 * (a * g - pwp)),
        a=a, b=b, k=k,
        r=float((pwp + k * ph) / g),
        phi=float(ph),
        pwp_norm=float(pwp),
        delta=float(pwp + k * ph),
        vec_bound=float(k * np.sqrt(ph / g)),
        form_norm_Wperp=float(fn_perp),
        lam0=prob.lam0, gam0=g, lam_star=prob.lam_star, m=prob.m,
        mu_min=float(wpp_eig.values[0]),
        w_mean=float(prob.Wpp[0, 0]) if prob.m == 1 else float("nan"),
        phi_upper=phi_upper(prob),
    )


class Enclosures(NamedTuple):
    first_order: tuple[float, float]  # holds all m eigenvalues
    second_order: Optional[tuple[float, float]]  # m == 1 only
    lowest: Optional[tuple[float, float]]  # lowest eigenvalue, m > 1 at the bottom of the spectrum


def _require(cert: Certificate, force: bool):
    if not cert.valid and not force:
        raise InvalidCertificate("certificate conditions do not hold")


def eigenvalue_enclosures(prob: PerturbationProblem, params: Optional[CertifyParams] = None,
                          cert: Optional[Certificate] = None, *, force: bool = False) -> Enclosures:
    cert = cert or check_conditions(prob, params)
    _require(cert, force)
    kphi = cert.k * cert.phi
    first = cert.eig_interval
    second = None
    if prob.m == 1:
        c = prob.lam0 + cert.w_mean
        second = (c - kphi, c + kphi)
    lowest = None
    # the upper end relies on U(lam) <= 0, i.e. on lam0 being the bottom of sigma(H0)
    if prob.m > 1 and prob.is_ground:
        top = prob.lam0 + cert.mu_min
        lowest = (top - kphi, top)
    return Enclosures(first, second, lowest)


def eigenvector_bound(prob: PerturbationProblem, params: Optional[CertifyParams] = None,
                      cert: Optional[Certificate] = None, *, force: bool = False) -> float:
    cert = cert or check_conditions(prob, params)
    _require(cert, force)
    return cert.vec_bound


def certificate_dict(cert: Certificate) -> dict:
    d = asdict(cert)
    d["valid"] = cert.valid
    return d
