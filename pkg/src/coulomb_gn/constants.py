"""Explicit constants: fractional Hardy constant, remainder constant c_p,
the ball-decomposition constant c_{d,gamma} and lens volumes.

Hardy constant (0 < s < 1, sp < d)::

    C = 2 int_0^1 r^{sp-1} |1 - r^{(d-sp)/p}|^p Phi_{d+sp}(r) dr.

The left half is integrated in w = -log r, the right half in
v = -log(1 - r) down to 1 - r = 1e-8; below that the integrand is replaced
by its leading power c^p A (1-r)^{p(1-s)-1}, integrated exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import betainc, gamma as gamma_fn

from .errors import DomainError
from .quad.kernels import angular_kernel, asymptotic_coefficient, unit_ball_volume
from .quad.rules import gauss_jacobi, gauss_legendre

#: cut between the quadrature and the analytic endpoint term
HARDY_CUT = 1e-8


@dataclass(frozen=True)
class HardyConstant:
    d: int
    s: float
    p: float
    value: float
    est_rel_err: float
    nodes: int
    method: str

    def to_json(self) -> dict:
        return asdict(self)


def _hardy_quadrature(d: int, s: float, p: float, order: int, cut: float = HARDY_CUT) -> tuple[float, int]:
    sp = s * p
    c = (d - sp) / p
    e = d + sp
    t, w = gauss_legendre(order)
    total, count = 0.0, 0
    log2 = math.log(2.0)
    # r in (0, 1/2]: r = exp(-w)
    edges = np.arange(log2, log2 + 40.0 / sp + 1.0, 1.0)
    ws = ((edges[1:, None] - edges[:-1, None]) * (t[None, :] + 1.0) / 2.0 + edges[:-1, None]).ravel()
    wt = ((edges[1:, None] - edges[:-1, None]) / 2.0 * w[None, :]).ravel()
    r = np.exp(-ws)
    total += float(np.sum(wt * r**sp * np.abs(1.0 - r**c) ** p * angular_kernel(d, e, r)))
    count += r.size
    # r in [1/2, 1 - cut]: 1 - r = exp(-v)
    top = -math.log(cut)
    k = int(math.ceil(top - log2))
    edges = np.linspace(log2, top, k + 1)
    vs = ((edges[1:, None] - edges[:-1, None]) * (t[None, :] + 1.0) / 2.0 + edges[:-1, None]).ravel()
    vt = ((edges[1:, None] - edges[:-1, None]) / 2.0 * w[None, :]).ravel()
    om = np.exp(-vs)
    r = 1.0 - om
    layer = np.abs(np.expm1(c * np.log1p(-om))) ** p
    total += float(np.sum(vt * om * r ** (sp - 1.0) * layer * angular_kernel(d, e, r, om)))
    count += om.size
    rate = p * (1.0 - s)
    total += c**p * asymptotic_coefficient(d, e) * cut**rate / rate
    return float(2.0 * total), count


@lru_cache(maxsize=256)
def _hardy_cached(d: int, s: float, p: float) -> HardyConstant:
    if s == 1.0:
        return HardyConstant(d, s, p, ((d - p) / p) ** p, 0.0, 0, "closed_form")
    coarse, _ = _hardy_quadrature(d, s, p, 20)
    fine, nodes = _hardy_quadrature(d, s, p, 30)
    # the endpoint term is first order: its neglected correction is O(cut) relative
    err = max(abs(fine - coarse) / fine, HARDY_CUT, 1e-13)
    return HardyConstant(d, s, p, fine, err, nodes, "quadrature")


def hardy_constant(d: int, s: float, p: float) -> HardyConstant:
    """The constant in front of int |u|^p / |x|^{sp} in the Hardy inequality with remainder."""
    s, p = float(s), float(p)
    if not (0.0 < s <= 1.0) or p < 1.0:
        raise DomainError("OUT_OF_RANGE", "0 < s <= 1 and p >= 1 required")
    if s * p >= d:
        raise DomainError("HARDY_UNDEFINED", f"sp = {s * p} must be below d = {d}")
    return _hardy_cached(int(d), s, p)


def sharp_p2_hardy_constant(d: int, s: float) -> float:
    """Sharp constant of the p = 2 fractional Hardy inequality for the bare double integral.

    2 pi^{d/2} Gamma((d+2s)/4)^2 |Gamma(-s)| / (Gamma((d-2s)/4)^2 Gamma((d+2s)/2)).
    Diagnostic only: it depends on the normalisation of the seminorm.
    """
    if not (0 < s < 1) or 2 * s >= d:
        raise DomainError("OUT_OF_RANGE", "0 < s < 1 and 2s < d required")
    return (2.0 * math.pi ** (d / 2) * gamma_fn((d + 2 * s) / 4) ** 2 * abs(gamma_fn(-s))
            / (gamma_fn((d - 2 * s) / 4) ** 2 * gamma_fn((d + 2 * s) / 2)))


# ---------------------------------------------------------------- c_p

def remainder_objective(r, p: float):
    r = np.asarray(r, dtype=float)
    return (1.0 - r) ** p - r**p + p * r ** (p - 1.0)


@dataclass(frozen=True)
class RemainderConstant:
    p: float
    value: float
    argmin: float | None


@lru_cache(maxsize=64)
def remainder_constant(p: float) -> RemainderConstant:
    """c_p = min over 0 < r < 1/2 of (1-r)^p - r^p + p r^{p-1} (p >= 2).

    A 1000-point grid brackets the minimum, golden-section search refines it.
    """
    p = float(p)
    if p < 2:
        raise DomainError("OUT_OF_RANGE", "p >= 2 required")
    if p == 2.0:
        # (1-r)^2 - r^2 + 2r = 1 identically
        return RemainderConstant(2.0, 1.0, None)
    grid = np.linspace(0.0, 0.5, 1001)[1:-1]
    vals = remainder_objective(grid, p)
    k = int(np.argmin(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    if k == 0 or k == grid.size - 1:
        # minimum at the end of the open interval: report the infimum
        edge = 0.0 if k == 0 else 0.5
        inf_val = float(remainder_objective(edge, p))
        return RemainderConstant(p, min(inf_val, float(vals[k])), edge)
    res = minimize_scalar(lambda r: float(remainder_objective(r, p)), bracket=(lo, grid[k], hi),
                          method="golden", tol=1e-12)
    return RemainderConstant(p, float(res.fun), float(res.x))


# ---------------------------------------------------------------- c_{d, gamma}

def lens_volume(d: int, radius, distance):
    """Volume of the intersection of two radius-R balls with centres ``distance`` apart."""
    big = np.asarray(radius, dtype=float)
    dist = np.asarray(distance, dtype=float)
    out = np.zeros(np.broadcast(big, dist).shape)
    big, dist = np.broadcast_to(big, out.shape), np.broadcast_to(dist, out.shape)
    ok = 2.0 * big > dist
    R, D = big[ok], dist[ok]
    if d == 1:
        out[ok] = 2.0 * R - D
    elif d == 2:
        out[ok] = 2.0 * R**2 * np.arccos(D / (2.0 * R)) - 0.5 * D * np.sqrt(4.0 * R**2 - D**2)
    elif d == 3:
        out[ok] = math.pi * (4.0 * R + D) * (2.0 * R - D) ** 2 / 12.0
    else:
        out[ok] = unit_ball_volume(d) * R**d * betainc((d + 1) / 2.0, 0.5, 1.0 - (D / (2.0 * R)) ** 2)
    return out if out.ndim else float(out)


@lru_cache(maxsize=128)
def _fdl_integral(d: int, gamma: float, order: int = 40) -> float:
    """I = int_0^inf W_d(R) R^{-d-gamma-1} dR with W_d the unit-separation lens volume.

    With t = 1/(2R): I = 2^gamma |B_1| int_0^1 t^{gamma-1} I_{1-t^2}((d+1)/2, 1/2) dt,
    where the regularised incomplete beta vanishes like (1-t)^{(d+1)/2}.
    """
    a = (d + 1) / 2.0
    x, w = gauss_jacobi(order, a, gamma - 1.0)
    t = (x + 1.0) / 2.0
    f = betainc(a, 0.5, 1.0 - t * t) / (1.0 - t) ** a
    integral = 0.5 ** (a + gamma) * float(np.sum(w * f))
    return 2.0**gamma * unit_ball_volume(d) * integral


def fdl_constant(d: int, gamma: float) -> float:
    """c_{d,gamma} with |x-y|^{-gamma} = c int int chi_R(x-z) chi_R(y-z) dz dR / R^{d+gamma+1}."""
    gamma = float(gamma)
    if not (0.0 < gamma < d):
        raise DomainError("OUT_OF_RANGE", f"gamma must lie in (0, {d})")
    return 1.0 / _fdl_integral(int(d), gamma)


def fdl_reconstruct(x, y, gamma: float, order: int = 24, log_span: float = 40.0) -> float:
    """Right side of the ball decomposition at the pair (x, y), by quadrature in R.

    R runs over [D/2, infinity) in w = log(2R/D) up to ``log_span``; the remainder
    uses the two-term expansion W(R) ~ |B_1| R^d - |B_1^{d-1}| D R^{d-1}.
    """
    x, y = np.atleast_1d(np.asarray(x, dtype=float)), np.atleast_1d(np.asarray(y, dtype=float))
    d = x.size
    dist = float(np.linalg.norm(x - y))
    c = fdl_constant(d, gamma)
    t, w = gauss_legendre(order)
    edges = np.arange(0.0, log_span + 0.5, 0.5)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        ws = lo + (hi - lo) * (t + 1.0) / 2.0
        R = 0.5 * dist * np.exp(ws)
        # dR = R dw
        total += (hi - lo) / 2.0 * float(np.sum(w * lens_volume(d, R, dist) * R ** (-d - gamma)))
    top = 0.5 * dist * math.exp(log_span)
    tail = unit_ball_volume(d) * top ** (-gamma) / gamma
    tail -= unit_ball_volume(d - 1) * dist * top ** (-gamma - 1.0) / (gamma + 1.0)
    return c * (total + tail)


# ---------------------------------------------------------------- tables

def constants_rows(hardy_keys: Iterable[tuple[int, float, float]] = (), remainder_ps: Iterable[float] = (),
                   fdl_keys: Iterable[tuple[int, float]] = ()) -> list[dict]:
    rows = []
    for d, s, p in hardy_keys:
        h = hardy_constant(d, s, p)
        rows.append({"constant": "hardy", "d": d, "s": s, "p": p, "gamma": "", "value": h.value,
                     "est_rel_err": h.est_rel_err})
    for p in remainder_ps:
        c = remainder_constant(p)
        rows.append({"constant": "remainder", "d": "", "s": "", "p": p, "gamma": "", "value": c.value,
                     "est_rel_err": 1e-12})
    for d, g in fdl_keys:
        rows.append({"constant": "fdl", "d": d, "s": "", "p": "", "gamma": g, "value": fdl_constant(d, g),
                     "est_rel_err": 1e-12})
    return rows


CSV_FIELDS = ["constant", "d", "s", "p", "gamma", "value", "est_rel_err"]


def constants_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


__all__ = [
    "HardyConstant",
    "hardy_constant",
    "sharp_p2_hardy_constant",
    "RemainderConstant",
    "remainder_constant",
    "remainder_objective",
    "lens_volume",
    "fdl_constant",
    "fdl_reconstruct",
    "unit_ball_volume",
    "constants_rows",
    "constants_csv",
]
