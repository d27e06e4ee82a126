"""Radially reduced quadrature for radial profiles.

Both double integrals reduce to two-dimensional ones by integrating out the
directions with the angular kernel Phi_e (see :mod:`.kernels`).  With
rho < r the two radii and u = rho / r in (0, 1):

* seminorm (0 < s < 1), e = d + sp, outer variable rho, r = rho / u::

    |S| int_0^R rho^{d-1-sp+(t1+t2)p}
        int_0^1 u^{sp-1} (u^{-t1 p} + u^{-t2 p}) Phi_e(u) |g(rho/u) - g(rho)|^p du drho

* Coulomb, e = d - alpha, outer variable r, rho = u r::

    |S| int_0^R r^{2d-1-e+(a21+a22)q} h(r)
        int_0^1 u^{d-1} (u^{a21 q} + u^{a22 q}) h(u r) Phi_e(u) du dr,   h = |g|^q.

The inner u-mesh is rebuilt for every outer node: profile features map to
breakpoints in u, panels are geometric between them, graded through
1 - 2^-k toward u = 1, and the two end panels carry Gauss-Jacobi weights for
the exact endpoint powers.  All functions here return the plain integral
(no roots); error estimates are made one level up by node doubling.
"""

from __future__ import annotations

import math

import numpy as np

from ..profiles import RadialProfile
from .kernels import kernel_table, sphere_area
from .rules import composite, radial_mesh

#: levels of 1 - 2^-k grading toward u = 1
NEAR_ONE_LEVELS = 24
#: geometric floor of outer meshes that reach r = 0
FLOOR_LEVELS = 40
#: below this 1 - u, differences g(rho/u) - g(rho) use the derivative
CLOSE_OM = 1e-5


def _unit_edges(breaks_x, breaks_om, levels=NEAR_ONE_LEVELS):
    """Edges (x, 1-x) on [0, 1]: breakpoints, ratio-2 fill, and 1 - 2^-k grading."""
    lo = sorted(float(b) for b in breaks_x if 0.0 < b <= 0.5)
    xs = [0.5]
    if lo:
        first = lo[0]
        fill = first * 2.0 ** np.arange(0, int(math.ceil(math.log2(0.5 / first))) + 1)
        xs += [float(v) for v in fill if v < 0.5] + lo
    xs = sorted(set(xs))
    low_edges = [(x, 1.0 - x) for x in xs]

    oms = [float(o) for x, o in zip(breaks_x, breaks_om) if x > 0.5 and o > 0.0]
    k_max = levels
    if oms:
        k_max = max(k_max, int(math.ceil(math.log2(1.0 / min(oms)))) + 1)
    grid = [2.0 ** (-k) for k in range(1, k_max + 1)]
    hi_oms = sorted(set(grid + oms), reverse=True)
    hi_edges = [(1.0 - o, o) for o in hi_oms if o < 0.5]

    edges = low_edges + hi_edges
    # drop near-duplicates, comparing in x below 1/2 and in 1-x above
    out = [edges[0]]
    for x, o in edges[1:]:
        px, po = out[-1]
        gap = (po - o) if x > 0.5 else (x - px)
        if gap > 1e-12 * max(min(x, o), 1e-300):
            out.append((x, o))
    first_x = lo[0] if lo else 0.5
    return out, first_x


def unit_mesh(breaks_x, breaks_om, n, left, right, levels=NEAR_ONE_LEVELS):
    """Nodes (u, 1-u) and weights on (0, 1) with power ends ``left`` at 0 and ``right`` at 1."""
    edges, _ = _unit_edges(breaks_x, breaks_om, levels)
    ex = np.array([0.0] + [e[0] for e in edges] + [1.0])
    eo = np.array([1.0] + [e[1] for e in edges] + [0.0])
    return composite(ex, n, eo, left=left, right=right)


def _features(prof: RadialProfile) -> np.ndarray:
    return np.array(prof.features(), dtype=float)


# ---------------------------------------------------------------- L^gamma

def lp_integral(prof: RadialProfile, d: int, gamma: float, tau: float, n: int) -> float:
    """|S| int |g(r)|^gamma r^{d-1+tau gamma} dr."""
    expo = d - 1 + tau * gamma
    lo = prof.inner
    origin = expo + gamma * prof.origin_power if lo == 0 else None
    r, w = radial_mesh(lo, prof.outer, n, prof.features(), FLOOR_LEVELS, origin)
    vals = np.abs(prof(r)) ** gamma * r**expo
    return sphere_area(d) * float(np.sum(w * vals))


def gradient_integral(prof: RadialProfile, d: int, p: float, weight: float, n: int) -> float:
    """|S| int |g'(r)|^p r^{d-1+weight} dr (the s = 1 branch)."""
    expo = d - 1 + weight
    lo = prof.inner
    origin = expo + p * max(prof.origin_power - 1.0, 0.0) if lo == 0 else None
    r, w = radial_mesh(lo, prof.outer, n, prof.features(), FLOOR_LEVELS, origin)
    vals = np.abs(prof.derivative(r)) ** p * r**expo
    return sphere_area(d) * float(np.sum(w * vals))


# ---------------------------------------------------------------- seminorm

def seminorm_integral(prof: RadialProfile, d: int, s: float, p: float, t1: float, t2: float, n: int,
                      ball: float | None = None) -> float:
    """Bare double integral of the weighted fractional seminorm, 0 < s < 1.

    With ``ball`` both points are restricted to the centred ball of that radius.
    """
    e = d + s * p
    phi = kernel_table(d, e)
    feats = _features(prof)
    if ball is not None:
        feats = np.unique(np.append(feats, ball))
    big = prof.outer
    outer_exp = d - 1 + min(t1, t2) * p + p * prof.origin_power
    rho, w_rho = radial_mesh(0.0, big, n, feats, FLOOR_LEVELS, outer_exp)
    terms = [t1] if t1 == t2 else [t1, t2]
    mult = 2.0 if t1 == t2 else 1.0
    right = p * (1.0 - s) - 1.0
    total = 0.0
    for rh, wr in zip(rho, w_rho):
        above = feats[feats > rh]
        bx = rh / above
        bo = (above - rh) / above
        g_rho = prof(np.array([rh]))[0]
        dg_rho = prof.derivative(np.array([rh]))[0] if prof.deriv is not None else None
        inner = 0.0
        for t in terms:
            kappa = s * p - 1.0 - t * p
            u, om, wu = unit_mesh(bx, bo, n, kappa, right)
            if ball is not None:
                wu = np.where(u * ball < rh * (1 - 1e-12), 0.0, wu)
            delta = rh * om / u
            r = rh + delta
            diff = prof(r) - g_rho
            if dg_rho is not None:
                # trapezoid on [rho, r] avoids cancellation when r is very close to rho
                close = om < CLOSE_OM
                if close.any():
                    diff[close] = 0.5 * (dg_rho + prof.derivative(r[close])) * delta[close]
            diff = np.abs(diff) ** p
            inner += float(np.sum(wu * u ** kappa * phi(u, om) * diff))
        total += wr * rh ** (d - 1 - s * p + (t1 + t2) * p) * mult * inner
    return sphere_area(d) * total


# ---------------------------------------------------------------- Coulomb

def coulomb_integral(prof: RadialProfile, d: int, q: float, alpha: float, a21: float, a22: float, n: int) -> float:
    """Weighted Coulomb double integral with kernel |x-y|^{-(d-alpha)}, 0 < alpha < d."""
    e = d - alpha
    phi = kernel_table(d, e)
    feats = _features(prof)
    lo = prof.inner
    outer_exp = 2 * d - 1 - e + (a21 + a22) * q + 2 * q * prof.origin_power
    r_nodes, w_r = radial_mesh(lo, prof.outer, n, feats, FLOOR_LEVELS, outer_exp if lo == 0 else None)
    terms = [a21] if a21 == a22 else [a21, a22]
    mult = 2.0 if a21 == a22 else 1.0
    right = min(0.0, d - 1.0 - e)
    right = None if right == 0.0 else right
    total = 0.0
    for r, wr in zip(r_nodes, w_r):
        hr = abs(prof(np.array([r]))[0]) ** q
        if hr == 0.0:
            continue
        below = feats[feats < r]
        bx = below / r
        bo = (r - below) / r
        inner = 0.0
        for a in terms:
            kappa = d - 1.0 + a * q + (q * prof.origin_power if lo == 0 else 0.0)
            u, om, wu = unit_mesh(bx, bo, n, kappa, right)
            h_in = np.abs(prof(u * r)) ** q
            inner += float(np.sum(wu * u ** (d - 1.0 + a * q) * phi(u, om) * h_in))
        total += wr * r ** (2 * d - 1 - e + (a21 + a22) * q) * hr * mult * inner
    return sphere_area(d) * total
