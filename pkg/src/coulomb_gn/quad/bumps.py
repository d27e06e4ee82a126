"""Functionals of bump trains v = sum_k eta(. + k a) from single-bump pieces.

Supports are disjoint, so local terms are m times the single-bump value.
Interactions between bumps j != k at centre distance D = |j-k||a| are
integrals over supp(eta) x supp(eta) of a kernel K(x - y) that varies only
between (D + 1/2)^{-e} and (D - 1/2)^{-e}.  The estimate uses D^{-e}; its
error is the distance to the far end of that enclosure.  For radial
densities with e = d - 2 (Newton kernel, d >= 3) the point-charge value is
exact.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..profiles import ETA_RADIUS, eta_profile, single_bump
from . import radial
from .kernels import sphere_area
from .rules import gauss_legendre


def pair_sum(m: int, spacing: float, e: float, shift: float = 0.0) -> float:
    """sum over ordered pairs j != k of (|j-k| spacing + shift)^{-e}."""
    k = np.arange(1, m)
    return float(2.0 * np.sum((m - k) * (k * spacing + shift) ** (-e)))


@lru_cache(maxsize=64)
def single_lp(d: int, gamma: float, n: int = 24) -> float:
    return radial.lp_integral(single_bump(d).radial, d, gamma, 0.0, n)


@lru_cache(maxsize=64)
def single_gradient(d: int, p: float, n: int = 24) -> float:
    return radial.gradient_integral(single_bump(d).radial, d, p, 0.0, n)


@lru_cache(maxsize=64)
def single_seminorm(d: int, s: float, p: float, n: int = 24) -> float:
    return radial.seminorm_integral(single_bump(d).radial, d, s, p, 0.0, 0.0, n)


@lru_cache(maxsize=64)
def single_coulomb(d: int, q: float, alpha: float, n: int = 24) -> float:
    return radial.coulomb_integral(single_bump(d).radial, d, q, alpha, 0.0, 0.0, n)


@lru_cache(maxsize=64)
def cross_profile_integral(d: int, p: float, order: int = 64) -> float:
    """int int over supp x supp of |eta(x)-eta(y)|^p - eta(x)^p - eta(y)^p (always <= 0)."""
    if p == 2:
        return -2.0 * single_lp(d, 1.0) ** 2
    t, w = gauss_legendre(order)
    # panels [0, 1/8] (eta = 1) and [1/8, 1/4]
    edges = np.array([0.0, ETA_RADIUS / 4, ETA_RADIUS / 2, 0.75 * ETA_RADIUS, ETA_RADIUS])
    rs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        rs.append(a + (b - a) * (t + 1) / 2)
        ws.append((b - a) / 2 * w)
    r = np.concatenate(rs)
    wr = np.concatenate(ws) * sphere_area(d) * r ** (d - 1)
    v = eta_profile(r)
    f = np.abs(v[:, None] - v[None, :]) ** p - v[:, None] ** p - v[None, :] ** p
    return float(wr @ f @ wr)


def cross_terms(m: int, spacing: float, e: float, weight_integral: float, exact_points: bool = False):
    """(estimate, error bound) of sum_{j != k} weight_integral * K at distance |j-k| spacing."""
    mid = weight_integral * pair_sum(m, spacing, e)
    if exact_points or m == 1:
        return mid, 0.0
    lo = weight_integral * pair_sum(m, spacing, e, -2 * ETA_RADIUS)
    hi = weight_integral * pair_sum(m, spacing, e, 2 * ETA_RADIUS)
    return mid, max(abs(hi - mid), abs(lo - mid))
