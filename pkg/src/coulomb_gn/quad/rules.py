"""Gauss rules and composite meshes on intervals with power-type endpoints.

Every mesh is returned as ``(x, omx, w)`` with ``sum(w * F(x))`` approximating
``int F`` for the *full* integrand ``F``.  On end panels flagged singular the
Gauss-Jacobi weight is folded back into ``w`` (divided by the node's power),
so callers never special-case panels.  ``omx`` is ``1 - x`` computed without
cancellation, which matters for kernels that blow up at ``x = 1``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def gauss_jacobi(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for weight (1-x)^a (1+x)^b on [-1, 1]."""
    x, w = roots_jacobi(n, a, b)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel(a: float, b: float, n: int, om_a: float | None = None, om_b: float | None = None,
          left: float | None = None, right: float | None = None):
    """Single panel on [a, b].

    ``left``/``right`` give the exponent of a power singularity at that end;
    ``om_a``/``om_b`` are accurate values of 1-a, 1-b (defaults: computed).
    """
    om_a = 1.0 - a if om_a is None else om_a
    om_b = 1.0 - b if om_b is None else om_b
    width = (om_a - om_b) if a > 0.5 else (b - a)
    half = 0.5 * width
    if left is not None and left != 0.0:
        t, w = gauss_jacobi(n, 0.0, float(left))
        dist = half * (1.0 + t)
        x = a + dist
        om = om_a - dist
        ww = half * w / (1.0 + t) ** left
    elif right is not None and right != 0.0:
        t, w = gauss_jacobi(n, 0.0, float(right))
        dist = half * (1.0 + t)
        x = b - dist
        om = om_b + dist
        ww = half * w / (1.0 + t) ** right
    else:
        t, w = gauss_legendre(n)
        x = a + half * (1.0 + t)
        om = om_b + half * (1.0 - t)
        ww = half * w
    return x, om, ww


def composite(edges, n: int, oms=None, left: float | None = None, right: float | None = None):
    """Composite rule over consecutive ``edges``; singular exponents apply to the end panels."""
    edges = np.asarray(edges, dtype=float)
    if oms is None:
        oms = 1.0 - edges
    xs, os, ws = [], [], []
    k = len(edges) - 1
    for i in range(k):
        lft = left if i == 0 else None
        rgt = right if i == k - 1 else None
        if lft is not None and rgt is not None and lft != 0 and rgt != 0:
            # a single panel with two singular ends: split it
            mid = 0.5 * (edges[i] + edges[i + 1])
            om_mid = 0.5 * (oms[i] + oms[i + 1])
            for args in ((edges[i], mid, oms[i], om_mid, lft, None), (mid, edges[i + 1], om_mid, oms[i + 1], None, rgt)):
                x, o, w = panel(args[0], args[1], n, args[2], args[3], args[4], args[5])
                xs.append(x); os.append(o); ws.append(w)
            continue
        x, o, w = panel(edges[i], edges[i + 1], n, oms[i], oms[i + 1], lft, rgt)
        xs.append(x); os.append(o); ws.append(w)
    if not xs:
        empty = np.zeros(0)
        return empty, empty, empty
    return np.concatenate(xs), np.concatenate(os), np.concatenate(ws)


def geometric_edges(lo: float, hi: float, ratio: float = 2.0) -> np.ndarray:
    """Edges lo = e_0 < ... < e_k = hi with e_{i+1}/e_i <= ratio (lo > 0)."""
    k = max(1, int(np.ceil(np.log(hi / lo) / np.log(ratio) - 1e-12)))
    return lo * (hi / lo) ** (np.arange(k + 1) / k)


def radial_mesh(lo: float, hi: float, n: int, breakpoints=(), floor_levels: int = 40,
                origin_exponent: float | None = 0.0, ratio: float = 2.0):
    """Mesh on [lo, hi] for integrands with a power law at r = 0.

    With ``lo == 0`` the mesh is geometric down to ``hi * 2**-floor_levels`` and the
    first panel carries a Jacobi weight r^origin_exponent.  Breakpoints inside
    (lo, hi) become panel edges.
    """
    if hi <= lo:
        empty = np.zeros(0)
        return empty, empty
    start = lo if lo > 0 else hi * 2.0 ** (-floor_levels)
    pts = set(geometric_edges(start, hi, ratio).tolist())
    for b in breakpoints:
        if start < b < hi:
            pts.add(float(b))
    edges = sorted(pts)
    # keep panels geometric after inserting breakpoints
    edges = _dedupe(np.array(edges))
    if lo == 0:
        edges = np.concatenate([[0.0], edges])
        x, _, w = composite(edges, n, left=origin_exponent)
    else:
        x, _, w = composite(edges, n)
    return x, w


def _dedupe(edges: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    keep = [edges[0]]
    for e in edges[1:]:
        if e - keep[-1] > rtol * max(abs(e), 1e-300):
            keep.append(e)
    if len(keep) == 1 and len(edges) > 1:
        keep.append(edges[-1])
    keep[-1] = edges[-1]
    return np.array(keep)
