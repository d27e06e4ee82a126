"""Angular kernel of the radial reductions.

For radii rho < r and unit vectors,

    int_{S^{d-1}} |r w - rho e|^{-e} dw = r^{-e} Phi_e(rho / r),
    Phi_e(u) = |S^{d-2}| int_{-1}^{1} (1 - t^2)^{(d-3)/2} (1 - 2ut + u^2)^{-e/2} dt,

and for d = 1, Phi_e(u) = (1-u)^{-e} + (1+u)^{-e}.  With e = d + sp this is the
fractional Hardy kernel; with e = d - alpha it is the Riesz kernel.

:func:`angular_kernel` evaluates Phi directly by Gauss-Jacobi quadrature in
``w = 1 - t`` on panels graded toward w = 0 (where the integrand peaks for u
near 1).  :class:`AngularTable` interpolates it on Chebyshev panels, in u^2
on [0, 1/2] and in log Phi against v = -log(1-u) above, so the double
integrals can evaluate Phi at millions of points cheaply.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import beta as beta_fn

from .rules import gauss_jacobi, gauss_legendre

#: points closer to 1 than this are flagged (asymptotic handling advised)
NEAR_ONE = 1e-6


def unit_ball_volume(d: int) -> float:
    """|B_1| in R^d via V_d = 2 pi V_{d-2} / d (exact small cases)."""
    if d < 0:
        raise ValueError("d >= 0 required")
    if d == 0:
        return 1.0
    if d == 1:
        return 2.0
    return 2.0 * math.pi / d * unit_ball_volume(d - 2)


def sphere_area(d: int) -> float:
    """|S^{d-1}|, the surface measure of the unit sphere in R^d (|S^0| = 2)."""
    return d * unit_ball_volume(d)


def asymptotic_coefficient(d: int, e: float) -> float:
    """A with Phi_e(u) ~ A (1-u)^{d-1-e} as u -> 1 (requires e > d - 1)."""
    if e <= d - 1:
        raise ValueError("kernel stays bounded at u = 1 unless e > d - 1")
    if d == 1:
        return 1.0
    return sphere_area(d - 1) * 0.5 * beta_fn((d - 1) / 2, e / 2 - (d - 1) / 2)


def _phi_one_dim(e, u, omu):
    return omu ** (-e) + (1.0 + u) ** (-e)


def angular_kernel(d: int, e: float, r, omr=None, order: int = 24):
    """Phi_e(r) for 0 <= r < 1 (vectorised).

    ``omr`` may pass 1 - r exactly; values of r within 1e-6 of 1 are accurate
    but callers integrating across r = 1 should use the asymptotic form.
    """
    r = np.asarray(r, dtype=float)
    omr = 1.0 - r if omr is None else np.asarray(omr, dtype=float)
    if np.any(r < 0) or np.any(omr <= 0):
        raise ValueError("angular_kernel needs 0 <= r < 1")
    if d == 1:
        return _phi_one_dim(e, r, omr)
    a = (d - 3) / 2.0
    flat_r = np.atleast_1d(r).ravel()
    flat_o = np.broadcast_to(omr, r.shape).ravel() if r.ndim else np.atleast_1d(omr).ravel()
    out = np.empty_like(flat_r)
    with np.errstate(divide="ignore"):
        scale = np.where(flat_r > 0, flat_o * flat_o / (2.0 * np.maximum(flat_r, 1e-300)), np.inf)
    levels = np.where(np.isfinite(scale), np.ceil(np.log2(2.0 / np.minimum(scale, 1.0))), 0).astype(int) + 4
    for k in np.unique(levels):
        sel = levels == k
        out[sel] = _phi_panels(flat_r[sel], flat_o[sel], e, a, int(k), order)
    out *= sphere_area(d - 1)
    return out.reshape(r.shape) if r.ndim else float(out[0])


def _phi_panels(u, omu, e, a, levels, n):
    """Integral over w in [0, 2] of (w(2-w))^a ((1-u)^2 + 2uw)^{-e/2}."""
    u = u[:, None]
    dd = (omu * omu)[:, None]
    edges = 2.0 * 2.0 ** (-np.arange(levels + 1, dtype=float))  # 2, 1, 1/2, ...
    total = np.zeros(u.shape[0])
    # first panel [0, edges[-1]] with weight w^a
    h = edges[-1]
    t, wt = gauss_jacobi(n, 0.0, a)
    ww = h * (t + 1.0) / 2.0
    total += (h / 2.0) ** (a + 1.0) * np.sum(wt * (2.0 - ww) ** a * (dd + 2.0 * u * ww) ** (-e / 2.0), axis=1)
    # top panel [1, 2] with weight (2 - w)^a
    t, wt = gauss_jacobi(n, a, 0.0)
    ww = 1.0 + (t + 1.0) / 2.0
    total += 0.5 ** (a + 1.0) * np.sum(wt * ww**a * (dd + 2.0 * u * ww) ** (-e / 2.0), axis=1)
    t, wt = gauss_legendre(n)
    for lo, hi in zip(edges[2:][::-1], edges[1:-1][::-1]):
        ww = lo + (hi - lo) * (t + 1.0) / 2.0
        f = (ww * (2.0 - ww)) ** a * (dd + 2.0 * u * ww) ** (-e / 2.0)
        total += (hi - lo) / 2.0 * np.sum(wt * f, axis=1)
    return total


def _cheb_nodes(n):
    j = np.arange(n)
    x = np.cos(np.pi * j / (n - 1))[::-1]
    bw = np.ones(n)
    bw[1::2] = -1.0
    bw[0] *= 0.5
    bw[-1] *= 0.5
    bw *= (-1.0) ** (n - 1)
    return x, bw


def _bary(xq, nodes, bw, vals):
    """Barycentric interpolation; xq (M,), nodes (K,), vals (M,K) or (K,)."""
    diff = xq[:, None] - nodes[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    c = bw / diff
    num = np.sum(c * vals, axis=-1)
    den = np.sum(c, axis=-1)
    out = num / den
    hit = exact.any(axis=1)
    if hit.any():
        idx = np.argmax(exact[hit], axis=1)
        v = vals[hit] if vals.ndim == 2 else vals
        out[hit] = v[np.arange(idx.size), idx] if vals.ndim == 2 else v[idx]
    return out


class AngularTable:
    """Piecewise-Chebyshev interpolant of Phi_e for d >= 2."""

    LOW_NODES = 24
    PANEL_NODES = 16
    V_MAX = 40.0
    CHUNK = 200_000

    def __init__(self, d: int, e: float, order: int = 24):
        if d < 2:
            raise ValueError("tables are only built for d >= 2 (d = 1 is closed form)")
        self.d, self.e = d, float(e)
        self._x0, self._bw0 = _cheb_nodes(self.LOW_NODES)
        self._y0 = 0.125 * (self._x0 + 1.0)  # u^2 in [0, 1/4]
        self._f0 = angular_kernel(d, e, np.sqrt(self._y0), order=order)
        v0 = math.log(2.0)
        npan = int(math.ceil(self.V_MAX - v0))
        self._v_edges = v0 + np.arange(npan + 1, dtype=float)
        xs, self._bw1 = _cheb_nodes(self.PANEL_NODES)
        self._xs = xs
        lo = self._v_edges[:-1, None]
        v = lo + 0.5 * (xs[None, :] + 1.0)
        om = np.exp(-v)
        self._logf = np.log(angular_kernel(d, e, 1.0 - om, om, order=order))
        # log-slope for extrapolation beyond V_MAX
        tail = self._logf[-1]
        self._v_top = self._v_edges[-1]
        self._f_top = tail[-1]
        self._slope = (tail[-1] - tail[-2]) / (0.5 * (xs[-1] - xs[-2]))

    def __call__(self, u, omu=None) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        omu = 1.0 - u if omu is None else np.asarray(omu, dtype=float)
        shape = np.broadcast(u, omu).shape
        u = np.broadcast_to(u, shape).ravel()
        omu = np.broadcast_to(omu, shape).ravel()
        out = np.empty(u.size)
        for start in range(0, u.size, self.CHUNK):
            sl = slice(start, start + self.CHUNK)
            out[sl] = self._eval(u[sl], omu[sl])
        return out.reshape(shape)

    def _eval(self, u, omu):
        out = np.empty(u.size)
        low = u <= 0.5
        if low.any():
            y = 8.0 * u[low] ** 2 - 1.0
            out[low] = _bary(y, self._x0, self._bw0, self._f0)
        hi = ~low
        if hi.any():
            v = -np.log(omu[hi])
            res = np.empty(v.size)
            beyond = v >= self._v_top
            res[beyond] = self._f_top + self._slope * (v[beyond] - self._v_top)
            inside = ~beyond
            if inside.any():
                vi = v[inside]
                k = np.clip(np.floor(vi - self._v_edges[0]).astype(int), 0, len(self._v_edges) - 2)
                xl = 2.0 * (vi - self._v_edges[k]) - 1.0
                res[inside] = _bary(xl, self._xs, self._bw1, self._logf[k])
            out[hi] = np.exp(res)
        return out


class _OneDimKernel:
    def __init__(self, e: float):
        self.d, self.e = 1, float(e)

    def __call__(self, u, omu=None):
        u = np.asarray(u, dtype=float)
        omu = 1.0 - u if omu is None else np.asarray(omu, dtype=float)
        return _phi_one_dim(self.e, u, omu)


@lru_cache(maxsize=64)
def kernel_table(d: int, e: float):
    """Cached fast evaluator of Phi_e (closed form for d = 1)."""
    if d == 1:
        return _OneDimKernel(e)
    return AngularTable(d, e)


def kernel_at_zero(d: int) -> float:
    """Phi_e(0) = |S^{d-1}| for every e."""
    return sphere_area(d)


__all__ = [
    "angular_kernel",
    "AngularTable",
    "kernel_table",
    "sphere_area",
    "unit_ball_volume",
    "asymptotic_coefficient",
    "NEAR_ONE",
]
