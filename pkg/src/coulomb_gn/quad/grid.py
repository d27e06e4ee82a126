"""Tensor-grid quadrature on [-L, L]^d (d <= 3), cell-midpoint sampling.

Off-diagonal cell pairs use the kernel at the midpoints; the diagonal cell
pair is excluded from the fractional seminorm (an O(h^{p(1-s)}) bias) and is
replaced by the exact self-interaction of a constant cell in the Coulomb sum.
The function is taken to vanish outside the box; for the seminorm the pairs
with one point outside contribute |g(x)|^p times the exterior kernel mass,
which is added in closed form (d = 1) or by an angular rule (d >= 2).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import DomainError
from .kernels import sphere_area
from .rules import gauss_jacobi, gauss_legendre

MAX_DIM = 3
PAIR_CHUNK = 2048


def _check_dim(d: int):
    if d > MAX_DIM:
        raise DomainError("UNSUPPORTED_DIM", f"tensor grids support d <= {MAX_DIM}, got {d}")


def cell_midpoints(d: int, half_width: float, n: int) -> np.ndarray:
    """(n^d, d) midpoints in row-major order."""
    h = 2.0 * half_width / n
    mid = -half_width + h * (np.arange(n) + 0.5)
    mesh = np.meshgrid(*([mid] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def lp_sum(values: np.ndarray, half_width: float, gamma: float, tau: float) -> float:
    d, n = values.ndim, values.shape[0]
    _check_dim(d)
    h = 2.0 * half_width / n
    x = cell_midpoints(d, half_width, n)
    r = np.linalg.norm(x, axis=1)
    return float(np.sum(np.abs(values.ravel()) ** gamma * r ** (tau * gamma)) * h**d)


def gradient_sum(values: np.ndarray, half_width: float, p: float, weight: float) -> float:
    """int |grad g|^p |x|^weight by central differences (zero outside the box)."""
    d, n = values.ndim, values.shape[0]
    _check_dim(d)
    h = 2.0 * half_width / n
    padded = np.pad(values, 1)
    grads = np.gradient(padded, h)
    if d == 1:
        grads = [grads]
    inner = tuple(slice(1, -1) for _ in range(d))
    sq = sum(gk[inner] ** 2 for gk in grads)
    x = cell_midpoints(d, half_width, n)
    r = np.linalg.norm(x, axis=1)
    return float(np.sum(sq.ravel() ** (p / 2) * r**weight) * h**d)


def _pair_sum(x: np.ndarray, a: np.ndarray, b: np.ndarray, kernel) -> float:
    """sum over i != j of kernel(x_i, x_j, a_i, b_j), chunked over i."""
    total = 0.0
    m = x.shape[0]
    idx = np.arange(m)
    for start in range(0, m, PAIR_CHUNK):
        sl = slice(start, min(m, start + PAIR_CHUNK))
        diff = x[sl, None, :] - x[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        vals = kernel(dist, a[sl, None], b[None, :])
        vals[idx[sl] - start, idx[sl]] = 0.0
        total += float(np.sum(vals))
    return total


def exterior_mass(x: np.ndarray, half_width: float, e_excess: float, order: int = 48) -> np.ndarray:
    """int_{y outside the box} |x - y|^{-d-e_excess} dy for points x in the box."""
    d = x.shape[1]
    big = half_width
    if d == 1:
        return ((big - x[:, 0]) ** (-e_excess) + (big + x[:, 0]) ** (-e_excess)) / e_excess
    dirs, wts = _sphere_rule(d, order)
    out = np.zeros(x.shape[0])
    for w, om in zip(wts, dirs):
        with np.errstate(divide="ignore"):
            t_hi = np.where(om > 0, (big - x) / np.where(om > 0, om, 1.0), np.inf)
            t_lo = np.where(om < 0, (-big - x) / np.where(om < 0, om, 1.0), np.inf)
        exit_len = np.min(np.minimum(t_hi, t_lo), axis=1)
        out += w * exit_len ** (-e_excess)
    return out / e_excess


@lru_cache(maxsize=8)
def _sphere_rule(d: int, order: int):
    if d == 2:
        th = 2.0 * np.pi * (np.arange(4 * order) + 0.5) / (4 * order)
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(th.size, 2.0 * np.pi / th.size)
    t, w = gauss_legendre(order)
    ph = 2.0 * np.pi * (np.arange(2 * order) + 0.5) / (2 * order)
    ct, ph_ = np.meshgrid(t, ph, indexing="ij")
    st = np.sqrt(1.0 - ct**2)
    dirs = np.stack([st * np.cos(ph_), st * np.sin(ph_), ct], axis=-1).reshape(-1, 3)
    wts = (w[:, None] * np.full(ph.size, 2.0 * np.pi / ph.size)[None, :]).ravel()
    return dirs, wts


def seminorm_sum(values: np.ndarray, half_width: float, s: float, p: float, exterior: bool = True) -> float:
    """Unweighted fractional seminorm (bare double integral) on the grid.

    ``exterior=False`` restricts both points to the box.
    """
    d, n = values.ndim, values.shape[0]
    _check_dim(d)
    h = 2.0 * half_width / n
    x = cell_midpoints(d, half_width, n)
    v = values.ravel().astype(float)
    e = d + s * p

    def kern(dist, a, b):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(a - b) ** p / dist**e

    inside = _pair_sum(x, v, v, kern) * h ** (2 * d)
    nz = np.abs(v) > 0
    ext = 0.0
    if exterior and nz.any():
        ext = 2.0 * float(np.sum(np.abs(v[nz]) ** p * exterior_mass(x[nz], half_width, s * p))) * h**d
    return inside + ext


@lru_cache(maxsize=32)
def cube_self_energy(d: int, e: float, order: int = 24) -> float:
    """int_{[0,1]^d} int_{[0,1]^d} |x - y|^{-e} dx dy for 0 <= e < d."""
    if d == 1:
        return 2.0 / ((1.0 - e) * (2.0 - e))
    # z = x - y has density prod(1 - |z_k|) on [-1,1]^d; split by the largest coordinate
    t, wt = gauss_jacobi(order, 0.0, d - 1.0 - e)
    tt = 0.5 * (t + 1.0)
    wt = wt * 0.5 ** (d - e)
    gl, wl = gauss_legendre(order)
    vv = 0.5 * (gl + 1.0)
    wv = 0.5 * wl
    grids = np.meshgrid(*([vv] * (d - 1)), indexing="ij")
    wgrid = np.ones_like(grids[0])
    for g in np.meshgrid(*([wv] * (d - 1)), indexing="ij"):
        wgrid = wgrid * g
    v = np.stack([g.ravel() for g in grids], axis=1)
    wv_flat = wgrid.ravel()
    norm2 = 1.0 + np.sum(v * v, axis=1)
    total = 0.0
    for ti, wi in zip(tt, wt):
        prod = (1.0 - ti) * np.prod(1.0 - ti * v, axis=1)
        total += wi * float(np.sum(wv_flat * prod * norm2 ** (-e / 2.0)))
    return d * 2.0**d * total


def cell_pair_average_1d(k: np.ndarray, e: float) -> np.ndarray:
    """int_0^1 int_0^1 |k + x - y|^{-e} dx dy for integer offsets k >= 0."""
    k = np.abs(np.asarray(k, dtype=float))
    c = 1.0 / ((1.0 - e) * (2.0 - e))
    with np.errstate(invalid="ignore"):
        out = c * ((k + 1.0) ** (2.0 - e) - 2.0 * k ** (2.0 - e) + np.abs(k - 1.0) ** (2.0 - e))
    return np.where(k == 0, 2.0 * c, out)


def coulomb_sum(values: np.ndarray, half_width: float, q: float, alpha: float,
                a21: float = 0.0, a22: float = 0.0) -> float:
    """Weighted Coulomb double integral on the grid, kernel |x-y|^{-(d-alpha)}."""
    d, n = values.ndim, values.shape[0]
    _check_dim(d)
    h = 2.0 * half_width / n
    e = d - alpha
    x = cell_midpoints(d, half_width, n)
    r = np.linalg.norm(x, axis=1)
    hv = np.abs(values.ravel()) ** q
    wa = hv * r ** (a21 * q)
    wb = hv * r ** (a22 * q)
    if e == 0:
        return float(np.sum(wa) * np.sum(wb)) * h ** (2 * d)
    if d == 1:
        k = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
        kern = cell_pair_average_1d(k, e) * h ** (2 - e)
        return float(wa @ kern @ wb)

    def kern(dist, a, b):
        with np.errstate(divide="ignore", invalid="ignore"):
            return a * b / dist**e

    off = _pair_sum(x, wa, wb, kern) * h ** (2 * d)
    self_term = float(np.sum(wa * wb)) * h ** (2 * d - e) * cube_self_energy(d, e)
    return off + self_term


def coarsen(values: np.ndarray) -> np.ndarray:
    """Average 2^d blocks (n must be even)."""
    d, n = values.ndim, values.shape[0]
    shape = []
    for _ in range(d):
        shape += [n // 2, 2]
    return values.reshape(shape).mean(axis=tuple(range(1, 2 * d, 2)))


__all__ = [
    "cell_midpoints",
    "lp_sum",
    "gradient_sum",
    "seminorm_sum",
    "coulomb_sum",
    "cube_self_energy",
    "cell_pair_average_1d",
    "exterior_mass",
    "coarsen",
    "sphere_area",
]
