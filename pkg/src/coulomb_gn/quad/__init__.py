"""Quadrature front end: weighted L^gamma norms, seminorms, Coulomb energies.

Every evaluator returns an :class:`Estimate` carrying a relative error
estimate.  ``RADIAL_REDUCED`` runs the radial engines at n and 2n nodes
(doubling further until the target is met or 48 nodes are reached);
``TENSOR_GRID`` compares n against n/2 cells; ``MONTE_CARLO`` reports the
standard error.  Bump trains are assembled from single-bump pieces whatever
the method.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..errors import DomainError, LabError
from ..profiles import (
    RadialProfile,
    TrialFunction,
    Variant,
    _RadialPayload,
    _TransformedPayload,
    sample_on_grid,
)
from . import bumps, grid, montecarlo, radial
from .kernels import angular_kernel, kernel_table, sphere_area, unit_ball_volume

#: floor on reported relative errors (accumulated rounding)
ROUNDOFF_FLOOR = 1e-12
MAX_RADIAL_NODES = 48


class Method(enum.Enum):
    RADIAL_REDUCED = "RADIAL_REDUCED"
    TENSOR_GRID = "TENSOR_GRID"
    MONTE_CARLO = "MONTE_CARLO"


@dataclass(frozen=True)
class QuadratureSpec:
    method: Method = Method.RADIAL_REDUCED
    radial_nodes: int = 12
    angular_order: int = 24
    mc_samples: int = 200_000
    seed: int = 0
    target_rel_err: float = 1e-6
    grid_cells: int = 32
    mc_streams: int = 4

    def __post_init__(self):
        if isinstance(self.method, str):
            object.__setattr__(self, "method", Method(self.method))
        for name in ("radial_nodes", "angular_order", "mc_samples", "grid_cells", "mc_streams"):
            if int(getattr(self, name)) <= 0:
                raise DomainError("BAD_SPEC", f"{name} must be positive")
        if not (0.0 < self.target_rel_err <= 0.1):
            raise DomainError("BAD_SPEC", "target_rel_err must lie in (0, 0.1]")

    def with_method(self, method: Method | str) -> "QuadratureSpec":
        return replace(self, method=Method(method))

    def to_json(self) -> dict:
        out = asdict(self)
        out["method"] = self.method.value
        return out


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class Estimate:
    """A value with a relative error estimate."""

    value: float
    est_rel_err: float
    method: str = Method.RADIAL_REDUCED.value
    detail: dict = field(default_factory=dict, compare=False)

    @property
    def abs_err(self) -> float:
        return abs(self.value) * self.est_rel_err

    def power(self, k: float) -> "Estimate":
        """value**k with the first-order error k * rel_err."""
        if self.value == 0:
            return Estimate(0.0, self.est_rel_err, self.method, self.detail)
        return Estimate(self.value**k, abs(k) * self.est_rel_err, self.method, self.detail)

    def to_json(self) -> dict:
        return {"value": self.value, "est_rel_err": self.est_rel_err, "method": self.method}


def _estimate(fine: float, coarse: float, method: Method, **detail) -> Estimate:
    err = abs(fine - coarse) / abs(fine) if fine != 0 else (0.0 if coarse == 0 else math.inf)
    return Estimate(float(fine), max(err, ROUNDOFF_FLOOR), method.value, detail)


def _radial_refined(fn: Callable[[int], float], spec: QuadratureSpec) -> Estimate:
    n = spec.radial_nodes
    coarse = fn(n)
    while True:
        fine = fn(2 * n)
        est = _estimate(fine, coarse, Method.RADIAL_REDUCED, nodes=2 * n)
        if est.est_rel_err <= spec.target_rel_err or 2 * n >= MAX_RADIAL_NODES:
            return est
        n, coarse = 2 * n, fine


def _mc(res: montecarlo.McResult) -> Estimate:
    rel = res.rel_err if res.value != 0 else (0.0 if res.std_error == 0 else math.inf)
    return Estimate(res.value, max(rel, ROUNDOFF_FLOOR), Method.MONTE_CARLO.value, {"samples": res.samples})


# ---------------------------------------------------------------- routing helpers

def radial_profile(g: TrialFunction, weighted: bool) -> RadialProfile:
    """Profile about the origin; for unweighted functionals a translated radial
    function is evaluated about its own centre (translation invariance)."""
    prof = g.radial
    if prof is not None:
        return prof
    if not weighted:
        p = g.payload
        lam, amp = 1.0, 1.0
        if isinstance(p, _TransformedPayload):
            lam, amp, p = p.lam, p.amp, p.base
        if isinstance(p, _RadialPayload):
            return p.radial.transformed(lam, amp)
    raise DomainError("NOT_RADIAL", "RADIAL_REDUCED needs a radial function about the origin")


def _grid_values(g: TrialFunction, n: int):
    if g.variant is Variant.GRID:
        gd = g.payload.grid
        return gd.values, gd.half_width
    half = g.support_radius() * 1.0001
    return sample_on_grid(g, half, n).payload.grid.values, half


def _grid_estimate(g: TrialFunction, spec: QuadratureSpec, fn) -> Estimate:
    if g.d > grid.MAX_DIM:
        raise DomainError("UNSUPPORTED_DIM", f"tensor grids support d <= {grid.MAX_DIM}")
    if g.variant is Variant.GRID:
        vals, half = _grid_values(g, 0)
        fine = fn(vals, half)
        coarse = fn(grid.coarsen(vals), half) if vals.shape[0] % 2 == 0 else fine
        return _estimate(fine, coarse, Method.TENSOR_GRID, cells=vals.shape[0])
    n = spec.grid_cells + spec.grid_cells % 2
    vals, half = _grid_values(g, n)
    fine = fn(vals, half)
    coarse_vals, _ = _grid_values(g, n // 2)
    return _estimate(fine, fn(coarse_vals, half), Method.TENSOR_GRID, cells=n)


def _vanishes_near_zero(g: TrialFunction) -> bool:
    return g.zero_radius() > 0


# ---------------------------------------------------------------- L^gamma

def weighted_lp_integral(g: TrialFunction, gamma: float, tau: float = 0.0,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> Estimate:
    """int |g|^gamma |x|^{tau gamma} dx."""
    d = g.d
    if tau * gamma <= -d and not _vanishes_near_zero(g):
        raise DomainError("NONINTEGRABLE", f"|x|^{tau * gamma} is not integrable at 0 in dimension {d}")
    if g.variant is Variant.BUMP_TRAIN:
        if tau != 0:
            raise DomainError("UNSUPPORTED", "weighted functionals of bump trains are not assembled")
        m = g.payload.m
        return Estimate(m * bumps.single_lp(d, float(gamma)), ROUNDOFF_FLOOR, "BUMP_TRAIN")
    method = spec.method
    if g.variant is Variant.GRID:
        method = Method.TENSOR_GRID
    if method is Method.RADIAL_REDUCED:
        prof = radial_profile(g, tau != 0)
        return _radial_refined(lambda n: radial.lp_integral(prof, d, gamma, tau, n), spec)
    if method is Method.TENSOR_GRID:
        return _grid_estimate(g, spec, lambda v, L: grid.lp_sum(v, L, gamma, tau))
    res = montecarlo.lp_integral(g, gamma, tau, g.support_radius(), g.zero_radius(),
                                 spec.mc_samples, spec.seed, spec.mc_streams)
    return _mc(res)


def lp_norm_weighted(g: TrialFunction, gamma: float, tau: float = 0.0,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> Estimate:
    """(int |g|^gamma |x|^{tau gamma})^{1/gamma}."""
    if gamma < 1:
        raise DomainError("OUT_OF_RANGE", "exponent must be >= 1")
    return weighted_lp_integral(g, gamma, tau, spec).power(1.0 / gamma)


# ---------------------------------------------------------------- seminorm

def _check_seminorm(g: TrialFunction, s: float, p: float, t1: float, t2: float):
    d = g.d
    if not (0.0 <= s <= 1.0):
        raise DomainError("OUT_OF_RANGE", "0 <= s <= 1 required")
    near0 = _vanishes_near_zero(g)
    if 0 < s < 1:
        if min(t1, t2) * p <= -d:
            raise DomainError("DIVERGENT", "a weight |x|^{tp} with tp <= -d is not integrable")
        if max(t1, t2) * p >= s * p:
            raise DomainError("DIVERGENT", "weights must satisfy t < s for decay at infinity")
        if not near0 and d + p * (1 - s) + (t1 + t2) * p <= 0:
            raise DomainError("DIVERGENT", "combined weight too singular at the origin")
    elif not near0 and d + (t1 + t2) * p <= 0:
        raise DomainError("DIVERGENT", "combined weight too singular at the origin")


def seminorm_integral(g: TrialFunction, s: float, p: float, t1: float = 0.0, t2: float = 0.0,
                      spec: QuadratureSpec = DEFAULT_SPEC) -> Estimate:
    """p-th power of the weighted seminorm, by branch:

    s = 0: int |g|^p |x|^{(t1+t2)p};  s = 1: int |grad g|^p |x|^{(t1+t2)p};
    0 < s < 1: the bare Gagliardo double integral with weights |x|^{t1 p} |y|^{t2 p}.
    """
    _check_seminorm(g, s, p, t1, t2)
    d = g.d
    weighted = (t1 != 0) or (t2 != 0)
    if s == 0:
        return weighted_lp_integral(g, p, t1 + t2, spec)
    if g.variant is Variant.BUMP_TRAIN:
        return _bump_seminorm(g, s, p, weighted)
    method = Method.TENSOR_GRID if g.variant is Variant.GRID else spec.method
    if s == 1:
        if method is Method.RADIAL_REDUCED:
            prof = radial_profile(g, weighted)
            if prof.deriv is None:
                raise LabError("NO_DERIVATIVE", "profile has no derivative")
            return _radial_refined(lambda n: radial.gradient_integral(prof, d, p, (t1 + t2) * p, n), spec)
        if method is Method.TENSOR_GRID:
            return _grid_estimate(g, spec, lambda v, L: grid.gradient_sum(v, L, p, (t1 + t2) * p))
        res = montecarlo.gradient_integral(g, p, (t1 + t2) * p, g.support_radius(),
                                           spec.mc_samples, spec.seed, spec.mc_streams)
        return _mc(res)
    if method is Method.RADIAL_REDUCED:
        prof = radial_profile(g, weighted)
        return _radial_refined(lambda n: radial.seminorm_integral(prof, d, s, p, t1, t2, n), spec)
    if method is Method.TENSOR_GRID:
        if weighted:
            raise DomainError("UNSUPPORTED", "weighted fractional seminorms are not assembled on grids")
        return _grid_estimate(g, spec, lambda v, L: grid.seminorm_sum(v, L, s, p))
    res = montecarlo.seminorm_integral(g, s, p, t1, t2, g.support_radius(), spec.mc_samples,
                                       spec.seed, spec.mc_streams)
    return _mc(res)


def sobolev_seminorm(g: TrialFunction, s: float, p: float, t1: float = 0.0, t2: float = 0.0,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> Estimate:
    """The weighted seminorm itself (p-th root of :func:`seminorm_integral`)."""
    return seminorm_integral(g, s, p, t1, t2, spec).power(1.0 / p)


# ---------------------------------------------------------------- Coulomb

def coulomb_energy_weighted(g: TrialFunction, q: float, alpha: float, a21: float = 0.0,
                            a22: float = 0.0, spec: QuadratureSpec = DEFAULT_SPEC) -> Estimate:
    """int int |g(x)|^q |g(y)|^q |x|^{a21 q} |y|^{a22 q} |x-y|^{-(d-alpha)} dx dy."""
    d = g.d
    if not (0 < alpha <= d):
        raise DomainError("OUT_OF_RANGE", "0 < alpha <= d required")
    near0 = _vanishes_near_zero(g)
    if min(a21, a22) * q <= -d:
        raise DomainError("DIVERGENT", "a weight |x|^{aq} with aq <= -d is not integrable")
    if not near0 and d + alpha + (a21 + a22) * q <= 0:
        raise DomainError("DIVERGENT", "combined weight too singular at the origin")
    weighted = (a21 != 0) or (a22 != 0)
    if alpha == d:
        # kernel is 1: the double integral factorises
        left = weighted_lp_integral(g, q, a21, spec)
        right = left if a21 == a22 else weighted_lp_integral(g, q, a22, spec)
        return Estimate(left.value * right.value, left.est_rel_err + right.est_rel_err, left.method)
    if g.variant is Variant.BUMP_TRAIN:
        if weighted:
            raise DomainError("UNSUPPORTED", "weighted functionals of bump trains are not assembled")
        return _bump_coulomb(g, q, alpha)
    method = Method.TENSOR_GRID if g.variant is Variant.GRID else spec.method
    if method is Method.RADIAL_REDUCED:
        prof = radial_profile(g, weighted)
        return _radial_refined(lambda n: radial.coulomb_integral(prof, d, q, alpha, a21, a22, n), spec)
    if method is Method.TENSOR_GRID:
        return _grid_estimate(g, spec, lambda v, L: grid.coulomb_sum(v, L, q, alpha, a21, a22))
    res = montecarlo.coulomb_integral(g, q, alpha, a21, a22, g.support_radius(), spec.mc_samples,
                                      spec.seed, spec.mc_streams)
    return _mc(res)


# ---------------------------------------------------------------- bump trains

def _bump_seminorm(g: TrialFunction, s: float, p: float, weighted: bool) -> Estimate:
    if weighted:
        raise DomainError("UNSUPPORTED", "weighted functionals of bump trains are not assembled")
    pl = g.payload
    d, m = pl.d, pl.m
    if s == 1:
        return Estimate(m * bumps.single_gradient(d, float(p)), ROUNDOFF_FLOOR, "BUMP_TRAIN")
    local = m * bumps.single_seminorm(d, float(s), float(p))
    cross, half = bumps.cross_terms(m, pl.spacing, d + s * p, bumps.cross_profile_integral(d, float(p)))
    value = local + cross
    return Estimate(value, max(half / abs(value), ROUNDOFF_FLOOR), "BUMP_TRAIN",
                    {"local": local, "cross": cross})


def _bump_coulomb(g: TrialFunction, q: float, alpha: float) -> Estimate:
    pl = g.payload
    d, m = pl.d, pl.m
    e = d - alpha
    local = m * bumps.single_coulomb(d, float(q), float(alpha))
    charge = bumps.single_lp(d, float(q))
    cross, half = bumps.cross_terms(m, pl.spacing, e, charge**2, exact_points=(d >= 3 and e == d - 2))
    value = local + cross
    return Estimate(value, max(half / value, ROUNDOFF_FLOOR), "BUMP_TRAIN", {"local": local, "cross": cross})


# ---------------------------------------------------------------- energy report

@dataclass(frozen=True)
class EnergyReport:
    lgamma_weighted: Estimate
    seminorm_weighted: Estimate
    coulomb_weighted: Estimate
    method: str

    def to_json(self) -> dict:
        return {
            "lgamma_weighted": self.lgamma_weighted.value,
            "lgamma_weighted_est_rel_err": self.lgamma_weighted.est_rel_err,
            "seminorm_weighted": self.seminorm_weighted.value,
            "seminorm_weighted_est_rel_err": self.seminorm_weighted.est_rel_err,
            "coulomb_weighted": self.coulomb_weighted.value,
            "coulomb_weighted_est_rel_err": self.coulomb_weighted.est_rel_err,
            "method": self.method,
        }


# ---------------------------------------------------------------- local Poincare gap

@dataclass(frozen=True)
class PoincareGap:
    gap: float
    seminorm: Estimate  # restricted seminorm (not a power)
    coulomb: Estimate  # restricted Coulomb double integral
    volume: float

    def empirical_constant(self, params) -> float:
        """gap |B|^{1/gamma} / (seminorm^{beta1 p} coulomb^{beta2})."""
        b1, b2, gam = float(params.beta1), float(params.beta2), float(params.gamma)
        # the seminorm entry is already the p-th power
        denom = self.seminorm.value**b1 * self.coulomb.value**b2
        return self.gap * self.volume ** (1.0 / gam) / denom


def poincare_gap(g: TrialFunction, params, radius: float | None = None, cube: tuple | None = None,
                 spec: QuadratureSpec = DEFAULT_SPEC) -> PoincareGap:
    """Mean oscillation on B and the two functionals restricted to B x B.

    Radial functions take a ball centred at 0 (``radius``); GRID functions
    take an axis-aligned cube of cells ``cube = (start_index, size)``.
    """
    d = g.d
    s, p, q, alpha = (float(params.s), float(params.p), float(params.q), float(params.alpha))
    if g.variant is Variant.GRID:
        if cube is None:
            raise DomainError("EMPTY_BALL", "GRID functions need a cube of cells")
        start, size = int(cube[0]), int(cube[1])
        gd = g.payload.grid
        if size <= 0 or start < 0 or start + size > gd.n:
            raise DomainError("EMPTY_BALL", "cube contains no cells of the grid")
        sub = gd.values[tuple(slice(start, start + size) for _ in range(d))]
        h = gd.spacing
        half = size * h / 2
        gap = float(np.mean(np.abs(sub - sub.mean())))
        if s == 1:
            sem = grid.gradient_sum(sub, half, p, 0.0)
        elif s == 0:
            sem = grid.lp_sum(sub, half, p, 0.0)
        else:
            sem = grid.seminorm_sum(sub, half, s, p, exterior=False)
        coul = grid.coulomb_sum(sub, half, q, alpha)
        return PoincareGap(gap, Estimate(sem, math.nan, "TENSOR_GRID"), Estimate(coul, math.nan, "TENSOR_GRID"),
                           (size * h) ** d)
    if radius is None or radius <= 0:
        raise DomainError("EMPTY_BALL", "ball radius must be positive")
    prof = radial_profile(g, False)
    cut = RadialProfile(prof.value, prof.deriv, prof.inner, min(prof.outer, radius),
                        tuple(b for b in prof.breakpoints if b < radius), prof.origin_power)
    vol = unit_ball_volume(d) * radius**d
    gap = _radial_mean_oscillation(cut, d, radius, vol)
    if s == 1:
        sem = _radial_refined(lambda n: radial.gradient_integral(cut, d, p, 0.0, n), spec)
    elif s == 0:
        sem = _radial_refined(lambda n: radial.lp_integral(cut, d, p, 0.0, n), spec)
    else:
        sem = _radial_refined(lambda n: radial.seminorm_integral(cut, d, s, p, 0.0, 0.0, n, ball=radius), spec)
    if alpha == d:
        lp = _radial_refined(lambda n: radial.lp_integral(cut, d, q, 0.0, n), spec)
        coul = Estimate(lp.value**2, 2 * lp.est_rel_err)
    else:
        coul = _radial_refined(lambda n: radial.coulomb_integral(cut, d, q, alpha, 0.0, 0.0, n), spec)
    return PoincareGap(gap, sem, coul, vol)


def _radial_mean_oscillation(prof: RadialProfile, d: int, radius: float, vol: float, n: int = 24) -> float:
    area = sphere_area(d)
    full = RadialProfile(prof.value, prof.deriv, 0.0, radius, prof.breakpoints, prof.origin_power)
    r, w = radial.radial_mesh(0.0, radius, n, full.features(), radial.FLOOR_LEVELS, d - 1.0)
    mean = area * float(np.sum(w * full(r) * r ** (d - 1))) / vol
    # split at the level crossings of g = mean
    probe = np.linspace(0.0, radius, 2001)[1:]
    vals = full(probe) - mean
    roots = [brentq(lambda x: float(full(np.array([x]))[0] - mean), a, b)
             for a, b, fa, fb in zip(probe[:-1], probe[1:], vals[:-1], vals[1:]) if fa * fb < 0]
    split = RadialProfile(full.value, full.deriv, 0.0, radius, tuple(full.breakpoints) + tuple(roots))
    r, w = radial.radial_mesh(0.0, radius, n, split.features(), radial.FLOOR_LEVELS, d - 1.0)
    return area * float(np.sum(w * np.abs(split(r) - mean) * r ** (d - 1))) / vol


__all__ = [
    "Method",
    "QuadratureSpec",
    "DEFAULT_SPEC",
    "Estimate",
    "EnergyReport",
    "PoincareGap",
    "weighted_lp_integral",
    "lp_norm_weighted",
    "seminorm_integral",
    "sobolev_seminorm",
    "coulomb_energy_weighted",
    "poincare_gap",
    "angular_kernel",
    "kernel_table",
    "sphere_area",
    "unit_ball_volume",
    "radial_profile",
]
