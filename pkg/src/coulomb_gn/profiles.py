"""Trial functions and the pointwise operators used in the proofs.

Four representations share one interface (:class:`TrialFunction`):

* ``RADIAL``: samples on a log-spaced radial grid, monotone cubic in between;
* ``GRID``: cell values on a tensor grid over [-L, L]^d;
* ``BUMP_TRAIN``: v_{m,a}(x) = sum_{k=1}^m eta(x + k a);
* ``PARAMETRIC``: a named family with a parameter vector (analytic values and
  gradients; radial families expose a :class:`RadialProfile`).

The mollifier is eta(x) = S(8|x| - 1) with S(t) = f(1-t)/(f(1-t)+f(t)),
f(t) = exp(-1/t) for t > 0: eta = 1 on B_{1/8}, eta = 0 off B_{1/4}, C^infinity.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, LabError

#: Gaussian cutoff: exp(-R_CUT^2) = 1e-16
R_CUT = math.sqrt(16 * math.log(10))

ETA_PLATEAU = 0.125
ETA_RADIUS = 0.25


class Variant(enum.Enum):
    RADIAL = "RADIAL"
    GRID = "GRID"
    BUMP_TRAIN = "BUMP_TRAIN"
    PARAMETRIC = "PARAMETRIC"


# ---------------------------------------------------------------- smooth pieces

def _f(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _fp(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def smooth_step(t):
    """C^infinity step: 1 for t <= 0, 0 for t >= 1."""
    a, b = _f(1.0 - np.asarray(t, dtype=float)), _f(t)
    return a / (a + b)


def smooth_step_deriv(t):
    t = np.asarray(t, dtype=float)
    a, b = _f(1.0 - t), _f(t)
    ap, bp = -_fp(1.0 - t), _fp(t)
    return (ap * b - a * bp) / (a + b) ** 2


def eta_profile(r):
    """Radial profile of the mollifier eta."""
    return smooth_step(np.asarray(r, dtype=float) / ETA_PLATEAU - 1.0)


def eta_profile_deriv(r):
    return smooth_step_deriv(np.asarray(r, dtype=float) / ETA_PLATEAU - 1.0) / ETA_PLATEAU


# ---------------------------------------------------------------- radial profiles

@dataclass(frozen=True)
class RadialProfile:
    """r -> g(r), zero outside [inner, outer]; ``breakpoints`` mark features."""

    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray] | None
    inner: float
    outer: float
    breakpoints: tuple[float, ...] = ()
    #: g(r) ~ r^origin_power as r -> 0 (0 for profiles with a finite nonzero limit)
    origin_power: float = 0.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        sel = (r >= self.inner) & (r <= self.outer)
        out[sel] = self.value(r[sel])
        return out

    def derivative(self, r):
        if self.deriv is None:
            raise LabError("NO_DERIVATIVE", "profile has no derivative")
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        sel = (r >= self.inner) & (r <= self.outer)
        out[sel] = self.deriv(r[sel])
        return out

    def features(self) -> tuple[float, ...]:
        pts = {self.outer, *self.breakpoints}
        if self.inner > 0:
            pts.add(self.inner)
        return tuple(sorted(p for p in pts if 0 < p <= self.outer))

    def transformed(self, lam: float = 1.0, amp: float = 1.0) -> "RadialProfile":
        """Profile of amp * g(lam * r)."""
        val, der = self.value, self.deriv
        return RadialProfile(
            lambda r: amp * val(lam * np.asarray(r)),
            None if der is None else (lambda r: amp * lam * der(lam * np.asarray(r))),
            self.inner / lam,
            self.outer / lam,
            tuple(b / lam for b in self.breakpoints),
            self.origin_power,
        )

    def power_weighted(self, a: float) -> "RadialProfile":
        """Profile of r^a g(r)."""
        val, der = self.value, self.deriv

        def v(r):
            r = np.asarray(r, dtype=float)
            return r**a * val(r)

        def dv(r):
            r = np.asarray(r, dtype=float)
            return a * r ** (a - 1) * val(r) + r**a * der(r)

        return RadialProfile(v, None if der is None else dv, self.inner, self.outer,
                             self.breakpoints, self.origin_power + (a if self.inner == 0 else 0.0))


# ---------------------------------------------------------------- payloads

class _Payload:
    d: int
    radial: RadialProfile | None = None

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise LabError("NO_DERIVATIVE", f"{type(self).__name__} has no analytic gradient")

    def support_radius(self) -> float:
        raise NotImplementedError

    def zero_radius(self) -> float:
        """Radius of a ball around 0 on which the function vanishes."""
        return 0.0 if self.radial is None else self.radial.inner

    def descriptor(self) -> dict:
        raise NotImplementedError


def _norms(x):
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.sum(x * x, axis=-1))


@dataclass(frozen=True)
class _RadialPayload(_Payload):
    d: int
    radial: RadialProfile
    family: str | None = None
    params: tuple[float, ...] = ()
    center: tuple[float, ...] | None = None

    def _shift(self, x):
        x = np.asarray(x, dtype=float)
        return x if self.center is None else x - np.asarray(self.center)

    def evaluate(self, x):
        return self.radial(_norms(self._shift(x)))

    def gradient(self, x):
        y = self._shift(x)
        r = _norms(y)
        dr = self.radial.derivative(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[..., None] > 0, y / r[..., None], 0.0)
        return dr[..., None] * unit

    def support_radius(self):
        c = 0.0 if self.center is None else float(np.linalg.norm(self.center))
        return self.radial.outer + c

    def zero_radius(self):
        if self.center is None:
            return self.radial.inner
        c = float(np.linalg.norm(self.center))
        if self.radial.inner > c:
            return self.radial.inner - c
        return max(0.0, c - self.radial.outer)

    @property
    def is_radial(self):
        return self.center is None or not np.any(self.center)

    def descriptor(self):
        out = {"variant": "PARAMETRIC", "d": self.d, "family": self.family, "params": list(self.params)}
        return out


@dataclass(frozen=True)
class _SampledPayload(_Payload):
    d: int
    nodes: tuple[float, ...]
    values: tuple[float, ...]
    radial: RadialProfile = field(default=None)  # built in __post_init__

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.size < 3 or np.any(np.diff(r) <= 0) or r[0] <= 0:
            raise DomainError("BAD_PROFILE", "nodes must be positive, increasing, >= 3 points")
        if abs(v[-1]) > 1e-14 * max(1.0, np.max(np.abs(v))):
            raise DomainError("BAD_PROFILE", "profile must decay below 1e-14 at the grid edge")
        # constant extension toward 0 (node 0 added), monotone cubic in between
        rr = np.concatenate([[0.0], r])
        vv = np.concatenate([[v[0]], v])
        interp = PchipInterpolator(rr, vv, extrapolate=False)
        dinterp = interp.derivative()
        prof = RadialProfile(
            lambda x: np.nan_to_num(interp(np.asarray(x, dtype=float))),
            lambda x: np.nan_to_num(dinterp(np.asarray(x, dtype=float))),
            0.0,
            float(r[-1]),
            (),
        )
        object.__setattr__(self, "radial", prof)

    def evaluate(self, x):
        return self.radial(_norms(x))

    def gradient(self, x):
        return _RadialPayload(self.d, self.radial).gradient(x)

    def support_radius(self):
        return self.radial.outer

    def descriptor(self):
        return {"variant": "RADIAL", "d": self.d, "nodes": list(self.nodes), "values": list(self.values)}


@dataclass(frozen=True)
class GridData:
    """Cell values on [-L, L]^d, ``n`` cells per axis, row-major."""

    values: np.ndarray
    half_width: float

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    def midpoints(self) -> np.ndarray:
        h = self.spacing
        return -self.half_width + h * (np.arange(self.n) + 0.5)


@dataclass(frozen=True)
class _GridPayload(_Payload):
    grid: GridData

    @property
    def d(self):
        return self.grid.d

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        g = self.grid
        idx = np.floor((x + g.half_width) / g.spacing).astype(int)
        inside = np.all((idx >= 0) & (idx < g.n), axis=-1)
        out = np.zeros(x.shape[:-1])
        if inside.any():
            ii = idx[inside]
            out[inside] = g.values[tuple(ii[:, k] for k in range(g.d))]
        return out

    def support_radius(self):
        return self.grid.half_width * math.sqrt(self.grid.d)

    def descriptor(self):
        return {"variant": "GRID", "d": self.grid.d, "n": self.grid.n, "half_width": self.grid.half_width}


@dataclass(frozen=True)
class _BumpTrainPayload(_Payload):
    d: int
    m: int
    a: tuple[float, ...]

    @property
    def spacing(self) -> float:
        return float(np.linalg.norm(self.a))

    def centers(self) -> np.ndarray:
        k = np.arange(1, self.m + 1)[:, None]
        return -k * np.asarray(self.a)[None, :]

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for c in self.centers():
            out += eta_profile(_norms(x - c))
        return out

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for c in self.centers():
            y = x - c
            r = _norms(y)
            dr = eta_profile_deriv(r)
            with np.errstate(invalid="ignore", divide="ignore"):
                out += dr[..., None] * np.where(r[..., None] > 0, y / r[..., None], 0.0)
        return out

    def support_radius(self):
        return self.m * self.spacing + ETA_RADIUS

    def zero_radius(self):
        return max(0.0, self.spacing - ETA_RADIUS)

    def descriptor(self):
        return {"variant": "BUMP_TRAIN", "d": self.d, "m": self.m, "a": list(self.a)}


@dataclass(frozen=True)
class _TransformedPayload(_Payload):
    """amp * base(lam * x)."""

    base: _Payload
    lam: float = 1.0
    amp: float = 1.0

    @property
    def d(self):
        return self.base.d

    @property
    def radial(self):
        r = self.base.radial
        if r is None or not getattr(self.base, "is_radial", True):
            return None
        return r.transformed(self.lam, self.amp)

    @property
    def is_radial(self):
        return self.radial is not None

    def evaluate(self, x):
        return self.amp * self.base.evaluate(self.lam * np.asarray(x, dtype=float))

    def gradient(self, x):
        return self.amp * self.lam * self.base.gradient(self.lam * np.asarray(x, dtype=float))

    def support_radius(self):
        return self.base.support_radius() / self.lam

    def zero_radius(self):
        return self.base.zero_radius() / self.lam

    def descriptor(self):
        out = dict(self.base.descriptor())
        out["dilation"] = self.lam * out.get("dilation", 1.0)
        out["amplitude"] = self.amp * out.get("amplitude", 1.0)
        return out


# ---------------------------------------------------------------- trial function

class TrialFunction:
    """Immutable function representation with pointwise evaluation."""

    __slots__ = ("variant", "_payload")

    def __init__(self, variant: Variant, payload: _Payload):
        self.variant = variant
        self._payload = payload

    @property
    def d(self) -> int:
        return self._payload.d

    @property
    def payload(self):
        return self._payload

    @property
    def radial(self) -> RadialProfile | None:
        """Radial profile about the origin, or None when not radial."""
        p = self._payload
        if isinstance(p, _RadialPayload) and not p.is_radial:
            return None
        return p.radial

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise ValueError(f"points must have trailing dimension {self.d}")
        return self._payload.evaluate(x)

    def gradient(self, x) -> np.ndarray:
        return self._payload.gradient(np.asarray(x, dtype=float))

    def support_radius(self) -> float:
        return self._payload.support_radius()

    def zero_radius(self) -> float:
        return self._payload.zero_radius()

    def dilate(self, lam: float) -> "TrialFunction":
        """x -> g(lam * x)."""
        return self.transform(lam=lam)

    def scale(self, amp: float) -> "TrialFunction":
        return self.transform(amp=amp)

    def transform(self, lam: float = 1.0, amp: float = 1.0) -> "TrialFunction":
        if lam <= 0:
            raise ValueError("dilation factor must be positive")
        p = self._payload
        if isinstance(p, _TransformedPayload):
            return TrialFunction(self.variant, _TransformedPayload(p.base, p.lam * lam, p.amp * amp))
        if isinstance(p, _GridPayload):
            g = p.grid
            return TrialFunction(Variant.GRID, _GridPayload(GridData(amp * g.values, g.half_width / lam)))
        if isinstance(p, _BumpTrainPayload):
            raise LabError("UNSUPPORTED", "bump trains are fixed; dilate the parameters instead")
        return TrialFunction(self.variant, _TransformedPayload(p, lam, amp))

    def to_descriptor(self) -> dict:
        return self._payload.descriptor()

    def __repr__(self):
        return f"TrialFunction({self.variant.name}, {self.to_descriptor()})"


# ---------------------------------------------------------------- families

def _gaussian(d, params):
    sigma = float(params[0])
    center = tuple(float(c) for c in params[1:]) or None
    if center is not None and len(center) != d:
        raise DomainError("BAD_PARAMS", f"gaussian centre needs {d} coordinates")
    prof = RadialProfile(
        lambda r: np.exp(-((r / sigma) ** 2)),
        lambda r: -2.0 * r / sigma**2 * np.exp(-((r / sigma) ** 2)),
        0.0,
        R_CUT * sigma,
        (sigma, 2 * sigma, 3 * sigma),
    )
    return prof, center


def _shell_mixture(d, params):
    if len(params) != 6:
        raise DomainError("BAD_PARAMS", "gaussian_shell_mixture takes (a1, s1, r1, a2, s2, r2)")
    a1, s1, r1, a2, s2, r2 = (float(x) for x in params)
    comps = [(a, s, c) for a, s, c in ((a1, s1, r1), (a2, s2, r2)) if a != 0]
    if not comps or min(s1, s2) <= 0:
        raise DomainError("BAD_PARAMS", "need a nonzero amplitude and positive widths")

    def val(r):
        return sum(a * np.exp(-(((r - c) / s) ** 2)) for a, s, c in comps)

    def der(r):
        return sum(-2.0 * a * (r - c) / s**2 * np.exp(-(((r - c) / s) ** 2)) for a, s, c in comps)

    outer = max(c + R_CUT * s for _, s, c in comps)
    bps = {c + k * s for _, s, c in comps for k in (-3, -2, -1, 0, 1, 2, 3)}
    return RadialProfile(val, der, 0.0, outer, tuple(sorted(b for b in bps if 0 < b < outer))), None


def _bump(d, params):
    w = float(params[0])
    center = tuple(float(c) for c in params[1:]) or None
    if w <= 0:
        raise DomainError("BAD_PARAMS", "bump radius must be positive")
    s = ETA_RADIUS / w
    prof = RadialProfile(
        lambda r: eta_profile(s * r),
        lambda r: s * eta_profile_deriv(s * r),
        0.0,
        w,
        (w / 2,),
    )
    return prof, center


def _shell_bump(d, params):
    c, w = float(params[0]), float(params[1])
    if not (c > w > 0):
        raise DomainError("BAD_PARAMS", "shell_bump needs centre radius > half-width > 0")

    def val(r):
        return smooth_step(2.0 * np.abs(r - c) / w - 1.0)

    def der(r):
        return smooth_step_deriv(2.0 * np.abs(r - c) / w - 1.0) * 2.0 * np.sign(r - c) / w

    return RadialProfile(val, der, c - w, c + w, (c - w / 2, c, c + w / 2)), None


def _smooth_step_family(d, params):
    r0, r1 = float(params[0]), float(params[1])
    if not (0 < r0 < r1):
        raise DomainError("BAD_PARAMS", "smooth_step needs 0 < R0 < R1")
    width = r1 - r0
    return RadialProfile(
        lambda r: smooth_step((r - r0) / width),
        lambda r: smooth_step_deriv((r - r0) / width) / width,
        0.0,
        r1,
        (r0, 0.5 * (r0 + r1)),
    ), None


def _rise(r, eps):
    return smooth_step(2.0 - np.asarray(r) / eps) if eps > 0 else np.ones_like(np.asarray(r, dtype=float))


def _rise_deriv(r, eps):
    return -smooth_step_deriv(2.0 - np.asarray(r) / eps) / eps if eps > 0 else np.zeros_like(np.asarray(r, dtype=float))


def _power_gaussian(d, params):
    """r^a exp(-r^2/sigma^2), switched on smoothly between eps and 2 eps."""
    a, sigma = float(params[0]), float(params[1])
    eps = float(params[2]) if len(params) > 2 else 0.0

    def val(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            base = np.where(r > 0, r**a, 0.0 if a > 0 else (1.0 if a == 0 else np.inf))
        return base * np.exp(-((r / sigma) ** 2)) * _rise(r, eps)

    def der(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(r > 0, r**a * np.exp(-((r / sigma) ** 2)), 0.0)
            dg = np.where(r > 0, g * (a / r - 2.0 * r / sigma**2), 0.0)
        return dg * _rise(r, eps) + g * _rise_deriv(r, eps)

    bps = (sigma, 2 * sigma, 3 * sigma) + ((eps, 1.5 * eps, 2 * eps) if eps > 0 else ())
    return RadialProfile(val, der, eps, R_CUT * sigma * 1.2, bps, a if eps == 0 else 0.0), None


def _power_window(d, params):
    """r^a between a smooth switch-on at [eps, 2eps] and switch-off at [R/2, R]."""
    a, eps, big = float(params[0]), float(params[1]), float(params[2])
    if not (0 < 2 * eps < big / 2):
        raise DomainError("BAD_PARAMS", "power_window needs 0 < 2 eps < R/2")

    def fall(r):
        return smooth_step(2.0 * np.asarray(r) / big - 1.0)

    def fall_d(r):
        return smooth_step_deriv(2.0 * np.asarray(r) / big - 1.0) * 2.0 / big

    def val(r):
        r = np.asarray(r, dtype=float)
        return r**a * _rise(r, eps) * fall(r)

    def der(r):
        r = np.asarray(r, dtype=float)
        p = r**a
        return a * r ** (a - 1) * _rise(r, eps) * fall(r) + p * _rise_deriv(r, eps) * fall(r) + p * _rise(r, eps) * fall_d(r)

    bps = (eps, 1.5 * eps, 2 * eps, big / 2, 0.75 * big)
    bps = bps + tuple(float(x) for x in np.geomspace(2 * eps, big / 2, 8)[1:-1])
    return RadialProfile(val, der, eps, big, tuple(sorted(bps))), None


def _power_log_window(d, params):
    """r^a times a plateau in log r: rises over the first quarter of [log eps, log R], falls over the last."""
    a, eps, big = float(params[0]), float(params[1]), float(params[2])
    if not (0 < eps < big):
        raise DomainError("BAD_PARAMS", "power_log_window needs 0 < eps < R")
    lo, hi = math.log(eps), math.log(big)
    w = (hi - lo) / 4.0

    def window(r):
        x = np.log(r)
        return smooth_step((lo + w - x) / w) * smooth_step((x - hi + w) / w)

    def window_d(r):
        x = np.log(r)
        rise, fall = smooth_step((lo + w - x) / w), smooth_step((x - hi + w) / w)
        return (-smooth_step_deriv((lo + w - x) / w) * fall + rise * smooth_step_deriv((x - hi + w) / w)) / (w * r)

    def val(r):
        r = np.asarray(r, dtype=float)
        return r**a * window(r)

    def der(r):
        r = np.asarray(r, dtype=float)
        return a * r ** (a - 1) * window(r) + r**a * window_d(r)

    bps = tuple(float(x) for x in np.exp(np.linspace(lo, hi, 17))[1:-1])
    return RadialProfile(val, der, eps, big, bps), None


FAMILIES: dict[str, Callable] = {
    "gaussian": _gaussian,
    "gaussian_shell_mixture": _shell_mixture,
    "bump": _bump,
    "shell_bump": _shell_bump,
    "smooth_step": _smooth_step_family,
    "power_gaussian": _power_gaussian,
    "power_window": _power_window,
    "power_log_window": _power_log_window,
}


def parametric(family: str, params: Sequence[float], d: int) -> TrialFunction:
    """Member of a named family (see :data:`FAMILIES`)."""
    try:
        builder = FAMILIES[family]
    except KeyError:
        raise DomainError("UNKNOWN_FAMILY", f"unknown family {family!r}; known: {sorted(FAMILIES)}") from None
    prof, center = builder(d, tuple(params))
    payload = _RadialPayload(d, prof, family, tuple(float(p) for p in params), center)
    return TrialFunction(Variant.PARAMETRIC, payload)


def gaussian(d: int, sigma: float = 1.0, center: Sequence[float] | None = None) -> TrialFunction:
    return parametric("gaussian", (sigma, *(center or ())), d)


def radial_samples(nodes: Sequence[float], values: Sequence[float], d: int) -> TrialFunction:
    """RADIAL variant from samples on a (log-spaced) radial grid."""
    return TrialFunction(Variant.RADIAL, _SampledPayload(d, tuple(map(float, nodes)), tuple(map(float, values))))


def from_profile(profile: RadialProfile, d: int, family: str = "profile") -> TrialFunction:
    """Wrap an explicit radial profile (may jump to 0 at ``profile.outer``)."""
    return TrialFunction(Variant.RADIAL, _RadialPayload(d, profile, family, ()))


def radial_from_function(func: Callable, d: int, r_max: float, n: int = 400, r_min: float = 1e-6) -> TrialFunction:
    """Sample ``func`` on a log-spaced grid and wrap it as a RADIAL profile."""
    nodes = np.geomspace(r_min, r_max, n)
    vals = np.asarray(func(nodes), dtype=float)
    vals[-1] = 0.0
    return radial_samples(nodes, vals, d)


def grid_function(values, half_width: float) -> TrialFunction:
    values = np.ascontiguousarray(values, dtype=float)
    if values.ndim < 1 or len(set(values.shape)) != 1:
        raise DomainError("BAD_GRID", "grid must have the same number of cells per axis")
    return TrialFunction(Variant.GRID, _GridPayload(GridData(values, float(half_width))))


def sample_on_grid(g: TrialFunction, half_width: float, n: int) -> TrialFunction:
    """Cell-midpoint samples of ``g`` on [-L, L]^d."""
    h = 2.0 * half_width / n
    mid = -half_width + h * (np.arange(n) + 0.5)
    mesh = np.stack(np.meshgrid(*([mid] * g.d), indexing="ij"), axis=-1)
    return grid_function(g(mesh), half_width)


# ---------------------------------------------------------------- bump trains

def bump_train(m: int, a: Sequence[float], d: int | None = None) -> TrialFunction:
    """v_{m,a}(x) = sum_{k=1}^m eta(x + k a)."""
    a = tuple(float(x) for x in np.atleast_1d(a))
    d = len(a) if d is None else d
    if len(a) != d:
        raise DomainError("BAD_PARAMS", f"displacement must have {d} components")
    if int(m) != m or m < 1:
        raise DomainError("BAD_PARAMS", "m must be a positive integer")
    if float(np.linalg.norm(a)) < 2 * ETA_RADIUS:
        raise DomainError("OVERLAP", "|a| < 1/2: bumps overlap")
    return TrialFunction(Variant.BUMP_TRAIN, _BumpTrainPayload(d, int(m), a))


def power_weighted(g: TrialFunction, a: float) -> TrialFunction:
    """|x|^a g(x) for a radial ``g`` (the ground-state substitution)."""
    prof = g.radial
    if prof is None:
        raise DomainError("NOT_RADIAL", "power weighting needs a radial profile")
    return TrialFunction(Variant.RADIAL, _RadialPayload(g.d, prof.power_weighted(a), "power_weighted", (a,)))


def single_bump(d: int) -> TrialFunction:
    """eta itself, as a radial parametric member."""
    return parametric("bump", (ETA_RADIUS,), d)


# ---------------------------------------------------------------- truncation

BASE = 10


def truncate(g, k: int, points=None):
    """Layer between 10^k and 10^{k+1} of |g|.

    ``g`` is an array of samples or a :class:`TrialFunction` evaluated at
    ``points``.  Fractions stay exact.
    """
    vals = _abs_samples(g, points)
    lo, hi = _pow10(k), _pow10(k + 1)
    if vals.dtype == object:
        return np.array([hi - lo if v > hi else (v - lo if v > lo else Fraction(0)) for v in vals.ravel()], dtype=object).reshape(vals.shape)
    lo, hi = float(lo), float(hi)
    return np.where(vals > hi, hi - lo, np.where(vals > lo, vals - lo, 0.0))


def _pow10(k: int):
    return Fraction(BASE) ** int(k)


def _abs_samples(g, points):
    if isinstance(g, TrialFunction):
        if points is None:
            raise ValueError("points are required to sample a TrialFunction")
        g = g(points)
    arr = np.asarray(g)
    if arr.dtype == object:
        return np.abs(arr)
    return np.abs(arr.astype(float))


def truncation_range(values) -> tuple[int, int]:
    """Levels k_min..k_max covering the samples; below k_min the tail is closed form."""
    finite = [abs(float(v)) for v in np.ravel(values) if v != 0]
    if not finite:
        return 0, 0
    k_max = int(math.floor(math.log10(max(finite)))) + 1
    k_min = int(math.floor(math.log10(min(finite)))) - 2
    return k_min, k_max


def truncation_sum(value, k_min: int, k_max: int):
    """sum_{k in Z} T_k(|value|), with levels below k_min summed exactly.

    For v >= 0, sum_{k < K} T_k(v) = min(v, 10^K) (telescoping layers).
    """
    v = abs(Fraction(value))
    total = min(v, _pow10(k_min))
    for k in range(k_min, k_max + 1):
        total += truncate(np.array([v], dtype=object), k)[0]
    return total


def truncation_abs_difference(x, y, k_min: int, k_max: int):
    """sum_k |T_k(|x|) - T_k(|y|)| including the exact tail below k_min."""
    fx, fy = abs(Fraction(x)), abs(Fraction(y))
    lo = _pow10(k_min)
    total = abs(min(fx, lo) - min(fy, lo))
    for k in range(k_min, k_max + 1):
        tx = truncate(np.array([fx], dtype=object), k)[0]
        ty = truncate(np.array([fy], dtype=object), k)[0]
        total += abs(tx - ty)
    return total


@dataclass(frozen=True)
class TruncationReport:
    max_sum_violation: float  # |sum_k T_k(|g|) - |g||
    min_difference_slack: float  # |g(x)-g(y)| - sum_k |g_k(x)-g_k(y)|
    n_points: int
    n_pairs: int
    k_min: int
    k_max: int

    @property
    def ok(self) -> bool:
        return self.max_sum_violation <= 1e-12 and self.min_difference_slack >= -1e-12


def truncation_identities_check(values, pairs: Sequence[tuple[int, int]] = ()) -> TruncationReport:
    """Check both layer-cake identities exactly (values converted to Fractions)."""
    vals = [Fraction(v) if not isinstance(v, Fraction) else v for v in np.ravel(np.asarray(values, dtype=object))]
    k_min, k_max = truncation_range([float(v) for v in vals])
    worst = Fraction(0)
    for v in vals:
        worst = max(worst, abs(truncation_sum(v, k_min, k_max) - abs(v)))
    slack = None
    for i, j in pairs:
        s = abs(abs(vals[i]) - abs(vals[j])) - truncation_abs_difference(vals[i], vals[j], k_min, k_max)
        slack = s if slack is None else min(slack, s)
    return TruncationReport(float(worst), float(slack) if slack is not None else 0.0, len(vals), len(pairs), k_min, k_max)


# ---------------------------------------------------------------- dyadic operators

def _dyadic_values(g) -> np.ndarray:
    if isinstance(g, TrialFunction):
        if g.variant is not Variant.GRID:
            raise DomainError("GRID_NOT_DYADIC", "dyadic operators act on GRID functions")
        g = g.payload.grid.values
    arr = np.asarray(g)
    n = arr.shape[0] if arr.ndim else 0
    if arr.ndim < 1 or any(s != n for s in arr.shape) or n < 1 or n & (n - 1):
        raise DomainError("GRID_NOT_DYADIC", f"shape {arr.shape} is not (2^J,)*d")
    return arr


def _block_means(arr: np.ndarray, side: int) -> np.ndarray:
    """Mean over aligned cubes of ``side`` cells, broadcast back to the grid."""
    d, n = arr.ndim, arr.shape[0]
    m = n // side
    shape = []
    for _ in range(d):
        shape += [m, side]
    blocks = arr.reshape(shape)
    axes = tuple(range(1, 2 * d, 2))
    means = blocks.sum(axis=axes, keepdims=True) / side**d
    return np.broadcast_to(means, blocks.shape).reshape(arr.shape)


def dyadic_maximal(g) -> np.ndarray:
    """max over dyadic cubes Q containing the cell of the mean of |g| on Q."""
    arr = np.abs(_dyadic_values(g).astype(float))
    n = arr.shape[0]
    out = arr.copy()
    side = 2
    while side <= n:
        np.maximum(out, _block_means(arr, side), out=out)
        side *= 2
    return out


def dyadic_sharp(g) -> np.ndarray:
    """max over dyadic cubes Q containing the cell of the mean of |g - (g)_Q| on Q."""
    arr = _dyadic_values(g).astype(float)
    n = arr.shape[0]
    out = np.zeros_like(arr)
    side = 2
    while side <= n:
        dev = np.abs(arr - _block_means(arr, side))
        np.maximum(out, _block_means(dev, side), out=out)
        side *= 2
    return out


# ---------------------------------------------------------------- serialisation

def save_grid(prefix: str | Path, grid: GridData) -> tuple[Path, Path]:
    """Row-major float64 ``prefix.bin`` plus JSON header ``prefix.json``."""
    prefix = Path(prefix)
    bin_path, hdr_path = prefix.with_suffix(".bin"), prefix.with_suffix(".json")
    np.ascontiguousarray(grid.values, dtype="<f8").tofile(bin_path)
    header = {
        "dims": list(grid.values.shape),
        "spacing": grid.spacing,
        "origin": [-grid.half_width] * grid.d,
        "dtype": "float64",
        "order": "C",
        "file": bin_path.name,
    }
    hdr_path.write_text(json.dumps(header, indent=2))
    return bin_path, hdr_path


def load_grid(header_path: str | Path) -> GridData:
    header_path = Path(header_path)
    hdr = json.loads(header_path.read_text())
    dims = tuple(int(x) for x in hdr["dims"])
    data = np.fromfile(header_path.with_name(hdr.get("file", header_path.with_suffix(".bin").name)), dtype="<f8")
    if data.size != int(np.prod(dims)):
        raise LabError("BAD_GRID_FILE", f"expected {np.prod(dims)} values, found {data.size}")
    half = -float(hdr["origin"][0])
    return GridData(data.reshape(dims), half)


def from_descriptor(desc: dict, base_dir: str | Path | None = None) -> TrialFunction:
    """Inverse of :meth:`TrialFunction.to_descriptor` (GRID needs a header path)."""
    variant = desc.get("variant")
    d = int(desc["d"])
    if variant == "PARAMETRIC":
        g = parametric(desc["family"], desc["params"], d)
    elif variant == "RADIAL":
        g = radial_samples(desc["nodes"], desc["values"], d)
    elif variant == "BUMP_TRAIN":
        g = bump_train(int(desc["m"]), desc["a"], d)
    elif variant == "GRID":
        path = Path(desc["header"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        grid = load_grid(path)
        g = TrialFunction(Variant.GRID, _GridPayload(grid))
    else:
        raise DomainError("BAD_DESCRIPTOR", f"unknown variant {variant!r}")
    lam = float(desc.get("dilation", 1.0))
    amp = float(desc.get("amplitude", 1.0))
    if lam != 1.0 or amp != 1.0:
        g = g.transform(lam, amp)
    return g
