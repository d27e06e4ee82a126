"""Small-N many-body checks: one-body density, Hoffman-Ostenhof, Lieb-Oxford, Hardy-Lieb-Thirring.

Grid states live in d = 1 with N = 2 or 3 particles: psi is piecewise
constant on the n^N cells of [-L, L]^N.  Interaction integrals use exact
cell-pair averages of |x - y|^{-gamma}, so the Lieb-Oxford quantities are
exact integrals of that piecewise-constant state.  Product states
psi = u x ... x u carry any N; their integrals factor into one-particle
functionals of u, evaluated by the quadrature front end.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy.integrate import quad as scalar_quad

from . import profiles
from .constants import fdl_constant, hardy_constant
from .constants import fdl_reconstruct as _fdl_rhs
from .errors import DomainError
from .profiles import RadialProfile, TrialFunction, Variant, _RadialPayload, _TransformedPayload
from .quad import (
    DEFAULT_SPEC,
    ROUNDOFF_FLOOR,
    Estimate,
    QuadratureSpec,
    _radial_refined,
    coulomb_energy_weighted,
    radial_profile,
    seminorm_integral,
    weighted_lp_integral,
)
from .quad import grid as qgrid
from .quad import radial as qradial
from .quad.kernels import unit_ball_volume

NORM_TOL = 1e-10
MAX_GRID_POINTS = 128**3
#: extension factor of the window used for the maximal function
MAXIMAL_EXTENSION = 4
#: cells per unit length when a product state is sampled for the Lieb-Oxford model
PRODUCT_CELLS = 1024


class StateKind(enum.Enum):
    GRID = "GRID"
    PRODUCT = "PRODUCT"


@dataclass(frozen=True)
class WavefunctionN:
    """N-particle state normalised in L^p; build with :meth:`from_grid` or :meth:`product`."""

    N: int
    d: int
    kind: StateKind
    p: float
    values: np.ndarray | None = None
    half_width: float | None = None
    u: TrialFunction | None = None

    @classmethod
    def from_grid(cls, values, half_width: float, p: float = 2.0) -> "WavefunctionN":
        v = np.ascontiguousarray(values, dtype=float)
        N = v.ndim
        if N < 2 or N > 3 or len(set(v.shape)) != 1:
            raise DomainError("BAD_STATE", "grid states need N in {2, 3} and equal axes")
        if v.size > MAX_GRID_POINTS:
            raise DomainError("BAD_STATE", f"at most {MAX_GRID_POINTS} grid points")
        h = 2.0 * half_width / v.shape[0]
        norm = float(np.sum(np.abs(v) ** p)) * h**N
        if norm == 0:
            raise DomainError("ZERO_FUNCTION", "psi vanishes identically")
        return cls(N, 1, StateKind.GRID, float(p), v / norm ** (1.0 / p), float(half_width))

    @classmethod
    def from_grid_file(cls, header: str | Path, p: float = 2.0) -> "WavefunctionN":
        gd = profiles.load_grid(header)
        return cls.from_grid(gd.values, gd.half_width, p)

    @classmethod
    def product(cls, u: TrialFunction, N: int, p: float = 2.0,
                spec: QuadratureSpec = DEFAULT_SPEC) -> "WavefunctionN":
        if N < 1:
            raise DomainError("BAD_STATE", "N must be positive")
        if u.d > 3:
            raise DomainError("UNSUPPORTED_DIM", "product states support d <= 3")
        mass = weighted_lp_integral(u, p, 0.0, spec).value
        if mass <= 0:
            raise DomainError("ZERO_FUNCTION", "u vanishes identically")
        return cls(int(N), u.d, StateKind.PRODUCT, float(p), u=u.scale(mass ** (-1.0 / p)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    def midpoints(self) -> np.ndarray:
        h = self.spacing
        return -self.half_width + h * (np.arange(self.n) + 0.5)

    def norm(self, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
        """int |psi|^p over R^{dN}."""
        if self.kind is StateKind.GRID:
            return float(np.sum(np.abs(self.values) ** self.p)) * self.spacing**self.N
        return weighted_lp_integral(self.u, self.p, 0.0, spec).value ** self.N

    def coarsened(self) -> "WavefunctionN":
        return WavefunctionN.from_grid(qgrid.coarsen(self.values), self.half_width, self.p)


# ---------------------------------------------------------------- density

@dataclass(frozen=True)
class DensityProfile:
    values: np.ndarray
    half_width: float
    mass: float
    N: int

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.values.shape[0]


def _slot_marginals(psi: WavefunctionN) -> list[np.ndarray]:
    a = np.abs(psi.values) ** psi.p
    h = psi.spacing
    return [a.sum(axis=tuple(k for k in range(psi.N) if k != i)) * h ** (psi.N - 1) for i in range(psi.N)]


def _sampled_u(psi: WavefunctionN, cells: int | None = None) -> tuple[np.ndarray, float]:
    """|u|^p at cell midpoints on [-L, L], renormalised to unit discrete mass."""
    u = psi.u
    if u.d != 1:
        raise DomainError("UNSUPPORTED_DIM", "sampled product densities are one-dimensional")
    half = u.support_radius() * 1.0001
    n = cells or max(int(PRODUCT_CELLS * half), 256)
    n += n % 2
    h = 2.0 * half / n
    x = -half + h * (np.arange(n) + 0.5)
    w = np.abs(u(x[:, None])) ** psi.p
    return w / (np.sum(w) * h), half


def one_body_density(psi: WavefunctionN, cells: int | None = None) -> DensityProfile:
    """Sum of the slot marginals of |psi|^p; a product state gives N |u|^p (sampled in d = 1)."""
    if psi.kind is StateKind.GRID:
        rho = np.sum(_slot_marginals(psi), axis=0)
        return DensityProfile(rho, psi.half_width, float(np.sum(rho)) * psi.spacing, psi.N)
    w, half = _sampled_u(psi, cells)
    rho = psi.N * w
    h = 2.0 * half / w.size
    return DensityProfile(rho, half, float(np.sum(rho)) * h, psi.N)


# ---------------------------------------------------------------- one-dimensional cell model

def _kernel_matrix(n: int, h: float, gamma: float) -> np.ndarray:
    """Mean of |x - y|^{-gamma} over each pair of cells."""
    k = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    return qgrid.cell_pair_average_1d(k, gamma) * h ** (-gamma)


def _pair_interaction(psi: WavefunctionN, gamma: float) -> float:
    """sum_{i<j} int |psi|^p |x_i - x_j|^{-gamma} for a grid state."""
    a = np.abs(psi.values) ** psi.p
    h = psi.spacing
    K = _kernel_matrix(psi.n, h, gamma)
    total = 0.0
    for i, j in combinations(range(psi.N), 2):
        others = tuple(k for k in range(psi.N) if k not in (i, j))
        m = a.sum(axis=others) if others else a
        total += float(np.sum(m * K)) * h**psi.N
    return total


def _direct_term(rho: np.ndarray, h: float, gamma: float) -> float:
    """(1/2) int int rho(x) rho(y) |x-y|^{-gamma}."""
    return 0.5 * float(rho @ _kernel_matrix(rho.size, h, gamma) @ rho) * h * h


def maximal_function(rho: np.ndarray, extension: int = MAXIMAL_EXTENSION) -> np.ndarray:
    """Centred maximal function over windows of 2k+1 cells, on the grid padded to ``extension`` times its width."""
    n = rho.size
    pad = (extension - 1) * n // 2
    r = np.concatenate([np.zeros(pad), rho, np.zeros(pad)])
    m = r.size
    csum = np.concatenate([[0.0], np.cumsum(r)])
    idx = np.arange(m)
    best = r.copy()
    for k in range(1, m):
        lo = np.clip(idx - k, 0, m)
        hi = np.clip(idx + k + 1, 0, m)
        np.maximum(best, (csum[hi] - csum[lo]) / (2 * k + 1), out=best)
    return best


# ---------------------------------------------------------------- Hoffman-Ostenhof

@dataclass(frozen=True)
class HoffmanOstenhofReport:
    lhs: float
    rhs: float
    gap: float
    est_rel_err: float
    s: float
    p: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 3.0 * self.est_rel_err * max(abs(self.rhs), abs(self.lhs))

    def to_json(self) -> dict:
        return {**asdict(self), "holds": self.holds}


def _exterior_weights(x: np.ndarray, half: float, sp: float, w_out: float) -> np.ndarray:
    """int_{|y| > L} |y|^{w_out} |x - y|^{-1-sp} dy for each x in the box."""
    if w_out == 0:
        return ((half - x) ** (-sp) + (half + x) ** (-sp)) / sp
    out = np.empty_like(x)
    for k, xi in enumerate(x):
        right = scalar_quad(lambda t: (half + t) ** w_out * (half - xi + t) ** (-1 - sp), 0, np.inf)[0]
        left = scalar_quad(lambda t: (half + t) ** w_out * (half + xi + t) ** (-1 - sp), 0, np.inf)[0]
        out[k] = right + left
    return out


def _slices_seminorm(F: np.ndarray, x: np.ndarray, h: float, half: float, s: float, p: float,
                     a1: float, a2: float) -> float:
    """Sum over rows of F of the discrete weighted seminorm of the row (zero outside the box).

    s < 1: midpoint double sum off the diagonal plus the exterior pairs;
    s = 1: forward differences with zero padding, weight at the edge midpoint.
    """
    if s == 1:
        padded = np.pad(F, ((0, 0), (1, 1)))
        diff = np.diff(padded, axis=1) / h
        edges = np.concatenate([[-half], x + h / 2])
        return float(np.sum(np.abs(diff) ** p * np.abs(edges) ** (a1 * p))) * h
    sp = s * p
    dist = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(dist, np.inf)
    K = dist ** (-1.0 - sp) * np.abs(x)[:, None] ** (a1 * p) * np.abs(x)[None, :] ** (a2 * p)
    inside = 0.0
    for row in F:
        inside += float(np.sum(np.abs(row[:, None] - row[None, :]) ** p * K))
    ext_w = (np.abs(x) ** (a1 * p) * _exterior_weights(x, half, sp, a2 * p)
             + np.abs(x) ** (a2 * p) * _exterior_weights(x, half, sp, a1 * p))
    ext = float(np.sum(np.abs(F) ** p @ ext_w))
    return inside * h * h + ext * h


def _grid_ho(psi: WavefunctionN, s: float, p: float, a1: float, a2: float) -> tuple[float, float]:
    x, h, half = psi.midpoints(), psi.spacing, psi.half_width
    rho = np.sum(_slot_marginals(psi), axis=0)
    lhs = _slices_seminorm(rho[None, :] ** (1.0 / p), x, h, half, s, p, a1, a2)
    rhs = 0.0
    for i in range(psi.N):
        rows = np.moveaxis(psi.values, i, -1).reshape(-1, psi.n)
        rhs += _slices_seminorm(rows, x, h, half, s, p, a1, a2) * h ** (psi.N - 1)
    return lhs, rhs


def absolute(g: TrialFunction) -> TrialFunction:
    """|g| for a (possibly translated) radial function."""
    p = g.payload
    lam, amp = 1.0, 1.0
    if isinstance(p, _TransformedPayload):
        lam, amp, p = p.lam, p.amp, p.base
    if not isinstance(p, _RadialPayload):
        raise DomainError("NOT_RADIAL", "|g| is built for radial profiles")
    prof = p.radial.transformed(lam, amp)
    val, der = prof.value, prof.deriv
    new = RadialProfile(
        lambda r: np.abs(val(r)),
        None if der is None else (lambda r: np.sign(val(r)) * der(r)),
        prof.inner, prof.outer, prof.breakpoints, prof.origin_power,
    )
    center = None if p.center is None else tuple(c / lam for c in p.center)
    return TrialFunction(Variant.RADIAL, _RadialPayload(g.d, new, "absolute", (), center))


def hoffman_ostenhof_report(psi: WavefunctionN, s: float, p: float | None = None, a1: float = 0.0,
                            a2: float = 0.0, spec: QuadratureSpec = DEFAULT_SPEC) -> HoffmanOstenhofReport:
    """Seminorm of rho^{1/p} against the slot-summed seminorms of psi."""
    p = psi.p if p is None else float(p)
    if p != psi.p:
        raise DomainError("OUT_OF_RANGE", "p must match the normalisation exponent of psi")
    if not (0 < s <= 1):
        raise DomainError("OUT_OF_RANGE", "0 < s <= 1 required")
    if psi.kind is StateKind.GRID:
        lhs, rhs = _grid_ho(psi, s, p, a1, a2)
        if psi.n % 2 == 0 and psi.n >= 8:
            cl, cr = _grid_ho(psi.coarsened(), s, p, a1, a2)
            err = max(abs(lhs - cl) / abs(lhs) if lhs else 0.0, abs(rhs - cr) / abs(rhs) if rhs else 0.0)
        else:
            err = ROUNDOFF_FLOOR
        return HoffmanOstenhofReport(lhs, rhs, rhs - lhs, max(err, ROUNDOFF_FLOOR), s, p)
    root = absolute(psi.u).scale(psi.N ** (1.0 / p))
    left = seminorm_integral(root, s, p, a1, a2, spec)
    one = seminorm_integral(psi.u, s, p, a1, a2, spec)
    mass = weighted_lp_integral(psi.u, p, 0.0, spec)
    rhs = psi.N * one.value * mass.value ** (psi.N - 1)
    err = left.est_rel_err + one.est_rel_err + (psi.N - 1) * mass.est_rel_err
    return HoffmanOstenhofReport(left.value, rhs, rhs - left.value, err, s, p)


# ---------------------------------------------------------------- Lieb-Oxford

@dataclass(frozen=True)
class LiebOxfordReport:
    gamma: float
    interaction: float
    direct: float
    exchange_bound: float
    residual: float
    est_rel_err: float
    maximal_ratio: float
    cells: int

    @property
    def abs_err(self) -> float:
        return self.est_rel_err * max(self.interaction, self.direct, self.exchange_bound)

    @property
    def holds(self) -> bool:
        return self.residual >= -3.0 * self.abs_err

    def to_json(self) -> dict:
        return {**asdict(self), "abs_err": self.abs_err, "holds": self.holds}


def _lo_terms(psi: WavefunctionN, gamma: float, cells: int | None) -> tuple[float, float, float, float, int]:
    d = 1
    if psi.kind is StateKind.GRID:
        rho = np.sum(_slot_marginals(psi), axis=0)
        h = psi.spacing
        inter = _pair_interaction(psi, gamma)
    else:
        w, half = _sampled_u(psi, cells)
        h = 2.0 * half / w.size
        rho = psi.N * w
        inter = psi.N * (psi.N - 1) / 2.0 * float(w @ _kernel_matrix(w.size, h, gamma) @ w) * h * h
    direct = _direct_term(rho, h, gamma)
    star = maximal_function(rho)
    e = 1.0 + gamma / d
    star_int = float(np.sum(star**e)) * h
    pref = 0.5 * fdl_constant(d, gamma) * d / (gamma * (d - gamma)) * unit_ball_volume(d) ** e
    rho_int = float(np.sum(rho**e)) * h
    return inter, direct, pref * star_int, star_int / rho_int, rho.size


def lieb_oxford_report(psi: WavefunctionN, gamma: float, cells: int | None = None) -> LiebOxfordReport:
    """Pair interaction against the direct term minus the explicit maximal-function bound.

    residual = interaction - direct + (c/2) d/(gamma(d-gamma)) |B_1|^{1+gamma/d} int (rho*)^{1+gamma/d}.
    """
    if psi.d != 1:
        raise DomainError("UNSUPPORTED_DIM", "the Lieb-Oxford check runs in one dimension")
    fdl_constant(1, gamma)  # domain gate
    inter, direct, bound, ratio, m = _lo_terms(psi, gamma, cells)
    residual = inter - direct + bound
    # resolution check: halve the number of cells
    if psi.kind is StateKind.GRID:
        if psi.n % 2 == 0 and psi.n >= 8:
            ci, cd, cb, _, _ = _lo_terms(psi.coarsened(), gamma, None)
        else:
            ci, cd, cb = inter, direct, bound
    else:
        ci, cd, cb, _, _ = _lo_terms(psi, gamma, m // 2)
    scale = max(inter, direct, bound)
    err = max(abs(inter - ci), abs(direct - cd), abs(bound - cb)) / scale
    return LiebOxfordReport(float(gamma), inter, direct, bound, residual, max(err, ROUNDOFF_FLOOR), ratio, m)


# ---------------------------------------------------------------- Hardy-Lieb-Thirring

@dataclass(frozen=True)
class HltReport:
    N: int
    s: float
    p: float
    hardy_constant: float
    kinetic: float
    attraction_slots: float
    attraction_density: float
    energy: float
    repulsion: float
    density_power: float
    empirical_constant: float
    est_rel_err: float

    @property
    def slot_identity_error(self) -> float:
        return abs(self.attraction_slots - self.attraction_density) / abs(self.attraction_density)

    def to_json(self) -> dict:
        return {**asdict(self), "slot_identity_error": self.slot_identity_error}


def _centred(u: TrialFunction) -> tuple[RadialProfile, np.ndarray]:
    p = u.payload
    prof = radial_profile(u, weighted=False)
    lam = 1.0
    if isinstance(p, _TransformedPayload):
        lam, p = p.lam, p.base
    center = np.zeros(u.d) if getattr(p, "center", None) is None else np.asarray(p.center) / lam
    return prof, center


def _line_weighted_integral(func, features: list[float], power: float, weight: float,
                            spec: QuadratureSpec) -> Estimate:
    """int_R |func(x)|^power |x|^weight dx in d = 1 by folding onto the half line."""
    outer = max(abs(f) for f in features)

    def folded(r):
        r = np.asarray(r, dtype=float)
        both = np.abs(func(r)) ** power + np.abs(func(-r)) ** power
        return (0.5 * both) ** (1.0 / power)

    bps = tuple(sorted({abs(f) for f in features if 0 < abs(f) < outer}))
    prof = RadialProfile(folded, None, 0.0, outer, bps)
    return _radial_refined(lambda n: qradial.lp_integral(prof, 1, power, weight / power, n), spec)


def _product_attraction(psi: WavefunctionN, sp: float, spec: QuadratureSpec) -> tuple[Estimate, Estimate]:
    """(sum over slots of int |psi|^p |x_i|^{-sp}, int rho |x|^{-sp}) for a product state."""
    u, N, p = psi.u, psi.N, psi.p
    if u.d == 1:
        prof, c = _centred(u)
        feats = [c[0] + sgn * f for f in prof.features() for sgn in (-1, 1)] + [c[0]]

        def one(x):
            return u(np.asarray(x)[..., None])

        def dens(x):
            return (N * np.abs(u(np.asarray(x)[..., None])) ** p) ** (1.0 / p)

        slot = _line_weighted_integral(one, feats, p, -sp, spec)
        rho = _line_weighted_integral(dens, feats, p, -sp, spec)
        return Estimate(N * slot.value, slot.est_rel_err), rho
    slot = weighted_lp_integral(u, p, -sp / p, spec)
    rho = weighted_lp_integral(u.scale(N ** (1.0 / p)), p, -sp / p, spec)
    return Estimate(N * slot.value, slot.est_rel_err), rho


def hlt_report(psi: WavefunctionN, s: float, p: float | None = None,
               spec: QuadratureSpec = DEFAULT_SPEC) -> HltReport:
    """Hardy-subtracted kinetic energy, pair repulsion and int rho^{1+sp/d}."""
    p = psi.p if p is None else float(p)
    if p != psi.p:
        raise DomainError("OUT_OF_RANGE", "p must match the normalisation exponent of psi")
    d = psi.d
    sp = s * p
    if not (0 < s <= 1 and p >= 2 and sp < d):
        raise DomainError("OUT_OF_RANGE", "need 0 < s <= 1, p >= 2 and sp < d")
    ch = hardy_constant(d, s, p).value
    e = 1.0 + sp / d
    if psi.kind is StateKind.GRID:
        x, h, half = psi.midpoints(), psi.spacing, psi.half_width
        kin = 0.0
        for i in range(psi.N):
            rows = np.moveaxis(psi.values, i, -1).reshape(-1, psi.n)
            kin += _slices_seminorm(rows, x, h, half, s, p, 0.0, 0.0) * h ** (psi.N - 1)
        a = np.abs(psi.values) ** p
        slots = 0.0
        for i in range(psi.N):
            shape = [1] * psi.N
            shape[i] = psi.n
            slots += float(np.sum(a * np.abs(x).reshape(shape) ** (-sp))) * h**psi.N
        rho = np.sum(_slot_marginals(psi), axis=0)
        dens = float(np.sum(rho * np.abs(x) ** (-sp))) * h
        rep = _pair_interaction(psi, sp)
        power = float(np.sum(rho**e)) * h
        energy = kin - ch * slots
        c_emp = (energy + rep) / power
        return HltReport(psi.N, s, p, ch, kin, slots, dens, energy, rep, power, c_emp, ROUNDOFF_FLOOR)
    u, N = psi.u, psi.N
    kin1 = seminorm_integral(u, s, p, 0.0, 0.0, spec)
    slots, dens = _product_attraction(psi, sp, spec)
    coul = coulomb_energy_weighted(u, p, d - sp, 0.0, 0.0, spec)
    high = weighted_lp_integral(u, p * e, 0.0, spec)
    kin = N * kin1.value
    energy = kin - ch * slots.value
    rep = N * (N - 1) / 2.0 * coul.value
    power = N**e * high.value
    c_emp = (energy + rep) / power
    num_err = kin * kin1.est_rel_err + ch * slots.abs_err + rep * coul.est_rel_err
    err = num_err / abs(energy + rep) + high.est_rel_err
    return HltReport(N, s, p, ch, kin, slots.value, dens.value, energy, rep, power, c_emp, err)


# ---------------------------------------------------------------- ball decomposition check

@dataclass(frozen=True)
class FdlCheck:
    lhs: float
    rhs: float
    residual: float


def fdl_reconstruct(x, y, gamma: float) -> FdlCheck:
    """|x-y|^{-gamma} against its ball-decomposition integral; residual is relative."""
    x, y = np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(y, float))
    dist = float(np.linalg.norm(x - y))
    if dist == 0:
        raise DomainError("OUT_OF_RANGE", "x and y must differ")
    lhs = dist ** (-gamma)
    rhs = _fdl_rhs(x, y, gamma)
    return FdlCheck(lhs, rhs, abs(rhs - lhs) / lhs)


__all__ = [
    "StateKind",
    "WavefunctionN",
    "DensityProfile",
    "one_body_density",
    "maximal_function",
    "absolute",
    "HoffmanOstenhofReport",
    "hoffman_ostenhof_report",
    "LiebOxfordReport",
    "lieb_oxford_report",
    "HltReport",
    "hlt_report",
    "FdlCheck",
    "fdl_reconstruct",
]
