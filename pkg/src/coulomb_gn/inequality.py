"""Ratio evaluation, best-constant search, growth scans and the Hardy remainder check.

The ratio of a trial function g is

    ||g||_{L^gamma'(|x|^{tau' gamma'})} / ( [g]^{beta1 p} * D(g)^{beta2} ),

where [g]^p is the (weighted) seminorm integral and D the (weighted)
Coulomb energy.  Its supremum over g is the best constant of the
inequality; any finite value is a lower bound for it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import profiles
from .constants import hardy_constant, remainder_constant
from .errors import DomainError, LabError, ParamError
from .params import CknParamSet, ParamSet, check_ckn_admissible, check_gn_admissible
from .profiles import TrialFunction
from .quad import (
    DEFAULT_SPEC,
    Estimate,
    QuadratureSpec,
    coulomb_energy_weighted,
    seminorm_integral,
    weighted_lp_integral,
)


def _f(x) -> float:
    return float(x)


# ---------------------------------------------------------------- ratios

@dataclass(frozen=True)
class RatioReport:
    lhs: float
    rhs_factors: tuple[float, float]
    ratio: float
    est_rel_err: float
    flags: tuple[str, ...] = ()
    parts: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        out = asdict(self)
        out["rhs_factors"] = list(self.rhs_factors)
        out["flags"] = list(self.flags)
        for k in ("ratio", "est_rel_err"):
            if not math.isfinite(out[k]):
                out[k] = None
        return out


def _assemble(lp: Estimate, gamma_prime: float, sem: Estimate, beta1: float, coul: Estimate,
              beta2: float) -> RatioReport:
    lhs = lp.power(1.0 / gamma_prime)
    f1, f2 = sem.power(beta1), coul.power(beta2)
    parts = {"lp_integral": lp.to_json(), "seminorm_integral": sem.to_json(), "coulomb": coul.to_json()}
    if lhs.value == 0 or f1.value == 0 or f2.value == 0:
        return RatioReport(lhs.value, (f1.value, f2.value), math.nan, math.nan, ("ZERO_FUNCTION",), parts)
    err = lhs.est_rel_err + f1.est_rel_err + f2.est_rel_err
    return RatioReport(lhs.value, (f1.value, f2.value), lhs.value / (f1.value * f2.value), err, (), parts)


def _is_zero(g: TrialFunction) -> bool:
    return g.variant is profiles.Variant.GRID and not np.any(g.payload.grid.values)


def gn_ratio(g: TrialFunction, params: ParamSet, spec: QuadratureSpec = DEFAULT_SPEC,
             allow_inadmissible: bool = False) -> RatioReport:
    """Empirical constant of the unweighted inequality for one trial function.

    Inadmissible tuples are rejected unless ``allow_inadmissible`` is set,
    which is how the growth scan probes them.
    """
    if not allow_inadmissible and not check_gn_admissible(params).admissible:
        raise ParamError("INADMISSIBLE", "beta1*gamma + beta2*gamma < 1")
    if g.d != params.d:
        raise DomainError("DIMENSION_MISMATCH", f"function lives in d={g.d}, parameters in d={params.d}")
    fp = params.as_floats()
    if _is_zero(g):
        return RatioReport(0.0, (0.0, 0.0), math.nan, math.nan, ("ZERO_FUNCTION",))
    lp = weighted_lp_integral(g, fp["gamma"], 0.0, spec)
    sem = seminorm_integral(g, fp["s"], fp["p"], 0.0, 0.0, spec)
    coul = coulomb_energy_weighted(g, fp["q"], fp["alpha"], 0.0, 0.0, spec)
    return _assemble(lp, fp["gamma"], sem, fp["beta1"], coul, fp["beta2"])


def _check_ckn_domain(g: TrialFunction, params: CknParamSet):
    sign = params.domain_sign()
    if sign > 0 and not math.isfinite(g.support_radius()):
        raise DomainError("DOMAIN_MISMATCH", "this branch needs compact support")
    if sign < 0 and not g.zero_radius() > 0:
        raise DomainError("DOMAIN_MISMATCH", "this branch needs g to vanish near the origin")


def ckn_ratio(g: TrialFunction, params: CknParamSet, spec: QuadratureSpec = DEFAULT_SPEC) -> RatioReport:
    """Weighted analogue of :func:`gn_ratio`."""
    check_ckn_admissible(params)
    b = params.base
    if g.d != b.d:
        raise DomainError("DIMENSION_MISMATCH", f"function lives in d={g.d}, parameters in d={b.d}")
    _check_ckn_domain(g, params)
    if _is_zero(g):
        return RatioReport(0.0, (0.0, 0.0), math.nan, math.nan, ("ZERO_FUNCTION",))
    fb = b.as_floats()
    gp, tp = _f(params.gamma_prime), _f(params.tau_prime)
    lp = weighted_lp_integral(g, gp, tp, spec)
    sem = seminorm_integral(g, fb["s"], fb["p"], _f(params.a11), _f(params.a12), spec)
    coul = coulomb_energy_weighted(g, fb["q"], fb["alpha"], _f(params.a21), _f(params.a22), spec)
    return _assemble(lp, gp, sem, fb["beta1"], coul, fb["beta2"])


# ---------------------------------------------------------------- best-constant search

@dataclass(frozen=True)
class ParametricFamily:
    """A box of parameters and the map from a parameter vector to a trial function."""

    name: str
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    reference: tuple[float, ...]
    d: int
    build: Callable[[np.ndarray], TrialFunction] | None = field(default=None, compare=False)

    def __post_init__(self):
        lo, hi, ref = map(np.asarray, (self.lower, self.upper, self.reference))
        if not (lo.shape == hi.shape == ref.shape) or lo.ndim != 1:
            raise DomainError("BAD_FAMILY", "lower, upper and reference must have equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
            raise DomainError("BAD_FAMILY", "parameter box must be bounded with lower < upper")
        if np.any(ref < lo) or np.any(ref > hi):
            raise DomainError("BAD_FAMILY", "reference point outside the box")

    def member(self, x) -> TrialFunction:
        x = np.asarray(x, dtype=float)
        if self.build is not None:
            return self.build(x)
        return profiles.parametric(self.name, tuple(x), self.d)


def dilation_family(g: TrialFunction, lo: float = 0.25, hi: float = 4.0) -> ParametricFamily:
    """{g(x / lam)} with log(lam) in [log lo, log hi]."""
    return ParametricFamily("dilation", (math.log(lo),), (math.log(hi),), (0.0,), g.d,
                            lambda x: g.dilate(math.exp(float(x[0]))))


def mixture_family(d: int) -> ParametricFamily:
    """Two radial Gaussian shells (a1, s1, r1, a2, s2, r2); a single Gaussian is (1, 1, 0, 0, 1, 0)."""
    return ParametricFamily("gaussian_shell_mixture", (0.0, 0.2, 0.0, -1.0, 0.2, 0.0),
                            (2.0, 3.0, 3.0, 1.0, 3.0, 3.0), (1.0, 1.0, 0.0, 0.0, 1.0, 0.0), d)


@dataclass(frozen=True)
class TraceEntry:
    index: int
    start: int
    params: tuple[float, ...]
    ratio: float
    error: str | None = None


@dataclass(frozen=True)
class SearchResult:
    sup_ratio: float
    argmax: tuple[float, ...]
    trace: tuple[TraceEntry, ...]
    status: str
    evaluations: int

    def to_json(self) -> dict:
        return {
            "sup_ratio": self.sup_ratio,
            "argmax": list(self.argmax),
            "status": self.status,
            "evaluations": self.evaluations,
            "trace": [
                {**asdict(t), "params": list(t.params), "ratio": t.ratio if math.isfinite(t.ratio) else None}
                for t in self.trace
            ],
        }


class _Exhausted(Exception):
    pass


def estimate_best_constant(params: ParamSet | CknParamSet, family: ParametricFamily, budget: int = 400,
                           spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0, starts: int = 8) -> SearchResult:
    """Largest ratio found by bounded Nelder-Mead restarted from seeded points.

    The first start is the family's reference point, the others are uniform
    in the box.  The value is a lower bound for the best constant only.
    When the evaluation budget runs out the best point so far is returned
    with status ``BUDGET_EXHAUSTED``.
    """
    if isinstance(params, CknParamSet):
        check_ckn_admissible(params)

        def ratio_of(g):
            return ckn_ratio(g, params, spec)
    else:
        if not check_gn_admissible(params).admissible:
            raise ParamError("INADMISSIBLE", "beta1*gamma + beta2*gamma < 1")

        def ratio_of(g):
            return gn_ratio(g, params, spec)

    if budget < 1:
        raise DomainError("BAD_BUDGET", "budget must be positive")
    lo, hi = np.asarray(family.lower, float), np.asarray(family.upper, float)
    rng = np.random.default_rng(seed)
    points = [np.asarray(family.reference, float)] + [lo + (hi - lo) * rng.random(lo.size) for _ in range(starts - 1)]
    trace: list[TraceEntry] = []
    best = (-math.inf, tuple(family.reference))

    def objective(x, start):
        nonlocal best
        if len(trace) >= budget:
            raise _Exhausted
        x = np.clip(x, lo, hi)
        try:
            rep = ratio_of(family.member(x))
            value, err = rep.ratio, None
        except LabError as exc:
            value, err = math.nan, exc.code
        trace.append(TraceEntry(len(trace), start, tuple(float(v) for v in x), float(value), err))
        if math.isfinite(value) and value > best[0]:
            best = (value, tuple(float(v) for v in x))
        return -value if math.isfinite(value) else math.inf

    status = "CONVERGED"
    for k, x0 in enumerate(points):
        # unused evaluations of a converged start carry over to the next
        share = max((budget - len(trace)) // (len(points) - k), 1)
        try:
            res = minimize(objective, x0, args=(k,), method="Nelder-Mead", bounds=list(zip(lo, hi)),
                           options={"maxfev": share, "xatol": 1e-4, "fatol": 1e-8, "adaptive": False})
        except _Exhausted:
            status = "BUDGET_EXHAUSTED"
            break
        if not res.success:
            status = "BUDGET_EXHAUSTED"
    return SearchResult(best[0], best[1], tuple(trace), status, len(trace))


# ---------------------------------------------------------------- growth scan

@dataclass(frozen=True)
class ScanResult:
    m_values: tuple[int, ...]
    ratios: tuple[float, ...]
    ratio_pow: tuple[float, ...]
    est_rel_errs: tuple[float, ...]
    slope: float | None
    intercept: float | None
    fit_residual: float | None
    predicted_slope: float
    gamma: float

    def to_json(self) -> dict:
        return asdict(self)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "ratio", "ratio_pow_gamma", "est_rel_err"])
        for row in zip(self.m_values, self.ratios, self.ratio_pow, self.est_rel_errs):
            w.writerow(row)
        return buf.getvalue()


def fit_tail_slope(m_values: Sequence[float], y: Sequence[float]) -> tuple[float, float, float] | None:
    """Least-squares slope of log y against log m over the last ceil(n/2) points."""
    n = len(m_values)
    k = math.ceil(n / 2)
    if k < 2:
        return None
    x = np.log(np.asarray(m_values[-k:], float))
    ly = np.log(np.asarray(y[-k:], float))
    coef, res, *_ = np.polyfit(x, ly, 1, full=True)
    rms = math.sqrt(float(res[0]) / k) if len(res) else 0.0
    return float(coef[0]), float(coef[1]), rms


def counterexample_scan(params: ParamSet, m_list: Sequence[int], spec: QuadratureSpec = DEFAULT_SPEC) -> ScanResult:
    """Ratios of bump trains with m bumps spaced |a| = m^2 apart along the first axis.

    ratio^gamma should grow like m^{1 - beta1 gamma - beta2 gamma}.
    """
    fp = params.as_floats()
    gamma = fp["gamma"]
    ms = tuple(int(m) for m in m_list)
    if not ms or min(ms) < 1:
        raise DomainError("BAD_PARAMS", "m values must be positive integers")
    ratios, errs = [], []
    for m in ms:
        a = np.zeros(params.d)
        a[0] = max(float(m * m), 1.0)
        rep = gn_ratio(profiles.bump_train(m, a, params.d), params, spec, allow_inadmissible=True)
        ratios.append(rep.ratio)
        errs.append(rep.est_rel_err)
    powered = [r**gamma for r in ratios]
    fit = fit_tail_slope(ms, powered) if len(ms) > 1 else None
    slope, icpt, resid = fit if fit else (None, None, None)
    if fit is None and len(ms) == 1:
        icpt = math.log(powered[0])
    predicted = 1.0 - fp["beta1"] * gamma - fp["beta2"] * gamma
    return ScanResult(ms, tuple(ratios), tuple(powered), tuple(errs), slope, icpt, resid, predicted, gamma)


# ---------------------------------------------------------------- Hardy remainder

@dataclass(frozen=True)
class HardyRemainderReport:
    d: int
    s: float
    p: float
    hardy_constant: float
    remainder_constant: float
    seminorm: float
    hardy_term: float
    F: float
    F_abs_err: float
    W: float
    W_abs_err: float
    coulomb: float
    lhs: float
    rhs_integral: float
    empirical_constant: float
    remainder_residual: float
    remainder_abs_err: float
    chain_residual: float
    chain_abs_err: float
    est_rel_err: float
    flags: tuple[str, ...]

    def to_json(self) -> dict:
        out = asdict(self)
        out["flags"] = list(self.flags)
        return out


def hardy_remainder_report(u: TrialFunction, d: int, s: float, p: float,
                           spec: QuadratureSpec = DEFAULT_SPEC) -> HardyRemainderReport:
    """Hardy-subtracted seminorm F(u), the remainder bound and the composite inequality.

    F = [u]^p - C_H int |u|^p |x|^{-sp} is compared with c_p W(phi), where
    phi = |x|^{(d-sp)/p} u and W is the seminorm of phi with weights
    |x|^{-(d-sp)/2} on each point (gradient energy with |x|^{-(d-p)} when
    s = 1).  The composite left side is F^{1-sp/d} D^{sp/d}, D the Coulomb
    energy of |u|^p with kernel |x-y|^{-sp}; its ratio to int |u|^{p(d+sp)/d}
    is the empirical constant.

    Residuals are absolute; each comes with an absolute error so the check
    is ``residual >= -3 * abs_err``.
    """
    s, p = float(s), float(p)
    sp = s * p
    if u.d != d:
        raise DomainError("DIMENSION_MISMATCH", f"function lives in d={u.d}, requested d={d}")
    if p < 2 or sp >= d:
        raise DomainError("OUT_OF_RANGE", "need p >= 2 and sp < d")
    ch = hardy_constant(d, s, p)
    cp = remainder_constant(p).value
    sem = seminorm_integral(u, s, p, 0.0, 0.0, spec)
    hard = weighted_lp_integral(u, p, -s, spec)
    F = sem.value - ch.value * hard.value
    F_err = sem.abs_err + ch.value * hard.abs_err + ch.est_rel_err * ch.value * hard.value

    phi = profiles.power_weighted(u, (d - sp) / p)
    t = -(d - sp) / (2.0 * p)
    W = seminorm_integral(phi, s, p, t, t, spec)
    rem = F - cp * W.value
    rem_err = F_err + cp * W.abs_err

    coul = coulomb_energy_weighted(u, p, d - sp, 0.0, 0.0, spec)
    rhs = weighted_lp_integral(u, p * (d + sp) / d, 0.0, spec)
    e1, e2 = 1.0 - sp / d, sp / d
    flags = []
    if F < -3.0 * F_err:
        flags.append("NEGATIVE_F")
    Fpos = max(F, 0.0)
    lhs = Fpos**e1 * coul.value**e2
    bound = (cp * W.value) ** e1 * coul.value**e2
    # first-order propagation; F may be tiny, so use the absolute form
    dF = e1 * Fpos ** (e1 - 1.0) * F_err * coul.value**e2 if Fpos > 0 else F_err**e1 * coul.value**e2
    dW = e1 * bound * W.est_rel_err
    chain_err = dF + dW + e2 * (lhs + bound) * coul.est_rel_err
    c_emp = lhs / rhs.value if rhs.value > 0 else math.nan
    rel = (chain_err / lhs if lhs > 0 else math.inf) + rhs.est_rel_err
    return HardyRemainderReport(
        d, s, p, ch.value, cp, sem.value, hard.value, F, F_err, W.value, W.abs_err, coul.value, lhs,
        rhs.value, c_emp, rem, rem_err, lhs - bound, chain_err, rel, tuple(flags),
    )


__all__ = [
    "RatioReport",
    "gn_ratio",
    "ckn_ratio",
    "ParametricFamily",
    "dilation_family",
    "mixture_family",
    "TraceEntry",
    "SearchResult",
    "estimate_best_constant",
    "ScanResult",
    "fit_tail_slope",
    "counterexample_scan",
    "HardyRemainderReport",
    "hardy_remainder_report",
]
