"""Exact algebra for the Coulomb-Sobolev interpolation parameters.

A parameter tuple (d, s, p, q, alpha, beta1, beta2, gamma) must satisfy the
two scaling equations

    beta1*p + 2*beta2*q = 1,
    (d - s*p)*beta1 + (d + alpha)*beta2 = d/gamma,

and the inequality holds iff ``beta1*gamma + beta2*gamma >= 1``.  Rational
inputs are kept as :class:`fractions.Fraction` so boundary cases (the Lions
tuple sits exactly on the boundary) are decided without rounding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .errors import LabError, ParamError

Number = Union[Fraction, float]

#: absolute tolerance for float comparisons of scaled quantities
TOL = 1e-12
#: relative tolerance for the float degeneracy test
DEGENERACY_RTOL = 1e-10


def parse_number(value) -> Number:
    """Parse ``"1/6"``, ``"2.7"``, ints and Fractions exactly; floats stay floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise LabError("PARSE_ERROR", f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise LabError("PARSE_ERROR", f"not finite: {value!r}")
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            pass
        try:
            out = float(text)
        except ValueError:
            raise LabError("PARSE_ERROR", f"cannot parse number {value!r}") from None
        if not math.isfinite(out):
            raise LabError("PARSE_ERROR", f"not finite: {value!r}")
        return out
    raise LabError("PARSE_ERROR", f"unsupported type {type(value).__name__}")


def _exact(*xs) -> bool:
    return all(isinstance(x, Fraction) for x in xs)


def _norm(*xs) -> tuple:
    """Promote a group of numbers to a common representation."""
    vals = tuple(parse_number(x) for x in xs)
    if _exact(*vals):
        return vals
    return tuple(float(x) for x in vals)


def _close(x: Number, y: Number) -> bool:
    if _exact(x, y):
        return x == y
    return abs(float(x) - float(y)) <= TOL * max(1.0, abs(float(y)))


def _geq(x: Number, y: Number) -> bool:
    if _exact(x, y):
        return x >= y
    return float(x) >= float(y) - TOL * max(1.0, abs(float(y)))


def _leq(x: Number, y: Number) -> bool:
    return _geq(y, x)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, enum.Enum):
        return x.name
    return x


class Branch(enum.Enum):
    NONDEGENERATE = "NONDEGENERATE"
    DEGENERATE = "DEGENERATE"


#: returned by :func:`solve_scaling_exponents` when p(d+alpha) = 2q(d-sp)
DEGENERATE = Branch.DEGENERATE


def scaling_denominator(d, s, p, q, alpha) -> Number:
    """p(d+alpha) - 2q(d-sp); its sign selects the branch of the admissible gamma range."""
    d, s, p, q, alpha = _norm(d, s, p, q, alpha)
    return p * (d + alpha) - 2 * q * (d - s * p)


def is_degenerate(d, s, p, q, alpha) -> bool:
    d, s, p, q, alpha = _norm(d, s, p, q, alpha)
    den = scaling_denominator(d, s, p, q, alpha)
    if _exact(den):
        return den == 0
    scale = max(abs(p * (d + alpha)), abs(2 * q * (d - s * p)), 1.0)
    return abs(den) <= DEGENERACY_RTOL * scale


def _check_ranges(d, s, p, q, alpha, gamma=None) -> None:
    if int(d) != d or d < 1:
        raise ParamError("OUT_OF_RANGE", f"d must be a positive integer, got {d}")
    if not (0 <= s <= 1):
        raise ParamError("OUT_OF_RANGE", f"need 0 <= s <= 1, got {s}")
    if p < 1 or q < 1:
        raise ParamError("OUT_OF_RANGE", f"need p, q >= 1, got p={p}, q={q}")
    if not (0 < alpha < d):
        raise ParamError("OUT_OF_RANGE", f"need 0 < alpha < d, got alpha={alpha}")
    if gamma is not None and not gamma > 1:
        raise ParamError(
            "GAMMA_NOT_ABOVE_ONE",
            "gamma > 1 required; gamma = 1 collapses to the classical case",
        )


def solve_scaling_exponents(d, s, p, q, alpha, gamma):
    """Solve the scaling equations for (beta1, beta2).

    Returns :data:`DEGENERATE` when p(d+alpha) = 2q(d-sp); then gamma is
    forced to pd/(d-sp) and the betas are not determined by gamma alone.
    Raises ``NEGATIVE_BETA`` when the solution leaves the positive quadrant.
    """
    d, s, p, q, alpha, gamma = _norm(d, s, p, q, alpha, gamma)
    _check_ranges(d, s, p, q, alpha, gamma)
    if is_degenerate(d, s, p, q, alpha):
        return DEGENERATE
    den = scaling_denominator(d, s, p, q, alpha)
    beta1 = (gamma * (d + alpha) - 2 * q * d) / (gamma * den)
    beta2 = (p * d - gamma * (d - s * p)) / (gamma * den)
    if not (beta1 > 0 and beta2 > 0):
        raise ParamError(
            "NEGATIVE_BETA",
            f"beta1={_jsonable(beta1)}, beta2={_jsonable(beta2)} not both positive",
            payload={"beta1": _jsonable(beta1), "beta2": _jsonable(beta2)},
        )
    return beta1, beta2


@dataclass(frozen=True)
class ParamSet:
    """Gagliardo-Nirenberg tuple; validated on construction."""

    d: int
    s: Number
    p: Number
    q: Number
    alpha: Number
    beta1: Number
    beta2: Number
    gamma: Number

    def __post_init__(self):
        vals = _norm(self.s, self.p, self.q, self.alpha, self.beta1, self.beta2, self.gamma)
        for name, v in zip(("s", "p", "q", "alpha", "beta1", "beta2", "gamma"), vals):
            object.__setattr__(self, name, v)
        d = parse_number(self.d)
        if int(d) != d:
            raise ParamError("OUT_OF_RANGE", f"d must be an integer, got {self.d}")
        object.__setattr__(self, "d", int(d))
        _check_ranges(self.d, self.s, self.p, self.q, self.alpha, self.gamma)
        if not (self.beta1 > 0 and self.beta2 > 0):
            raise ParamError("NEGATIVE_BETA", "beta1, beta2 must be positive")
        r1, r2 = self.scaling_residuals()
        if not (_close(r1, 0) and _close(r2, 0)):
            raise ParamError(
                "SCALING_VIOLATED",
                f"scaling residuals {_jsonable(r1)}, {_jsonable(r2)}",
            )

    @classmethod
    def from_gamma(cls, d, s, p, q, alpha, gamma) -> "ParamSet":
        """Build from exponents, solving for the betas (nondegenerate case)."""
        betas = solve_scaling_exponents(d, s, p, q, alpha, gamma)
        if betas is DEGENERATE:
            raise ParamError(
                "DEGENERATE", "betas are not determined by gamma; pass them explicitly"
            )
        return cls(d, s, p, q, alpha, betas[0], betas[1], gamma)

    @property
    def exact(self) -> bool:
        return _exact(self.s, self.p, self.q, self.alpha, self.beta1, self.beta2, self.gamma)

    @property
    def sp(self) -> Number:
        return self.s * self.p

    def scaling_residuals(self) -> tuple:
        r1 = self.beta1 * self.p + 2 * self.beta2 * self.q - 1
        r2 = (self.d - self.s * self.p) * self.beta1 + (self.d + self.alpha) * self.beta2 - self.d / self.gamma
        return r1, r2

    def condition_value(self) -> Number:
        """beta1*gamma + beta2*gamma - 1 (admissible iff >= 0)."""
        return self.beta1 * self.gamma + self.beta2 * self.gamma - 1

    def as_floats(self) -> dict:
        return {k: float(getattr(self, k)) for k in ("s", "p", "q", "alpha", "beta1", "beta2", "gamma")} | {"d": self.d}

    def to_json(self) -> dict:
        return {k: _jsonable(getattr(self, k)) for k in ("d", "s", "p", "q", "alpha", "beta1", "beta2", "gamma")}


def lions_params() -> ParamSet:
    """The d=3 tuple with ||g||_3 <= C ||grad g||_2^{1/3} D(|g|^2)^{1/6}."""
    return ParamSet(3, 1, 2, 2, 2, Fraction(1, 6), Fraction(1, 6), 3)


@dataclass(frozen=True)
class RangeClassification:
    """Admissible gamma-interval or, in the degenerate case, the beta box."""

    branch: Branch
    case: str
    gamma_lo: Number | None = None
    gamma_hi: Number | None = None  # None means +infinity
    forced_gamma: Number | None = None
    beta1_min: Number | None = None
    beta2_max: Number | None = None

    def contains(self, params: ParamSet) -> bool:
        if self.branch is Branch.DEGENERATE:
            return _geq(params.beta1, self.beta1_min) and _leq(params.beta2, self.beta2_max) and _geq(params.beta2, 0)
        if not _geq(params.gamma, self.gamma_lo):
            return False
        return self.gamma_hi is None or _leq(params.gamma, self.gamma_hi)

    def to_json(self) -> dict:
        return {k: _jsonable(v) for k, v in self.__dict__.items()}


def classify_gamma_range(d, s, p, q, alpha) -> RangeClassification:
    """Equivalent range form of the admissibility condition.

    Nondegenerate: gamma_* = p(alpha+2qs)/(alpha+sp) and pd/(d-sp) bound
    the interval, ordered by the sign of p(d+alpha) - 2q(d-sp); for sp >= d
    the interval is [gamma_*, inf).  Degenerate: gamma = pd/(d-sp) and
    beta1 >= alpha(d-sp)/(pd(alpha+sp)), 0 <= beta2 <= s(d-sp)/(d(alpha+sp)).
    """
    d, s, p, q, alpha = _norm(d, s, p, q, alpha)
    _check_ranges(d, s, p, q, alpha)
    sp = s * p
    if is_degenerate(d, s, p, q, alpha):
        return RangeClassification(
            Branch.DEGENERATE,
            "BETA_BOX",
            forced_gamma=p * d / (d - sp),
            beta1_min=alpha * (d - sp) / (p * d * (alpha + sp)),
            beta2_max=s * (d - sp) / (d * (alpha + sp)),
        )
    gamma_star = p * (alpha + 2 * q * s) / (alpha + sp)
    if sp >= d:
        return RangeClassification(Branch.NONDEGENERATE, "SP_GE_D", gamma_lo=gamma_star)
    critical = p * d / (d - sp)
    if scaling_denominator(d, s, p, q, alpha) > 0:
        return RangeClassification(Branch.NONDEGENERATE, "SP_LT_D_POSITIVE", gamma_star, critical)
    return RangeClassification(Branch.NONDEGENERATE, "SP_LT_D_NEGATIVE", critical, gamma_star)


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    condition_value: Number
    branch: Branch
    range_form_agrees: bool
    classification: RangeClassification = field(repr=False)

    def to_json(self) -> dict:
        return {
            "admissible": self.admissible,
            "condition_value": _jsonable(self.condition_value),
            "condition_value_float": float(self.condition_value),
            "branch": self.branch.name,
            "range_form_agrees": self.range_form_agrees,
            "classification": self.classification.to_json(),
        }


def check_gn_admissible(params: ParamSet) -> AdmissibilityReport:
    """Direct test beta1*gamma + beta2*gamma >= 1, cross-checked with the range form."""
    value = params.condition_value()
    admissible = _geq(value, 0)
    cls = classify_gamma_range(params.d, params.s, params.p, params.q, params.alpha)
    return AdmissibilityReport(admissible, value, cls.branch, cls.contains(params) == admissible, cls)


@dataclass(frozen=True)
class CknParamSet:
    """Weighted tuple: base exponents plus the power-weight exponents."""

    base: ParamSet
    gamma_prime: Number
    tau_prime: Number
    a11: Number = Fraction(0)
    a12: Number = Fraction(0)
    a21: Number = Fraction(0)
    a22: Number = Fraction(0)

    def __post_init__(self):
        names = ("gamma_prime", "tau_prime", "a11", "a12", "a21", "a22")
        vals = [parse_number(getattr(self, n)) for n in names]
        if not (self.base.exact and _exact(*vals)):
            vals = [float(v) for v in vals]
        for n, v in zip(names, vals):
            object.__setattr__(self, n, v)
        if self.gamma_prime < 1:
            raise ParamError("OUT_OF_RANGE", f"gamma' >= 1 required, got {self.gamma_prime}")
        b = self.base
        lhs = 1 / self.gamma_prime + self.tau_prime / b.d
        rhs = 1 / b.gamma + self.sigma / b.d
        if not _close(lhs, rhs):
            raise ParamError(
                "SCALING_VIOLATED",
                f"1/gamma' + tau'/d = {_jsonable(lhs)} but 1/gamma + sigma/d = {_jsonable(rhs)}",
            )
        if not _geq(b.gamma, self.gamma_prime):
            raise ParamError("OUT_OF_RANGE", "gamma >= gamma' required")

    @property
    def alpha1(self) -> Number:
        return self.a11 + self.a12

    @property
    def alpha2(self) -> Number:
        return self.a21 + self.a22

    @property
    def sigma(self) -> Number:
        b = self.base
        return b.beta1 * b.p * self.alpha1 + b.beta2 * b.q * self.alpha2

    def domain_sign(self) -> int:
        v = 1 / self.gamma_prime + self.tau_prime / self.base.d
        if _close(v, 0):
            return 0
        return 1 if v > 0 else -1

    @classmethod
    def unweighted(cls, base: ParamSet) -> "CknParamSet":
        return cls(base, base.gamma, 0)

    def to_json(self) -> dict:
        out = {"base": self.base.to_json()}
        for k in ("gamma_prime", "tau_prime", "a11", "a12", "a21", "a22"):
            out[k] = _jsonable(getattr(self, k))
        out.update(alpha1=_jsonable(self.alpha1), alpha2=_jsonable(self.alpha2), sigma=_jsonable(self.sigma))
        return out


def hardy_ckn_params(d, s, p) -> CknParamSet:
    """Weighted tuple used to derive the Hardy-Lieb-Thirring bound.

    p = q, gamma' = (d+sp)p/d, alpha = d-sp, beta1 = (d-sp)/(p(d+sp)),
    beta2 = s/(d+sp), tau' = -(d-sp)/p, a11 = a12 = -(d-sp)/(2p),
    a21 = a22 = -(d-sp)/p.
    """
    d = int(d)
    s, p = _norm(s, p)
    sp = s * p
    if not (0 < s <= 1 and p >= 2 and sp < d):
        raise ParamError("OUT_OF_RANGE", "need 0 < s <= 1, p >= 2, sp < d")
    gamma_prime = (d + sp) * p / d
    base = ParamSet(d, s, p, p, d - sp, (d - sp) / (p * (d + sp)), s / (d + sp), gamma_prime)
    w1 = -(d - sp) / (2 * p)
    w2 = -(d - sp) / p
    return CknParamSet(base, gamma_prime, -(d - sp) / p, w1, w1, w2, w2)


@dataclass(frozen=True)
class CknReport:
    cd3: bool
    cd4_1: bool
    cd4_1_value: Number
    cd4_2: bool
    cd4_2_expression: Number
    gn_condition_value: Number
    sign: int
    domain: str

    @property
    def conclusive(self) -> bool:
        return self.cd3 and (self.cd4_1 or self.cd4_2)

    def to_json(self) -> dict:
        out = {k: _jsonable(v) for k, v in self.__dict__.items()}
        out["conclusive"] = self.conclusive
        return out


def ckn_report(params: CknParamSet) -> CknReport:
    """Evaluate the weighted-inequality hypotheses without raising."""
    b = params.base
    gp = params.gamma_prime
    v1 = b.beta1 * gp + b.beta2 * gp - 1
    expr = (b.s * b.p - b.d - params.alpha1 * b.p) / b.p + (b.alpha + b.d + params.alpha2 * b.q) / (2 * b.q)
    gn = b.condition_value()
    nonzero = not _close(expr, 0)
    strict = gn > 0 if _exact(gn) else float(gn) > TOL
    sign = params.domain_sign()
    domain = {1: "COMPACT_SUPPORT", -1: "VANISH_NEAR_ZERO", 0: "UNDECIDED"}[sign]
    cd3 = _geq(b.gamma, gp) and b.gamma > 1
    return CknReport(cd3, _geq(v1, 0), v1, nonzero and strict, expr, gn, sign, domain)


def check_ckn_admissible(params: CknParamSet) -> CknReport:
    """Weighted admissibility; raises ``BOTH_CONDITIONS_FAIL`` when inconclusive."""
    rep = ckn_report(params)
    if not rep.conclusive:
        raise ParamError("BOTH_CONDITIONS_FAIL", "neither weighted alternative holds", payload=rep)
    return rep


def power_sum_bound(a: Sequence[float], b: Sequence[float], tau: float, eta: float) -> tuple[float, float]:
    """(sum a_i^tau b_i^eta, (sum a_i)^tau (sum b_i)^eta) for a, b >= 0.

    The first never exceeds the second when tau + eta >= 1.
    """
    if len(a) != len(b):
        raise ValueError("sequences must have equal length")
    lhs = math.fsum(x**tau * y**eta for x, y in zip(a, b))
    return lhs, math.fsum(a) ** tau * math.fsum(b) ** eta
