"""Acceptance battery: thirteen property checks at desk scale.

``run_suite("quick")`` runs each check at its stated size; ``"full"`` adds
larger batteries on top.  Every check is deterministic (fixed seeds).
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.integrate import quad as scalar_quad

from . import inequality, manybody, params, profiles
from .constants import fdl_constant, hardy_constant, remainder_constant, remainder_objective
from .errors import ParamError
from .quad import QuadratureSpec

SUITES = ("quick", "full")
QUICK_LIMIT_S = 600.0
FULL_LIMIT_S = 3600.0


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.title} ({self.seconds:.1f} s)"

    def to_json(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------- 1, 2: parameter algebra

def _rand_frac(rng, lo: Fraction, hi: Fraction, den: int = 12) -> Fraction:
    k = int(rng.integers(1, den))
    return lo + (hi - lo) * Fraction(k, den)


def _nondegenerate_draw(rng):
    d = int(rng.integers(1, 5))
    s = Fraction(int(rng.integers(0, 9)), 8)
    p = Fraction(int(rng.integers(2, 13)), 2)
    q = Fraction(int(rng.integers(2, 13)), 2)
    alpha = _rand_frac(rng, Fraction(0), Fraction(d))
    gamma = Fraction(int(rng.integers(101, 1300)), 100)
    return d, s, p, q, alpha, gamma


def check_admissibility(suite: str) -> CriterionResult:
    rng = np.random.default_rng(101)
    want = 10_000 if suite == "quick" else 30_000
    agree = total = 0
    while total < want:
        d, s, p, q, alpha, gamma = _nondegenerate_draw(rng)
        if params.is_degenerate(d, s, p, q, alpha):
            continue
        try:
            ps = params.ParamSet.from_gamma(d, s, p, q, alpha, gamma)
        except ParamError:
            continue
        direct = ps.beta1 * ps.gamma + ps.beta2 * ps.gamma >= 1
        ranged = params.classify_gamma_range(d, s, p, q, alpha).contains(ps)
        agree += direct == ranged
        total += 1
    # degenerate: q = p(d+alpha)/(2(d-sp)), gamma forced, beta1 free on the line beta1 p + 2 beta2 q = 1
    dagree = dtotal = 0
    while dtotal < want // 10:
        d = int(rng.integers(1, 5))
        s = Fraction(int(rng.integers(0, 9)), 8)
        p = Fraction(int(rng.integers(2, 9)), 2)
        if s * p >= d:
            continue
        alpha = _rand_frac(rng, Fraction(0), Fraction(d))
        q = p * (d + alpha) / (2 * (d - s * p))
        if q < 1:
            continue
        gamma = p * d / (d - s * p)
        if gamma <= 1:
            continue
        beta1 = _rand_frac(rng, Fraction(0), 1 / p, 40)
        beta2 = (1 - beta1 * p) / (2 * q)
        ps = params.ParamSet(d, s, p, q, alpha, beta1, beta2, gamma)
        direct = ps.beta1 * ps.gamma + ps.beta2 * ps.gamma >= 1
        ranged = params.classify_gamma_range(d, s, p, q, alpha).contains(ps)
        dagree += direct == ranged
        dtotal += 1
    ok = agree == total and dagree == dtotal
    return CriterionResult(1, "admissibility: direct test equals range form", ok,
                           detail={"nondegenerate": [agree, total], "degenerate": [dagree, dtotal]})


def check_scaling(suite: str) -> CriterionResult:
    lions = params.solve_scaling_exponents(3, 1, 2, 2, 2, 3)
    exact = lions == (Fraction(1, 6), Fraction(1, 6))
    rng = np.random.default_rng(202)
    worst, count = 0.0, 0
    want = 10_000 if suite == "quick" else 50_000
    while count < want:
        d = int(rng.integers(1, 5))
        s, p, q = rng.uniform(0, 1), rng.uniform(1, 6), rng.uniform(1, 6)
        alpha, gamma = rng.uniform(0.01, d - 0.01), rng.uniform(1.01, 12)
        try:
            b = params.solve_scaling_exponents(d, s, p, q, alpha, gamma)
        except ParamError:
            continue
        if b is params.DEGENERATE:
            continue
        b1, b2 = b
        r1 = abs(b1 * p + 2 * b2 * q - 1)
        r2 = abs((d - s * p) * b1 + (d + alpha) * b2 - d / gamma)
        worst = max(worst, r1, r2)
        count += 1
    return CriterionResult(2, "scaling exponents", exact and worst <= 1e-12,
                           detail={"lions_exact": exact, "max_residual": worst, "draws": count})


# ---------------------------------------------------------------- 3: dilation invariance

def gn_battery(d: int = 3) -> list[profiles.TrialFunction]:
    P = profiles.parametric
    return [
        P("gaussian", (1.0,), d),
        P("gaussian", (0.6,), d),
        P("shell_bump", (1.0, 0.5), d),
        P("bump", (1.0,), d),
        P("gaussian_shell_mixture", (1.0, 0.7, 0.0, 0.5, 0.4, 1.5), d),
    ]


def ckn_battery(d: int = 3, s: float = 0.5, p: float = 2.0) -> list[profiles.TrialFunction]:
    a = (d - s * p) / p
    return [profiles.power_weighted(g, a) for g in gn_battery(d)]


def check_dilation(suite: str) -> CriterionResult:
    spec = QuadratureSpec(target_rel_err=1e-7)
    lams = (0.5, 2.0) if suite == "quick" else (0.25, 0.5, 2.0, 4.0)
    lions = params.lions_params()
    ckn = params.hardy_ckn_params(3, Fraction(1, 2), 2)
    ratios = []
    for g in gn_battery():
        base = inequality.gn_ratio(g, lions, spec).ratio
        ratios += [inequality.gn_ratio(g.dilate(lam), lions, spec).ratio / base for lam in lams]
    for g in ckn_battery():
        base = inequality.ckn_ratio(g, ckn, spec).ratio
        ratios += [inequality.ckn_ratio(g.dilate(lam), ckn, spec).ratio / base for lam in lams]
    lo, hi = min(ratios), max(ratios)
    return CriterionResult(3, "dilation invariance of the ratio", 0.98 <= lo and hi <= 1.02,
                           detail={"min": lo, "max": hi, "count": len(ratios)})


# ---------------------------------------------------------------- 4, 5: truncation, dyadic

def check_truncation(suite: str) -> CriterionResult:
    rng = np.random.default_rng(404)
    n = 1000 if suite == "quick" else 5000
    mant = rng.integers(1, 10**6, size=n)
    expo = rng.integers(-8, 9, size=n)
    sign = rng.choice([-1, 1], size=n)
    vals = [Fraction(int(sg * m)) * Fraction(10) ** int(e) / 10**6 for sg, m, e in zip(sign, mant, expo)]
    pairs = [tuple(int(v) for v in rng.integers(0, n, size=2)) for _ in range(n)]
    rep = profiles.truncation_identities_check(vals, pairs)
    floats = profiles.truncation_identities_check(rng.standard_normal(200) * 10.0 ** rng.integers(-5, 6, size=200),
                                                  [(i, (i + 1) % 200) for i in range(200)])
    ok = rep.max_sum_violation == 0 and rep.min_difference_slack >= 0 and floats.ok
    return CriterionResult(4, "truncation identities", ok,
                           detail={"exact": asdict(rep), "float": asdict(floats)})


def _dyadic_oracle(arr: np.ndarray) -> tuple[list[Fraction], list[Fraction]]:
    n = arr.size
    vals = [Fraction(int(v)) for v in arr]
    mx, sh = [], []
    for i in range(n):
        best_m, best_s = abs(vals[i]), Fraction(0)
        side = 1
        while side <= n:
            start = (i // side) * side
            block = vals[start:start + side]
            mean_abs = sum(abs(v) for v in block) / side
            mean = sum(block) / side
            osc = sum(abs(v - mean) for v in block) / side
            best_m = max(best_m, mean_abs)
            best_s = max(best_s, osc)
            side *= 2
        mx.append(best_m)
        sh.append(best_s)
    return mx, sh


def check_dyadic(suite: str) -> CriterionResult:
    rng = np.random.default_rng(505)
    trials = 20 if suite == "quick" else 100
    bad = 0
    for _ in range(trials):
        arr = rng.integers(-1000, 1001, size=64)
        mx, sh = _dyadic_oracle(arr)
        got_m = profiles.dyadic_maximal(arr.astype(float))
        got_s = profiles.dyadic_sharp(arr.astype(float))
        bad += sum(Fraction(float(a)) != b for a, b in zip(got_m, mx))
        bad += sum(Fraction(float(a)) != b for a, b in zip(got_s, sh))
    return CriterionResult(5, "dyadic maximal and sharp functions", bad == 0,
                           detail={"grids": trials, "mismatches": bad})


# ---------------------------------------------------------------- 6: constants

def hardy_oracle(d: int, s: float, p: float) -> float:
    """Adaptive quadrature of the d = 1 Hardy-constant integral (independent route)."""
    if d != 1:
        raise ValueError("oracle implemented for d = 1")
    sp = s * p
    c = (d - sp) / p

    def f(r):
        phi = (1 - r) ** (-1 - sp) + (1 + r) ** (-1 - sp)
        return r ** (sp - 1) * abs(math.expm1(c * math.log(r))) ** p * phi

    left = scalar_quad(f, 0, 0.5, epsabs=0, epsrel=1e-13, limit=400)[0]
    right = scalar_quad(f, 0.5, 1, epsabs=0, epsrel=1e-13, limit=400)[0]
    return 2 * (left + right)


def check_constants(suite: str) -> CriterionResult:
    c312 = hardy_constant(3, 1, 2).value
    frac = hardy_constant(1, 0.25, 2).value
    oracle = hardy_oracle(1, 0.25, 2)
    c2 = remainder_constant(2).value
    c3 = remainder_constant(3).value
    grid = np.linspace(0.0, 0.5, 10**6 + 1)[1:-1]
    brute = float(np.min(remainder_objective(grid, 3.0)))
    ok = c312 == 0.25 and abs(frac - oracle) <= 1e-8 and c2 == 1.0 and abs(c3 - brute) <= 1e-9
    return CriterionResult(6, "Hardy and remainder constants", ok,
                           detail={"C_3_1_2": c312, "C_1_quarter_2": frac, "oracle": oracle,
                                   "c_2": c2, "c_3": c3, "c_3_brute": brute})


# ---------------------------------------------------------------- 7: ball decomposition

FDL_GAMMAS = {1: (0.25, 0.5, 0.75), 2: (0.5, 1.0, 1.5), 3: (0.5, 1.5, 2.5)}


def check_fdl(suite: str) -> CriterionResult:
    rng = np.random.default_rng(707)
    pairs = 20 if suite == "quick" else 60
    worst = 0.0
    for d, gammas in FDL_GAMMAS.items():
        for g in gammas:
            for _ in range(pairs):
                x, y = rng.uniform(-3, 3, d), rng.uniform(-3, 3, d)
                worst = max(worst, manybody.fdl_reconstruct(x, y, g).residual)
    g = 0.5
    c = fdl_constant(1, g)
    closed = g * (1 + g) / 2 ** (1 + g)
    ok = worst <= 0.01 and abs(c - closed) <= 1e-8
    return CriterionResult(7, "ball decomposition of the Riesz kernel", ok,
                           detail={"max_residual": worst, "c_1_half": c, "closed_form": closed})


# ---------------------------------------------------------------- 8: growth scan

def inadmissible_preset() -> params.ParamSet:
    return params.ParamSet(3, 1, 2, 2, 2, Fraction(15, 162), Fraction(33, 162), Fraction(27, 10))


def check_scan(suite: str) -> CriterionResult:
    ms = [2, 4, 8, 16, 32] if suite == "quick" else [2, 4, 8, 16, 32, 64]
    bad = inequality.counterexample_scan(inadmissible_preset(), ms)
    good = inequality.counterexample_scan(params.lions_params(), ms)
    ok = 0.1 <= bad.slope <= 0.3 and abs(good.slope) <= 0.05
    return CriterionResult(8, "bump-train slope law", ok,
                           detail={"inadmissible_slope": bad.slope, "predicted": bad.predicted_slope,
                                   "lions_slope": good.slope})


# ---------------------------------------------------------------- 9: Hardy remainder

def hardy_battery(d: int, s: float, p: float) -> list[profiles.TrialFunction]:
    P = profiles.parametric
    a = -(d - s * p) / p
    return [
        P("gaussian", (0.5,), d),
        P("gaussian", (1.0,), d),
        P("gaussian", (2.0,), d),
        P("shell_bump", (1.0, 0.5), d),
        P("shell_bump", (2.0, 1.0), d),
        P("bump", (1.0,), d),
        P("gaussian_shell_mixture", (1.0, 0.7, 0.0, 0.5, 0.4, 1.5), d),
        P("smooth_step", (1.0, 2.0), d),
        P("power_gaussian", (0.5, 1.0), d),
        P("power_log_window", (a, 1e-3, 1e3), d),
    ]


def check_hardy_remainder(suite: str) -> CriterionResult:
    worst = math.inf
    negative = 0
    rows = 0
    for s in (0.5, 1.0):
        for u in hardy_battery(3, s, 2.0):
            rep = inequality.hardy_remainder_report(u, 3, s, 2.0)
            margins = (
                rep.remainder_residual + 3 * rep.remainder_abs_err,
                rep.chain_residual + 3 * rep.chain_abs_err,
                rep.F + 3 * rep.F_abs_err,
            )
            worst = min(worst, *margins)
            negative += "NEGATIVE_F" in rep.flags
            rows += 1
    ok = worst >= 0 and negative == 0
    return CriterionResult(9, "Hardy remainder residuals", ok,
                           detail={"functions": rows, "min_margin": worst, "negative_F": negative})


# ---------------------------------------------------------------- 10-12: many-body

def random_grid_state(rng, N: int = 2, n: int = 32, half: float = 2.0, p: float = 2.0) -> manybody.WavefunctionN:
    """Sum of three random signed separable Gaussian products (generally not symmetric)."""
    x = -half + (2 * half / n) * (np.arange(n) + 0.5)
    psi = np.zeros((n,) * N)
    for _ in range(3):
        term = rng.standard_normal()
        for axis in range(N):
            c, w = rng.uniform(-0.8, 0.8), rng.uniform(0.25, 0.6)
            shape = [1] * N
            shape[axis] = n
            term = term * np.exp(-(((x - c) / w) ** 2)).reshape(shape)
        psi = psi + term
    return manybody.WavefunctionN.from_grid(psi, half, p)


def product_battery_ho() -> list[manybody.WavefunctionN]:
    P = profiles.parametric
    return [
        manybody.WavefunctionN.product(P("bump", (0.5, 0.8), 1), 2),
        manybody.WavefunctionN.product(P("gaussian", (0.7,), 1), 3),
        manybody.WavefunctionN.product(P("gaussian", (1.0,), 3), 2),
    ]


def check_hoffman_ostenhof(suite: str) -> CriterionResult:
    worst_eq = 0.0
    eq_ok = True
    for psi in product_battery_ho():
        for s in (0.5, 1.0):
            rep = manybody.hoffman_ostenhof_report(psi, s)
            scale = max(abs(rep.rhs), abs(rep.lhs))
            worst_eq = max(worst_eq, abs(rep.gap) / scale / rep.est_rel_err)
            eq_ok &= abs(rep.gap) <= 3 * rep.est_rel_err * scale
    rng = np.random.default_rng(1010)
    states = 20 if suite == "quick" else 60
    ineq_ok, min_gap = True, math.inf
    for _ in range(states):
        psi = random_grid_state(rng)
        for s in (0.5, 1.0):
            rep = manybody.hoffman_ostenhof_report(psi, s)
            ineq_ok &= rep.holds
            min_gap = min(min_gap, rep.gap / rep.rhs)
    return CriterionResult(10, "Hoffman-Ostenhof inequality", eq_ok and ineq_ok,
                           detail={"equality_worst_in_err_units": worst_eq, "grid_states": states,
                                   "min_relative_gap": min_gap})


def lieb_oxford_battery(suite: str) -> list[manybody.WavefunctionN]:
    P = profiles.parametric
    two = P("shell_bump", (1.5, 0.5), 1)  # two separated bumps at +-1.5
    rng = np.random.default_rng(1111)
    out = [
        manybody.WavefunctionN.product(P("bump", (0.5,), 1), 2),
        manybody.WavefunctionN.product(P("bump", (0.5,), 1), 3),
        manybody.WavefunctionN.product(two, 2),
        manybody.WavefunctionN.product(two, 3),
        random_grid_state(rng, 2, 64),
        random_grid_state(rng, 3, 32),
    ]
    if suite == "full":
        out += [random_grid_state(rng, 2, 128), random_grid_state(rng, 3, 64)]
    return out


def check_lieb_oxford(suite: str) -> CriterionResult:
    ok, min_margin, ratios = True, math.inf, []
    for psi in lieb_oxford_battery(suite):
        for g in (0.25, 0.5):
            rep = manybody.lieb_oxford_report(psi, g)
            ok &= rep.holds
            min_margin = min(min_margin, rep.residual + 3 * rep.abs_err)
            ratios.append(rep.maximal_ratio)
    return CriterionResult(11, "Lieb-Oxford explicit bound", ok,
                           detail={"min_margin": min_margin, "maximal_ratio_range": [min(ratios), max(ratios)]})


def hlt_battery() -> list[profiles.TrialFunction]:
    P = profiles.parametric
    return [P("bump", (0.5, 0.8), 1), P("gaussian", (0.5,), 1), P("shell_bump", (1.0, 0.5), 1)]


def check_hlt(suite: str) -> CriterionResult:
    ok, worst_identity, consts = True, 0.0, {}
    for k, u in enumerate(hlt_battery()):
        for N in (2, 3):
            rep = manybody.hlt_report(manybody.WavefunctionN.product(u, N), 0.25)
            ok &= rep.energy + rep.repulsion >= 0 and rep.empirical_constant > 0
            worst_identity = max(worst_identity, rep.slot_identity_error)
            consts[f"{k}:{N}"] = rep.empirical_constant
    ok &= worst_identity <= 1e-8
    return CriterionResult(12, "Hardy-Lieb-Thirring probe", ok,
                           detail={"slot_identity_error": worst_identity, "empirical_constants": consts})


# ---------------------------------------------------------------- runner

CHECKS: list[Callable[[str], CriterionResult]] = [
    check_admissibility,
    check_scaling,
    check_dilation,
    check_truncation,
    check_dyadic,
    check_constants,
    check_fdl,
    check_scan,
    check_hardy_remainder,
    check_hoffman_ostenhof,
    check_lieb_oxford,
    check_hlt,
]


@dataclass
class SuiteResult:
    suite: str
    criteria: list[CriterionResult]
    seconds: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def to_json(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "seconds": self.seconds,
                "criteria": [c.to_json() for c in self.criteria]}


def run_suite(suite: str = "quick", log: Callable[[str], None] | None = print,
              only: set[int] | None = None) -> SuiteResult:
    """Run criteria 1-12, then record criterion 13 (whole-suite wall time)."""
    if suite not in SUITES:
        raise ValueError(f"suite must be one of {SUITES}")
    start = time.perf_counter()
    results = []
    for number, check in enumerate(CHECKS, start=1):
        if only is not None and number not in only:
            continue
        t0 = time.perf_counter()
        try:
            res = check(suite)
        except Exception as exc:  # a crash is a failed criterion, not a crashed suite
            res = CriterionResult(number, check.__name__, False, detail={"error": repr(exc)})
        res.seconds = time.perf_counter() - t0
        results.append(res)
        if log:
            log(res.line())
    total = time.perf_counter() - start
    if only is None:
        limit = QUICK_LIMIT_S if suite == "quick" else FULL_LIMIT_S
        ok = all(r.passed for r in results) and total <= limit
        res = CriterionResult(13, f"suite '{suite}' end to end within {limit:.0f} s", ok, total,
                              {"limit_s": limit})
        results.append(res)
        if log:
            log(res.line())
    return SuiteResult(suite, results, total)


__all__ = ["CriterionResult", "SuiteResult", "run_suite", "CHECKS", "SUITES", "hardy_oracle",
           "inadmissible_preset", "random_grid_state"]
