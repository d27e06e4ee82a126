import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb_gn import inequality, params, profiles
from coulomb_gn.errors import DomainError, LabError, ParamError
from coulomb_gn.quad import QuadratureSpec

CHEAP = QuadratureSpec(target_rel_err=1e-4, radial_nodes=8)


def lions_gaussian_ratio():
    """Closed-form Gaussian pieces for g = exp(-|x|^2) in R^3.

    ||g||_3^3 = (pi/3)^{3/2};  int |grad g|^2 = 3 (pi/2)^{3/2};
    D(g^2) = M^2 <1/|z|> with M = (pi/2)^{3/2} and z ~ exp(-|z|^2) normalised, <1/|z|> = 2/sqrt(pi).
    """
    lp = (math.pi / 3) ** 0.5
    grad = 3 * (math.pi / 2) ** 1.5
    coul = (math.pi / 2) ** 3 * 2 / math.sqrt(math.pi)
    return lp / (grad ** (1 / 6) * coul ** (1 / 6))


# ------------------------------------------------------------------ gn_ratio

def test_lions_gaussian_ratio_closed_form():
    rep = inequality.gn_ratio(profiles.gaussian(3, 1.0), params.lions_params())
    assert rep.ratio == pytest.approx(lions_gaussian_ratio(), rel=1e-8)
    assert rep.est_rel_err < 1e-5


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_lions_dilation_invariance(lam):
    g = profiles.parametric("shell_bump", (1.0, 0.5), 3)
    ps = params.lions_params()
    base = inequality.gn_ratio(g, ps, CHEAP).ratio
    assert inequality.gn_ratio(g.dilate(lam), ps, CHEAP).ratio / base == pytest.approx(1.0, abs=0.02)


def test_zero_grid_function_flagged():
    g = profiles.grid_function(np.zeros((8, 8, 8)), 1.0)
    rep = inequality.gn_ratio(g, params.lions_params())
    assert "ZERO_FUNCTION" in rep.flags
    assert rep.lhs == 0 and all(f == 0 for f in rep.rhs_factors)
    assert json.loads(json.dumps(rep.to_json()))["ratio"] is None


def test_bump_train_boundary_case_scales_out():
    ps = params.lions_params()
    one = inequality.gn_ratio(profiles.bump_train(1, (100.0, 0, 0)), ps).ratio
    two = inequality.gn_ratio(profiles.bump_train(2, (100.0, 0, 0)), ps).ratio
    assert two / one == pytest.approx(1.0, abs=0.05)


def test_inadmissible_rejected():
    ps = params.ParamSet.from_gamma(3, 1, 2, 2, 2, F(27, 10))
    with pytest.raises(ParamError) as exc:
        inequality.gn_ratio(profiles.gaussian(3), ps)
    assert exc.value.code == "INADMISSIBLE"


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        inequality.gn_ratio(profiles.gaussian(2), params.lions_params())


# ------------------------------------------------------------------ ckn_ratio

def test_unweighted_ckn_equals_gn():
    g = profiles.gaussian(3, 0.8)
    ps = params.lions_params()
    a = inequality.gn_ratio(g, ps, CHEAP)
    b = inequality.ckn_ratio(g, params.CknParamSet.unweighted(ps), CHEAP)
    assert b.ratio == a.ratio


def test_hardy_instantiation_finite():
    ckn = params.hardy_ckn_params(3, F(1, 2), 2)
    g = profiles.power_weighted(profiles.gaussian(3, 1.0), 1.0)
    rep = inequality.ckn_ratio(g, ckn, CHEAP)
    assert math.isfinite(rep.ratio) and rep.ratio > 0


def test_ckn_lhs_weight_scaling():
    ckn = params.hardy_ckn_params(3, F(1, 2), 2)
    g = profiles.parametric("shell_bump", (1.5, 0.5), 3)
    expo = -(float(ckn.tau_prime) + 3 / float(ckn.gamma_prime))
    base = inequality.ckn_ratio(g, ckn, CHEAP)
    for lam in (2.0, 4.0):
        rep = inequality.ckn_ratio(g.dilate(lam), ckn, CHEAP)
        assert rep.lhs / base.lhs == pytest.approx(lam**expo, rel=1e-6)
        assert math.isfinite(rep.ratio)


def test_ckn_domain_gate():
    ckn = params.hardy_ckn_params(3, F(1, 2), 2)
    slow_decay = profiles.RadialProfile(lambda r: 1 / (1 + r**4), None, 0.0, math.inf)
    with pytest.raises(DomainError) as exc:
        inequality.ckn_ratio(profiles.from_profile(slow_decay, 3), ckn)
    assert exc.value.code == "DOMAIN_MISMATCH"


# ------------------------------------------------------------------ families and search

def test_mixture_reference_is_single_gaussian():
    fam = inequality.mixture_family(3)
    g = fam.member(fam.reference)
    x = np.random.default_rng(0).standard_normal((10, 3))
    assert np.allclose(g(x), profiles.gaussian(3, 1.0)(x))


def test_bad_family_box():
    with pytest.raises(LabError):
        inequality.ParametricFamily("x", (1.0,), (0.0,), (0.5,), 3)


def test_search_lower_bounds_single_gaussian():
    ps = params.lions_params()
    single = inequality.gn_ratio(profiles.gaussian(3), ps, CHEAP).ratio
    res = inequality.estimate_best_constant(ps, inequality.mixture_family(3), budget=12, spec=CHEAP, starts=2)
    assert res.sup_ratio >= single
    assert res.status == "BUDGET_EXHAUSTED"
    assert res.evaluations == len(res.trace) <= 12
    assert res.to_json()["sup_ratio"] == res.sup_ratio


def test_dilation_search_stays_flat():
    ps = params.lions_params()
    fam = inequality.dilation_family(profiles.parametric("shell_bump", (1.0, 0.5), 3))
    res = inequality.estimate_best_constant(ps, fam, budget=10, spec=CHEAP, starts=2)
    ratios = [t.ratio for t in res.trace if t.error is None]
    assert max(ratios) / min(ratios) == pytest.approx(1.0, abs=0.02)


def test_running_max_does_not_blow_up():
    rng = np.random.default_rng(7)
    ps = params.lions_params()
    fam = inequality.mixture_family(3)
    lo, hi = np.array(fam.lower), np.array(fam.upper)
    running, after10 = 0.0, None
    for k in range(50):
        x = lo + (hi - lo) * rng.uniform(size=lo.size)
        try:
            r = inequality.gn_ratio(fam.member(x), ps, CHEAP).ratio
        except LabError:
            continue
        if math.isfinite(r):
            running = max(running, r)
        if k == 9:
            after10 = running
    assert after10 > 0 and running <= 10 * after10


# ------------------------------------------------------------------ growth scan

def test_tail_slope_of_exact_line():
    m = [2, 4, 8, 16, 32]
    slope, intercept, rms = inequality.fit_tail_slope(m, [math.e * x**0.2 for x in m])
    assert slope == pytest.approx(0.2, abs=1e-12) and intercept == pytest.approx(1.0, abs=1e-12)


def test_inadmissible_scan_slope():
    ps = params.ParamSet.from_gamma(3, 1, 2, 2, 2, F(27, 10))
    res = inequality.counterexample_scan(ps, [2, 4, 8, 16, 32])
    assert res.predicted_slope == pytest.approx(0.2, abs=1e-12)
    assert 0.1 <= res.slope <= 0.3
    lines = res.to_csv().splitlines()
    assert lines[0] == "m,ratio,ratio_pow_gamma,est_rel_err" and len(lines) == 6


def test_lions_scan_flat():
    res = inequality.counterexample_scan(params.lions_params(), [2, 4, 8, 16, 32])
    assert abs(res.slope) <= 0.05


def test_single_point_scan_has_intercept_only():
    res = inequality.counterexample_scan(params.lions_params(), [1])
    assert res.slope is None or math.isnan(res.slope)
    assert res.intercept == pytest.approx(math.log(res.ratio_pow[0]))


# ------------------------------------------------------------------ Hardy remainder

def test_gradient_remainder_gaussian_closed_form():
    rep = inequality.hardy_remainder_report(profiles.gaussian(3, 1.0), 3, 1.0, 2.0)
    grad = 3 * (math.pi / 2) ** 1.5
    hardy = 2 * math.pi * math.sqrt(math.pi / 2)
    assert rep.seminorm == pytest.approx(grad, rel=1e-9)
    assert rep.hardy_term == pytest.approx(hardy, rel=1e-9)
    assert rep.F == pytest.approx(grad - 0.25 * hardy, rel=1e-9)


def test_ground_state_identity_at_p2():
    rep = inequality.hardy_remainder_report(profiles.gaussian(3, 1.0), 3, 0.5, 2.0)
    assert rep.F == pytest.approx(rep.W, rel=1e-10)
    assert rep.remainder_residual >= -3 * rep.remainder_abs_err
    assert rep.chain_residual >= -3 * rep.chain_abs_err


@pytest.mark.parametrize("s", [0.5, 1.0])
def test_truncated_extremal_nearly_cancels(s):
    a = -(3 - 2 * s) / 2
    u = profiles.parametric("power_log_window", (a, 1e-6, 1e6), 3)
    rep = inequality.hardy_remainder_report(u, 3, s, 2.0)
    assert rep.F / rep.seminorm < 0.2
    assert rep.F >= -3 * rep.F_abs_err


@settings(max_examples=4, deadline=None)
@given(sigma=st.floats(0.4, 2.0), c=st.floats(0.8, 2.0))
def test_remainder_residuals_nonnegative(sigma, c):
    u = profiles.parametric("gaussian_shell_mixture", (1.0, sigma, 0.0, 0.5, 0.4, c), 3)
    for s in (0.5, 1.0):
        rep = inequality.hardy_remainder_report(u, 3, s, 2.0, CHEAP)
        assert rep.remainder_residual >= -3 * rep.remainder_abs_err
        assert rep.chain_residual >= -3 * rep.chain_abs_err
        assert "NEGATIVE_F" not in rep.flags
