from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from coulomb_gn import params
from coulomb_gn.errors import ParamError


def test_lions_betas_exact():
    assert params.solve_scaling_exponents(3, 1, 2, 2, 2, 3) == (F(1, 6), F(1, 6))


def test_negative_beta_rejected():
    with pytest.raises(ParamError) as exc:
        params.solve_scaling_exponents(3, 1, 2, 3, 2, 3)
    assert exc.value.code == "NEGATIVE_BETA"


def test_denominator_identity():
    assert params.scaling_denominator(3, 1, 2, F(5, 2), 2) == 5
    assert params.scaling_denominator(3, 1, 2, 5, 2) == 0
    assert params.solve_scaling_exponents(3, 1, 2, 5, 2, 3) is params.DEGENERATE


def test_lions_admissible_on_boundary():
    rep = params.check_gn_admissible(params.lions_params())
    assert rep.admissible
    assert rep.condition_value == 0
    assert rep.range_form_agrees


def test_gamma_27_inadmissible():
    ps = params.ParamSet.from_gamma(3, 1, 2, 2, 2, F(27, 10))
    assert ps.beta1 == F(15, 162) and ps.beta2 == F(33, 162)
    assert ps.beta1 * ps.gamma + ps.beta2 * ps.gamma == F(4, 5)
    rep = params.check_gn_admissible(ps)
    assert not rep.admissible and rep.range_form_agrees


def test_gamma_range_middle_branch():
    cls = params.classify_gamma_range(3, 1, 2, 2, 2)
    assert (cls.gamma_lo, cls.gamma_hi) == (3, 6)


def test_gamma_range_unbounded_branch():
    cls = params.classify_gamma_range(1, 1, 2, 1, F(1, 2))
    assert cls.gamma_lo == 2
    assert cls.gamma_hi is None


def test_gamma_one_rejected():
    with pytest.raises(ParamError):
        params.solve_scaling_exponents(3, 1, 2, 2, 2, 1)


def test_hardy_instantiation_equality():
    ckn = params.hardy_ckn_params(3, F(1, 2), 2)
    b = ckn.base
    assert b.gamma == ckn.gamma_prime == F(8, 3)
    assert ckn.sigma == ckn.tau_prime
    assert b.beta1 * ckn.gamma_prime + b.beta2 * ckn.gamma_prime == 1
    rep = params.check_ckn_admissible(ckn)
    assert rep.cd4_1 and rep.conclusive


def test_ckn_with_zero_weights_reduces_to_gn():
    for ps in (params.lions_params(), params.ParamSet.from_gamma(3, 1, 2, 2, 2, 4)):
        ckn = params.CknParamSet.unweighted(ps)
        rep = params.ckn_report(ckn)
        assert rep.gn_condition_value == ps.condition_value()
        assert rep.cd4_1 == params.check_gn_admissible(ps).admissible


def test_parse_number_keeps_rationals():
    assert params.parse_number("2/3") == F(2, 3)
    assert params.parse_number("0.25") == F(1, 4)


# ------------------------------------------------------------------ properties

rational = st.fractions(min_value=F(1), max_value=F(6), max_denominator=12)


@settings(max_examples=300, deadline=None)
@given(d=st.integers(1, 4), s=st.fractions(F(0), F(1), max_denominator=8), p=rational, q=rational,
       a=st.fractions(F(1, 20), F(19, 20), max_denominator=20), gamma=st.fractions(F(11, 10), F(12), max_denominator=10))
def test_direct_test_matches_range_form(d, s, p, q, a, gamma):
    assume(p >= 1 and q >= 1)
    alpha = a * d
    assume(not params.is_degenerate(d, s, p, q, alpha))
    try:
        ps = params.ParamSet.from_gamma(d, s, p, q, alpha, gamma)
    except ParamError:
        return
    rep = params.check_gn_admissible(ps)
    assert rep.range_form_agrees


@settings(max_examples=300, deadline=None)
@given(d=st.integers(1, 4), s=st.floats(0, 1), p=st.floats(1, 6), q=st.floats(1, 6),
       a=st.floats(0.01, 0.99), gamma=st.floats(1.01, 12))
def test_scaling_equations_hold(d, s, p, q, a, gamma):
    alpha = a * d
    try:
        b = params.solve_scaling_exponents(d, s, p, q, alpha, gamma)
    except ParamError:
        return
    if b is params.DEGENERATE:
        return
    b1, b2 = b
    assert abs(b1 * p + 2 * b2 * q - 1) <= 1e-12
    assert abs((d - s * p) * b1 + (d + alpha) * b2 - d / gamma) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(d=st.integers(1, 4), s=st.fractions(F(0), F(1), max_denominator=8),
       p=st.fractions(F(1), F(4), max_denominator=2), a=st.fractions(F(1, 20), F(19, 20), max_denominator=20),
       t=st.fractions(F(1, 40), F(39, 40), max_denominator=40))
def test_degenerate_box_matches_direct(d, s, p, a, t):
    assume(s * p < d)
    alpha = a * d
    q = p * (d + alpha) / (2 * (d - s * p))
    assume(q >= 1)
    gamma = p * d / (d - s * p)
    assume(gamma > 1)
    beta1 = t / p
    beta2 = (1 - beta1 * p) / (2 * q)
    ps = params.ParamSet(d, s, p, q, alpha, beta1, beta2, gamma)
    assert params.is_degenerate(d, s, p, q, alpha)
    assert params.check_gn_admissible(ps).range_form_agrees


def test_large_beta2_always_admissible():
    ps = params.ParamSet.from_gamma(1, 1, 2, 1, F(1, 2), 4)
    assert ps.beta2 * ps.gamma >= 1
    assert params.check_gn_admissible(ps).admissible


@settings(max_examples=300, deadline=None)
@given(n=st.integers(1, 50), tau=st.floats(0.01, 3), eta=st.floats(0.01, 3), seed=st.integers(0, 2**31))
def test_power_sum_bound(n, tau, eta, seed):
    assume(tau + eta >= 1)
    rng = np.random.default_rng(seed)
    a, b = rng.exponential(size=n), rng.exponential(size=n)
    lhs, rhs = params.power_sum_bound(a, b, tau, eta)
    assert lhs <= rhs * (1 + 1e-12)
