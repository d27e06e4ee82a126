import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb_gn import constants
from coulomb_gn.errors import DomainError


def hardy_d1_oracle(s, p):
    """tanh-sinh quadrature of the d=1 integral at 30 digits."""
    mp.mp.dps = 30
    sp, c = mp.mpf(s) * p, (1 - mp.mpf(s) * p) / p
    f = lambda r: r ** (sp - 1) * abs(1 - r**c) ** p * ((1 - r) ** (-1 - sp) + (1 + r) ** (-1 - sp))
    return float(2 * mp.quad(f, [0, mp.mpf(1) / 2, 1]))


def test_hardy_gradient_case_exact():
    assert constants.hardy_constant(3, 1, 2).value == 0.25


def test_hardy_fractional_d1_matches_oracle():
    oracle = hardy_d1_oracle(0.25, 2)
    assert oracle == pytest.approx(1.4037085997664525, rel=1e-12)
    assert constants.hardy_constant(1, 0.25, 2).value == pytest.approx(oracle, rel=1e-8)


def test_hardy_undefined_when_sp_reaches_d():
    with pytest.raises(DomainError) as exc:
        constants.hardy_constant(1, 0.75, 2)
    assert exc.value.code == "HARDY_UNDEFINED"


def test_hardy_s_to_one_sweep_is_positive():
    vals = [constants.hardy_constant(3, s, 2).value for s in (0.9, 0.95, 0.99)]
    assert all(v > 0 and math.isfinite(v) for v in vals)


def test_remainder_p2_identity():
    r = np.linspace(0.01, 0.49, 7)
    assert np.allclose(constants.remainder_objective(r, 2.0), 1.0, atol=1e-14)
    assert constants.remainder_constant(2).value == 1.0


def test_remainder_p3():
    c = constants.remainder_constant(3)
    golden = mp.findroot(lambda r: mp.diff(lambda t: (1 - t) ** 3 - t**3 + 3 * t**2, r), 0.3)
    assert c.argmin == pytest.approx(float(golden), abs=1e-7)
    assert c.value == pytest.approx(float((1 - golden) ** 3 - golden**3 + 3 * golden**2), rel=1e-12)
    assert c.value == pytest.approx(0.5858, abs=1e-4)


def test_remainder_p4_brute_force():
    grid = np.linspace(0.0, 0.5, 10**6 + 1)[1:-1]
    obj = constants.remainder_objective(grid, 4.0)
    k = int(np.argmin(obj))
    c = constants.remainder_constant(4)
    assert abs(c.value - obj[k]) <= 1e-9
    assert abs(c.argmin - grid[k]) <= grid[1] - grid[0]


@settings(max_examples=30, deadline=None)
@given(st.floats(2.0, 12.0))
def test_remainder_in_unit_interval(p):
    c = constants.remainder_constant(p).value
    assert 0 < c <= 1 + 1e-15


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_fdl_d1_closed_form(gamma):
    assert constants.fdl_constant(1, gamma) == pytest.approx(gamma * (1 + gamma) / 2 ** (1 + gamma), rel=1e-8)


def test_fdl_rejects_gamma_at_d():
    with pytest.raises(DomainError) as exc:
        constants.fdl_constant(1, 1.0)
    assert exc.value.code == "OUT_OF_RANGE"


@pytest.mark.parametrize("x,y,gamma,expected", [
    ([0.0], [1.0], 0.5, 1.0),
    ([0.0], [3.0], 0.5, 3 ** -0.5),
    ([0.0, 0.0], [2.0, 0.0], 1.0, 0.5),
])
def test_fdl_reconstruction_points(x, y, gamma, expected):
    assert constants.fdl_reconstruct(x, y, gamma) == pytest.approx(expected, rel=0.01)


@pytest.mark.parametrize("d,gamma", [(d, g) for d in (1, 2, 3) for g in (0.25, 0.5, 0.75 * d)])
def test_fdl_reconstruction_random_pairs(d, gamma):
    rng = np.random.default_rng(d * 100 + int(gamma * 100))
    for _ in range(20):
        x, y = rng.uniform(-3, 3, d), rng.uniform(-3, 3, d)
        exact = np.linalg.norm(x - y) ** (-gamma)
        assert constants.fdl_reconstruct(x, y, gamma) == pytest.approx(exact, rel=0.01)


def test_lens_volume_limits():
    assert constants.lens_volume(3, 1.0, 0.0) == pytest.approx(4 * math.pi / 3)
    assert constants.lens_volume(2, 1.0, 2.0) == 0


def test_constants_csv_header():
    rows = constants.constants_rows([(3, 1, 2)], [2.0], [(1, 0.5)])
    text = constants.constants_csv(rows)
    assert text.splitlines()[0] == ",".join(constants.CSV_FIELDS)
    assert len(text.splitlines()) == 4
