from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb_gn import profiles
from coulomb_gn.errors import DomainError
from coulomb_gn.quad import coulomb_energy_weighted, weighted_lp_integral


def brute_dyadic(vals):
    """Exhaustive max over every dyadic interval containing each cell."""
    n = len(vals)
    mx, sh = np.zeros(n), np.zeros(n)
    sizes = [2**j for j in range(n.bit_length()) if 2**j <= n]
    for size in sizes:
        for start in range(0, n, size):
            block = np.asarray(vals[start:start + size], dtype=float)
            mean_abs = np.abs(block).mean()
            osc = np.abs(block - block.mean()).mean()
            for i in range(start, start + size):
                mx[i] = max(mx[i], mean_abs)
                sh[i] = max(sh[i], osc)
    return mx, sh


# ------------------------------------------------------------------ truncation

@pytest.mark.parametrize("k,expected", [(1, 15), (0, 9), (-1, F(9, 10))])
def test_truncate_cases(k, expected):
    out = profiles.truncate(np.array([F(25)], dtype=object), k)
    assert out[0] == expected


def test_truncate_below_layer():
    for k in range(0, 4):
        assert profiles.truncate(np.array([0.5]), k)[0] == 0


def test_identities_small_example():
    rep = profiles.truncation_identities_check([0, 3, 40], [(0, 1), (1, 2), (0, 2)])
    assert rep.ok and rep.max_sum_violation == 0


def test_constant_has_no_differences():
    rep = profiles.truncation_identities_check([7.5] * 5, [(0, 4), (1, 3)])
    assert rep.ok and rep.min_difference_slack == 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1e6), min_size=2, max_size=40), st.integers(0, 2**31))
def test_identities_hold_for_random_values(vals, seed):
    rng = np.random.default_rng(seed)
    pairs = [tuple(int(i) for i in rng.integers(0, len(vals), 2)) for _ in range(len(vals))]
    rep = profiles.truncation_identities_check(vals, pairs)
    assert rep.max_sum_violation <= 1e-12 and rep.min_difference_slack >= -1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e5, 1e5), min_size=1, max_size=30), st.integers(-4, 5))
def test_truncate_range_and_monotone(vals, k):
    v = np.array(vals)
    t = profiles.truncate(v, k)
    assert np.all(t >= 0) and np.all(t <= 10.0 ** (k + 1) - 10.0**k + 1e-9)
    bigger = profiles.truncate(np.abs(v) * 1.5, k)
    assert np.all(bigger >= t - 1e-12)


# ------------------------------------------------------------------ dyadic

def test_dyadic_constant():
    g = np.full(32, 2.5)
    assert np.allclose(profiles.dyadic_maximal(g), 2.5)
    assert np.allclose(profiles.dyadic_sharp(g), 0.0)


def test_dyadic_single_cell_indicator():
    g = np.zeros(64)
    g[5] = 1.0
    m = profiles.dyadic_maximal(g)
    assert m[5] == 1.0
    assert m[40] == 2.0**-6  # shares only the root interval with cell 5


@pytest.mark.parametrize("seed", range(5))
def test_dyadic_matches_enumeration(seed):
    g = np.random.default_rng(seed).standard_normal(64)
    mx, sh = brute_dyadic(g)
    assert np.allclose(profiles.dyadic_maximal(g), mx, rtol=0, atol=1e-13)
    assert np.allclose(profiles.dyadic_sharp(g), sh, rtol=0, atol=1e-13)


def test_dyadic_two_dimensional_constant():
    g = np.full((8, 8), -3.0)
    assert np.allclose(profiles.dyadic_maximal(g), 3.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=16, max_size=16))
def test_dyadic_pointwise_bounds(vals):
    g = np.array(vals)
    m = profiles.dyadic_maximal(g)
    assert np.all(m >= np.abs(g) - 1e-12)
    assert np.all(profiles.dyadic_sharp(g) <= 2 * m + 1e-12)


# ------------------------------------------------------------------ bumps

def test_mollifier_plateau_and_support():
    eta = profiles.single_bump(1)
    assert eta(np.array([[0.0], [0.1], [0.125]])).tolist() == [1.0, 1.0, 1.0]
    assert eta(np.array([[0.25], [0.3]])).tolist() == [0.0, 0.0]


def test_bump_train_m1_is_single_bump():
    a = weighted_lp_integral(profiles.bump_train(1, (5.0, 0, 0)), 3.0)
    b = weighted_lp_integral(profiles.single_bump(3), 3.0)
    assert abs(a.value - b.value) <= 3 * (a.abs_err + b.abs_err)


def test_bump_train_disjoint_doubles():
    one = weighted_lp_integral(profiles.bump_train(1, (10.0, 0, 0)), 3.0).value
    two = weighted_lp_integral(profiles.bump_train(2, (10.0, 0, 0)), 3.0).value
    assert two == pytest.approx(2 * one, rel=1e-12)


def test_bump_train_overlap_rejected():
    with pytest.raises(DomainError):
        profiles.bump_train(3, (0.3,), 1)


def test_bump_train_coulomb_point_charges():
    # d=3, alpha=2: radial, disjoint bumps interact exactly as point charges (shell theorem)
    R = 64.0
    e_self = coulomb_energy_weighted(profiles.single_bump(3), 2, 2).value
    mass = weighted_lp_integral(profiles.single_bump(3), 2.0).value
    train = coulomb_energy_weighted(profiles.bump_train(8, (R, 0, 0)), 2, 2)
    cross = sum(mass**2 / (abs(j - k) * R) for j in range(8) for k in range(8) if j != k)
    assert train.value == pytest.approx(8 * e_self + cross, rel=1e-6)


# ------------------------------------------------------------------ representations

def test_dilation_convention():
    g = profiles.gaussian(1, 1.0)
    x = np.array([[0.7]])
    assert g.dilate(2.0)(x)[0] == pytest.approx(np.exp(-1.96))


def test_descriptor_round_trip():
    g = profiles.parametric("gaussian_shell_mixture", (1.0, 0.7, 0.0, 0.5, 0.4, 1.5), 3).dilate(1.3)
    h = profiles.from_descriptor(g.to_descriptor())
    x = np.random.default_rng(0).standard_normal((20, 3))
    assert np.array_equal(g(x), h(x))


def test_grid_file_round_trip(tmp_path):
    vals = np.random.default_rng(1).standard_normal((8, 8))
    _, header = profiles.save_grid(tmp_path / "psi", profiles.GridData(vals, 2.0))
    back = profiles.load_grid(header)
    assert np.array_equal(back.values, vals) and back.half_width == 2.0


def test_unknown_family():
    with pytest.raises(DomainError):
        profiles.parametric("nope", (1.0,), 3)


def test_evaluation_is_deterministic():
    g = profiles.parametric("power_log_window", (-1.0, 1e-3, 1e3), 3)
    x = np.abs(np.random.default_rng(2).standard_normal((50, 3)))
    assert np.array_equal(g(x), g(x))
