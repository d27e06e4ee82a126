import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb_gn import manybody, profiles
from coulomb_gn.acceptance import random_grid_state
from coulomb_gn.errors import DomainError
from coulomb_gn.quad import seminorm_integral, weighted_lp_integral

WavefunctionN = manybody.WavefunctionN


def bump_d1(center=0.8):
    return profiles.parametric("bump", (0.5, center), 1)


def normalised(u, p=2.0):
    return u.scale(weighted_lp_integral(u, p).value ** (-1 / p))


def symmetric_grid(n=32, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return a + a.T


# ------------------------------------------------------------------ states and density

def test_product_density_is_n_times_u():
    psi = WavefunctionN.product(bump_d1(), 2)
    rho = manybody.one_body_density(psi)
    assert rho.mass == pytest.approx(2.0, rel=1e-12)
    x = -rho.half_width + rho.spacing * (np.arange(rho.values.size) + 0.5)
    u = np.abs(bump_d1()(x[:, None])) ** 2
    assert np.allclose(rho.values, 2 * u / (np.sum(u) * rho.spacing))


def test_symmetric_grid_has_equal_marginals():
    psi = WavefunctionN.from_grid(symmetric_grid(), 2.0)
    a = np.abs(psi.values) ** 2
    m0, m1 = a.sum(axis=1) * psi.spacing, a.sum(axis=0) * psi.spacing
    assert np.allclose(m0, m1, rtol=1e-13)
    assert np.allclose(manybody.one_body_density(psi).values, 2 * m0, rtol=1e-13)


@pytest.mark.parametrize("N,n", [(2, 48), (3, 16)])
def test_random_grid_mass(N, n):
    vals = np.random.default_rng(N).standard_normal((n,) * N)
    psi = WavefunctionN.from_grid(vals, 1.5)
    assert manybody.one_body_density(psi).mass == pytest.approx(N, abs=1e-8)


def test_grid_state_limits():
    with pytest.raises(DomainError):
        WavefunctionN.from_grid(np.ones((4, 4, 4, 4)), 1.0)
    with pytest.raises(DomainError):
        WavefunctionN.from_grid(np.zeros((8, 8)), 1.0)


def test_grid_state_from_file(tmp_path):
    vals = symmetric_grid(16)
    _, header = profiles.save_grid(tmp_path / "psi", profiles.GridData(vals, 2.0))
    psi = WavefunctionN.from_grid_file(header)
    assert psi.N == 2 and psi.norm() == pytest.approx(1.0, rel=1e-12)


def brute_window_max(rho, pad):
    """Centred window averages of the zero-extended density, every radius enumerated."""
    ext = np.concatenate([np.zeros(pad), rho, np.zeros(pad)])
    m = ext.size
    out = np.zeros(m)
    for c in range(m):
        out[c] = max(ext[max(c - k, 0):c + k + 1].sum() / (2 * k + 1) for k in range(m))
    return out


def test_maximal_function_matches_window_enumeration():
    rho = np.abs(np.random.default_rng(3).standard_normal(24))
    got = manybody.maximal_function(rho)
    pad = (manybody.MAXIMAL_EXTENSION - 1) * rho.size // 2
    assert np.allclose(got, brute_window_max(rho, pad), rtol=1e-12)
    assert np.all(got[pad:pad + rho.size] >= rho - 1e-15)


# ------------------------------------------------------------------ Hoffman-Ostenhof

@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_ho_equality_fractional(s):
    u = bump_d1()
    rep = manybody.hoffman_ostenhof_report(WavefunctionN.product(u, 2), s)
    expected = 2 * seminorm_integral(normalised(u), s, 2).value
    assert rep.lhs == pytest.approx(expected, rel=1e-8)
    assert abs(rep.gap) <= 3 * rep.est_rel_err * rep.rhs + 1e-12 * rep.rhs


def test_ho_equality_gradient():
    u = profiles.gaussian(3, 1.0)
    rep = manybody.hoffman_ostenhof_report(WavefunctionN.product(u, 2), 1.0)
    expected = 2 * seminorm_integral(normalised(u), 1, 2).value
    assert rep.rhs == pytest.approx(expected, rel=1e-8)
    assert rep.lhs == pytest.approx(rep.rhs, rel=1e-10)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**31))
def test_ho_inequality_random_grid(seed):
    psi = random_grid_state(np.random.default_rng(seed))
    for s in (0.5, 1.0):
        rep = manybody.hoffman_ostenhof_report(psi, s)
        assert rep.holds and rep.gap >= 0


def test_ho_sign_changing_state_strict():
    n, L = 32, 2.0
    x = -L + (2 * L / n) * (np.arange(n) + 0.5)
    psi = WavefunctionN.from_grid(np.outer(x, np.exp(-x * x)) + np.outer(np.exp(-x * x), x), L)
    rep = manybody.hoffman_ostenhof_report(psi, 0.5)
    assert rep.gap > 0


# ------------------------------------------------------------------ Lieb-Oxford

@pytest.mark.parametrize("gamma", [0.25, 0.5])
def test_lo_product_bump(gamma):
    rep = manybody.lieb_oxford_report(WavefunctionN.product(bump_d1(), 2), gamma)
    assert rep.residual >= -3 * rep.abs_err and rep.holds


def test_lo_far_separated_bumps():
    u = profiles.parametric("shell_bump", (5.0, 0.5), 1)
    rep = manybody.lieb_oxford_report(WavefunctionN.product(u, 2), 0.5)
    assert rep.residual >= -3 * rep.abs_err
    assert rep.maximal_ratio >= 1


def test_lo_gamma_at_d_rejected():
    with pytest.raises(DomainError) as exc:
        manybody.lieb_oxford_report(WavefunctionN.product(bump_d1(), 2), 1.0)
    assert exc.value.code == "OUT_OF_RANGE"


@pytest.mark.parametrize("N,n", [(2, 64), (3, 24)])
def test_lo_random_grid(N, n):
    psi = random_grid_state(np.random.default_rng(11), N, n)
    for gamma in (0.25, 0.5):
        assert manybody.lieb_oxford_report(psi, gamma).holds


# ------------------------------------------------------------------ Hardy-Lieb-Thirring

def test_hlt_bump_away_from_origin():
    reps = [manybody.hlt_report(WavefunctionN.product(bump_d1(), N), 0.25) for N in (2, 3)]
    for rep in reps:
        assert math.isfinite(rep.empirical_constant) and rep.empirical_constant > 0
        assert rep.energy + rep.repulsion >= 0
        assert rep.slot_identity_error <= 1e-8
    assert reps[1].empirical_constant >= reps[0].empirical_constant / 2


def test_hlt_grid_state():
    psi = random_grid_state(np.random.default_rng(5), 2, 32)
    rep = manybody.hlt_report(psi, 0.25)
    assert rep.slot_identity_error <= 1e-8
    assert math.isfinite(rep.empirical_constant)


# ------------------------------------------------------------------ ball decomposition

@pytest.mark.parametrize("x,y,gamma,expected", [
    ([0.0], [1.0], 0.5, 1.0),
    ([0.0], [3.0], 0.5, 3 ** -0.5),
    ([0.0, 0.0], [2.0, 0.0], 1.0, 0.5),
])
def test_fdl_points(x, y, gamma, expected):
    chk = manybody.fdl_reconstruct(x, y, gamma)
    assert chk.lhs == pytest.approx(expected, rel=1e-15)
    assert chk.residual <= 0.01


def test_fdl_same_point_rejected():
    with pytest.raises(DomainError):
        manybody.fdl_reconstruct([1.0], [1.0], 0.5)
