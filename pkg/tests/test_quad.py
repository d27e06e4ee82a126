import math

import numpy as np
import pytest
from scipy import integrate

from coulomb_gn import params, profiles
from coulomb_gn.errors import DomainError
from coulomb_gn.quad import (
    QuadratureSpec,
    coulomb_energy_weighted,
    lp_norm_weighted,
    poincare_gap,
    seminorm_integral,
    sobolev_seminorm,
    weighted_lp_integral,
)
from coulomb_gn.quad.kernels import angular_kernel, unit_ball_volume


def gauss3():
    return profiles.gaussian(3, 1.0)


# ------------------------------------------------------------------ L^gamma

def test_gaussian_l3_norm():
    est = lp_norm_weighted(gauss3(), 3.0)
    assert est.value == pytest.approx(((math.pi / 3) ** 1.5) ** (1 / 3), rel=1e-10)


def test_indicator_l2_norm():
    ind = profiles.from_profile(profiles.RadialProfile(np.ones_like, None, 0.0, 1.0), 1)
    assert lp_norm_weighted(ind, 2.0).value == pytest.approx(math.sqrt(2), rel=1e-12)


def test_linear_profile_weighted():
    lin = profiles.from_profile(profiles.RadialProfile(lambda r: r, np.ones_like, 0.0, 1.0), 1)
    assert lp_norm_weighted(lin, 2.0, 1.0).value == pytest.approx(math.sqrt(2 / 5), rel=1e-10)


def test_nonintegrable_weight_rejected():
    with pytest.raises(DomainError):
        weighted_lp_integral(gauss3(), 2.0, -2.0)


# ------------------------------------------------------------------ seminorm

def test_s0_is_lp():
    g = profiles.parametric("shell_bump", (1.0, 0.5), 3)
    assert seminorm_integral(g, 0, 2).value == weighted_lp_integral(g, 2.0).value


def test_gaussian_gradient_matches_radial_oracle():
    oracle = 4 * math.pi * integrate.quad(lambda r: 4 * r**4 * math.exp(-2 * r * r), 0, np.inf,
                                          epsabs=0, epsrel=1e-13)[0]
    assert oracle == pytest.approx(3 * (math.pi / 2) ** 1.5, rel=1e-12)
    est = sobolev_seminorm(gauss3(), 1, 2)
    assert est.value == pytest.approx(math.sqrt(oracle), rel=1e-9)


def test_sign_symmetry():
    g = profiles.parametric("gaussian_shell_mixture", (1.0, 0.7, 0.0, -0.5, 0.4, 1.5), 3)
    for s in (0.5, 1.0):
        assert seminorm_integral(g.scale(-1.0), s, 2).value == pytest.approx(seminorm_integral(g, s, 2).value,
                                                                               rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0])
@pytest.mark.parametrize("s", [0.5, 1.0])
def test_seminorm_dilation_covariance(lam, s):
    g, d, p = profiles.parametric("shell_bump", (1.0, 0.5), 3), 3, 2.0
    base = seminorm_integral(g, s, p)
    scaled = seminorm_integral(g.dilate(lam), s, p)
    predicted = lam ** (s * p - d) * base.value
    assert abs(scaled.value - predicted) <= 3 * (scaled.abs_err + lam ** (s * p - d) * base.abs_err) + 1e-10 * predicted


def test_translation_invariance():
    g = profiles.gaussian(3, 0.8)
    h = profiles.gaussian(3, 0.8, center=(0.3, -0.2, 0.5))
    for s in (0.5, 1.0):
        a, b = seminorm_integral(g, s, 2), seminorm_integral(h, s, 2)
        assert abs(a.value - b.value) <= 3 * (a.abs_err + b.abs_err) + 1e-9 * a.value
    a, b = coulomb_energy_weighted(g, 2, 2), coulomb_energy_weighted(h, 2, 2)
    assert abs(a.value - b.value) <= 3 * (a.abs_err + b.abs_err) + 1e-9 * a.value


def test_weighted_fractional_on_grid_unsupported():
    g = profiles.sample_on_grid(profiles.gaussian(1, 1.0), 4.0, 64)
    with pytest.raises(DomainError):
        seminorm_integral(g, 0.5, 2, -0.1, 0.0)


# ------------------------------------------------------------------ Coulomb

def test_alpha_equals_d_factorises():
    g = gauss3()
    l2 = weighted_lp_integral(g, 2.0).value
    assert coulomb_energy_weighted(g, 2, 3).value == pytest.approx(l2**2, rel=1e-12)


def newton_shell_energy():
    """int int rho(x) rho(y) / |x-y| for rho = exp(-2|x|^2) via Newton's shell theorem."""
    rho = lambda r: math.exp(-2 * r * r)
    inner = lambda r: integrate.quad(lambda t: rho(t) * t * t, 0, r, epsabs=0, epsrel=1e-13)[0]
    outer = lambda r: integrate.quad(lambda t: rho(t) * t, r, np.inf, epsabs=0, epsrel=1e-13)[0]
    pot = lambda r: 4 * math.pi * ((inner(r) / r if r > 0 else 0.0) + outer(r))
    return 4 * math.pi * integrate.quad(lambda r: rho(r) * pot(r) * r * r, 0, np.inf, epsabs=0, epsrel=1e-11)[0]


def test_gaussian_coulomb_shell_theorem():
    oracle = newton_shell_energy()
    est = coulomb_energy_weighted(gauss3(), 2, 2)
    assert est.value == pytest.approx(oracle, rel=1e-8)


def test_coulomb_sign_invariance():
    g = profiles.parametric("gaussian_shell_mixture", (1.0, 0.7, 0.0, -0.5, 0.4, 1.5), 3)
    a = coulomb_energy_weighted(g, 2, 2).value
    assert coulomb_energy_weighted(g.scale(-1.0), 2, 2).value == pytest.approx(a, rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_coulomb_dilation_covariance(lam):
    g = profiles.parametric("shell_bump", (1.0, 0.5), 3)
    base = coulomb_energy_weighted(g, 2, 2).value
    assert coulomb_energy_weighted(g.dilate(lam), 2, 2).value == pytest.approx(lam ** (-5) * base, rel=1e-8)


# ------------------------------------------------------------------ method agreement

@pytest.mark.parametrize("seed", range(10))
def test_radial_and_monte_carlo_agree(seed):
    rng = np.random.default_rng(seed)
    a2, s1, s2, r2 = rng.uniform(-1, 1), rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.0), rng.uniform(0.5, 2.5)
    g = profiles.parametric("gaussian_shell_mixture", (1.0, s1, 0.0, a2, s2, r2), 3)
    spec = QuadratureSpec(target_rel_err=1e-5)
    mc = QuadratureSpec(method="MONTE_CARLO", mc_samples=100_000, seed=seed)
    for f in (lambda sp: weighted_lp_integral(g, 3.0, 0.0, sp),
              lambda sp: seminorm_integral(g, 1, 2, spec=sp),
              lambda sp: coulomb_energy_weighted(g, 2, 2, spec=sp)):
        a, b = f(spec), f(mc)
        assert abs(a.value - b.value) <= 3 * (a.abs_err + b.abs_err)


def test_grid_route_close_to_radial():
    g = profiles.gaussian(1, 0.7)
    grid = profiles.sample_on_grid(g, 4.0, 256)
    a, b = weighted_lp_integral(g, 2.0), weighted_lp_integral(grid, 2.0)
    assert b.value == pytest.approx(a.value, rel=1e-6)


# ------------------------------------------------------------------ angular kernel

def test_kernel_d1_at_zero():
    assert angular_kernel(1, 2.0, 0.0) == 2.0


def test_kernel_d3_at_zero():
    assert float(angular_kernel(3, 3.7, 0.0)) == pytest.approx(4 * math.pi, rel=1e-13)


def test_kernel_d2_matches_adaptive_quadrature():
    u, e = 0.5, 1.0
    oracle = 2 * integrate.quad(lambda t: (1 - 2 * u * t + u * u) ** (-e / 2), -1, 1, weight="alg",
                                wvar=(-0.5, -0.5), epsabs=0, epsrel=1e-13)[0]
    assert float(angular_kernel(2, e, u)) == pytest.approx(oracle, rel=1e-10)


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == 2
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


# ------------------------------------------------------------------ local Poincare

def test_poincare_constant_has_zero_gap():
    g = profiles.grid_function(np.full(16, 3.0), 1.0)
    assert poincare_gap(g, params.lions_params(), cube=(0, 16)).gap == 0


def test_poincare_linear_gap():
    n = 64
    x = -1 + (2 / n) * (np.arange(n) + 0.5)
    g = profiles.grid_function(x, 1.0)
    ps = params.ParamSet.from_gamma(1, 1, 2, 2, 0.5, 3)
    assert poincare_gap(g, ps, cube=(0, n)).gap == pytest.approx(0.5, abs=1e-15)


def test_poincare_constant_is_scale_invariant():
    ps = params.lions_params()
    g = profiles.gaussian(3, 1.0)
    consts = [poincare_gap(g.dilate(1 / r), ps, radius=r).empirical_constant(ps) for r in (0.5, 1.0, 2.0)]
    assert all(math.isfinite(c) and c > 0 for c in consts)
    assert max(consts) / min(consts) <= 1.1
