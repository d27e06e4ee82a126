"""Monte Carlo estimators with importance sampling of the singular kernels.

Samples are split into independently seeded streams
(``SeedSequence(seed).spawn(streams)``); each stream draws its own block and
the blocks are combined in stream order, so a fixed (seed, streams) pair is
exactly reproducible however the streams are scheduled.  The reported error
is the standard error of the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import sphere_area, unit_ball_volume


@dataclass(frozen=True)
class McResult:
    value: float
    std_error: float
    samples: int

    @property
    def rel_err(self) -> float:
        return self.std_error / abs(self.value) if self.value else math.inf


def _directions(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    z = rng.standard_normal((m, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _in_ball(rng, m, d, radius):
    return _directions(rng, m, d) * (radius * rng.random(m) ** (1.0 / d))[:, None]


class RadialProposal:
    """Defensive importance density for x on a ball.

    Shell weights follow the direction-averaged |g|^power (probed on a fixed
    direction set) mixed with a uniform share; within a shell x is uniform.
    """

    BINS = 256
    PROBE_DIRS = 64
    UNIFORM_SHARE = 0.2

    def __init__(self, g, power: float, radius: float):
        d = g.d
        self.d, self.radius = d, radius
        self.edges = np.linspace(0.0, radius, self.BINS + 1)
        shell = self.edges[1:] ** d - self.edges[:-1] ** d
        self.shell_vol = unit_ball_volume(d) * shell
        probe_rng = np.random.default_rng(np.random.SeedSequence(0x5EED))
        dirs = _directions(probe_rng, self.PROBE_DIRS, d)
        mids = 0.5 * (self.edges[1:] + self.edges[:-1])
        pts = mids[:, None, None] * dirs[None, :, :]
        mass = np.mean(np.abs(g(pts.reshape(-1, d)).reshape(self.BINS, -1)) ** power, axis=1) * self.shell_vol
        uniform = self.shell_vol / self.shell_vol.sum()
        fitted = mass / mass.sum() if mass.sum() > 0 else uniform
        self.prob = (1.0 - self.UNIFORM_SHARE) * fitted + self.UNIFORM_SHARE * uniform
        self.cum = np.cumsum(self.prob)
        self.cum[-1] = 1.0

    def sample(self, rng, m):
        """Points and their density."""
        k = np.searchsorted(self.cum, rng.random(m), side="right")
        k = np.minimum(k, self.BINS - 1)
        lo, hi = self.edges[k] ** self.d, self.edges[k + 1] ** self.d
        r = (lo + rng.random(m) * (hi - lo)) ** (1.0 / self.d)
        x = _directions(rng, m, self.d) * r[:, None]
        return x, self.prob[k] / self.shell_vol[k]


def run_streams(sampler: Callable[[np.random.Generator, int], np.ndarray], samples: int, seed: int,
                streams: int = 4) -> McResult:
    """Mean and standard error of ``sampler`` values over seeded streams."""
    children = np.random.SeedSequence(seed).spawn(streams)
    per = [samples // streams + (1 if k < samples % streams else 0) for k in range(streams)]
    total, total_sq, count = 0.0, 0.0, 0
    for child, m in zip(children, per):
        if m == 0:
            continue
        vals = sampler(np.random.default_rng(child), m)
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        count += m
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return McResult(mean, math.sqrt(var / max(count - 1, 1)), count)


def lp_integral(g, gamma: float, tau: float, radius: float, inner: float, samples: int, seed: int,
                streams: int = 4) -> McResult:
    """int |g|^gamma |x|^{tau gamma}; radii drawn with density proportional to r^{d-1+tau gamma}."""
    d = g.d
    k = d + tau * gamma
    lo = inner

    def mass():
        if k == 0:
            return math.log(radius / lo)
        return (radius**k - lo**k) / k

    z = sphere_area(d) * mass()

    def draw(rng, m):
        u = rng.random(m)
        if k == 0:
            r = lo * (radius / lo) ** u
        else:
            r = (lo**k + u * (radius**k - lo**k)) ** (1.0 / k)
        x = _directions(rng, m, d) * r[:, None]
        return z * np.abs(g(x)) ** gamma

    return run_streams(draw, samples, seed, streams)


def gradient_integral(g, p: float, weight: float, radius: float, samples: int, seed: int,
                      streams: int = 4) -> McResult:
    """int |grad g|^p |x|^weight over the ball of the given radius."""
    d = g.d
    vol = unit_ball_volume(d) * radius**d

    def draw(rng, m):
        x = _in_ball(rng, m, d, radius)
        grad = g.gradient(x)
        r = np.linalg.norm(x, axis=1)
        return vol * np.sum(grad * grad, axis=1) ** (p / 2) * r**weight

    return run_streams(draw, samples, seed, streams)


def seminorm_integral(g, s: float, p: float, t1: float, t2: float, radius: float, samples: int,
                      seed: int, streams: int = 4) -> McResult:
    """Bare weighted seminorm double integral.

    x is drawn from a :class:`RadialProposal` on the ball B containing the
    support (density positive on all of B), the offset z = y - x
    follows the density proportional to |z/l|^{-d+p(1-s)} for |z| < l and
    |z/l|^{-d-sp} beyond (l = radius / 4).  Pairs with y outside B stand in
    for their mirror images, so they carry both weight arrangements.
    """
    d = g.d
    scale = radius / 4.0
    m_in, m_out = 1.0 / (p * (1.0 - s)), 1.0 / (s * p)
    z_mass = sphere_area(d) * scale**d * (m_in + m_out)
    proposal = RadialProposal(g, p, radius)
    e = d + s * p

    def draw(rng, m):
        x, px = proposal.sample(rng, m)
        pick_in = rng.random(m) < m_in / (m_in + m_out)
        u = 1.0 - rng.random(m)  # (0, 1]
        rz = np.where(pick_in, scale * u ** (1.0 / (p * (1.0 - s))), scale * u ** (-1.0 / (s * p)))
        y = x + _directions(rng, m, d) * rz[:, None]
        rel = rz / scale
        density = np.where(rel < 1.0, rel ** (-d + p * (1.0 - s)), rel ** (-e))
        nx = np.linalg.norm(x, axis=1)
        ny = np.linalg.norm(y, axis=1)
        wgt = nx ** (t1 * p) * ny ** (t2 * p)
        outside = ny > radius
        wgt = np.where(outside, wgt + nx ** (t2 * p) * ny ** (t1 * p), wgt)
        f = np.abs(g(x) - g(y)) ** p * wgt * rz ** (-e)
        return z_mass * f / (density * px)

    return run_streams(draw, samples, seed, streams)


def coulomb_integral(g, q: float, alpha: float, a21: float, a22: float, radius: float, samples: int,
                     seed: int, streams: int = 4) -> McResult:
    """Weighted Coulomb integral; offsets drawn proportional to |z|^{-(d-alpha)} on |z| < 2R.

    The reach 2R is the ball diameter, so every pair in B x B can be drawn.
    """
    d = g.d
    proposal = RadialProposal(g, q, radius)
    reach = 2.0 * radius
    z_mass = sphere_area(d) * reach**alpha / alpha

    def draw(rng, m):
        x, px = proposal.sample(rng, m)
        rz = reach * rng.random(m) ** (1.0 / alpha)
        y = x + _directions(rng, m, d) * rz[:, None]
        hx = np.abs(g(x)) ** q
        hy = np.abs(g(y)) ** q
        wgt = np.linalg.norm(x, axis=1) ** (a21 * q) * np.linalg.norm(y, axis=1) ** (a22 * q)
        return z_mass * hx * hy * wgt / px

    return run_streams(draw, samples, seed, streams)
