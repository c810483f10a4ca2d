"""Seeded test functions shared by the suites, the tests and the scripts."""

from __future__ import annotations

import math

import numpy as np

from .kernel import KernelSpec
from .measure_space import VolumeProfile, inverse_radius, sphere_area
from .rearrange import GridFunction, log_grid


def random_radial(
    profile: VolumeProfile,
    rng: np.random.Generator,
    per_efold: float = 20.0,
    norm_p: float | None = None,
    target_norm: float | None = None,
    positive: bool = True,
    decreasing: bool = False,
) -> GridFunction:
    """Random piecewise-constant radial function with compact support.

    The support radius is drawn in [0.3, 3] and the inner resolution edge in
    [1e-4, 1e-2] times the support. With `norm_p` the function is rescaled to
    norm `target_norm` (default: uniform in [0.1, 1])."""
    R = float(rng.uniform(0.3, 3.0))
    inner = R * 10.0 ** float(rng.uniform(-4.0, -2.0))
    edges = log_grid(inner, R, per_efold)
    m = edges.size - 1
    knots = rng.exponential(1.0, size=max(2, m // 10 + 2))
    vals = np.interp(np.linspace(0, 1, m), np.linspace(0, 1, knots.size), knots)
    vals = vals * rng.uniform(0.5, 1.5, size=m)
    if not positive:
        vals = vals * rng.choice([-1.0, 1.0], size=m)
    if decreasing:
        vals = np.sort(np.abs(vals))[::-1]
    f = GridFunction.from_edges(profile, edges, vals, inner="extend")
    if norm_p is not None:
        t = float(rng.uniform(0.1, 1.0)) if target_norm is None else target_norm
        f = f.with_values(f.values * (t / f.norm(norm_p)))
    return f


def unit_ball_indicator(profile: VolumeProfile, per_efold: float = 40.0, inner: float = 1e-4) -> GridFunction:
    e = log_grid(inner, 1.0, per_efold)
    return GridFunction.from_edges(profile, e, np.ones(e.size - 1), inner="extend")


def exp_decreasing(profile: VolumeProfile, per_efold: float = 40.0, inner: float = 1e-4, outer: float = 4.0) -> GridFunction:
    """e^{-|x|} sampled on a log grid, truncated at `outer`."""
    return GridFunction.from_callable(profile, lambda r: np.exp(-r), log_grid(inner, outer, per_efold))


def gradient_moser_field(k: KernelSpec, tau: float, per_efold: float = 40.0) -> GridFunction:
    """Radial component v(rho) = -1/(rho (omega L)^{1/n}) on r(tau) < rho < 1, zero inside,
    L = ln(1/r(tau)): the gradient of the normalized truncated logarithm.

    For the normalized gradient kernel its potential is the truncated log itself."""
    n = k.profile.n
    eps = float(inverse_radius(k.profile, tau))
    L = math.log(1.0 / eps)
    e = log_grid(eps, 1.0, per_efold)
    mid = np.sqrt(e[:-1] * e[1:])
    vals = -1.0 / (mid * (sphere_area(n - 1) * L) ** (1.0 / n))
    return GridFunction.from_edges(k.profile, e, vals, inner="zero")
