"""Small quadrature helpers shared by the numerical modules."""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def gl_integrate(fn, a: float, b: float, order: int = 64, panels: int = 1) -> float:
    """Composite Gauss-Legendre on [a, b] with equal panels."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        total += half * float(np.sum(w * fn(0.5 * (hi + lo) + half * x)))
    return total


def quad_log(fn_of_r, r1: float, r2: float, epsrel: float = 1e-13, points=None) -> float:
    """int_{r1}^{r2} fn(r) dr/r by adaptive quadrature in t = log r."""
    if r2 <= r1:
        return 0.0
    t1, t2 = math.log(r1), math.log(r2)
    pts = None
    if points:
        pts = [math.log(p) for p in points if r1 < p < r2]
    with warnings.catch_warnings():
        # tolerances near machine precision trigger roundoff notices
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(lambda t: fn_of_r(math.exp(t)), t1, t2, epsabs=0.0, epsrel=epsrel, limit=400, points=pts or None)
    return float(val)
