import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adamslab.extremal import moser_log
from adamslab.measure_space import DomainError, euclidean
from adamslab.mt import (
    InequalityParams,
    exp_truncated,
    gamma_sharp,
    gamma_sharp_gradient,
    heisenberg_A_alpha2,
    heisenberg_A_gradient,
    heisenberg_A_gradient_quadrature,
    msi_ratio,
    regularization_equivalence_check,
    regularization_forms,
    ruf_functional,
)
from adamslab.rearrange import GridFunction, log_grid
from adamslab.samples import random_radial

R2 = euclidean(2)


def test_exp_truncated_examples():
    assert exp_truncated(0, 0.0) == 0.0
    assert exp_truncated(1, 1.0) == pytest.approx(math.e - 2, rel=1e-15)
    y = 1e-3
    assert exp_truncated(2, y) == pytest.approx(y ** 3 / 6 + y ** 4 / 24, rel=1e-12)
    with pytest.raises(DomainError):
        exp_truncated(1, -1.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 6), st.floats(1e-8, 50.0))
def test_exp_truncated_properties(m, y):
    v = exp_truncated(m, y)
    assert v >= 0
    assert exp_truncated(m, y * 1.01) >= v
    ref = math.exp(y) - sum(y ** j / math.factorial(j) for j in range(m + 1))
    if ref > 1e-3 * math.exp(y):
        assert v == pytest.approx(ref, rel=1e-10)


def test_sharp_constants():
    assert gamma_sharp(2, 1) == pytest.approx(4 * math.pi, abs=1e-12)
    assert gamma_sharp(4, 2) == pytest.approx(32 * math.pi ** 2, rel=1e-12)
    for n in range(2, 7):
        assert gamma_sharp(n, 1) == pytest.approx(gamma_sharp_gradient(n), rel=1e-10)
    for bad in [(2, 2), (3, 0), (3, 4)]:
        with pytest.raises(DomainError):
            gamma_sharp(*bad)


def test_heisenberg_constants():
    a1 = heisenberg_A_gradient(1)
    assert a1 == pytest.approx(math.pi ** (-2 / 3) / 4, abs=1e-12)
    assert heisenberg_A_gradient_quadrature(1) == pytest.approx(a1, abs=1e-8)
    a2 = heisenberg_A_gradient(2)
    assert heisenberg_A_gradient(2, gamma_impl="math") == pytest.approx(a2, abs=1e-12)
    assert heisenberg_A_gradient_quadrature(2) == pytest.approx(a2, abs=1e-8)
    assert heisenberg_A_alpha2(1) == pytest.approx(0.125, rel=1e-12)
    v, w = heisenberg_A_alpha2(2, order=64), heisenberg_A_alpha2(2, order=128)
    assert v > 0 and v == pytest.approx(w, rel=1e-10)


def test_msi_ratio_trivial_cases():
    p = InequalityParams.msi(2.0, 2.0, gamma_sharp(2, 1))
    zero = GridFunction(R2, np.array([-np.inf, 0.0]), np.array([0.0]))
    assert msi_ratio(zero, p) == 0.0
    rng = np.random.default_rng(1)
    for _ in range(10):
        u = random_radial(R2, rng)
        u = u.with_values(u.values / np.max(np.abs(u.values)))
        r = msi_ratio(u, p)
        assert 0 < r <= math.exp(p.exp_constant)


def test_msi_ratio_sentinel():
    p = InequalityParams.msi(2.0, 2.0, gamma_sharp(2, 1))
    u = GridFunction(R2, np.array([-np.inf, 0.0]), np.array([10.0]))
    assert msi_ratio(u, p) == math.inf


def test_msi_ratio_grows_past_sharp_constant():
    p = dataclasses.replace(InequalityParams.msi(2.0, 2.0, gamma_sharp(2, 1)), exp_constant=1.1 * gamma_sharp(2, 1))
    vals = [msi_ratio(moser_log(R2, eps, normalized=True), p) for eps in (1e-4, 1e-6)]
    assert vals[1] > 1e3
    # V(eps)^{1 - theta1} = eps^{-0.2} over two decades, up to log factors
    assert 0.5 * 100 ** 0.2 <= vals[1] / vals[0] <= 2 * 100 ** 0.2


def test_ruf_functional_cases():
    p = InequalityParams.ruf(2.0, 4 * math.pi)
    zero = GridFunction(R2, np.array([-np.inf, 0.0]), np.array([0.0]))
    assert ruf_functional(zero, p) == 0.0
    assert p.m == 0 and p.p == 2.0
    p3 = InequalityParams.ruf(1.5, 1.0)
    assert p3.m == 1


def test_regularization_forms():
    p = InequalityParams.msi(2.0, 2.0, 4 * math.pi)
    zero = GridFunction(R2, np.array([-np.inf, 0.0]), np.array([0.0]))
    assert regularization_forms(zero, p) == (0.0, 0.0)
    rng = np.random.default_rng(2)
    for _ in range(5):
        u = random_radial(R2, rng)
        u = u.with_values(0.9 * u.values / np.max(np.abs(u.values)))
        reg, alt = regularization_forms(u, p)
        assert alt == pytest.approx(u.integral_power(2.0), rel=1e-14)
        assert reg <= (math.exp(p.exp_constant) - 1) * u.integral_power(2.0)
    fam = [moser_log(R2, log_depth=L, normalized=True) for L in (8, 12, 16, 24, 32)]
    assert regularization_equivalence_check(fam, p).passed


def test_params_validation():
    with pytest.raises(DomainError):
        InequalityParams.msi(1.0, 2.0, 1.0)
    with pytest.raises(DomainError):
        InequalityParams.msi(2.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        InequalityParams.msi(2.0, 2.0, 0.0)
    assert InequalityParams.msi(2.0, 5.0, 1.0).m == math.ceil(5 / 2 - 1)
