import math

import numpy as np
import pytest

from adamslab.kernel import (
    KernelSpec,
    SingularityError,
    annulus_integral,
    check_conditions,
    damped_riesz,
    estimate_normalization,
    eval_kernel,
    sublaplacian_kernel,
    kernel_star,
    modified_riesz,
    rearranged_equivalence_check,
    riesz,
    unbounded_angular_example,
)
from adamslab.measure_space import DomainError, euclidean
from adamslab.mt import heisenberg_A_alpha2


def test_eval_examples():
    assert eval_kernel(riesz(2, 1), [0.0, 0.0], [2.0, 0.0]) == pytest.approx(0.5, rel=1e-15)
    assert eval_kernel(modified_riesz(2, 1), [0.0, 0.0], [4.0, 0.0]) == pytest.approx(0.5, rel=1e-15)
    x = np.array([0.0, 0.0, 0.0])
    y = np.array([1.0, 0.0, 0.0])
    assert eval_kernel(sublaplacian_kernel(1), x, y) == pytest.approx(1 / (2 * math.pi), rel=1e-12)
    with pytest.raises(SingularityError):
        eval_kernel(riesz(2, 1), [1.0, 1.0], [1.0, 1.0])


def test_invalid_riesz_pair():
    # alpha = n leaves no negative homogeneity
    with pytest.raises(DomainError):
        riesz(2, 2)


def test_annulus_examples():
    assert annulus_integral(riesz(2, 1), 1.0, math.e) == pytest.approx(2 * math.pi, rel=1e-12)
    assert annulus_integral(modified_riesz(2, 1), 2.0, 2 * math.e) == pytest.approx(8 * math.pi, rel=1e-10)
    assert abs(annulus_integral(riesz(3, 1), 1.0 - 1e-15, 1.0)) < 1e-12
    with pytest.raises(DomainError):
        annulus_integral(riesz(2, 1), 2.0, 1.0)


@pytest.mark.parametrize("n,alpha", [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2)])
def test_riesz_normalization(n, alpha):
    k = riesz(n, alpha)
    est = estimate_normalization(k)
    ball = k.profile.unit_ball_volume
    assert est.A0 == pytest.approx(ball, rel=1e-6)
    assert est.A_inf == pytest.approx(ball, rel=1e-6)
    assert est.certified and not est.critical


def test_modified_and_damped_normalization():
    k = modified_riesz(2, 1)
    est = estimate_normalization(k)
    assert est.A0 == pytest.approx(math.pi, rel=1e-6)
    assert est.A_inf == pytest.approx(4 * math.pi, rel=1e-6)
    d = estimate_normalization(damped_riesz(2, 1))
    assert d.A_inf == 0.0 and d.critical
    assert math.isfinite(d.residuals["tail_integral"])


def test_integrable_diagonal_is_reported_not_raised():
    k = KernelSpec(euclidean(2), beta=2.0, homogeneity=-0.5, name="mild")
    est = estimate_normalization(k)
    assert not est.certified


def test_check_conditions_riesz_and_sublaplacian():
    rep = check_conditions(riesz(3, 1))
    assert rep.passed
    B = rep.cases[0].measured["B"]
    assert B == pytest.approx((4 * math.pi / 3) ** (2 / 3), rel=0.1)
    rep = check_conditions(sublaplacian_kernel(1))
    assert rep.passed
    A0 = rep.cases[-1].measured["A0"]
    assert A0 == pytest.approx(heisenberg_A_alpha2(1), rel=1e-6)


def test_unbounded_angular_profile_fails_k3():
    rep = check_conditions(unbounded_angular_example())
    assert not rep.passed
    k3 = rep.cases[0]
    assert k3.name == "pointwise_bound" and not k3.passed
    assert k3.measured["witness_radius"] > 0


def test_rearranged_equivalence():
    assert rearranged_equivalence_check(riesz(2, 1), 1.0, math.e ** 2) <= 1e-8
    assert rearranged_equivalence_check(riesz(2, 1), 1.0 - 1e-15, 1.0) <= 1e-12
    k = modified_riesz(2, 1)
    # across the far-field transition the kernel is not monotone, so the two sides
    # differ by at most the mass of the non-monotone shell 1 <= d <= 3
    shell = annulus_integral(k, 1.0, 3.0)
    for t2 in (5.0, 10.0, 100.0):
        assert 0 < rearranged_equivalence_check(k, 1.0, t2) <= shell
    with pytest.raises(DomainError):
        rearranged_equivalence_check(k, 0.0, 1.0)


def test_kernel_star_pure_power():
    ks = kernel_star(riesz(2, 1))
    t = np.geomspace(1e-3, 1e3, 7)
    # |x|^{-1} with |x| = sqrt(t / pi)
    assert np.allclose(ks(t), np.sqrt(math.pi / t), rtol=1e-12)


def test_kernel_dict_round_trip():
    k = modified_riesz(3, 2)
    k2 = KernelSpec.from_dict(k.to_dict())
    d = np.geomspace(0.1, 10, 9)
    assert np.allclose(k2.magnitude(d), k.magnitude(d), rtol=1e-12)
