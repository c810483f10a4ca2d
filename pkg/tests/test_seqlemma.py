import math

import numpy as np
import pytest

from adamslab.measure_space import DomainError
from adamslab.seqlemma import (
    InfeasibleError,
    L_lambda,
    SequenceInstance,
    lambda_reduction,
    mu_bounds_check,
    mu_bruteforce,
    random_instance,
    reduction_postconditions,
    solve_mu,
    witness,
    witness_value,
)


def test_L_lambda_examples():
    assert L_lambda(np.ones(5), 2.0) == 0
    assert L_lambda([0.5, 1, 1], 2.0) == 3
    # two entries 2^{-1/beta'} with beta = beta' = 2: ceil(2) - 1 = 1 each
    assert L_lambda([2 ** -0.5, 2 ** -0.5], 2.0) == 2
    for bad in ([0.0], [1.5], [-0.2]):
        with pytest.raises(DomainError):
            L_lambda(bad, 2.0)


def test_mu_closed_form():
    assert mu_bruteforce(1.0, 2.0, 2.0) == pytest.approx(1 - math.exp(-2), rel=1e-8)


@pytest.mark.parametrize("h", np.geomspace(0.05, 1.0, 10))
def test_mu_scaling_below_one(h):
    assert mu_bruteforce(h, 2.0, 2.0, restarts=8) == pytest.approx(h ** 2 * (1 - math.exp(-2)), rel=1e-8)


def test_solver_agreement_with_restarts():
    for h, lam in [(1.5, ()), (2.0, (0.7, 0.9)), (1.2, (0.5,))]:
        r = solve_mu(h, 2.0, 2.0, lam, K=10, restarts=1000, auto_extend=False)
        assert r.info["kkt_value"] == pytest.approx(r.restart_value, rel=1e-6)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_witness(N):
    a = witness(N, 2.0)
    assert np.sum(a ** 2) == pytest.approx(1.0, rel=1e-15)
    assert np.sum(a) == pytest.approx(N ** 0.5, rel=1e-14)
    inst = SequenceInstance(a, (), 2.0, 2.0, float(np.sum(a)))
    assert inst.objective() == pytest.approx(witness_value(N, 2.0, 2.0), rel=1e-12)
    assert mu_bruteforce(N ** 0.5, 2.0, 2.0, restarts=8) <= witness_value(N, 2.0, 2.0) * (1 + 1e-9)


def test_bounds_band_and_monotone():
    hs = np.sqrt(np.arange(1, 7))
    rep = mu_bounds_check(hs, 2.0, 2.0)
    assert rep.passed
    assert rep.cases[0].measured["band"] < 50


def test_lambda_degradation():
    hs = np.sqrt(np.arange(1, 7))
    rep = mu_bounds_check(hs, 2.0, 2.0, lam=[0.5])
    deg = [c for c in rep.cases if c.name == "lambda_degradation"][0]
    assert deg.inputs["L_lambda"] == 3
    assert deg.measured["min_relative"] >= math.exp(-6)


def test_mu_monotone_in_lambda():
    rng = np.random.default_rng(4)
    for _ in range(20):
        K = int(rng.integers(2, 5))
        lam = rng.uniform(0.3, 1.0, size=K + 1)
        h = float(rng.uniform(0.8, 1.8))
        i = int(rng.integers(0, K + 1))
        bigger = lam.copy()
        bigger[i] = min(1.0, lam[i] * 1.3)
        lo = mu_bruteforce(h, 2.0, 2.0, lam, restarts=8)
        hi = mu_bruteforce(h, 2.0, 2.0, bigger, restarts=8)
        assert hi >= lo * (1 - 1e-8)


def test_infeasible_without_extension():
    with pytest.raises(InfeasibleError):
        solve_mu(10.0, 2.0, 2.0, K=3, auto_extend=False)
    with pytest.raises(DomainError):
        solve_mu(0.0, 2.0, 2.0)


def test_reduction_examples():
    a = np.array([0.4, 0.3, 0.2])
    inst = SequenceInstance(a, (), 2.0, 2.0, float(a.sum()))
    assert np.array_equal(lambda_reduction(inst).a, a)
    inst = SequenceInstance(a, [0.5], 2.0, 2.0, float(a.sum()))
    b = lambda_reduction(inst).a
    assert np.array_equal(b[:4], np.full(4, 0.1))
    assert np.array_equal(b[4:], a[1:])
    assert b.sum() == a.sum()


def test_reduction_rejects_infeasible():
    a = np.array([2.0, 1.0])
    with pytest.raises(InfeasibleError):
        lambda_reduction(SequenceInstance(a, (), 2.0, 2.0, 3.0))


def test_random_reductions():
    rng = np.random.default_rng(5)
    for _ in range(100):
        post = reduction_postconditions(random_instance(rng))
        assert post["l1_preserved"] and post["unit_ball"] and post["objective_growth"]


def test_instance_json_round_trip():
    inst = random_instance(np.random.default_rng(6))
    back = SequenceInstance.from_json(inst.to_json())
    assert np.array_equal(back.a, inst.a) and np.array_equal(back.lam, inst.lam)
    assert back.h == inst.h and back.feasible()
