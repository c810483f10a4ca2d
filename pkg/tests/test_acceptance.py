"""One test per acceptance criterion, each at its stated tolerance and time budget."""

import math
import time

import numpy as np
import pytest

from adamslab import extremal, kernel, mt, potential, seqlemma
from adamslab.harness.config import HarnessConfig
from adamslab.harness.suites import (
    annuli_kernels,
    descending_growth_report,
    oneil_case,
    oneil_kernels,
    sharpness_plan,
    superharmonic_threshold,
    trichotomy_rows,
)
from adamslab.measure_space import DomainError, euclidean, euclidean_ball_volume, heisenberg, inverse_radius
from adamslab.rearrange import GridFunction, decreasing_rearrangement, distribution, log_grid, symmetric_rearrangement
from adamslab.samples import exp_decreasing, random_radial, unit_ball_indicator


def test_constants(acceptance_line):
    t0 = time.perf_counter()
    errs = {"gamma_2_1": abs(mt.gamma_sharp(2, 1) - 4 * math.pi)}
    errs["two_branch"] = max(
        abs(mt.gamma_sharp(n, 1) - mt.gamma_sharp_gradient(n)) / mt.gamma_sharp_gradient(n) for n in range(2, 7)
    )
    a1 = mt.heisenberg_A_gradient(1)
    errs["heisenberg_closed"] = abs(a1 - math.pi ** (-2 / 3) / 4)
    errs["heisenberg_quadrature"] = abs(a1 - mt.heisenberg_A_gradient_quadrature(1))
    dt = time.perf_counter() - t0
    ok = (errs["gamma_2_1"] <= 1e-12 and errs["two_branch"] <= 1e-10 and errs["heisenberg_closed"] <= 1e-12
          and errs["heisenberg_quadrature"] <= 1e-8 and dt < 1.0)
    acceptance_line(1, "constants", ok, ", ".join(f"{k}={v:.1e}" for k, v in errs.items()) + f", {dt:.2f}s")
    assert ok


def test_kernel_certification(acceptance_line):
    t0 = time.perf_counter()
    worst = 0.0
    for n, a in ((2, 1), (3, 1), (3, 2), (4, 1), (4, 2)):
        est = kernel.estimate_normalization(kernel.riesz(n, a))
        v1 = euclidean_ball_volume(n)
        assert est.certified
        worst = max(worst, abs(est.A0 - v1) / v1, abs(est.A_inf - v1) / v1)
    # alpha = n = 2 is not a Riesz kernel of negative homogeneity
    with pytest.raises(DomainError):
        kernel.riesz(2, 2)
    km = kernel.modified_riesz(2, 1)
    em = kernel.estimate_normalization(km)
    mod_err = abs(em.A_inf - 2 ** km.beta * math.pi) / (2 ** km.beta * math.pi)
    ed = kernel.estimate_normalization(kernel.damped_riesz(2, 1))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and mod_err <= 1e-6 and em.certified and ed.A_inf == 0.0 and ed.critical and dt < 30
    acceptance_line(2, "kernel certification", ok,
                    f"riesz rel={worst:.1e}, modified rel={mod_err:.1e}, damped A_inf={ed.A_inf} critical={ed.critical}, {dt:.1f}s")
    assert ok


def test_oneil_chain(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    ks = oneil_kernels()
    s1 = s2 = 0.0
    fails = 0
    for i in range(100):
        k = ks[i % len(ks)]
        f = random_radial(k.profile, rng, 20, norm_p=k.beta_conj)
        assert f.norm(k.beta_conj) <= 1 + 1e-12
        d = oneil_case(k, f, slack=1e-3)
        s1, s2 = max(s1, d["star_over_double"]), max(s2, d["double_over_U"])
        fails += not d["passed"]
    dt = time.perf_counter() - t0
    ok = fails == 0 and dt < 120
    acceptance_line(3, "O'Neil chain", ok, f"100 functions, max star/double={s1:.6f}, max double/U={s2:.6f}, {dt:.0f}s")
    assert ok


def test_annuli_invariants(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    bad, roots, worst = 0, 0, 0.0
    for k in annuli_kernels():
        for _ in range(50):
            tau = 10.0 ** rng.uniform(-6, 0)
            R = float(inverse_radius(k.profile, tau)) * 10.0 ** rng.uniform(0.1, 4)
            dec = potential.build_annuli(k, tau, R)
            rep = dec.check(rel=1e-10)
            bad += not (rep.case("volume_comparability").passed and rep.case("volume_gaps").passed)
            roots += int(np.sum(dec.rooted))
            worst = max(worst, dec.root_residual)
    # random draws rarely need the root finder; add draws that do
    for tau in np.geomspace(0.02, 0.5, 10):
        dec = potential.build_annuli(kernel.modified_riesz(2, 1), float(tau), 1e3)
        bad += not dec.check(rel=1e-10).passed
        roots += int(np.sum(dec.rooted))
        worst = max(worst, dec.root_residual)
    dt = time.perf_counter() - t0
    ok = bad == 0 and worst < 1e-10 and roots > 0 and dt < 60
    acceptance_line(4, "annuli invariants", ok,
                    f"{len(annuli_kernels())}x50 pairs, violations={bad}, roots={roots}, max residual={worst:.1e}, {dt:.1f}s")
    assert ok


def test_sequence_lemma(acceptance_line):
    t0 = time.perf_counter()
    mu1 = seqlemma.mu_bruteforce(1.0, 2.0, 2.0)
    e_mu1 = abs(mu1 - (1 - math.exp(-2)))
    e_scale = max(abs(seqlemma.mu_bruteforce(h, 2.0, 2.0, restarts=8) - h * h * mu1) for h in np.geomspace(0.05, 1, 10))
    hs = np.sqrt(np.arange(1, 7))
    band_rep = seqlemma.mu_bounds_check(hs, 2.0, 2.0)
    band = band_rep.case("band").measured["band"]
    lam_rep = seqlemma.mu_bounds_check(hs, 2.0, 2.0, lam=[0.5])
    deg = lam_rep.case("lambda_degradation")
    rng = np.random.default_rng(11)
    red_fail = 0
    for _ in range(100):
        post = seqlemma.reduction_postconditions(seqlemma.random_instance(rng))
        red_fail += not (post["l1_preserved"] and post["unit_ball"] and post["objective_growth"])
    dt = time.perf_counter() - t0
    ok = (e_mu1 <= 1e-8 and e_scale <= 1e-8 and band < 50 and band_rep.case("monotone").passed
          and deg.inputs["L_lambda"] == 3 and deg.measured["min_relative"] >= math.exp(-6) and red_fail == 0 and dt < 120)
    acceptance_line(5, "sequence lemma", ok,
                    f"mu(1) err={e_mu1:.1e}, scaling err={e_scale:.1e}, band={band:.2f}, "
                    f"degradation={deg.measured['min_relative']:.3f} (floor {math.exp(-6):.4f}), "
                    f"reduction failures={red_fail}, {dt:.0f}s")
    assert ok


def test_trichotomy(acceptance_line):
    t0 = time.perf_counter()
    taus = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2]
    rows = trichotomy_rows(taus)
    below = all(r["gap"] < 0 for r in rows["alpha_1.5"])
    eq = max(abs(r["gap"]) / r["star"] for r in rows["gradient"])
    thr = superharmonic_threshold(unit_ball_indicator(euclidean(4)), kernel.riesz(4, 3))
    above = [r for r in rows["alpha_3"] if r["tau"] < thr]
    sign = all(r["gap"] > 0 and r["formula"] > 0 for r in above)
    dt = time.perf_counter() - t0
    ok = below and eq <= 1e-6 and len(above) == len(taus) and sign and dt < 60
    acceptance_line(6, "trichotomy", ok,
                    f"alpha=1.5 below={below}, gradient rel gap={eq:.1e}, alpha=3 above with formula sign "
                    f"on {len(above)} taus (threshold {thr:.4f}), {dt:.1f}s")
    assert ok


def test_sharpness_probes(acceptance_line):
    t0 = time.perf_counter()
    results = {}
    for name, fam, theta, ladder in sharpness_plan():
        if fam.kind == "kernel_power_infinity":
            fam = extremal.ExtremalFamily(fam.kind, fam.space, fam.kernel, log_r_max=math.log(1e25))
        rep = extremal.sharpness_probe(fam, fam.kernel, fam.params(p=2.0), theta[0], theta[1], ladder)
        results[name] = rep.grid["classification"]
    expected = {name: ("BOUNDED" if name.endswith("sharp") else "DIVERGENT") for name in results}
    dt = time.perf_counter() - t0
    ok = results == expected and dt < 180
    acceptance_line(7, "sharpness probes", ok, ", ".join(f"{k}={v}" for k, v in results.items()) + f", {dt:.1f}s")
    assert ok


def test_descending_growth(acceptance_line):
    t0 = time.perf_counter()
    rep = descending_growth_report(np.geomspace(1e-12, 1e-10, 5))
    band = rep.case("band").measured["band"]
    dt = time.perf_counter() - t0
    ok = rep.passed and band < 20 and dt < 60
    acceptance_line(8, "descending growth", ok, f"band={band:.3f} over tau in [1e-12, 1e-10], {dt:.1f}s")
    assert ok


def _refine(f, edges):
    for e in edges:
        f = f.insert_edge(float(e))
    return f


def test_rearrangement_core(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    spaces = [euclidean(2), euclidean(3), heisenberg(1)]
    worst_eq = worst_hl = 0.0
    for i in range(50):
        P = spaces[i % 3]
        f = random_radial(P, rng, positive=False)
        g = random_radial(P, rng)
        p = decreasing_rearrangement(f)
        lens = np.diff(np.concatenate([[0.0], p.breaks]))
        for s in np.quantile(np.abs(f.values), [0.05, 0.25, 0.5, 0.75, 0.95]):
            m = distribution(f, float(s))
            worst_eq = max(worst_eq, abs(m - float(np.sum(lens[p.levels > s]))) / m if m > 0 else 0.0)
        for q in (1.0, 2.0, 3.5):
            a = f.integral_power(q)
            worst_eq = max(worst_eq, abs(symmetric_rearrangement(f).integral_power(q) - a) / a)
        edges = np.union1d(f.log_edges[1:], g.log_edges[1:])
        fr, gr = _refine(f, edges), _refine(g, edges)
        lhs = float(np.sum(np.abs(fr.values * gr.values) * fr.cell_measures))
        pg = decreasing_rearrangement(g)
        tg = np.union1d(p.breaks, pg.breaks)
        st = np.concatenate([[0.0], tg[:-1]])
        rhs = float(np.sum(p(0.5 * (st + tg)) * pg(0.5 * (st + tg)) * (tg - st)))
        worst_hl = max(worst_hl, lhs / rhs - 1.0)
    # e^{-|x|} on R^2: f*(t) = exp(-sqrt(t / pi)) at the cell samples
    e = log_grid(1e-3, 3.0, 20)
    f = GridFunction.from_callable(euclidean(2), lambda r: np.exp(-r), e)
    t = math.pi * np.exp(2 * f.sample_log_radii())
    ex = float(np.max(np.abs(decreasing_rearrangement(f)(t) - np.exp(-np.sqrt(t / math.pi)))))
    dt = time.perf_counter() - t0
    ok = worst_eq <= 1e-6 and worst_hl <= 1e-6 and ex <= 1e-8 and dt < 30
    acceptance_line(9, "rearrangement core", ok,
                    f"equimeasurability={worst_eq:.1e}, Hardy-Littlewood excess={worst_hl:.1e}, e^-|x| err={ex:.1e}, {dt:.1f}s")
    assert ok
