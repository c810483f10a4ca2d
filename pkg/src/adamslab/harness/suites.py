"""Verification suites: each maps a configuration to a VerificationReport."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.optimize import brentq

from .. import extremal, kernel, mt, potential, seqlemma
from ..measure_space import euclidean, euclidean_ball_volume, heisenberg, inverse_radius, volume
from ..samples import exp_decreasing, gradient_moser_field, random_radial, unit_ball_indicator
from .config import SUITES, ConfigError, HarnessConfig
from .report import CaseRecord, VerificationReport


def _case(rep, name, inputs, measured, relation, passed, tol, prov="DERIVED", note=""):
    rep.add(CaseRecord(name, inputs, measured, relation, bool(passed), tol, prov, note))


# constants ---------------------------------------------------------------------------------


def constants_table() -> dict:
    """Sharp constants printed by `adamslab constants`."""
    out = {}
    for n in range(2, 7):
        for a in range(1, n):
            out[f"gamma_sharp(n={n},alpha={a})"] = mt.gamma_sharp(n, a)
        out[f"gamma_gradient(n={n})"] = mt.gamma_sharp_gradient(n)
    for n in (1, 2, 3):
        out[f"heisenberg_A_gradient(n={n})"] = mt.heisenberg_A_gradient(n)
        out[f"heisenberg_A_alpha2(n={n})"] = mt.heisenberg_A_alpha2(n)
    return out


def constants_json() -> dict:
    """The same constants grouped by name, each entry carrying its parameters."""
    out: dict = {"gamma_sharp": [], "gamma_gradient": [], "heisenberg_A_gradient": [], "heisenberg_A_alpha2": []}
    for n in range(2, 7):
        for a in range(1, n):
            out["gamma_sharp"].append({"n": n, "alpha": a, "value": mt.gamma_sharp(n, a)})
        out["gamma_gradient"].append({"n": n, "value": mt.gamma_sharp_gradient(n)})
    for n in (1, 2, 3):
        out["heisenberg_A_gradient"].append({"n": n, "value": mt.heisenberg_A_gradient(n)})
        out["heisenberg_A_alpha2"].append({"n": n, "value": mt.heisenberg_A_alpha2(n)})
    return out


def suite_constants(cfg: HarnessConfig) -> VerificationReport:
    rep = VerificationReport("constants")
    g = mt.gamma_sharp(2, 1)
    _case(rep, "gamma_2_1", {"n": 2, "alpha": 1}, {"value": g, "expected": 4 * math.pi},
          "|gamma - 4 pi| <= 1e-12", abs(g - 4 * math.pi) <= 1e-12, 1e-12)
    for n in range(2, 7):
        a, b = mt.gamma_sharp(n, 1), mt.gamma_sharp_gradient(n)
        _case(rep, f"two_branch_n{n}", {"n": n}, {"value": a, "gradient_branch": b},
              "relative difference <= 1e-10", abs(a - b) <= 1e-10 * b, 1e-10)
    A = mt.heisenberg_A_gradient(1)
    ref = math.pi ** (-2.0 / 3.0) / 4.0
    _case(rep, "heisenberg_A_gradient_1", {"n": 1}, {"value": A, "expected": ref},
          "|A - pi^(-2/3)/4| <= 1e-12", abs(A - ref) <= 1e-12, 1e-12)
    for n in (1, 2, 3):
        A = mt.heisenberg_A_gradient(n)
        Aq = mt.heisenberg_A_gradient_quadrature(n)
        _case(rep, f"heisenberg_quadrature_n{n}", {"n": n, "order": 64}, {"value": A, "quadrature": Aq},
              "closed form vs angular quadrature <= 1e-8", abs(A - Aq) <= 1e-8, 1e-8)
        spread = max(abs(A - mt.heisenberg_A_gradient(n, impl)) for impl in ("math", "lgamma"))
        _case(rep, f"heisenberg_gamma_impls_n{n}", {"n": n}, {"value": spread},
              "gamma implementations agree <= 1e-12", spread <= 1e-12 * A, 1e-12)
        B, Bq = mt.heisenberg_A_alpha2(n), mt.heisenberg_A_alpha2(n, order=64)
        _case(rep, f"heisenberg_alpha2_n{n}", {"n": n}, {"value": B, "quadrature": Bq},
              "sphere measure closed form vs quadrature <= 1e-10", abs(B - Bq) <= 1e-10 * B, 1e-10)
    return rep


# kernel certification -------------------------------------------------------------------------


RIESZ_PAIRS = ((2, 1), (3, 1), (3, 2), (4, 1), (4, 2))


def suite_kernel(cfg: HarnessConfig) -> VerificationReport:
    rep = VerificationReport("kernel")
    tol = cfg.tolerance
    for n, a in RIESZ_PAIRS:
        k = kernel.riesz(n, a)
        est = kernel.estimate_normalization(k)
        v1 = euclidean_ball_volume(n)
        err = max(abs(est.A0 - v1), abs(est.A_inf - v1)) / v1
        _case(rep, f"riesz_n{n}_a{a}", {"n": n, "alpha": a},
              {"A0": est.A0, "A_inf": est.A_inf, "expected": v1, "rel_error": err},
              f"A0 = A_inf = |B_1| within {tol:g}", err <= tol and est.certified, tol)
    k = kernel.modified_riesz(2, 1)
    est = kernel.estimate_normalization(k)
    v1 = euclidean_ball_volume(2)
    err0 = abs(est.A0 - v1) / v1
    errinf = abs(est.A_inf - 2 ** k.beta * v1) / (2 ** k.beta * v1)
    _case(rep, "modified_riesz_n2_a1", {"n": 2, "alpha": 1, "value": 2.0},
          {"A0": est.A0, "A_inf": est.A_inf, "expected_A_inf": 2 ** k.beta * v1, "rel_error": max(err0, errinf)},
          f"A0 = |B_1| and A_inf = 2^beta |B_1| within {tol:g}", max(err0, errinf) <= tol and est.certified, tol)
    k = kernel.damped_riesz(2, 1)
    est = kernel.estimate_normalization(k)
    _case(rep, "damped_riesz_n2_a1", {"n": 2, "alpha": 1},
          {"A0": est.A0, "A_inf": est.A_inf, "critical": est.critical},
          "A_inf = 0 with the critical-integrability flag", est.A_inf == 0.0 and est.critical and est.certified, 0.0)
    cond = kernel.check_conditions(kernel.riesz(2, 1), seed=cfg.seed)
    rep.extend(cond, prefix="riesz_n2_a1_")
    return rep


# O'Neil chain -------------------------------------------------------------------------------


def oneil_kernels():
    return [kernel.riesz(2, 1), kernel.riesz(3, 2), kernel.modified_riesz(2, 1)]


def oneil_case(k, f, slack: float = 1e-3) -> dict:
    Vr = float(volume(f.profile, f.support_radius))
    ts = np.geomspace(1e-5 * Vr, 2.0 * Vr, 30)
    ch = potential.oneil_chain(k, f, ts)
    s1 = float(np.max(ch["star"] / ch["double_star"]))
    s2 = float(np.max(ch["double_star"] / ch["U"]))
    return {"star_over_double": s1, "double_over_U": s2, "passed": s1 <= 1 + slack and s2 <= 1 + slack}


def suite_oneil(cfg: HarnessConfig, count: int | None = None) -> VerificationReport:
    rep = VerificationReport("oneil")
    rng = np.random.default_rng(cfg.seed)
    ks = oneil_kernels()
    for i in range(cfg.samples if count is None else count):
        k = ks[i % len(ks)]
        f = random_radial(k.profile, rng, cfg.grid_points, norm_p=k.beta_conj)
        d = oneil_case(k, f)
        _case(rep, f"oneil_{i}", {"kernel": k.name, "support": f.support_radius, "norm": f.norm(k.beta_conj)},
              {k2: v for k2, v in d.items() if k2 != "passed"},
              "(Tf)* <= (Tf)** <= Uf with 1e-3 relative slack", d["passed"], 1e-3)
    return rep


# annuli -----------------------------------------------------------------------------------------


def annuli_kernels():
    return [kernel.riesz(2, 1), kernel.modified_riesz(2, 1), kernel.damped_riesz(2, 1), kernel.riesz(3, 1)]


def suite_annuli(cfg: HarnessConfig, count: int | None = None) -> VerificationReport:
    rep = VerificationReport("annuli")
    rng = np.random.default_rng(cfg.seed)
    for k in annuli_kernels():
        for i in range(cfg.samples if count is None else count):
            tau = 10.0 ** rng.uniform(-6, 0)
            R = float(inverse_radius(k.profile, tau)) * 10.0 ** rng.uniform(0.1, 4)
            dec = potential.build_annuli(k, tau, R)
            sub = dec.check(rel=1e-10)
            worst = dec.root_residual
            for c in sub.cases:
                c.name = f"{k.name}_{i}_{c.name}"
                c.inputs = {**c.inputs, "tau": tau, "R": R}
                rep.add(c)
            _case(rep, f"{k.name}_{i}_root_residual", {"tau": tau, "R": R, "N": dec.N},
                  {"max_residual": worst, "roots": int(np.sum(dec.rooted))}, "interior root residual < 1e-10", worst < 1e-10, 1e-10)
    return rep


# msi and ruf ---------------------------------------------------------------------------------------


def _probe_case(rep, name, fam, params, theta, ladder):
    r = extremal.sharpness_probe(fam, fam.kernel, params, theta[0], theta[1], ladder)
    c = r.cases[-1]
    c.name = name
    rep.add(c)
    return r


def suite_msi(cfg: HarnessConfig) -> VerificationReport:
    rep = VerificationReport("msi")
    lad = [math.log(1 / e) for e in sorted(cfg.epsilon_ladder, reverse=True)]
    deep = [2.0, 5.0, 10.0, 1e2, 1e4, 1e6]
    for space in (euclidean(2), euclidean(3), heisenberg(1)):
        kind = "heisenberg_log" if space.kind == "heisenberg" else "moser_log"
        fam = extremal.ExtremalFamily(kind, space)
        _probe_case(rep, f"{kind}_{space.kind}{space.n}_sharp", fam, fam.params(), (1.0, 1.0), lad + deep)
    # the two regularizations agree within a bounded factor on mid-range Moser functions
    params = mt.InequalityParams.msi(2.0, 2.0, 4 * math.pi)
    us = [extremal.moser_log(euclidean(2), log_depth=L, normalized=True) for L in (8.0, 12.0, 16.0, 24.0, 32.0)]
    rep.extend(mt.regularization_equivalence_check(us, params, bound=10.0), prefix="moser_")
    return rep


def suite_ruf(cfg: HarnessConfig) -> VerificationReport:
    rep = VerificationReport("ruf")
    ladder = [math.log(1 / e) for e in sorted(cfg.epsilon_ladder, reverse=True)]
    div = [5.0, 20.0, 50.0, 100.0, 200.0]
    for kind, k in (("moser_log", None), ("kernel_power", kernel.riesz(2, 1))):
        fam = extremal.ExtremalFamily(kind, euclidean(2), k, normalization="ruf", kappa=1.0)
        P = fam.params()
        _probe_case(rep, f"{kind}_ruf_sharp", fam, P, (1.0, 1.0), ladder)
        _probe_case(rep, f"{kind}_ruf_theta1", fam, P, (1.1, 1.0), div)
    # C(kappa): sup of the sharp functional along the ladder, recorded without a rate
    for kappa in (0.25, 0.5, 1.0, 2.0, 4.0):
        fam = extremal.ExtremalFamily("moser_log", euclidean(2), normalization="ruf", kappa=kappa)
        P = fam.params()
        vals = [extremal.log_functional(fam.member(x), P) for x in ladder + [20.0, 50.0]]
        C = math.exp(max(vals))
        _case(rep, f"kappa_{kappa:g}", {"kappa": kappa, "ladder": ladder + [20.0, 50.0]}, {"C": C},
              "sup of the sharp functional finite", math.isfinite(C), 0.0)
    return rep


# sequence lemma ------------------------------------------------------------------------------


def suite_seqlemma(cfg: HarnessConfig, instances: int | None = None) -> VerificationReport:
    rep = VerificationReport("seqlemma")
    p = bc = 2.0
    mu1 = seqlemma.mu_bruteforce(1.0, p, bc)
    _case(rep, "mu_1", {"h": 1.0}, {"value": mu1, "expected": 1 - math.exp(-2)},
          "|mu(1) - (1 - e^-2)| <= 1e-8", abs(mu1 - (1 - math.exp(-2))) <= 1e-8, 1e-8, "PAPER")
    hs = np.linspace(0.1, 1.0, 10)
    errs = [abs(seqlemma.mu_bruteforce(h, p, bc) - h ** p * mu1) for h in hs]
    _case(rep, "scaling", {"h": hs.tolist()}, {"max_error": max(errs)},
          "mu(h) = h^p mu(1) within 1e-8", max(errs) <= 1e-8, 1e-8)
    hgrid = [N ** 0.5 for N in range(1, 7)]
    rep.extend(seqlemma.mu_bounds_check(hgrid, p, bc), prefix="lambda1_")
    lam = [0.5]
    L = seqlemma.L_lambda(lam, p / (p - 1))
    sub = seqlemma.mu_bounds_check(hgrid, p, bc, lam=lam)
    c = sub.case("lambda_degradation")
    c.name = f"lambda_degradation_L{L}"
    rep.add(c)
    rng = np.random.default_rng(cfg.seed)
    bad = []
    count = cfg.samples if instances is None else instances
    for i in range(count):
        inst = seqlemma.random_instance(rng)
        d = seqlemma.reduction_postconditions(inst)
        if not (d["l1_preserved"] and d["unit_ball"] and d["objective_growth"]):
            bad.append(i)
    _case(rep, "lambda_reduction", {"instances": count, "seed": cfg.seed}, {"failures": bad},
          "l1 preserved, unit ball, objective growth bounded", not bad, 1e-10)
    return rep


# trichotomy and descending growth ---------------------------------------------------------------


def superharmonic_threshold(f, k, lo: float = 1e-3, hi: float = 0.5) -> float:
    """tau at which the (T f)° - (T f)* gap changes sign."""

    def gap(log_tau):
        return potential.circ_star_comparison(k, f, [math.exp(log_tau)])[0]["gap"]

    return math.exp(brentq(gap, math.log(lo), math.log(hi), xtol=1e-6))


def trichotomy_rows(taus):
    P4 = euclidean(4)
    om = 2 * math.pi ** 2
    dec = exp_decreasing(P4)
    rows = {"alpha_1.5": potential.circ_star_comparison(kernel.riesz(4, 1.5), dec, taus)}
    v = dec.with_values(-dec.values)
    rows["gradient"] = potential.circ_star_comparison(kernel.gradient_kernel(4), v, taus)
    ball = unit_ball_indicator(P4)
    rows["alpha_3"] = potential.circ_star_comparison(kernel.riesz(4, 3), ball, taus)
    for row in rows["alpha_3"]:
        r = row["radius"]
        row["formula"] = om / 8 * r * r - om / 3 * r ** 3
    return rows


def suite_circstar(cfg: HarnessConfig) -> VerificationReport:
    rep = VerificationReport("circstar")
    taus = sorted(cfg.tau_ladder)
    rows = trichotomy_rows(taus)
    for row in rows["alpha_1.5"]:
        _case(rep, f"alpha1.5_tau{row['tau']:.1e}", row, {"gap": row["gap"]}, "(Tf)° < (Tf)*", row["gap"] < 0, 0.0, "PAPER")
    for row in rows["gradient"]:
        rel = abs(row["gap"]) / row["star"]
        _case(rep, f"gradient_tau{row['tau']:.1e}", row, {"relative_gap": rel}, "(Tf)° = (Tf)* within 1e-6",
              rel <= 1e-6, 1e-6, "PAPER")
    thr = superharmonic_threshold(unit_ball_indicator(euclidean(4)), kernel.riesz(4, 3))
    _case(rep, "alpha3_threshold", {"kernel": "riesz_n4_a3"}, {"value": thr},
          "sign change of the gap located", 0 < thr < 0.5, 1e-6)
    for row in rows["alpha_3"]:
        ok = row["gap"] > 0 if row["tau"] < thr else row["gap"] <= 0
        rel = abs(row["gap"] / row["formula"] - 1)
        if row["radius"] <= 0.25:
            ok = ok and rel <= row["radius"] ** 2
        _case(rep, f"alpha3_tau{row['tau']:.1e}", row, {"gap": row["gap"], "formula": row["formula"], "rel": rel},
              "gap > 0 below the threshold; |gap/formula - 1| <= r^2 for r <= 1/4", ok, 0.0, "PAPER")
    return rep


def descending_growth_report(taus=None, per_efold: float = 40.0) -> VerificationReport:
    """Measured descending-growth constants for the normalized gradient kernel on R^3
    applied to the truncated-log gradient field, with the band across the ladder."""
    k = kernel.gradient_kernel(3, normalized=True)
    taus = np.geomspace(1e-12, 1e-10, 5) if taus is None else np.asarray(taus, dtype=float)
    rep = VerificationReport("descending_growth")
    Cs = []
    for t in taus:
        f = gradient_moser_field(k, float(t), per_efold)
        sub = potential.descending_growth_check(k, f, float(t))
        for c in sub.cases:
            Cs.append(c.measured["C"])
            rep.add(c)
        if sub.grid["skipped"]:
            _case(rep, f"tau_{t:.3e}_skipped", {"tau": float(t)}, {"skipped": True},
                  "(Tf)° exceeds the annulus constant", False, 0.0)
    band = max(Cs) / min(Cs) if Cs else math.inf
    _case(rep, "band", {"taus": list(map(float, taus))}, {"band": band, "C": Cs},
          "max/min of measured C < 20", band < 20, 20.0)
    return rep


# sharpness -----------------------------------------------------------------------------------------


def sharpness_plan(cfg: HarnessConfig | None = None):
    """(name, family, theta, ladder) for the probes on the Riesz kernel of order 1 on R^2."""
    eps = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4) if cfg is None else tuple(sorted(cfg.epsilon_ladder, reverse=True))
    two_decades = [math.log(1 / e) for e in eps]
    boost = [4.6, 10.0, 20.0, 50.0, 100.0, 200.0]
    weak = [4.6, 1e2, 1e4, 1e6, 1e8]
    R2 = euclidean(2)
    moser = extremal.ExtremalFamily("moser_log", R2)
    kp = extremal.ExtremalFamily("kernel_power", R2, kernel.riesz(2, 1))
    far = extremal.ExtremalFamily("kernel_power_infinity", R2, kernel.modified_riesz(2, 1))
    far_sharp = [math.log(x) for x in (1e1, 3e1, 1e2, 3e2, 1e3)]
    far_boost = [math.log(x) for x in (1e1, 1e5, 1e10, 1e15, 1e20, 1e25)]
    plan = []
    for name, fam in (("moser", moser), ("kernel_power", kp)):
        plan.append((f"{name}_sharp", fam, (1.0, 1.0), two_decades))
        plan.append((f"{name}_theta1", fam, (1.1, 1.0), boost))
        plan.append((f"{name}_theta2", fam, (1.0, 0.5), weak))
    plan.append(("infinity_sharp", far, (1.0, 1.0), far_sharp))
    plan.append(("infinity_theta1", far, (1.1, 1.0), far_boost))
    return plan


def suite_sharpness(cfg: HarnessConfig) -> VerificationReport:
    rep = VerificationReport("sharpness")
    for name, fam, theta, ladder in sharpness_plan(cfg):
        fam_run = fam
        if fam.kind == "kernel_power_infinity":
            # one shared grid for every member of both ladders
            fam_run = extremal.ExtremalFamily(fam.kind, fam.space, fam.kernel, log_r_max=math.log(1e25))
        P = fam_run.params(p=2.0)
        _probe_case(rep, name, fam_run, P, theta, ladder)
    est = extremal.kernel_power_estimates(kernel.riesz(2, 1), [2, 4, 8, 16, 32, 64, 1e3, 1e5])
    rep.extend(est, prefix="estimates_")
    return rep


# dispatch ---------------------------------------------------------------------------------------


_SUITES = {
    "constants": suite_constants,
    "kernel": suite_kernel,
    "oneil": suite_oneil,
    "annuli": suite_annuli,
    "msi": suite_msi,
    "ruf": suite_ruf,
    "seqlemma": suite_seqlemma,
    "circstar": lambda cfg: _merge("circstar", [suite_circstar(cfg), descending_growth_report()]),
    "sharpness": suite_sharpness,
}


def _merge(name: str, reports) -> VerificationReport:
    out = VerificationReport(name)
    for r in reports:
        out.extend(r, prefix=f"{r.suite}/" if r.suite != name else "")
        if r.grid:
            out.grid[r.suite] = r.grid
    return out


def _run_one(args) -> VerificationReport:
    name, cfg = args
    t0 = time.perf_counter()
    rep = _SUITES[name](cfg)
    rep.wall_time = time.perf_counter() - t0
    return rep


def run_suite(name: str, config: HarnessConfig | None = None) -> VerificationReport:
    """Run a suite; 'all' runs every suite (in a process pool when workers > 1)."""
    cfg = config or HarnessConfig()
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    t0 = time.perf_counter()
    if name != "all":
        rep = _run_one((name, cfg))
    else:
        names = [s for s in SUITES if s != "all"]
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                parts = list(pool.map(_run_one, [(s, cfg) for s in names]))
        else:
            parts = [_run_one((s, cfg)) for s in names]
        rep = _merge("all", parts)
    rep.wall_time = time.perf_counter() - t0
    rep.grid = {**rep.grid, "config": cfg.to_dict()}
    return rep
