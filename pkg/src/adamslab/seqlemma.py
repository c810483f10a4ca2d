"""Minimal weighted sums of sequences with prescribed l1 mass, as a constrained minimization.

mu(h) = inf sum_k a_k^p e^{beta' k} over a_k >= 0 with sum a_k = h and
sum (lambda_k a_k)^{beta'} <= 1.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .harness.report import CaseRecord, VerificationReport
from .measure_space import DomainError


class InfeasibleError(ValueError):
    """No sequence on the allowed support meets both constraints."""


def _conj(x: float) -> float:
    return x / (x - 1.0)


def _ceil_tol(x: np.ndarray) -> np.ndarray:
    """Ceiling that treats values within 1e-12 relative of an integer as that integer."""
    return np.ceil(x * (1.0 - 1e-12))


def _check_lambda(lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam <= 0) or np.any(lam > 1):
        raise DomainError("lambda entries must lie in (0, 1]")
    return lam


def L_lambda(lam, beta: float) -> int:
    """sum_k (ceil(lambda_k^{-beta}) - 1)."""
    lam = _check_lambda(lam)
    return int(np.sum(_ceil_tol(lam ** (-beta)) - 1.0))


def _lam_full(lam, K: int) -> np.ndarray:
    lam = _check_lambda(lam) if np.size(lam) else np.ones(0)
    out = np.ones(K + 1)
    m = min(lam.size, K + 1)
    out[:m] = lam[:m]
    return out


@dataclass
class SequenceInstance:
    a: np.ndarray
    lam: np.ndarray
    p: float
    beta_conj: float
    h: float

    def __post_init__(self) -> None:
        self.a = np.asarray(self.a, dtype=float)
        self.lam = _lam_full(self.lam, self.a.size - 1)

    @property
    def beta(self) -> float:
        return _conj(self.beta_conj)

    def l1(self) -> float:
        return float(np.sum(self.a))

    def constraint(self) -> float:
        return float(np.sum((self.lam * self.a) ** self.beta_conj))

    def objective(self) -> float:
        k = np.arange(self.a.size)
        return float(np.sum(self.a ** self.p * np.exp(self.beta_conj * k)))

    def feasible(self, tol: float = 1e-12) -> bool:
        return (bool(np.all(self.a >= 0)) and abs(self.l1() - self.h) <= tol * max(1.0, self.h)
                and self.constraint() <= 1.0 + tol)

    def to_json(self) -> str:
        return json.dumps({"a": self.a.tolist(), "lambda": self.lam.tolist(), "p": self.p,
                           "beta_conj": self.beta_conj, "h": self.h}, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "SequenceInstance":
        d = json.loads(text)
        return SequenceInstance(np.array(d["a"]), np.array(d["lambda"]), d["p"], d["beta_conj"], d["h"])


@dataclass
class MuResult:
    value: float
    a: np.ndarray
    K: int
    eta: float
    nu: float
    constraint_active: bool
    restart_value: float = math.inf
    nonconvex_flag: bool = False
    method: str = "kkt"
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "a": self.a.tolist(), "K": self.K, "eta": self.eta, "nu": self.nu,
                "constraint_active": self.constraint_active,
                "restart_value": None if not math.isfinite(self.restart_value) else self.restart_value,
                "nonconvex_flag": self.nonconvex_flag, "method": self.method}


def max_l1_mass(lam, beta: float, K: int) -> float:
    """Largest h reachable on the support [0, K]: (sum_k lambda_k^{-beta})^{1/beta} (Hoelder)."""
    return float(np.sum(_lam_full(lam, K) ** (-beta)) ** (1.0 / beta))


# KKT solver -------------------------------------------------------------------------


def _solve_a(nu: float, eta: float, p: float, bc: float, w: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Per-index root of p w a^{p-1} + eta bc c a^{bc-1} = nu (p > 1)."""
    a1 = lambda v: (v / (p * w)) ** (1.0 / (p - 1.0))
    if eta == 0.0:
        return a1(nu)
    a2 = lambda v: (v / (eta * bc * c)) ** (1.0 / (bc - 1.0))
    lo = np.log(np.minimum(a1(0.5 * nu), a2(0.5 * nu)))
    hi = np.log(np.minimum(a1(nu), a2(nu)))
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        a = np.exp(mid)
        g = p * w * a ** (p - 1.0) + eta * bc * c * a ** (bc - 1.0)
        big = g > nu
        hi = np.where(big, mid, hi)
        lo = np.where(big, lo, mid)
    return np.exp(0.5 * (lo + hi))


def _nu_for_mass(h: float, eta: float, p: float, bc: float, w, c) -> float:
    """log nu giving sum a_k = h."""
    F = lambda lnu: math.log(float(np.sum(_solve_a(math.exp(lnu), eta, p, bc, w, c)))) - math.log(h)
    lo, hi = -5.0, 5.0
    while F(lo) > 0:
        lo -= 10.0
    while F(hi) < 0:
        hi += 10.0
    return brentq(F, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=300)


def _kkt(h: float, p: float, bc: float, lam_full: np.ndarray) -> tuple[np.ndarray, float, float, bool]:
    K = lam_full.size - 1
    k = np.arange(K + 1)
    w = np.exp(bc * k)
    c = lam_full ** bc
    lnu = _nu_for_mass(h, 0.0, p, bc, w, c)
    a = _solve_a(math.exp(lnu), 0.0, p, bc, w, c)
    if float(np.sum(c * a ** bc)) <= 1.0:
        return a, 0.0, math.exp(lnu), False

    def G(leta):
        ln = _nu_for_mass(h, math.exp(leta), p, bc, w, c)
        aa = _solve_a(math.exp(ln), math.exp(leta), p, bc, w, c)
        return math.log(float(np.sum(c * aa ** bc)))

    lo, hi = -5.0, 5.0
    while G(lo) < 0:
        lo -= 10.0
    while G(hi) > 0:
        hi += 10.0
    leta = brentq(G, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=300)
    eta = math.exp(leta)
    nu = math.exp(_nu_for_mass(h, eta, p, bc, w, c))
    return _solve_a(nu, eta, p, bc, w, c), eta, nu, True


def _objective(a: np.ndarray, p: float, bc: float) -> float:
    return float(np.sum(a ** p * np.exp(bc * np.arange(a.size))))


def _restarts(h, p, bc, lam_full, count: int, seed: int) -> tuple[float, np.ndarray]:
    """Best SLSQP local minimum from `count` random starts.

    Works in y_k = a_k e^{bc k / p}, where the objective is sum |y_k|^p."""
    K = lam_full.size - 1
    c = lam_full ** bc
    s = np.exp(-bc * np.arange(K + 1) / p)
    rng = np.random.default_rng(seed)
    best, best_a = math.inf, None
    cons = [
        {"type": "eq", "fun": lambda y: np.dot(s, y) / h - 1.0, "jac": lambda y: s / h},
        {"type": "ineq", "fun": lambda y: 1.0 - np.sum(c * (s * np.abs(y)) ** bc),
         "jac": lambda y: -bc * c * s * (s * np.abs(y)) ** (bc - 1.0) * np.sign(y)},
    ]
    fun = lambda y: float(np.sum(np.abs(y) ** p))
    jac = lambda y: p * np.abs(y) ** (p - 1.0) * np.sign(y)
    for _ in range(count):
        a0 = rng.dirichlet(np.full(K + 1, 0.5)) if rng.random() < 0.5 else np.exp(-rng.random() * 3 * np.arange(K + 1))
        a0 = h * a0 / a0.sum()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = minimize(fun, a0 / s, jac=jac, method="SLSQP", bounds=[(0.0, None)] * (K + 1),
                           constraints=cons, options={"maxiter": 1000, "ftol": 1e-16})
        x = np.clip(res.x, 0.0, None) * s
        if abs(x.sum() - h) > 1e-9 * h or float(np.sum(c * x ** bc)) > 1 + 1e-9:
            continue
        v = _objective(x, p, bc)
        if v < best:
            best, best_a = v, x
    return best, best_a


def solve_mu(h: float, p: float, beta_conj: float, lam=(), K: int = 8, restarts: int = 64, seed: int = 0,
             auto_extend: bool = True, tail_tol: float = 1e-12) -> MuResult:
    """mu(h) with the KKT route (p > 1) cross-checked by random SLSQP restarts.

    The support [0, K] grows until the optimal tail mass drops below tail_tol
    (and until the problem is feasible) unless auto_extend is False."""
    if not h > 0:
        raise DomainError("h must be positive")
    if not p > 0 or not beta_conj > 1:
        raise DomainError("need p > 0 and beta' > 1")
    lam_arr = _check_lambda(lam) if np.size(lam) else np.ones(0)
    beta = _conj(beta_conj)
    K = max(int(K), lam_arr.size - 1, 0)
    while max_l1_mass(lam_arr, beta, K) < h * (1 + 1e-12):
        if not auto_extend:
            raise InfeasibleError(f"h = {h} exceeds the largest l1 mass {max_l1_mass(lam_arr, beta, K)} on [0, {K}]")
        K += 1
    while True:
        lf = _lam_full(lam_arr, K)
        if p > 1:
            a, eta, nu, active = _kkt(h, p, beta_conj, lf)
            tail = a[-1] / h
        else:
            a, eta, nu, active, tail = None, math.nan, math.nan, True, 0.0
        if not auto_extend or tail < tail_tol or K > 400:
            break
        K = max(K + 4, int(K * 1.25))
    value = _objective(a, p, beta_conj) if a is not None else math.inf
    kkt_value = value
    rv, ra = (math.inf, None)
    if restarts > 0:
        rv, ra = _restarts(h, p, beta_conj, _lam_full(lam_arr, min(K, 40)), restarts, seed)
    flag = bool(math.isfinite(value) and rv < value * (1 - 1e-4))
    method = "kkt"
    if rv < value:
        value, a, method = rv, np.concatenate([ra, np.zeros(K + 1 - ra.size)]), "restarts"
    if not math.isfinite(value):
        raise InfeasibleError("no feasible sequence found")
    return MuResult(value, a, K, eta, nu, active, rv, flag or (p < beta_conj and p <= 1), method,
                    {"kkt_value": kkt_value})


def mu_bruteforce(h: float, p: float, beta_conj: float, lam=(), K: int = 8, restarts: int = 64,
                  seed: int = 0, auto_extend: bool = True) -> float:
    return solve_mu(h, p, beta_conj, lam, K, restarts, seed, auto_extend).value


def witness(N: int, beta_conj: float) -> np.ndarray:
    """a_k = N^{-1/beta'} for k < N: l1 mass N^{1/beta} and unit l^{beta'} norm."""
    if N < 1:
        raise DomainError("N must be positive")
    return np.full(N, float(N) ** (-1.0 / beta_conj))


def witness_value(N: int, p: float, beta_conj: float) -> float:
    """Objective of the witness: N^{-p/beta'} (e^{N beta'} - 1) / (e^{beta'} - 1)."""
    return float(N) ** (-p / beta_conj) * math.expm1(N * beta_conj) / math.expm1(beta_conj)


def growth_profile(h, p: float, beta_conj: float):
    """phi(h) = exp(beta' h^beta) / h^{p beta / beta'}."""
    beta = _conj(beta_conj)
    h = np.asarray(h, dtype=float)
    return np.exp(beta_conj * h ** beta) / h ** (p * beta / beta_conj)


def mu_bounds_check(h_grid, p: float, beta_conj: float, lam=(), band_limit: float = 50.0,
                    restarts: int = 16) -> VerificationReport:
    """Ratios mu(h)/phi(h) on the grid: band width, monotonicity, and the
    lambda-dependence of the lower end against the lambda = 1 problem."""
    rep = VerificationReport("seqlemma_bounds")
    hs = np.asarray(h_grid, dtype=float)
    beta = _conj(beta_conj)
    mus = np.array([mu_bruteforce(h, p, beta_conj, lam, restarts=restarts) for h in hs])
    ratios = mus / growth_profile(hs, p, beta_conj)
    band = float(ratios.max() / ratios.min())
    rep.add(CaseRecord("band", {"h": hs.tolist(), "p": p, "beta_conj": beta_conj},
                       {"ratios": ratios.tolist(), "band": band, "lower": float(ratios.min()),
                        "upper": float(ratios.max())},
                       f"max/min of mu/phi < {band_limit}", band < band_limit, 0.0, "DERIVED"))
    order = np.argsort(hs)
    mono = bool(np.all(np.diff(mus[order]) >= -1e-9 * mus[order][1:]))
    rep.add(CaseRecord("monotone", {"h": hs.tolist()}, {"mu": mus.tolist()}, "mu nondecreasing in h",
                       mono, 1e-9, "PAPER"))
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float)) if np.size(lam) else np.ones(0)
    if lam_arr.size and np.any(lam_arr < 1):
        L = L_lambda(lam_arr, beta)
        ref = np.array([mu_bruteforce(h, p, beta_conj, (), restarts=restarts) for h in hs])
        rel = mus / ref
        floor = math.exp(-L * beta_conj)
        rep.add(CaseRecord("lambda_degradation", {"L_lambda": L},
                           {"min_relative": float(rel.min()), "floor": floor},
                           "mu_lambda / mu_1 >= e^{-L beta'}", bool(rel.min() >= floor * (1 - 1e-9)),
                           1e-9, "DERIVED"))
    return rep


def lambda_reduction(inst: SequenceInstance, tol: float = 1e-12) -> SequenceInstance:
    """Spread each a_k evenly over a block of J_k = ceil(lambda_k^{-beta}) slots."""
    if not inst.feasible(tol=1e-10):
        raise InfeasibleError("input instance is not feasible")
    J = _ceil_tol(inst.lam ** (-inst.beta)).astype(int)
    b = np.repeat(inst.a / J, J)
    return SequenceInstance(b, np.ones(b.size), inst.p, inst.beta_conj, inst.h)


def reduction_factor(inst: SequenceInstance) -> float:
    """e^{beta'} e^{beta' L} / (e^{beta'} - 1), the allowed objective growth."""
    L = L_lambda(inst.lam, inst.beta)
    bc = inst.beta_conj
    return math.exp(bc * (1 + L)) / math.expm1(bc)


def reduction_postconditions(inst: SequenceInstance, tol: float = 1e-10) -> dict:
    """The three guarantees of lambda_reduction, evaluated on `inst`."""
    b = lambda_reduction(inst)
    growth = b.objective() / inst.objective() if inst.objective() > 0 else 0.0
    return {
        "l1_preserved": abs(b.l1() - inst.l1()) <= tol * max(1.0, inst.l1()),
        "unit_ball": bool(np.sum(b.a ** inst.beta_conj) <= 1.0 + tol),
        "objective_growth": bool(growth <= reduction_factor(inst) * (1 + tol)),
        "growth": growth,
        "allowed": reduction_factor(inst),
    }


def random_instance(rng: np.random.Generator, p: float = 2.0, beta_conj: float = 2.0, K: int | None = None) -> SequenceInstance:
    """Random feasible instance: lambda in [0.2, 1], a scaled onto the weighted unit sphere or inside it."""
    K = int(rng.integers(2, 10)) if K is None else K
    lam = rng.uniform(0.2, 1.0, size=K + 1)
    a = rng.exponential(1.0, size=K + 1) * np.exp(-0.3 * np.arange(K + 1))
    c = float(np.sum((lam * a) ** beta_conj)) ** (1.0 / beta_conj)
    a = a / c * float(rng.uniform(0.3, 1.0))
    return SequenceInstance(a, lam, p, beta_conj, float(np.sum(a)))
