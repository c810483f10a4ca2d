"""Sharp constants and the growth-normalized exponential-integral functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as sp_gamma
from scipy.special import gammainc, gammaln, logsumexp

from .harness.report import CaseRecord, VerificationReport
from .measure_space import DomainError, euclidean_ball_volume, koranyi_sphere_measure, sphere_area
from .rearrange import GridFunction

SENTINEL = 1e12


# truncated exponential ----------------------------------------------------


def _series_log_tail(m: int, y: np.ndarray) -> np.ndarray:
    """log of sum_{j>m} y^j/j! for small y, via the normalized power series."""
    terms = np.ones_like(y)
    acc = np.ones_like(y)
    for i in range(1, 40):
        terms = terms * y / (m + 1 + i)
        acc = acc + terms
    with np.errstate(divide="ignore"):
        return (m + 1) * np.log(y) - gammaln(m + 2) + np.log(acc)


def log_exp_truncated(m: int, y):
    """log(e^y - sum_{j<=m} y^j/j!), finite for every y > 0."""
    if m < 0 or int(m) != m:
        raise DomainError("truncation index must be a nonnegative integer")
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise DomainError("argument must be nonnegative")
    small = y_arr < 0.5
    with np.errstate(divide="ignore"):
        big = y_arr + np.log(gammainc(m + 1, np.where(small, 1.0, y_arr)))
    out = np.where(small, _series_log_tail(m, np.where(small, y_arr, 0.25)), big)
    out = np.where(y_arr == 0, -np.inf, out)
    return float(out) if out.ndim == 0 else out


def exp_truncated(m: int, y):
    """e^y - sum_{j=0}^{m} y^j/j! (truncation inclusive of index m)."""
    out = np.exp(log_exp_truncated(m, y))
    return float(out) if np.ndim(out) == 0 else out


# sharp constants ------------------------------------------------------------


def riesz_constant(n: int, alpha: int, gamma=math.gamma) -> float:
    """c_alpha (even alpha) or c~_alpha (odd alpha) in the representation of u
    through (-Laplacian)^{alpha/2} u, or through its gradient for odd alpha."""
    if alpha % 2 == 0:
        return 2.0 ** (-alpha) * gamma((n - alpha) / 2) / (math.pi ** (n / 2) * gamma(alpha / 2))
    return 2.0 ** (-alpha) * gamma((n - alpha + 1) / 2) / (math.pi ** (n / 2) * gamma((alpha + 1) / 2))


def gamma_sharp(n: int, alpha: int) -> float:
    """Sharp exponential constant gamma_{n,alpha} = c^{-n/(n-alpha)} / |B_1|."""
    if int(alpha) != alpha or int(n) != n:
        raise DomainError("n and alpha must be integers")
    if not 0 < alpha < n:
        raise DomainError("need 0 < alpha < n")
    c = riesz_constant(n, alpha)
    return c ** (-n / (n - alpha)) / euclidean_ball_volume(n)


def gamma_sharp_gradient(n: int) -> float:
    """The first-order value n * omega_{n-1}^{1/(n-1)}, computed independently."""
    return n * sphere_area(n - 1) ** (1.0 / (n - 1))


def _a_gradient(n: int, gamma) -> float:
    Q = 2 * n + 2
    inner = gamma(Q / 2) * gamma(n) / (2 * math.pi ** (n + 0.5) * gamma((Q - 1) / 2))
    return inner ** (1.0 / (Q - 1)) / Q


def heisenberg_A_gradient(n: int, gamma_impl: str = "scipy") -> float:
    """Sharp constant for the horizontal-gradient inequality on H^n."""
    if n < 1:
        raise DomainError("n must be positive")
    if gamma_impl == "scipy":
        return _a_gradient(n, lambda x: float(sp_gamma(x)))
    if gamma_impl == "math":
        return _a_gradient(n, math.gamma)
    if gamma_impl == "lgamma":
        return _a_gradient(n, lambda x: math.exp(math.lgamma(x)))
    raise DomainError(f"unknown gamma implementation {gamma_impl!r}")


def koranyi_angular_integral(n: int, power: float, order: int = 64) -> float:
    """omega_{2n-1} * int_{-pi/2}^{pi/2} cos(theta)^power dtheta by Gauss-Legendre."""
    x, w = np.polynomial.legendre.leggauss(order)
    theta = 0.5 * math.pi * x
    return sphere_area(2 * n - 1) * 0.5 * math.pi * float(np.sum(w * np.cos(theta) ** power))


def horizontal_gradient_moment(n: int, order: int = 64) -> float:
    """c_Q = int over the Koranyi sphere of |z*|^Q; |z*|^Q = cos^{n+1} and the
    polar density is cos^{n-1}."""
    return koranyi_angular_integral(n, 2 * n, order)


def heisenberg_A_gradient_quadrature(n: int, order: int = 64) -> float:
    Q = 2 * n + 2
    return horizontal_gradient_moment(n, order) ** (-1.0 / (Q - 1)) / Q


def sublaplacian_angular_constant(n: int) -> float:
    """Constant g_2 with sublaplacian fundamental solution g_2 |x|^{2-Q}."""
    return 2.0 ** (n - 2) * math.gamma(n / 2) ** 2 * math.pi ** (-n - 1)


def heisenberg_A_alpha2(n: int, order: int | None = None) -> float:
    """Sharp constant for the sublaplacian inequality on H^n.

    The sphere measure is the closed form unless an angular quadrature order
    is given.
    """
    if n < 1:
        raise DomainError("n must be positive")
    Q = 2 * n + 2
    sigma = koranyi_sphere_measure(n) if order is None else koranyi_angular_integral(n, n - 1, order)
    return sublaplacian_angular_constant(n) ** (Q / (Q - 2)) * sigma / Q


# functionals ----------------------------------------------------------------


@dataclass(frozen=True)
class InequalityParams:
    beta: float
    p: float
    exp_constant: float
    kappa: float = 0.0
    m: int = 0
    mode: str = "msi"

    @property
    def beta_conj(self) -> float:
        return self.beta / (self.beta - 1.0)

    @property
    def growth_power(self) -> float:
        """Exponent p*beta/beta' of the exact-growth denominator."""
        return self.p * (self.beta - 1.0)

    def __post_init__(self) -> None:
        if not self.beta > 1:
            raise DomainError("beta must exceed 1")
        if not self.p >= 1:
            raise DomainError("p must be >= 1")
        if not self.exp_constant > 0:
            raise DomainError("exponential constant must be positive")

    @classmethod
    def msi(cls, beta: float, p: float, exp_constant: float) -> "InequalityParams":
        m = max(0, math.ceil(p / beta - 1 - 1e-12))
        return cls(beta, p, exp_constant, 0.0, m, "msi")

    @classmethod
    def ruf(cls, beta: float, exp_constant: float, kappa: float = 1.0) -> "InequalityParams":
        bc = beta / (beta - 1.0)
        m = max(0, math.ceil(bc - 2 - 1e-12))
        return cls(beta, bc, exp_constant, kappa, m, "ruf")


def _log_cells(u: GridFunction):
    a = np.abs(u.values)
    nz = a > 0
    return a[nz], u.log_cell_measures[nz]


def log_msi_parts(u: GridFunction, params: InequalityParams, theta1: float = 1.0, theta2: float = 1.0):
    """(log numerator, log ||u||_p^p) of the exact-growth functional, with
    exponent constant boosted by theta1 and denominator power scaled by theta2."""
    a, lm = _log_cells(u)
    if a.size == 0:
        return -np.inf, -np.inf
    y = theta1 * params.exp_constant * a ** params.beta
    log_den_growth = np.logaddexp(0.0, theta2 * params.growth_power * np.log(a))
    num = logsumexp(log_exp_truncated(params.m, y) - log_den_growth + lm)
    den = logsumexp(params.p * np.log(a) + lm)
    return float(num), float(den)


def _ratio_from_logs(num: float, den: float) -> float:
    if num == -np.inf:
        return 0.0
    lr = num - den
    return math.inf if lr > math.log(SENTINEL) else math.exp(lr)


def msi_ratio(u: GridFunction, params: InequalityParams) -> float:
    """[int exp_m(gamma|u|^beta)/(1+|u|^{p beta/beta'})] / ||u||_p^p, +inf past 1e12."""
    return _ratio_from_logs(*log_msi_parts(u, params))


def log_ruf_integral(u: GridFunction, params: InequalityParams) -> float:
    a, lm = _log_cells(u)
    if a.size == 0:
        return -np.inf
    return float(logsumexp(log_exp_truncated(params.m, params.exp_constant * a ** params.beta) + lm))


def ruf_functional(u: GridFunction, params: InequalityParams) -> float:
    """int exp_m(|u|^beta / A) dmu with m = ceil(beta' - 2); +inf past 1e12."""
    lv = log_ruf_integral(u, params)
    if lv == -np.inf:
        return 0.0
    return math.inf if lv > math.log(SENTINEL) else math.exp(lv)


def regularization_forms(u: GridFunction, params: InequalityParams) -> tuple[float, float]:
    """(whole-space regularized integral, ||u||_p^p + full-exponential integral over {|u| >= 1})."""
    a = np.abs(u.values)
    meas = u.cell_measures
    y = params.exp_constant * a ** params.beta
    den = 1.0 + a ** params.growth_power
    reg = float(np.sum(exp_truncated(params.m, y) / den * meas))
    hi = a >= 1
    restricted = float(np.sum(np.exp(y[hi]) / den[hi] * meas[hi]))
    return reg, u.integral_power(params.p) + restricted


def regularization_equivalence_check(
    us: list[GridFunction], params: InequalityParams, bound: float = 10.0
) -> VerificationReport:
    """Both forms agree within a multiplicative constant <= bound on each function."""
    rep = VerificationReport("regularization")
    for i, u in enumerate(us):
        reg, alt = regularization_forms(u, params)
        if reg == 0 and alt == 0:
            ratio = 1.0
        elif alt == 0:
            ratio = math.inf
        else:
            ratio = reg / alt
        rep.add(
            CaseRecord(
                name=f"regularization_{i}",
                inputs={"index": i},
                measured={"regularized": reg, "restricted_plus_norm": alt, "ratio": ratio},
                relation=f"{1 / bound} <= ratio <= {bound}",
                passed=bool(1 / bound <= ratio <= bound),
                tolerance=0.0,
                provenance="DERIVED",
            )
        )
    return rep
