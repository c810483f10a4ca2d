"""Potentials of radial grid functions, the O'Neil functional, the truncated
potential (Tf)° and the annulus decomposition."""

from __future__ import annotations

import json
import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq
from scipy.special import betainc, hyp2f1

from ._quad import gauss_legendre
from .harness.report import CaseRecord, VerificationReport
from .kernel import (
    KernelSpec,
    annulus_integral,
    estimate_normalization,
    pointwise_bound_constant,
    kernel_star,
    radial_power_integral,
    sphere_moment,
)
from .measure_space import (
    DomainError,
    euclidean_ball_volume,
    inverse_radius,
    log_inverse_radius,
    log_volume,
    sphere_area,
    volume,
)
from .rearrange import (
    GridFunction,
    decreasing_rearrangement,
    level_set_mask,
    level_set_radius,
    log_grid,
    split,
)

# ball potentials ----------------------------------------------------------------


def riesz_ball_potential(n: int, alpha: float, r, b):
    """int_{B(0,b)} |x - y|^(alpha - n) dy at |x| = r, vectorized."""
    r, b = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(b, dtype=float))
    out = np.zeros(r.shape)
    omega = sphere_area(n - 1)
    vol1 = euclidean_ball_volume(n)
    pos = b > 0
    inner = pos & (b <= r)
    outer = pos & (b > r)
    if np.any(inner):
        bi, ri = b[inner], r[inner]
        z = (bi / ri) ** 2
        out[inner] = vol1 * bi ** n * ri ** (alpha - n) * hyp2f1((n - alpha) / 2, 1 - alpha / 2, n / 2 + 1, z)
    if np.any(outer):
        bo, ro = b[outer], r[outer]
        z = (ro / bo) ** 2
        out[outer] = bo ** alpha * (omega / alpha) * hyp2f1((n - alpha) / 2, -alpha / 2, n / 2, z)
    return out


def sphere_fraction_inside(n: int, r, b, d):
    """Fraction of the sphere S(x, d), |x| = r, lying inside B(0, b)."""
    r, b, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, b, d)))
    with np.errstate(divide="ignore", invalid="ignore"):
        c = ((b - r) * (b + r) - d * d) / (2.0 * r * d)
    c = np.where(np.isnan(c), np.where(d < b - r, 1.0, -1.0), c)
    c = np.clip(c, -1.0, 1.0)
    if n == 1:
        return 0.5 * (np.abs(r + d) < b) + 0.5 * (np.abs(r - d) < b)
    return betainc((n - 1) / 2, (n - 1) / 2, 0.5 * (1.0 + c))


def _cosine_gl(order: int):
    """Nodes/weights on [0, 1] clustered at both ends (x = (1 - cos t)/2)."""
    x, w = gauss_legendre(order)
    t = 0.5 * math.pi * (x + 1.0)
    return 0.5 * (1.0 - np.cos(t)), 0.25 * math.pi * np.sin(t) * w


def _weighted_ball_quadrature(n, alpha, phi, r, b, d_max, breaks=(), order=40):
    """(omega/alpha) int_0^{d_max^alpha} phi(d) frac(r, b, d) dw with d = w^(1/alpha),
    i.e. int_{B(x, d_max) n B(0, b)} phi(|x-y|) |x-y|^(alpha-n) dy.

    The integral is split at |b - r|, b + r and the caller's breaks; each piece
    uses a cosine-mapped Gauss rule that absorbs the square-root endpoint
    behaviour of the sphere fraction."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    d_max = np.broadcast_to(np.asarray(d_max, dtype=float), r.shape)
    top = np.minimum(d_max, b + r)
    pts = [np.zeros_like(r), np.minimum(np.abs(b - r), top), top]
    pts += [np.minimum(np.full_like(r, c), top) for c in breaks]
    P = np.sort(np.stack(pts, axis=1) ** alpha, axis=1)
    u, wu = _cosine_gl(order)
    lo, hi = P[:, :-1, None], P[:, 1:, None]
    w = lo + (hi - lo) * u
    d = w ** (1.0 / alpha)
    rr = r[:, None, None]
    bb = b[:, None, None]
    frac = sphere_fraction_inside(n, rr, bb, np.maximum(d, 1e-300))
    vals = phi(d) * frac * (hi - lo) * wu
    return sphere_area(n - 1) / alpha * np.sum(vals, axis=(1, 2))


class _Radial:
    """Euclidean radial scalar kernel K(d) = a d^h F(d) split as
    c_inf * a d^h + G with G compactly supported (numerically) near the origin."""

    def __init__(self, k: KernelSpec):
        if k.profile.kind != "euclidean" or not k.radial or k.vector:
            raise NotImplementedError("shell potentials need a euclidean radial scalar kernel")
        self.k = k
        self.n = k.profile.n
        self.alpha = k.homogeneity + self.n
        self.amp = k.amplitude * k.angular.constant
        ff = k.farfield
        self.c_inf = ff.limit_at_infinity
        if ff.kind == "none":
            self.R_G = 0.0
            self.breaks = ()
        elif ff.kind == "smooth_step":
            self.R_G = ff.r2
            self.breaks = (ff.r1, ff.r2)
        else:
            self.R_G = 40.0 * ff.scale
            self.breaks = tuple(ff.scale * j for j in (1, 4, 12))
        if self.R_G > 0:
            full = radial_power_integral(k, 0.0, self.R_G, power=1.0)
            self.G_mass = self.amp * sphere_area(self.n - 1) * (full - self.c_inf * self.R_G ** self.alpha / self.alpha)
        else:
            self.G_mass = 0.0

    def phi_G(self, d):
        return self.amp * (self.k.farfield(d) - self.c_inf)

    def ball(self, r, b):
        """int_{B(0,b)} K(|x-y|) dy at |x| = r, for r > 0."""
        r, b = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(b, dtype=float))
        out = np.zeros(r.shape)
        if self.c_inf != 0.0:
            out += self.c_inf * self.amp * riesz_ball_potential(self.n, self.alpha, r, b)
        if self.R_G > 0:
            far_in = b >= r + self.R_G
            out[far_in] += self.G_mass
            near = (~far_in) & (b > r - self.R_G) & (b > 0)
            if np.any(near):
                out[near] += _weighted_ball_quadrature(
                    self.n, self.alpha, self.phi_G, r[near], b[near], self.R_G, self.breaks
                )
        return out

    def local(self, r, b, rho):
        """int_{B(x,rho) n B(0,b)} K(|x-y|) dy at |x| = r."""
        k = self.k
        phi = lambda d: self.amp * k.farfield(d)
        return _weighted_ball_quadrature(self.n, self.alpha, phi, r, b, rho, self.breaks, order=48)


def kernel_ball_mass(k: KernelSpec, r1: float, r2: float) -> float:
    """int over r1 <= d(0,y) <= r2 of |k(0,y)| dy."""
    if r2 <= r1:
        return 0.0
    return k.amplitude * sphere_moment(k, 1.0) * radial_power_integral(k, r1, r2, power=1.0)


# applying the operator -------------------------------------------------------------


def default_output_edges(f: GridFunction, extend: float = 8.0, per_efold: float = 20.0) -> np.ndarray:
    """Finite log-edges of f extended geometrically to `extend` times its support."""
    e = f.log_edges[1:]
    R = f.support_radius
    ext = np.log(log_grid(R, extend * R, per_efold))[1:] if extend > 1 else np.zeros(0)
    return np.concatenate([e, ext])


_CACHE: OrderedDict = OrderedDict()


def _shell_matrix(k: KernelSpec, log_edges: np.ndarray, sample_r: np.ndarray) -> np.ndarray:
    key = (id(k), log_edges.tobytes(), sample_r.tobytes())
    if key in _CACHE:
        _CACHE.move_to_end(key)
        return _CACHE[key]
    rad = _Radial(k)
    b = np.exp(log_edges[1:])
    P = np.zeros((sample_r.size, b.size + 1))
    P[:, 1:] = rad.ball(sample_r[:, None], b[None, :])
    W = np.diff(P, axis=1)
    _CACHE[key] = W
    if len(_CACHE) > 16:
        _CACHE.popitem(last=False)
    return W


def _gradient_values(k: KernelSpec, f: GridFunction, r: np.ndarray) -> np.ndarray:
    """-(amp) omega int_r^inf v(rho) d rho for the signed radial component v."""
    n = k.profile.n
    a = np.exp(f.log_edges[:-1])
    b = np.exp(f.log_edges[1:])
    overlap = np.clip(b[None, :] - np.maximum(a[None, :], r[:, None]), 0.0, None)
    return -k.amplitude * sphere_area(n - 1) * (overlap @ f.values)


def potential_at(k: KernelSpec, f: GridFunction, radii) -> np.ndarray:
    """Tf at the given radii (0 allowed).

    Scalar kernels are radial with angular factor constant; the gradient
    kernel acts on f = v(|y|) y/|y| and returns the scalar Tf."""
    r = np.atleast_1d(np.asarray(radii, dtype=float))
    if k.vector:
        if k.profile.kind != "euclidean":
            raise NotImplementedError("gradient kernel is euclidean")
        return _gradient_values(k, f, r)
    if not k.radial:
        raise NotImplementedError("potentials of non-radial kernels")
    out = np.zeros(r.shape)
    zero = r == 0
    if np.any(zero):
        a = np.exp(f.log_edges[:-1])
        b = np.exp(f.log_edges[1:])
        masses = np.array([kernel_ball_mass(k, lo, hi) for lo, hi in zip(a, b)])
        out[zero] = float(np.sum(f.values * masses))
    if np.any(~zero):
        W = _shell_matrix(k, f.log_edges, r[~zero])
        out[~zero] = W @ f.values
    return out


def apply(k: KernelSpec, f: GridFunction, out_log_edges=None, rule: str = "mid") -> GridFunction:
    """Tf sampled per output cell (measure midpoint by default).

    The output grid defaults to f's grid extended to 8 times its support;
    the returned GridFunction is zero beyond the last output edge."""
    if not k.vector and k.profile.kind != "euclidean":
        raise NotImplementedError("potentials on non-euclidean profiles are evaluated at the center only")
    le = default_output_edges(f) if out_log_edges is None else np.asarray(out_log_edges, dtype=float)
    le = le[np.isfinite(le)]
    g = GridFunction(f.profile, np.concatenate([[-np.inf], le]), np.zeros(le.size))
    s = np.exp(g.sample_log_radii(rule))
    return g.with_values(potential_at(k, f, s))


def merge_edges(*arrays) -> np.ndarray:
    """Sorted union of finite log-edge arrays, dropping near duplicates."""
    e = np.concatenate([np.asarray(a, dtype=float) for a in arrays])
    e = np.unique(e[np.isfinite(e)])
    keep = np.concatenate([[True], np.diff(e) > 1e-12])
    return e[keep]


def monopole_tail_power(k: KernelSpec, f: GridFunction, p: float, r_out: float) -> float:
    """int_{|x| > r_out} |Tf|^p using Tf(x) ~ c_inf a |x|^h int f (far field)."""
    if k.vector:
        return 0.0
    mass = float(np.sum(f.values * f.cell_measures))
    c = abs(k.amplitude * k.angular.constant * k.farfield.limit_at_infinity * mass)
    if c == 0.0:
        return 0.0
    e = p * k.homogeneity + k.Q
    if e >= 0:
        return math.inf
    return c ** p * k.Q * k.profile.unit_ball_volume * r_out ** e / (-e)


# independent quadrature routes (used as oracles) ------------------------------------


def potential_quadrature(k: KernelSpec, f: GridFunction, r: float, epsrel: float = 1e-9) -> float:
    """Tf(r) by nested adaptive quadrature over (rho, polar angle)."""
    n = k.profile.n
    if k.profile.kind != "euclidean" or n < 2:
        raise NotImplementedError("quadrature oracle is euclidean with n >= 2")
    om = sphere_area(n - 2)
    amp = k.amplitude * (1.0 if k.vector else k.angular.constant)
    edges = np.exp(f.log_edges)
    edges[0] = 0.0

    xg, wg = gauss_legendre(160)

    def inner(rho):
        # the integrand peaks in a window of width |rho - r| / r around phi = 0
        w = min(0.5 * math.pi, 10.0 * abs(rho - r) / r)
        total = 0.0
        for a, b in ((0.0, w), (w, math.pi)):
            if b <= a:
                continue
            phi = 0.5 * (a + b) + 0.5 * (b - a) * xg
            d = np.sqrt((r - rho) ** 2 + 4.0 * r * rho * np.sin(0.5 * phi) ** 2)
            if k.vector:
                val = (r * np.cos(phi) - rho) * d ** (k.homogeneity - 1)
            else:
                val = d ** k.homogeneity * k.farfield(d)
            total += 0.5 * (b - a) * float(np.sum(wg * val * np.sin(phi) ** (n - 2)))
        return om * total * rho ** (n - 1)

    def outer(rho):
        i = min(int(np.searchsorted(edges, rho, side="right")) - 1, f.n_cells - 1)
        return f.values[i] * inner(rho)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        # split at r and at value changes of f
        change = edges[1:-1][np.diff(f.values) != 0]
        cuts = np.unique(np.concatenate([[0.0], change, [edges[-1]], [r] if r < edges[-1] else []]))
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            total += quad(outer, a, b, limit=400, epsabs=0.0, epsrel=epsrel)[0]
    return amp * total


# O'Neil functional -----------------------------------------------------------------------


@lru_cache(maxsize=64)
def _star_of(k: KernelSpec):
    return kernel_star(k)


def oneil_constant(k: KernelSpec, form: str = "double_star") -> float:
    """Leading constant C of Uf.

    'double_star' is sup u^{1/beta} k_1^{**}(u), the constant for which the
    O'Neil bound holds (for pure powers it equals beta' times the one below);
    'star' is sup u^{1/beta} k_1^*(u)."""
    ks = _star_of(k)
    if form == "double_star":
        return ks.scaled_sup_double_star()
    if form == "star":
        return ks.scaled_sup()
    raise DomainError(f"unknown constant form {form!r}")


def oneil_bound(k: KernelSpec, f: GridFunction, t, constant: float | None = None, form: str = "double_star"):
    """Uf(t) = C t^{-1/beta} int_0^t f* + int_t^inf k_1^*(u) f*(u) du."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr <= 0):
        raise DomainError("t must be positive")
    C = oneil_constant(k, form) if constant is None else constant
    ks = _star_of(k)
    rp = decreasing_rearrangement(f)
    starts = np.concatenate([[0.0], rp.breaks[:-1]])
    out = np.empty(t_arr.shape)
    for i, tv in enumerate(t_arr):
        lead = C * tv ** (-1.0 / k.beta) * float(rp.integral(tv))
        tail = 0.0
        for lv, a, b in zip(rp.levels, starts, rp.breaks):
            if b > tv:
                tail += lv * ks.integral(max(a, tv), b)
        out[i] = lead + tail
    return float(out[0]) if np.ndim(t) == 0 else out


def oneil_chain(k: KernelSpec, f: GridFunction, ts, out_log_edges=None, form: str = "double_star") -> dict:
    """(Tf)*(t), (Tf)**(t) and Uf(t) on the given t values."""
    Tf = apply(k, f, out_log_edges)
    rp = decreasing_rearrangement(Tf)
    ts = np.asarray(ts, dtype=float)
    return {"t": ts, "star": np.asarray(rp(ts)), "double_star": np.asarray(rp.integral(ts)) / ts,
            "U": np.asarray(oneil_bound(k, f, ts, form=form))}


# truncated potential --------------------------------------------------------------------


def _outside_ball(f: GridFunction, radius: float) -> GridFunction:
    g = f.insert_edge(math.log(radius)) if radius > 0 else f
    inner = g.log_edges[1:] <= math.log(radius) + 1e-14 if radius > 0 else np.zeros(g.n_cells, bool)
    return g.with_values(np.where(inner, 0.0, g.values))


def tf_circ(k: KernelSpec, f: GridFunction, tau: float, mode: str = "center",
            samples: int = 64, seed: int = 0) -> float:
    """(Tf)°(tau) = sup over x in E_tau of |T(f'_tau chi_{B_tau(x)^c})(x)|.

    mode 'center' evaluates at x = 0, where the supremum sits for radially
    nonincreasing data; mode 'sampled' takes the max over `samples` points of
    E_tau drawn by measure."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    _, fp = split(f, tau)
    r_tau = float(inverse_radius(f.profile, tau))
    if mode == "center":
        g = _outside_ball(fp, r_tau)
        return float(abs(potential_at(k, g, [0.0])[0]))
    if mode != "sampled":
        raise DomainError(f"unknown mode {mode!r}")
    if k.vector:
        raise NotImplementedError("sampled mode for the gradient kernel")
    Tf = apply(k, f)
    gT, mask = level_set_mask(Tf, tau)
    if not np.any(mask):
        return 0.0
    rng = np.random.default_rng(seed)
    meas = gT.cell_measures * mask
    cells = rng.choice(gT.n_cells, size=samples, p=meas / meas.sum())
    lo = np.exp(gT.log_edge_volumes[cells])
    lo[cells == 0] = 0.0
    v = lo + rng.random(samples) * gT.cell_measures[cells]
    xs = np.asarray(inverse_radius(f.profile, np.maximum(v, 1e-300)), dtype=float)
    rad = _Radial(k)
    full = potential_at(k, fp, xs)
    b = np.exp(fp.log_edges[1:])
    best = 0.0
    for x, tv in zip(xs, full):
        P = np.concatenate([[0.0], rad.local(np.full(b.size, x), b, r_tau)])
        local = float(np.diff(P) @ fp.values)
        best = max(best, abs(tv - local))
    return best


def circ_upper_bound(k: KernelSpec, tau: float, R_support: float, B: float | None = None) -> float:
    """(B V(R)/tau)^{1/beta}, the a priori bound on (Tf)° for ||f||_{beta'} <= 1."""
    B = kernel_constants(k).B if B is None else B
    return (B * float(volume(k.profile, R_support)) / tau) ** (1.0 / k.beta)


def circ_star_comparison(k: KernelSpec, f: GridFunction, taus) -> list[dict]:
    """(Tf)° against (Tf)* = Tf(r(tau)) for radially nonincreasing Tf."""
    rows = []
    for tau in np.atleast_1d(taus):
        r = float(inverse_radius(f.profile, tau))
        star = float(abs(potential_at(k, f, [r])[0]))
        circ = tf_circ(k, f, float(tau))
        rows.append({"tau": float(tau), "radius": r, "circ": circ, "star": star, "gap": circ - star})
    return rows


# kernel constants and annuli ---------------------------------------------------------------


@dataclass(frozen=True)
class KernelConstants:
    A0: float
    A_inf: float
    B: float
    B_intercept: float
    B_pointwise: float
    critical: bool


@lru_cache(maxsize=64)
def kernel_constants(k: KernelSpec) -> KernelConstants:
    """A0, A_inf and one B serving both as the log-volume intercept and as
    the bound |k|^beta <= B / V(d)."""
    est = estimate_normalization(k)
    B3 = pointwise_bound_constant(k)[0]
    return KernelConstants(est.A0, est.A_inf, max(est.B, B3 ** k.beta), est.B, B3, est.critical)


def _ratio(B: float, A: float) -> float:
    if B == 0:
        return 0.0
    return math.inf if A == 0 else B / A


@dataclass
class AnnuliDecomposition:
    tau: float
    N: int
    R: np.ndarray
    r: np.ndarray
    j1: int
    integrals: np.ndarray
    residuals: np.ndarray
    capped: np.ndarray
    A0: float
    A_inf: float
    B: float
    beta_conj: float
    support_radius: float
    volumes_R: np.ndarray = field(repr=False, default=None)
    volumes_r: np.ndarray = field(repr=False, default=None)
    rooted: np.ndarray = field(repr=False, default=None)  # interior r_j placed by the root finder

    @property
    def root_residual(self) -> float:
        """Largest |int - beta' A| over interior radii placed by the root finder."""
        if self.rooted is None or not np.any(self.rooted):
            return 0.0
        return float(np.max(np.abs(self.residuals[self.rooted])))

    @property
    def lower_volume_constant(self) -> float:
        return math.exp(-_ratio(self.B, self.A0) - _ratio(self.B, self.A_inf))

    @property
    def Q1(self) -> float:
        bc = self.beta_conj
        m = min(self.A0, self.A_inf)
        if self.B == 0:
            return math.expm1(bc)
        return min(math.expm1(bc), bc * m / self.B * self.lower_volume_constant)

    @property
    def Q2(self) -> float:
        bc = self.beta_conj
        A = max(self.A0, self.A_inf)
        return max(bc * A, A * (2 * bc + _ratio(self.B, self.A0) + _ratio(self.B, self.A_inf)) + 2 * self.B)

    def check(self, rel: float = 1e-10) -> VerificationReport:
        rep = VerificationReport("annuli")
        bc = self.beta_conj
        VR, Vr = self.volumes_R, self.volumes_r
        c = self.lower_volume_constant
        ok_vols = all(
            c * VR[j] <= Vr[j] * (1 + rel) and Vr[j] <= math.exp(bc) * VR[j] * (1 + rel) for j in range(self.N + 1)
        )
        rep.add(CaseRecord("volume_comparability", {"tau": self.tau, "N": self.N},
                           {"min_ratio": float(np.min(Vr / VR)), "max_ratio": float(np.max(Vr / VR)), "lower": c},
                           "lower V(R_j) <= V(r_j) <= e^{beta'} V(R_j)", ok_vols, rel, "PAPER"))
        ok_gap = True
        gaps = np.diff(Vr) / VR[:-1] if self.N >= 1 else np.zeros(0)
        for j in range(self.N):
            g = gaps[j]
            ok_gap &= bool(self.Q1 * (1 - rel) <= g and g <= math.exp(2 * bc) * (1 + rel))
        rep.add(CaseRecord("volume_gaps", {"tau": self.tau, "N": self.N},
                           {"min_gap": float(np.min(gaps)) if gaps.size else math.nan,
                            "max_gap": float(np.max(gaps)) if gaps.size else math.nan, "Q1": self.Q1},
                           "Q1 V(R_j) <= V(r_{j+1}) - V(r_j) <= e^{2beta'} V(R_j)", ok_gap, rel, "PAPER"))
        ok_int = bool(np.all(self.integrals <= self.Q2 * (1 + rel)))
        rep.add(CaseRecord("integral_bound", {"tau": self.tau, "N": self.N},
                           {"max_integral": float(np.max(self.integrals)) if self.integrals.size else 0.0,
                            "Q2": self.Q2},
                           "annulus integrals of |k|^beta <= Q2", ok_int, rel, "DERIVED"))
        return rep

    def to_dict(self) -> dict:
        return {"tau": self.tau, "N": self.N, "j1": self.j1, "R": self.R.tolist(), "r": self.r.tolist(),
                "integrals": self.integrals.tolist(), "residuals": self.residuals.tolist(),
                "capped": self.capped.tolist(), "rooted": [] if self.rooted is None else self.rooted.tolist(),
                "A0": self.A0, "A_inf": self.A_inf, "B": self.B,
                "Q1": self.Q1, "Q2": self.Q2, "support_radius": self.support_radius}

    def to_json(self) -> str:
        d = self.to_dict()
        d["residuals"] = [None if not math.isfinite(x) else x for x in d["residuals"]]
        return json.dumps(d, sort_keys=True, indent=2, allow_nan=False)


def annulus_count(k: KernelSpec, tau: float, R_support: float) -> int:
    bc = k.beta_conj
    x = (float(log_volume(k.profile, math.log(R_support))) - math.log(tau)) / bc
    if x <= 0:
        return 0
    if x <= 2 + 1e-12:
        return 1
    return int(math.ceil(x - 1e-9)) - 1


def build_annuli(k: KernelSpec, tau: float, R_support: float, constants: KernelConstants | None = None,
                 root_tol: float = 1e-12) -> AnnuliDecomposition:
    """Annuli r_0 = R_0 < r_1 <= ... with r_N = R_support, each interior r_j the
    largest r <= R_j with int_{r_{j-1} < d < r} |k|^beta <= beta' A."""
    if tau <= 0 or R_support <= 0:
        raise DomainError("tau and R_support must be positive")
    cst = kernel_constants(k) if constants is None else constants
    bc = k.beta_conj
    N = annulus_count(k, tau, R_support)
    prof = k.profile
    Rj = np.exp(log_inverse_radius(prof, math.log(tau) + bc * np.arange(N + 1)))
    Rj = np.atleast_1d(np.asarray(Rj, dtype=float))
    r = Rj.copy()
    if N >= 1:
        r[N] = R_support
    residuals = np.full(max(N - 1, 0), math.nan)
    capped = np.zeros(max(N - 1, 0), bool)
    rooted = np.zeros(max(N - 1, 0), bool)
    r_one = float(inverse_radius(prof, 1.0))

    def I(a, b):
        return annulus_integral(k, a, b) if b > a else 0.0

    for j in range(1, N):
        A = cst.A_inf if r[j - 1] >= r_one else cst.A0
        target = bc * A
        full = I(r[j - 1], Rj[j])
        if full <= target * (1 + 1e-10):
            r[j] = Rj[j]
            capped[j - 1] = True
        elif target == 0:
            r[j] = r[j - 1]
        else:
            r[j] = brentq(lambda x: I(r[j - 1], x) - target, r[j - 1], Rj[j], xtol=root_tol * Rj[j] * 1e-2,
                          rtol=1e-15, maxiter=500)
            rooted[j - 1] = True
        residuals[j - 1] = I(r[j - 1], r[j]) - target
    Vr = np.asarray(volume(prof, r), dtype=float)
    VR = np.asarray(volume(prof, Rj), dtype=float)
    Vr, VR = np.atleast_1d(Vr), np.atleast_1d(VR)
    hit = np.nonzero(Vr >= 1.0)[0]
    j1 = int(hit[0]) if hit.size else N
    ints = np.array([I(r[j], r[j + 1]) for j in range(N)])
    return AnnuliDecomposition(tau, N, Rj, r, j1, ints, residuals, capped, cst.A0, cst.A_inf, cst.B, bc,
                               float(R_support), VR, Vr, rooted)


# annulus decay and descending growth ------------------------------------------------------


def _cell_edges(g: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    a = np.exp(g.log_edges[:-1])
    return a, np.exp(g.log_edges[1:])


def annulus_decay_check(k: KernelSpec, f: GridFunction, tau: float, per_efold: float = 20.0) -> VerificationReport:
    """Average of |Tf_tau| over (D_{j+1} minus D_j) minus E_tau against e^{-(beta'-1) j}.

    Reports C3 = max_j average_j e^{(beta'-1) j}."""
    rep = VerificationReport(f"annulus_decay:{k.name}")
    R = f.support_radius
    dec = build_annuli(k, tau, R)
    bc = k.beta_conj
    base = merge_edges(default_output_edges(f, extend=1.0), np.log(dec.r),
                       np.log(log_grid(float(dec.r[0]) * 1e-3, R, per_efold)))
    Tf = apply(k, f, base)
    rE = level_set_radius(Tf, tau)
    edges = merge_edges(base, [math.log(rE)] if rE > 0 else [])
    Tf = apply(k, f, edges)
    gT, mask = level_set_mask(Tf, tau)
    f_tau, _ = split(f, tau)
    Tft = apply(k, f_tau, gT.log_edges[1:])
    a, b = _cell_edges(gT)
    meas = gT.cell_measures
    vals = np.abs(Tft.values)
    C3 = 0.0
    avgs = []
    for j in range(max(dec.N - 1, 0)):
        sel = (a >= dec.r[j] * (1 - 1e-12)) & (b <= dec.r[j + 1] * (1 + 1e-12)) & ~mask
        m = float(np.sum(meas[sel]))
        avg = float(np.sum(vals[sel] * meas[sel]) / m) if m > 0 else 0.0
        avgs.append(avg)
        C3 = max(C3, avg * math.exp((bc - 1.0) * j))
    rep.add(CaseRecord(
        name="annulus_decay",
        inputs={"kernel": k.name, "tau": tau, "N": dec.N},
        measured={"C3": C3, "averages": avgs},
        relation="average_j <= C3 e^{-(beta'-1) j} with finite C3",
        passed=math.isfinite(C3),
        tolerance=0.0,
        provenance="DERIVED",
    ))
    return rep


def descending_growth_constant(k: KernelSpec, f: GridFunction, tau: float, p: float | None = None,
                               out_log_edges=None) -> dict:
    """Measured C in exp[(Tf)°^beta / max A] / (1 + (Tf)°^{p beta/beta'}) <= (C/tau) ||Tf chi_{E^c}||_p^p."""
    p = k.beta_conj if p is None else p
    bc = k.beta_conj
    circ = tf_circ(k, f, tau)
    dec = build_annuli(k, tau, f.support_radius)
    c_star = dec.Q2 ** (1.0 / k.beta)
    out = {"tau": tau, "circ": circ, "C_star": c_star, "skipped": circ <= c_star}
    Tf = apply(k, f, out_log_edges)
    gT, mask = level_set_mask(Tf, tau)
    a = np.abs(gT.values)
    outside = float(np.sum(a[~mask] ** p * gT.cell_measures[~mask]))
    outside += monopole_tail_power(k, f, p, gT.support_radius)
    A = max(kernel_constants(k).A0, kernel_constants(k).A_inf)
    log_lhs = circ ** k.beta / A - math.log1p(circ ** (p * k.beta / bc))
    out["norm_outside"] = outside
    out["C"] = math.exp(math.log(tau) + log_lhs) / outside if outside > 0 else (0.0 if circ == 0 else math.inf)
    return out


def descending_growth_check(k: KernelSpec, f: GridFunction, tau, p: float | None = None,
                            bound: float | None = None) -> VerificationReport:
    """Measured descending-growth constant per tau; cases with (Tf)° <= C* are
    skipped and counted. With `bound`, each measured C must not exceed it."""
    rep = VerificationReport(f"descending_growth:{k.name}")
    skipped = 0
    Cs = []
    for t in np.atleast_1d(tau):
        d = descending_growth_constant(k, f, float(t), p)
        if d["skipped"]:
            skipped += 1
            continue
        Cs.append(d["C"])
        rep.add(CaseRecord(
            name=f"tau_{t:.3e}",
            inputs={"kernel": k.name, "tau": float(t)},
            measured={k2: v for k2, v in d.items() if k2 != "skipped"},
            relation="measured C finite" + ("" if bound is None else f" and <= {bound}"),
            passed=math.isfinite(d["C"]) and (bound is None or d["C"] <= bound),
            tolerance=0.0,
            provenance="DERIVED",
        ))
    rep.grid = {"skipped": skipped, "evaluated": len(Cs)}
    return rep
