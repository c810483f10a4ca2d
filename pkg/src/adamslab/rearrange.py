"""Radial grid functions, distribution functions and decreasing rearrangements.

A GridFunction is piecewise constant on annuli [r_i, r_{i+1}) of a radius
grid stored by its log-radii, so every distribution function is an exact
finite sum of annulus measures.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal

import numpy as np
from scipy.special import logsumexp

from .measure_space import (
    DomainError,
    RangeError,
    VolumeProfile,
    inverse_radius,
    log_volume,
)

SampleRule = Literal["left", "mid", "right"]


def _log_volumes(profile: VolumeProfile, log_edges: np.ndarray) -> np.ndarray:
    out = np.full(log_edges.shape, -np.inf)
    finite = np.isfinite(log_edges)
    out[finite] = log_volume(profile, log_edges[finite])
    return out


def _log_diff_exp(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """log(e^hi - e^lo) for hi > lo, lo possibly -inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(np.isfinite(lo), lo - hi, -np.inf)
        return hi + np.log(-np.expm1(d))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Radial function, value values[i] on the annulus between edges i and i+1.

    log_edges[0] is -inf, meaning the first cell is the ball around the origin.
    The function vanishes beyond the last edge, which is the support radius.
    """

    profile: VolumeProfile
    log_edges: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.log_edges, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or v.ndim != 1 or e.size != v.size + 1:
            raise DomainError("need len(log_edges) == len(values) + 1")
        if e[0] != -np.inf:
            raise DomainError("first edge must be the origin; use from_edges with an inner rule")
        if np.any(np.isnan(e)) or np.any(np.diff(e) <= 0) or not np.isfinite(e[-1]):
            raise DomainError("radii must be strictly increasing and finite")
        if np.any(~np.isfinite(v)):
            raise DomainError("values must be finite")
        object.__setattr__(self, "log_edges", e)
        object.__setattr__(self, "values", v)
        lv = _log_volumes(self.profile, e)
        object.__setattr__(self, "log_edge_volumes", lv)
        object.__setattr__(self, "log_cell_measures", _log_diff_exp(lv[1:], lv[:-1]))

    # construction -------------------------------------------------------
    @staticmethod
    def from_edges(profile, radii, values, inner: Literal["extend", "zero"] = "zero", log: bool = False):
        """Values on [radii[i], radii[i+1]); the ball inside radii[0] is filled by `inner`."""
        e = np.asarray(radii, dtype=float)
        le = e if log else np.log(e)
        v = np.asarray(values, dtype=float)
        if le[0] == -np.inf:
            return GridFunction(profile, le, v)
        if inner == "extend":
            le = le.copy()
            le[0] = -np.inf
            return GridFunction(profile, le, v)
        if inner == "zero":
            return GridFunction(profile, np.concatenate([[-np.inf], le]), np.concatenate([[0.0], v]))
        raise DomainError("an inner-value rule is required when the first radius is positive")

    @staticmethod
    def from_callable(
        profile: VolumeProfile,
        fn: Callable[[np.ndarray], np.ndarray],
        radii,
        rule: SampleRule = "mid",
        inner: Literal["extend", "zero"] = "extend",
    ) -> "GridFunction":
        """Sample fn on the cells of the grid; the inner ball [0, radii[0]) is
        filled with fn sampled by the same rule when inner == 'extend'."""
        le = np.log(np.asarray(radii, dtype=float))
        full = np.concatenate([[-np.inf], le])
        lv = _log_volumes(profile, full)
        pts = sample_log_radii(profile, full, lv, rule)
        with np.errstate(divide="ignore"):
            vals = np.asarray(fn(np.exp(pts)), dtype=float)
        if inner == "zero":
            vals = vals.copy()
            vals[0] = 0.0
        elif not math.isfinite(vals[0]):
            vals = vals.copy()
            vals[0] = float(fn(np.exp(le[:1]))[0])
        return GridFunction(profile, full, vals)

    # geometry -----------------------------------------------------------
    @property
    def n_cells(self) -> int:
        return self.values.size

    @property
    def radii(self) -> np.ndarray:
        return np.exp(self.log_edges)

    @property
    def support_radius(self) -> float:
        return float(math.exp(self.log_edges[-1]))

    @property
    def cell_measures(self) -> np.ndarray:
        return np.exp(self.log_cell_measures)

    @property
    def total_measure(self) -> float:
        return float(math.exp(self.log_edge_volumes[-1]))

    def sample_log_radii(self, rule: SampleRule = "mid") -> np.ndarray:
        return sample_log_radii(self.profile, self.log_edges, self.log_edge_volumes, rule)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.profile, self.log_edges, np.asarray(values, dtype=float))

    def insert_edge(self, log_r: float) -> "GridFunction":
        """Same function on a grid refined by one extra edge (no-op if present)."""
        if log_r <= self.log_edges[0] or np.any(self.log_edges == log_r):
            return self
        if log_r > self.log_edges[-1]:
            return GridFunction(
                self.profile,
                np.concatenate([self.log_edges, [log_r]]),
                np.concatenate([self.values, [0.0]]),
            )
        i = int(np.searchsorted(self.log_edges, log_r))
        e = np.insert(self.log_edges, i, log_r)
        v = np.insert(self.values, i - 1, self.values[i - 1])
        return GridFunction(self.profile, e, v)

    # integrals ----------------------------------------------------------
    def integral_power(self, p: float) -> float:
        """int |f|^p dmu."""
        a = np.abs(self.values)
        nz = a > 0
        if not np.any(nz):
            return 0.0
        return float(np.exp(logsumexp(p * np.log(a[nz]) + self.log_cell_measures[nz])))

    def norm(self, p: float) -> float:
        return self.integral_power(p) ** (1.0 / p)

    def integrate(self, phi: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.sum(phi(np.abs(self.values)) * self.cell_measures))

    # io -----------------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# profile: " + json.dumps(self.profile.to_dict(), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "value"])
        for le, v in zip(self.log_edges[:-1], self.values):
            w.writerow([repr(float(math.exp(le))), repr(float(v))])
        w.writerow([repr(float(math.exp(self.log_edges[-1]))), "0.0"])
        return buf.getvalue()

    def save_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())

    @staticmethod
    def from_csv(text: str) -> "GridFunction":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# profile:"):
            raise DomainError("missing profile header")
        profile = VolumeProfile.from_dict(json.loads(lines[0][len("# profile:"):]))
        rows = [r for r in csv.reader(lines[2:]) if r]
        radii = np.array([float(r[0]) for r in rows])
        vals = np.array([float(r[1]) for r in rows[:-1]])
        with np.errstate(divide="ignore"):
            le = np.log(radii)
        return GridFunction(profile, le, vals)

    @staticmethod
    def load_csv(path: str | Path) -> "GridFunction":
        return GridFunction.from_csv(Path(path).read_text())


def sample_log_radii(profile, log_edges, log_edge_volumes, rule: SampleRule) -> np.ndarray:
    """Sample log-radius per cell: inner edge, outer edge, or measure midpoint."""
    if rule == "left":
        return log_edges[:-1].copy()
    if rule == "right":
        return log_edges[1:].copy()
    if rule != "mid":
        raise DomainError(f"unknown rule {rule!r}")
    hi = log_edge_volumes[1:]
    lo = log_edge_volumes[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(np.isfinite(lo), lo - hi, -np.inf)
        lmid = hi + np.log1p(np.exp(d)) - math.log(2.0)
    if profile.homogeneous:
        return (lmid - math.log(profile.unit_ball_volume)) / profile.Q
    return np.log(inverse_radius(profile, np.exp(lmid)))


def log_grid(r_min: float, r_max: float, per_efold: float = 20.0) -> np.ndarray:
    """Geometric radius grid from r_min to r_max, endpoints included."""
    k = max(2, int(math.ceil(per_efold * math.log(r_max / r_min))) + 1)
    return np.exp(np.linspace(math.log(r_min), math.log(r_max), k))


# rearrangement ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RearrangedProfile:
    """Decreasing rearrangement as an exact step function.

    f*(t) = levels[k] for breaks[k-1] <= t < breaks[k] (breaks[-1] = total),
    and 0 beyond the total measure. measure_points/star_values sample it on a
    log-spaced measure grid.
    """

    levels: np.ndarray
    breaks: np.ndarray
    measure_points: np.ndarray
    star_values: np.ndarray

    @property
    def total_measure(self) -> float:
        return float(self.breaks[-1]) if self.breaks.size else 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.breaks, t, side="right")
        lv = np.concatenate([self.levels, [0.0]])
        out = lv[k]
        return float(out) if out.ndim == 0 else out

    def integral(self, t):
        """int_0^t f*(u) du, exact."""
        t = np.asarray(t, dtype=float)
        starts = np.concatenate([[0.0], self.breaks[:-1]])
        lens = np.clip(t[..., None] - starts, 0.0, self.breaks - starts)
        out = np.sum(lens * self.levels, axis=-1)
        return float(out) if out.ndim == 0 else out

    def integral_of(self, phi: Callable[[np.ndarray], np.ndarray], t=None) -> float:
        """int_0^t phi(f*(u)) du (t defaults to the total measure)."""
        starts = np.concatenate([[0.0], self.breaks[:-1]])
        ends = self.breaks if t is None else np.minimum(self.breaks, t)
        lens = np.clip(ends - starts, 0.0, None)
        return float(np.sum(phi(self.levels) * lens))


def rearrange_cells(values, measures) -> tuple[np.ndarray, np.ndarray]:
    """Sort |values| decreasingly with their measures; return (levels, breaks)."""
    a = np.abs(np.asarray(values, dtype=float))
    m = np.asarray(measures, dtype=float)
    keep = (a > 0) & (m > 0)
    a, m = a[keep], m[keep]
    order = np.argsort(-a, kind="stable")
    return a[order], np.cumsum(m[order])


def decreasing_rearrangement(f: GridFunction, n_points: int = 400) -> RearrangedProfile:
    levels, breaks = rearrange_cells(f.values, f.cell_measures)
    total = float(breaks[-1]) if breaks.size else 0.0
    if total > 0:
        pts = np.geomspace(1e-8 * total, total, n_points)
    else:
        pts = np.zeros(0)
    rp = RearrangedProfile(levels, breaks, pts, np.zeros_like(pts))
    object.__setattr__(rp, "star_values", np.asarray(rp(pts)) if pts.size else pts)
    return rp


def distribution(f: GridFunction, s: float) -> float:
    """mu{|f| > s}."""
    if s < 0:
        raise DomainError("level must be nonnegative")
    sel = np.abs(f.values) > s
    return float(np.sum(f.cell_measures[sel]))


def double_star(p: RearrangedProfile, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("t must be positive")
    out = p.integral(t_arr) / t_arr
    return float(out) if np.ndim(out) == 0 else out


def symmetric_rearrangement(f: GridFunction) -> GridFunction:
    """Radially nonincreasing grid function equimeasurable with |f|."""
    levels, breaks = rearrange_cells(f.values, f.cell_measures)
    if levels.size == 0:
        return f.with_values(np.zeros_like(f.values))
    if f.profile.homogeneous:
        le = (np.log(breaks) - math.log(f.profile.unit_ball_volume)) / f.profile.Q
    else:
        le = np.log(inverse_radius(f.profile, breaks))
    # drop the zero-width steps left where consecutive breaks collapse numerically
    keep = np.concatenate([[True], np.diff(le) > 0])
    le, lv = le[keep], levels[keep]
    return GridFunction(f.profile, np.concatenate([[-np.inf], le]), lv)


# level sets --------------------------------------------------------------


def _star_at(f: GridFunction, tau: float) -> float:
    levels, breaks = rearrange_cells(f.values, f.cell_measures)
    k = int(np.searchsorted(breaks, tau, side="right"))
    return float(levels[k]) if k < levels.size else 0.0


def level_set_radius(f: GridFunction, tau: float) -> float:
    """Radius r of the ball component of F_tau = V1 u (B(0,r) n (V2 minus V1)).

    V1 = {|f| > f*(tau)}, V2 = {|f| >= f*(tau)}; flat levels are broken by the
    centered ball. When f*(tau) = 0 the exterior of the support is part of the
    plateau.
    """
    if tau <= 0:
        raise DomainError("tau must be positive")
    s = _star_at(f, tau)
    a = np.abs(f.values)
    meas = f.cell_measures
    deficit = tau - float(np.sum(meas[a > s]))
    plateau = a == s
    acc = 0.0
    idx = np.nonzero(plateau)[0]
    if deficit <= 0:
        if idx.size:
            return float(math.exp(f.log_edges[idx[0]])) if idx[0] > 0 else 0.0
        return f.support_radius if s == 0 else 0.0
    for i in idx:
        m = float(meas[i])
        if acc + m >= deficit:
            base = 0.0 if i == 0 else float(math.exp(f.log_edge_volumes[i]))
            return float(inverse_radius(f.profile, base + (deficit - acc)))
        acc += m
    if s == 0:
        target = f.total_measure + (deficit - acc)
        if target > f.profile.max_measure * (1 + 1e-15):
            raise RangeError("tau exceeds the attainable measure")
        return float(inverse_radius(f.profile, target))
    raise RangeError("tau exceeds the measure of the plateau structure")


def level_set_mask(f: GridFunction, tau: float) -> tuple[GridFunction, np.ndarray]:
    """Refine f so F_tau is a union of cells; return (refined f, mask of F_tau cells)."""
    s = _star_at(f, tau)
    r = level_set_radius(f, tau)
    g = f.insert_edge(math.log(r)) if r > 0 else f
    a = np.abs(g.values)
    inner = g.log_edges[1:] <= (math.log(r) if r > 0 else -np.inf) + 1e-15
    mask = (a > s) | ((a == s) & inner)
    return g, mask


def split(f: GridFunction, tau: float) -> tuple[GridFunction, GridFunction]:
    """(f_tau, f'_tau) = (f on F_tau, f off F_tau) on a common refined grid."""
    g, mask = level_set_mask(f, tau)
    return g.with_values(np.where(mask, g.values, 0.0)), g.with_values(np.where(mask, 0.0, g.values))


def rearrangement_identity_check(f: GridFunction, phi: Callable[[np.ndarray], np.ndarray], tau: float) -> float:
    """|int_{F_tau} phi(|f|) - int_0^tau phi(f*)|."""
    g, mask = level_set_mask(f, tau)
    lhs = float(np.sum(phi(np.abs(g.values[mask])) * g.cell_measures[mask]))
    # plateau at level 0 outside the support contributes phi(0) times its measure
    extra = max(0.0, tau - float(np.sum(g.cell_measures[mask])))
    lhs += float(phi(np.array([0.0]))[0]) * extra
    rp = decreasing_rearrangement(f)
    rhs = rp.integral_of(phi, tau) + float(phi(np.array([0.0]))[0]) * max(0.0, tau - rp.total_measure)
    return abs(lhs - rhs)
