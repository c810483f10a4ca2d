"""Radial metric measure spaces described by their ball-volume law."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import beta as beta_fn

Kind = Literal["euclidean", "heisenberg", "custom"]


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(ValueError):
    """Argument outside the attainable or tabulated range."""


def sphere_area(m: int) -> float:
    """Surface measure of the unit sphere S^m in R^(m+1)."""
    return 2.0 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2)


def euclidean_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def koranyi_sphere_measure(n: int) -> float:
    """Measure of the Koranyi unit sphere in polar coordinates on H^n.

    Equals omega_{2n-1} * int_{-pi/2}^{pi/2} cos(theta)^(n-1) dtheta,
    and the angular integral is the beta function B(1/2, n/2).
    """
    return sphere_area(2 * n - 1) * beta_fn(0.5, n / 2)


@dataclass(frozen=True)
class VolumeProfile:
    kind: Kind
    n: int
    Q: int
    unit_ball_volume: float
    table_radii: tuple[float, ...] = field(default=(), repr=False)
    table_measures: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.n < 1 or self.Q < 1:
            raise DomainError("dimensions must be positive")
        if not self.unit_ball_volume > 0:
            raise DomainError("unit ball volume must be positive")
        if self.kind == "custom":
            r = np.asarray(self.table_radii, dtype=float)
            m = np.asarray(self.table_measures, dtype=float)
            if r.size < 2 or r.size != m.size:
                raise DomainError("custom profile needs at least two (radius, measure) rows")
            if r[0] <= 0 or m[0] <= 0:
                raise DomainError("tabulated radii and measures must be positive")
            if np.any(np.diff(r) <= 0) or np.any(np.diff(m) <= 0):
                raise DomainError("custom volume law must be strictly increasing")
            rr = np.concatenate([[0.0], r])
            mm = np.concatenate([[0.0], m])
            object.__setattr__(self, "_interp", PchipInterpolator(rr, mm, extrapolate=False))

    @property
    def homogeneous(self) -> bool:
        return self.kind != "custom"

    @property
    def max_radius(self) -> float:
        return self.table_radii[-1] if self.kind == "custom" else math.inf

    @property
    def max_measure(self) -> float:
        return self.table_measures[-1] if self.kind == "custom" else math.inf

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n": self.n, "Q": self.Q, "unit_ball_volume": self.unit_ball_volume}
        if self.kind == "custom":
            d["radii"] = list(self.table_radii)
            d["measures"] = list(self.table_measures)
        return d

    @staticmethod
    def from_dict(d: dict) -> "VolumeProfile":
        if d["kind"] == "euclidean":
            return euclidean(int(d["n"]))
        if d["kind"] == "heisenberg":
            return heisenberg(int(d["n"]))
        return custom(d["radii"], d["measures"], n=int(d["n"]), Q=int(d["Q"]))


def euclidean(n: int) -> VolumeProfile:
    return VolumeProfile("euclidean", n, n, euclidean_ball_volume(n))


def heisenberg(n: int) -> VolumeProfile:
    """H^n with Haar measure and balls of the Koranyi norm (|z|^4 + t^2)^(1/4)."""
    Q = 2 * n + 2
    return VolumeProfile("heisenberg", n, Q, koranyi_sphere_measure(n) / Q)


def custom(radii, measures, n: int = 1, Q: int | None = None) -> VolumeProfile:
    r = tuple(float(x) for x in radii)
    m = tuple(float(x) for x in measures)
    if len(r) < 1:
        raise DomainError("empty table")
    return VolumeProfile("custom", n, Q if Q is not None else n, m[0] / r[0] ** (Q or n), r, m)


def load_profile_csv(path: str | Path, n: int = 1, Q: int | None = None) -> VolumeProfile:
    radii, measures = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                a, b = float(row[0]), float(row[1])
            except ValueError:
                continue  # header row
            radii.append(a)
            measures.append(b)
    return custom(radii, measures, n=n, Q=Q)


def volume(profile: VolumeProfile, r):
    """Measure of the ball of radius r; vectorized over r."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("radius must be nonnegative")
    if profile.homogeneous:
        out = profile.unit_ball_volume * arr ** profile.Q
    else:
        if np.any(arr > profile.max_radius * (1 + 1e-15)):
            raise RangeError("radius beyond tabulated range")
        out = profile._interp(np.minimum(arr, profile.max_radius))
    return float(out) if np.ndim(out) == 0 else out


def log_volume(profile: VolumeProfile, log_r):
    """log V(e^s) for homogeneous kinds, computed without forming e^s."""
    s = np.asarray(log_r, dtype=float)
    if profile.homogeneous:
        out = math.log(profile.unit_ball_volume) + profile.Q * s
    else:
        with np.errstate(divide="ignore"):
            out = np.log(volume(profile, np.exp(s)))
    return float(out) if np.ndim(out) == 0 else out


def inverse_radius(profile: VolumeProfile, tau):
    """Smallest r with V(r) = tau."""
    t = np.asarray(tau, dtype=float)
    if np.any(t <= 0) or np.any(np.isnan(t)):
        raise DomainError("measure must be positive")
    if profile.homogeneous:
        out = (t / profile.unit_ball_volume) ** (1.0 / profile.Q)
        return float(out) if np.ndim(out) == 0 else out
    if np.any(t > profile.max_measure * (1 + 1e-15)):
        raise RangeError("measure beyond tabulated range")
    flat = np.atleast_1d(t).astype(float)
    lo = np.zeros_like(flat)
    hi = np.full_like(flat, profile.max_radius)
    # bisection to 1e-12 relative in r
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = profile._interp(mid) < flat
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-13 * hi):
            break
    out = 0.5 * (lo + hi)
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(t.shape)


def log_inverse_radius(profile: VolumeProfile, log_tau):
    """log r(e^L) for homogeneous kinds, avoiding overflow for extreme measures."""
    L = np.asarray(log_tau, dtype=float)
    if profile.homogeneous:
        out = (L - math.log(profile.unit_ball_volume)) / profile.Q
        return float(out) if np.ndim(out) == 0 else out
    return np.log(inverse_radius(profile, np.exp(L)))
