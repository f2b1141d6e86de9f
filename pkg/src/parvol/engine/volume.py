"""Parallel volumes from distance fields and from closed-form oracles."""
from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..errors import RadiusOutOfBand, UnknownKind
from ..geometry import Set1D
from .grid import DistanceField

WINDOW = 12


@dataclass
class VolumeSamples:
    """Sampled ``r -> V(r)`` with a per-sample error bound.

    ``noise`` is a global scale (in volume units) for the sample-to-sample
    scatter: the 90th percentile over sliding windows of the largest residual
    of a local quadratic fit.  Kink windows land above that percentile.
    """

    radii: np.ndarray
    V: np.ndarray
    err: np.ndarray
    source: str
    h: float = 0.0
    estimator: str = "exact"
    exact: Optional[list] = None
    noise: float = field(default=math.nan)
    label: str = ""

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        self.err = np.broadcast_to(np.asarray(self.err, dtype=float), self.V.shape).copy()
        if self.radii.ndim != 1 or self.radii.shape != self.V.shape:
            raise ValueError("radii and V must be 1D arrays of equal length")
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("radii must be strictly increasing")
        if math.isnan(self.noise):
            self.noise = residual_scale(self.radii, self.V)

    def __len__(self) -> int:
        return len(self.radii)

    def with_values(self, V) -> "VolumeSamples":
        """Copy with replaced values; the noise scale is kept."""
        return replace(self, V=np.asarray(V, dtype=float), exact=None, err=self.err.copy())

    def monotone_violation(self) -> float:
        drops = -np.diff(self.V) - (self.err[1:] + self.err[:-1])
        return float(max(0.0, drops.max(initial=0.0)))

    def to_rows(self):
        return list(zip(self.radii.tolist(), self.V.tolist(), self.err.tolist()))


def residual_scale(radii: np.ndarray, V: np.ndarray, window: int = WINDOW) -> float:
    n = len(radii)
    floor = 1e-14 * max(1.0, float(np.abs(V).max(initial=0.0)))
    if n < window:
        return floor
    res = []
    for a in range(0, n - window + 1, max(1, window // 2)):
        t = radii[a:a + window] - radii[a]
        c = np.polyfit(t, V[a:a + window], 2)
        res.append(np.abs(np.polyval(c, t) - V[a:a + window]).max())
    return max(floor, float(np.quantile(res, 0.9)))


def radii_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Integer multiples of ``step`` in ``[lo, hi]`` (so round radii are hit exactly)."""
    k0 = math.ceil(lo / step - 1e-9)
    k1 = math.floor(hi / step + 1e-9)
    return np.arange(k0, k1 + 1) * step


# ---------------------------------------------------------------------------
# grid estimator


def _check_band(f: DistanceField, radii: np.ndarray) -> None:
    lo, hi = float(radii.min()), float(radii.max())
    if lo < 2 * f.h * (1 - 1e-9) or hi > f.r_max * (1 + 1e-12):
        raise RadiusOutOfBand(f"radii [{lo}, {hi}] outside trusted band [{2 * f.h}, {f.r_max}]")


def volume_function(src, radii: Sequence[float], estimator: str = "auto") -> VolumeSamples:
    """Parallel volume at each radius.

    ``src`` is a :class:`DistanceField`, a :class:`Set1D` (exact interval
    arithmetic) or a ``(kind, params)`` oracle pair.

    Grid estimators: ``"count"`` is h^2 #{cells with value < r}.
    ``"fractional"`` gives each cell the fraction ``clip(1/2 + (r - d)/h)``
    of its area, which makes V piecewise linear in r at scale h instead of a
    step function.  ``"cutcell"`` (the default when the field carries nearest
    points) linearises the distance inside each cell along the direction
    away from its nearest point and takes the exact area of the cell on the
    near side of that line; it is exact for half-planes in any orientation.
    """
    radii = np.asarray(radii, dtype=float)
    if isinstance(src, Set1D):
        ex = [volume_1d_exact(src, _exactify(r, src)) for r in radii]
        return VolumeSamples(radii, [float(v) for v in ex], 0.0, "exact-oracle", exact=ex)
    if isinstance(src, tuple):
        kind, params = src
        V = [exact_volume_oracle(kind, params, float(r)) for r in radii]
        return VolumeSamples(radii, V, 0.0, "exact-oracle")
    _check_band(src, radii)
    if estimator == "auto":
        estimator = "cutcell" if src.feet is not None else "fractional"
    h = src.h
    cell = h * h
    d = np.sort(src.values, axis=None)
    near = np.searchsorted(d, radii + h, side="left") - np.searchsorted(d, radii - h, side="right")
    err = cell * near
    if estimator == "count":
        V = cell * np.searchsorted(d, radii, side="left")
    elif estimator == "fractional":
        csum = np.concatenate([[0.0], np.cumsum(d)])
        lo = np.searchsorted(d, radii - h / 2, side="right")
        hi = np.searchsorted(d, radii + h / 2, side="left")
        k = hi - lo
        part = k * (0.5 + radii / h) - (csum[hi] - csum[lo]) / h
        V = cell * (lo + part)
    elif estimator == "cutcell":
        V = cell * _cutcell_counts(src, radii)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return VolumeSamples(radii, V, err, "grid", h=h, estimator=estimator)


def square_cut_fraction(t: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Area of {(x, y) in [-1/2, 1/2]^2 : a x + b y < t} for a >= b >= 0, a > 0."""
    lo = (a - b) / 2
    hi = (a + b) / 2
    ab2 = 2 * a * np.maximum(b, 1e-300)
    mid = t / a + 0.5
    low = (t + hi) ** 2 / ab2
    top = 1 - (hi - t) ** 2 / ab2
    out = np.where(t <= -lo, low, np.where(t >= lo, top, mid))
    out = np.where(t <= -hi, 0.0, np.where(t >= hi, 1.0, out))
    return np.clip(out, 0.0, 1.0)


def cell_fractions(f: DistanceField, r: float, rows: slice, estimator: str = "auto") -> np.ndarray:
    """Fraction of each cell (in the given rows) lying in the open r-neighbourhood."""
    h = f.h
    d = f.values[rows]
    if estimator == "auto":
        estimator = "cutcell" if f.feet is not None else "fractional"
    if estimator == "count":
        return (d < r).astype(float)
    if estimator == "fractional":
        return np.clip(0.5 + (r - d) / h, 0.0, 1.0)
    X, Y = np.meshgrid(f.grid.xs, f.grid.ys[rows])
    ux = np.abs(X - f.feet[0][rows])
    uy = np.abs(Y - f.feet[1][rows])
    nrm = np.where(d > 0, np.hypot(ux, uy), 1.0)
    a = np.maximum(ux, uy) / nrm
    b = np.minimum(ux, uy) / nrm
    a = np.where(d > 0, a, 1.0)
    out = square_cut_fraction((r - d) / h, a, b)
    return np.where(d == 0, 1.0, out)


def _cutcell_counts(f: DistanceField, radii: np.ndarray) -> np.ndarray:
    h = f.h
    vals = f.values.ravel()
    reach = float(radii.max()) + h
    sel = np.nonzero((vals > 0) & (vals < reach))[0]
    inside = int(np.count_nonzero(vals == 0))
    d = vals[sel]
    rows, cols = np.divmod(sel, f.grid.nx)
    ux = f.grid.xs[cols] - f.feet[0].ravel()[sel]
    uy = f.grid.ys[rows] - f.feet[1].ravel()[sel]
    nrm = np.hypot(ux, uy)
    ux, uy = np.abs(ux) / nrm, np.abs(uy) / nrm
    a = np.maximum(ux, uy)
    b = np.minimum(ux, uy)
    order = np.argsort(d)
    d, a, b = d[order], a[order], b[order]
    out = np.empty(len(radii))
    for k, r in enumerate(radii):
        # every cell with d <= r - h/sqrt(2) is fully inside
        i0 = np.searchsorted(d, r - h * 0.7072, side="right")
        i1 = np.searchsorted(d, r + h * 0.7072, side="left")
        t = (r - d[i0:i1]) / h
        out[k] = inside + i0 + square_cut_fraction(t, a[i0:i1], b[i0:i1]).sum()
    return out


# ---------------------------------------------------------------------------
# exact oracles


def _exactify(r, a: Set1D):
    exact = any(isinstance(p, Fraction) for p in a.points) or any(
        isinstance(x, Fraction) for iv in a.intervals for x in iv)
    return Fraction(r) if exact else float(r)


@functools.lru_cache(maxsize=256)
def _gap_table(a: Set1D):
    comps = sorted(a.components())
    length = sum((hi - lo for lo, hi in comps), 0 * comps[0][0])
    gaps = sorted(c1[0] - c0[1] for c0, c1 in zip(comps, comps[1:]))
    prefix = [0 * length]
    for g in gaps:
        prefix.append(prefix[-1] + g)
    return length, gaps, prefix


def volume_1d_exact(a: Set1D, r):
    """Length of the open r-neighbourhood of a closed subset of the line.

    Equals |A| + 2r + sum over gaps g of min(g, 2r).
    """
    if r <= 0:
        return 0 * r
    length, gaps, prefix = _gap_table(a)
    k = bisect.bisect_right(gaps, 2 * r)
    return length + 2 * r + prefix[k] + 2 * r * (len(gaps) - k)


def volume_1d_sweep(a: Set1D, r):
    """Same quantity by merging the enlarged components left to right."""
    if r <= 0:
        return 0 * r
    comps = sorted(a.components())
    total = 0 * r
    cur_lo, cur_hi = comps[0][0] - r, comps[0][1] + r
    for lo, hi in comps[1:]:
        if lo - r <= cur_hi:
            cur_hi = max(cur_hi, hi + r)
        else:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = lo - r, hi + r
    return total + (cur_hi - cur_lo)


def kinks_1d_exact(a: Set1D) -> list:
    """Radii where two neighbourhood components merge: half of each gap."""
    comps = sorted(a.components())
    return sorted({(c1[0] - c0[1]) / 2 for c0, c1 in zip(comps, comps[1:])})


def rect_boundary_volume(s: float, r: float, w: float = 3.0, hgt: float = 2.0) -> float:
    """Parallel volume of the boundary of a (w s) x (hgt s) rectangle."""
    a, c = w * s, hgt * s
    inner = max(a - 2 * r, 0.0) * max(c - 2 * r, 0.0)
    return a * c - inner + 2 * (a + c) * r + math.pi * r * r


def lens_area(r: float, dist: float) -> float:
    if r <= dist / 2:
        return 0.0
    return 2 * r * r * math.acos(dist / (2 * r)) - (dist / 2) * math.sqrt(4 * r * r - dist * dist)


def exact_volume_oracle(kind: str, params, r: float) -> float:
    """Closed-form parallel volume.

    kinds: ``interval_union_1d`` (a :class:`Set1D` or list of points),
    ``rect_boundary`` (side scale s), ``two_points`` (distance),
    ``disk`` (radius).
    """
    if kind == "interval_union_1d":
        a = params if isinstance(params, Set1D) else Set1D.from_points(params)
        return float(volume_1d_exact(a, r))
    if kind == "rect_boundary":
        s = float(params.get("s", 1.0)) if isinstance(params, dict) else float(params)
        return rect_boundary_volume(s, r)
    if kind == "two_points":
        dist = float(params.get("dist", 2.0)) if isinstance(params, dict) else float(params)
        return 2 * math.pi * r * r - lens_area(r, dist)
    if kind == "disk":
        rho = float(params.get("r", 1.0)) if isinstance(params, dict) else float(params)
        return math.pi * (rho + r) ** 2
    raise UnknownKind(kind)


ORACLE_KINDS = ("interval_union_1d", "rect_boundary", "two_points", "disk")
