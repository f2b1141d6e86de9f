"""Derivatives of sampled volume functions, criticality and weak convergence.

One-sided slopes come from a joint least-squares fit around ``r``: a shared
value at ``r`` (the volume is continuous) and separate polynomials on the
left and right windows.  The sample at ``r`` itself is left out.  Since the
fit is linear in the data, its slope weights ``w`` give a noise bound
``sum |w| * max residual`` in slope units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import EmptyCloud, InsufficientSamples, ScheduleRejected
from .fractal_strings import TargetRadii
from .geometry import Set1D, contains, diameter_bound
from .engine.grid import DistanceField
from .engine.level import SurfaceCloud, extract_level_set
from .engine.projection import classify_points, hull_distance, project
from .engine.volume import VolumeSamples, kinks_1d_exact, volume_1d_exact

DEFAULT_WINDOW = 6
DEFAULT_DEGREE = 2
NOISE_FACTOR = 4.0
CONSISTENCY = 0.2


# ---------------------------------------------------------------------------
# one-sided derivatives


@dataclass
class DerivativeEstimate:
    r: float
    left: float
    right: float
    window: int
    noise: float
    noise_left: float = 0.0
    noise_right: float = 0.0

    @property
    def jump(self) -> float:
        return self.left - self.right

    def to_dict(self) -> dict:
        return {"r": self.r, "left": self.left, "right": self.right, "jump": self.jump,
                "window": self.window, "noise": self.noise}


def _design(tl: np.ndarray, tr: np.ndarray, degree: int) -> np.ndarray:
    n_l, n_r = len(tl), len(tr)
    cols = [np.ones(n_l + n_r)]
    for p in range(1, degree + 1):
        cols.append(np.concatenate([tl ** p, np.zeros(n_r)]))
    for p in range(1, degree + 1):
        cols.append(np.concatenate([np.zeros(n_l), tr ** p]))
    return np.column_stack(cols)


def _fit_rows(tl, tr, degree):
    """Design matrix, pseudo-inverse, and the rows giving left/right slopes."""
    scale = max(np.abs(tl).max(), np.abs(tr).max())
    M = _design(tl / scale, tr / scale, degree)
    P = np.linalg.pinv(M)
    return M, P, P[1] / scale, P[1 + degree] / scale


def one_sided_derivatives(vs: VolumeSamples, r: float, window: int = DEFAULT_WINDOW,
                          degree: int = DEFAULT_DEGREE) -> DerivativeEstimate:
    R = vs.radii
    step = float(np.median(np.diff(R))) if len(R) > 1 else 1.0
    eps = 1e-9 * step
    li = np.nonzero(R < r - eps)[0][-window:]
    ri = np.nonzero(R > r + eps)[0][:window]
    if len(li) < window or len(ri) < window:
        raise InsufficientSamples(f"need {window} samples on each side of r={r}")
    tl, tr = R[li] - r, R[ri] - r
    M, P, wl, wr = _fit_rows(tl, tr, degree)
    y = np.concatenate([vs.V[li], vs.V[ri]])
    coef = P @ y
    res = float(np.abs(M @ coef - y).max())
    res = max(res, 1e-15 * max(1.0, float(np.abs(y).max())))
    scale = max(np.abs(tl).max(), np.abs(tr).max())
    left, right = coef[1] / scale, coef[1 + degree] / scale
    return DerivativeEstimate(float(r), float(left), float(right), window,
                              float(np.abs(wl - wr).sum() * res),
                              float(np.abs(wl).sum() * res), float(np.abs(wr).sum() * res))


@dataclass
class JumpProfile:
    """Slopes and jump statistic at every interior sample of a uniform grid."""

    radii: np.ndarray
    left: np.ndarray
    right: np.ndarray
    noise: np.ndarray
    window: int

    @property
    def jump(self) -> np.ndarray:
        return self.left - self.right

    def to_rows(self):
        return list(zip(self.radii.tolist(), self.left.tolist(), self.right.tolist(), self.jump.tolist()))


def _uniform_step(R: np.ndarray) -> float:
    d = np.diff(R)
    step = float(np.median(d))
    if np.abs(d - step).max() > 1e-6 * step:
        raise ValueError("jump profiles need uniformly spaced radii")
    return step


def jump_profile(vs: VolumeSamples, window: int = DEFAULT_WINDOW,
                 degree: int = DEFAULT_DEGREE) -> JumpProfile:
    R, V = vs.radii, vs.V
    n = len(R)
    if n < 2 * window + 1:
        raise InsufficientSamples("radii grid too short for the window")
    step = _uniform_step(R)
    t = np.arange(1, window + 1) * step
    M, P, wl, wr = _fit_rows(-t[::-1], t, degree)
    W = sliding_window_view(V, 2 * window + 1)
    Y = np.delete(W, window, axis=1)
    coef = Y @ P.T
    res = np.abs(coef @ M.T - Y).max(axis=1)
    res = np.maximum(res, 1e-15 * np.maximum(1.0, np.abs(Y).max(axis=1)))
    left = Y @ wl
    right = Y @ wr
    noise = np.abs(wl - wr).sum() * res
    return JumpProfile(R[window:n - window], left, right, noise, window)


# ---------------------------------------------------------------------------
# non-differentiability detection


@dataclass
class NondiffReport:
    detected: list            # (r, jump)
    predicted: Optional[TargetRadii]
    matched: list = field(default_factory=list)
    missed: list = field(default_factory=list)
    spurious: list = field(default_factory=list)
    resolution: float = 0.0
    threshold: float = 0.0
    rejected: list = field(default_factory=list)  # (r, jump, half-window jump)

    @property
    def radii(self) -> list:
        return [r for r, _ in self.detected]

    def jump_at(self, r: float, tol: float) -> Optional[float]:
        best = None
        for rr, j in self.detected:
            if abs(rr - r) <= tol and (best is None or abs(rr - r) < abs(best[0] - r)):
                best = (rr, j)
        return None if best is None else best[1]

    def to_dict(self) -> dict:
        return {
            "detected": [{"r": float(r), "jump": float(j)} for r, j in self.detected],
            "predicted": None if self.predicted is None else [float(v) for v in self.predicted.values],
            "matched": [float(v) for v in self.matched],
            "missed": [float(v) for v in self.missed],
            "spurious": [float(v) for v in self.spurious],
            "rejected": [{"r": float(r), "jump": float(j), "half_window_jump": float(k)}
                         for r, j, k in self.rejected],
            "resolution": self.resolution,
            "threshold": self.threshold,
        }


def _match(report: NondiffReport, tol: float) -> None:
    if report.predicted is None:
        return
    pred = [float(v) for v in report.predicted.values]
    det = report.radii
    report.matched = [p for p in pred if any(abs(d - p) <= tol for d in det)]
    report.missed = [p for p in pred if p not in report.matched]
    report.spurious = [d for d in det if not any(abs(d - p) <= tol for p in pred)]


def _refine(r: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    if 0 < i < len(y) - 1:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        den = y0 - 2 * y1 + y2
        if den < -1e-9 * abs(y1):
            off = 0.5 * (y0 - y2) / den
            if abs(off) <= 1:
                step = r[i + 1] - r[i]
                return float(r[i] + off * step), float(y1 - 0.25 * (y0 - y2) * off)
    return float(r[i]), float(y[i])


def detect_nondiff(vs: VolumeSamples, threshold: Optional[float] = None,
                   predicted: Optional[TargetRadii] = None, expected_jumps: Sequence[float] = (),
                   window: int = DEFAULT_WINDOW, degree: int = DEFAULT_DEGREE,
                   consistency: float = CONSISTENCY, match_tol: Optional[float] = None) -> NondiffReport:
    """Radii where the left slope exceeds the right one by more than the threshold.

    The threshold at each radius is the larger of ``threshold`` (if given),
    ``4 * noise`` and half the smallest expected jump.  Peaks of the jump
    statistic are refined by a parabola through three samples.

    A genuine jump gives the same statistic for any window, while a square
    root singularity of the slope (two pieces of boundary meeting at a
    saddle) shrinks with the window.  Peaks whose half-window statistic
    differs by more than ``consistency`` (relative, beyond noise) are moved
    to ``rejected``.
    """
    prof = jump_profile(vs, window, degree)
    half = max(3, window // 2)
    prof_h = jump_profile(vs, half, degree)
    off = window - half
    J = prof.jump
    thr = NOISE_FACTOR * prof.noise
    if threshold is not None:
        thr = np.maximum(thr, threshold)
    if len(expected_jumps):
        thr = np.maximum(thr, 0.5 * min(expected_jumps))
    detected, rejected = [], []
    n = len(J)
    i = 0
    while i < n:
        if J[i] > thr[i]:
            # climb to the largest above-threshold value nearby
            while True:
                lo, hi = max(0, i - window), min(n, i + window + 1)
                seg = np.where(J[lo:hi] > thr[lo:hi], J[lo:hi], -np.inf)
                m = lo + int(np.argmax(seg))
                if J[m] <= J[i]:
                    break
                i = m
            r_hat, j_hat = _refine(prof.radii, J, i)
            k = i + off
            jh = prof_h.jump[max(0, k - 1):k + 2].max()
            slack = consistency * j_hat + NOISE_FACTOR * prof_h.noise[k]
            if abs(jh - j_hat) <= slack:
                detected.append((r_hat, j_hat))
            else:
                rejected.append((r_hat, j_hat, float(jh)))
            i = hi
            continue
        i += 1
    h = vs.h if vs.h else float(np.median(np.diff(vs.radii)))
    rep = NondiffReport(detected, predicted, resolution=h,
                        threshold=float(np.median(thr)) if len(thr) else 0.0, rejected=rejected)
    _match(rep, match_tol if match_tol is not None else 2 * h)
    return rep


def detect_nondiff_1d_exact(a: Set1D, predicted: Optional[TargetRadii] = None) -> NondiffReport:
    """Grid-free detection for subsets of the line.

    V is piecewise linear between the merge radii (half gaps); the slopes on
    either side of each merge radius are exact secants.
    """
    kinks = kinks_1d_exact(a)
    exact = any(isinstance(p, Fraction) for p in a.points)
    det = []
    for k, r in enumerate(kinks):
        lo = kinks[k - 1] if k else 0 * r
        hi = kinks[k + 1] if k + 1 < len(kinks) else r + (r if r else 1)
        dl, dr = (r - lo) / 2, (hi - r) / 2
        left = (volume_1d_exact(a, r) - volume_1d_exact(a, r - dl)) / dl
        right = (volume_1d_exact(a, r + dr) - volume_1d_exact(a, r)) / dr
        det.append((r if exact else float(r), left - right))
    rep = NondiffReport(det, predicted, resolution=0.0)
    _match(rep, 1e-12)
    return rep


# ---------------------------------------------------------------------------
# Kneser and Stacho properties


@dataclass
class KneserReport:
    """Worst violation of the Kneser inequality over the sweep.

    ``worst_ratio`` divides each violation by the noise of the four-term
    combination, ``(2 + 2 lam^d) * noise`` for per-sample noise ``noise``;
    the check passes when it stays below ``factor``.
    """

    d: int
    triples: int
    worst_violation: float
    worst_ratio: float
    worst_triple: Optional[tuple]
    noise: float
    factor: float = 3.0

    @property
    def passed(self) -> bool:
        return self.worst_ratio <= self.factor

    def to_dict(self) -> dict:
        return dict(self.__dict__, passed=self.passed)


def kneser_check(vs: VolumeSamples, d: int, factor: float = 3.0, noise: Optional[float] = None,
                 lambdas: Sequence[float] = (1.0, 1.25, 1.5, 2.0), max_points: int = 400) -> KneserReport:
    """Sweep f(lam b) - f(lam a) <= lam^d (f(b) - f(a)) over grid triples.

    On grids of integer multiples of a step only pairs whose scaled radii are
    again grid points are used, so no interpolation enters the check.
    """
    R, V = vs.radii, vs.V
    noise = vs.noise if noise is None else noise
    step = float(np.median(np.diff(R)))
    k = np.rint(R / step)
    on_lattice = np.abs(k * step - R).max() <= 1e-9 * step
    index = {int(kk): i for i, kk in enumerate(k)} if on_lattice else None
    worst, worst_ratio, where, count = 0.0, 0.0, None, 0
    for lam in lambdas:
        if on_lattice:
            ok = [i for i, kk in enumerate(k) if abs(lam * kk - round(lam * kk)) < 1e-9
                  and int(round(lam * kk)) in index]
            src = np.array(ok, dtype=int)
            dst = np.array([index[int(round(lam * k[i]))] for i in ok], dtype=int)
            fa = V[src]
            fl = V[dst]
        else:
            src = np.nonzero(lam * R <= R[-1])[0]
            fa = V[src]
            fl = np.interp(lam * R[src], R, V)
        if len(src) < 2:
            continue
        sel = np.unique(np.linspace(0, len(src) - 1, min(len(src), max_points)).astype(int))
        fa, fl, rs = fa[sel], fl[sel], R[src[sel]]
        lhs = fl[None, :] - fl[:, None]
        rhs = lam ** d * (fa[None, :] - fa[:, None])
        iu = np.triu_indices(len(sel), 1)
        viol = (lhs - rhs)[iu]
        count += len(iu[0])
        m = int(viol.argmax())
        ratio = viol[m] / ((2 + 2 * lam ** d) * noise)
        if viol[m] > worst:
            worst = float(viol[m])
        if ratio > worst_ratio:
            worst_ratio = float(ratio)
            where = (float(rs[iu[0][m]]), float(rs[iu[1][m]]), lam)
    return KneserReport(d, count, worst, worst_ratio, where, noise, factor)


@dataclass
class StachoReport:
    worst: float          # max of (right - left) / noise ... in slope units
    at: float
    tol_factor: float = 3.0

    @property
    def passed(self) -> bool:
        return self.worst <= 0.0


def stacho_check(vs: VolumeSamples, window: int = DEFAULT_WINDOW, degree: int = DEFAULT_DEGREE,
                 tol_factor: float = 3.0) -> StachoReport:
    """Right slope <= left slope + tol_factor * noise at every interior sample.

    ``worst`` is the largest excess of ``right - left`` over the tolerance.
    """
    prof = jump_profile(vs, window, degree)
    excess = -prof.jump - tol_factor * prof.noise
    i = int(excess.argmax())
    return StachoReport(float(excess[i]), float(prof.radii[i]), tol_factor)


@dataclass
class ContinuityReport:
    r0: float
    central: float
    offsets: list
    errors: list
    applicable: bool
    converged: bool
    note: str = ""


def derivative_continuity_check(vs: VolumeSamples, r0: float, delta: Optional[float] = None,
                                ks: Sequence[int] = range(1, 7), window: int = DEFAULT_WINDOW,
                                nondiff: Sequence[float] = (), tol: Optional[float] = None) -> ContinuityReport:
    """One-sided slopes at r0 +- 2^-k delta approach the slope at r0.

    Converged means the final error is within noise plus linear decay from
    the largest offset, so grid curvature alone does not fail the check.
    """
    step = float(np.median(np.diff(vs.radii)))
    h = vs.h or step
    if any(abs(r0 - s) <= 2 * h for s in nondiff):
        return ContinuityReport(r0, math.nan, [], [], False, False, "r0 is a detected non-differentiability radius")
    delta = 64 * step if delta is None else delta
    c = one_sided_derivatives(vs, r0, window)
    central = 0.5 * (c.left + c.right)
    offsets, errors, noises = [], [], []
    for k in ks:
        e = 0.0
        nz = 0.0
        for sgn in (-1, 1):
            r = vs.radii[np.argmin(np.abs(vs.radii - (r0 + sgn * delta * 2.0 ** (-k))))]
            if abs(r - r0) < 0.5 * step:
                continue
            est = one_sided_derivatives(vs, float(r), window)
            e = max(e, abs(est.right - central), abs(est.left - central))
            nz = max(nz, est.noise_left, est.noise_right)
        offsets.append(delta * 2.0 ** (-k))
        errors.append(e)
        noises.append(nz)
    # windows at small offsets may straddle r0, so take the noise at the largest one
    tol = 3 * (noises[0] + c.noise) if tol is None else tol
    # a C^1 volume has errors ~ |V''| * offset; a jump keeps them near |jump| / 2
    allowance = 2.0 * errors[0] * offsets[-1] / offsets[0]
    converged = bool(errors[-1] <= tol + allowance and max(errors[len(errors) // 2:]) <= max(errors[0], tol))
    return ContinuityReport(r0, central, offsets, errors, True, converged)


# ---------------------------------------------------------------------------
# criticality


def is_critical(g, x, tol: float = 1e-9) -> bool:
    """Whether ``x`` lies (within ``tol``) in the convex hull of its nearest points."""
    if contains(g, x):
        return False
    rec = project(g, x, tol)
    return rec.multiplicity >= 2 and hull_distance(x, rec.nearest) <= tol


NICE_STRIDES = (1, 2, 4, 5, 10, 20, 25, 50, 100, 125, 250, 500)


def _stride_for(field: DistanceField, budget: int) -> int:
    need = math.sqrt(field.grid.size / budget)
    for s in NICE_STRIDES:
        if s >= need:
            return s
    return NICE_STRIDES[-1]


@dataclass
class CriticalScan:
    values: list          # cluster representatives, ascending
    clusters: list        # (lo, hi, count)
    points_scanned: int
    stride: int

    def contains_value(self, v: float, tol: float) -> bool:
        return any(lo - tol <= v <= hi + tol for lo, hi, _ in self.clusters)

    def to_dict(self) -> dict:
        return {"values": self.values, "clusters": [list(c) for c in self.clusters],
                "points_scanned": self.points_scanned, "stride": self.stride}


def _cluster_values(vals: np.ndarray, tol: float) -> list:
    vals = np.sort(vals)
    out = []
    if not len(vals):
        return out
    lo = prev = vals[0]
    cnt = 1
    for v in vals[1:]:
        if v - prev <= tol:
            cnt += 1
        else:
            out.append((float(lo), float(prev), cnt))
            lo, cnt = v, 1
        prev = v
    out.append((float(lo), float(prev), cnt))
    return out


def scan_critical_values(g, field: DistanceField, tol: Optional[float] = None, stride: Optional[int] = None,
                         axis_rows: Sequence[float] = (), audit: int = 0, seed: int = 0,
                         budget: int = 60_000) -> CriticalScan:
    """Critical values d(x, A) over a lattice of cell centres.

    The lattice takes every ``stride``-th cell in each direction, aligned
    with the coordinate axes, so rows and columns through round coordinates
    are hit exactly.  ``axis_rows`` lists y-values scanned at full
    resolution instead (with ``audit`` random extra cells, seeded).  Values
    outside the field's trusted band are dropped, the rest are clustered at
    resolution h.
    """
    h = field.h
    tol = 1e-9 * max(1.0, diameter_bound(g)) if tol is None else tol
    grid = field.grid
    if axis_rows:
        xs = grid.xs
        X = np.concatenate([xs for _ in axis_rows])
        Y = np.concatenate([np.full(len(xs), float(y)) for y in axis_rows])
        if audit:
            rng = np.random.default_rng(seed)
            X = np.concatenate([X, grid.xs[rng.integers(0, grid.nx, audit)]])
            Y = np.concatenate([Y, grid.ys[rng.integers(0, grid.ny, audit)]])
        stride = 1
    else:
        stride = _stride_for(field, budget) if stride is None else stride
        gi = np.nonzero((grid.i0 + np.arange(grid.nx)) % stride == 0)[0]
        gj = np.nonzero((grid.j0 + np.arange(grid.ny)) % stride == 0)[0]
        X, Y = np.meshgrid(grid.xs[gi], grid.ys[gj])
    cls = classify_points(g, X, Y, tol, tol)
    vals = cls.distance[cls.critical]
    vals = vals[(vals >= 2 * h) & (vals <= field.r_max)]
    clusters = _cluster_values(vals, h)
    return CriticalScan([0.5 * (lo + hi) for lo, hi, _ in clusters], clusters, int(X.size), stride)


@dataclass
class CriticalityReport:
    r: float
    counts: dict
    critical_weight: float
    non_unp_weight: float
    total_weight: float
    threshold: float
    verdict: str
    detect_agrees: Optional[bool] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def characterize_differentiability(g, field: DistanceField, r: float, c: float = 2.0,
                                   tol_multi: Optional[float] = None, hull_tol: Optional[float] = None,
                                   nondiff: Optional[NondiffReport] = None) -> CriticalityReport:
    """Measure the critical and non-unique-projection parts of the level set.

    The contour is taken a quarter cell below ``r`` so that a critical set
    sitting exactly at distance ``r`` shows up as a thin loop around it;
    such a loop runs along both sides of the set, so its weight is halved.
    The verdict is "differentiable" when both parts weigh less than
    ``c * h`` times the total contour length.
    """
    h = field.h
    tol_multi = 0.6 * h if tol_multi is None else tol_multi
    hull_tol = 2 * h if hull_tol is None else hull_tol
    cloud = extract_level_set(field, r, level=r - h / 4, project=True, tol_multi=tol_multi, hull_tol=hull_tol)
    p = cloud.proj
    w = cloud.weights
    crit = 0.5 * float(w[p.critical].sum())
    multi = 0.5 * float(w[p.multi].sum())
    total = float(w.sum())
    thr = c * h * total
    verdict = "differentiable" if (crit < thr and multi < thr) else "non-differentiable"
    counts = {"unique": int((~p.multi).sum()), "multi": int(p.multi.sum()), "critical": int(p.critical.sum())}
    agrees = None
    if nondiff is not None:
        hit = any(abs(rr - r) <= 2 * h for rr in nondiff.radii)
        agrees = hit == (verdict == "non-differentiable")
    return CriticalityReport(float(r), counts, crit, multi, total, thr, verdict, agrees)


# ---------------------------------------------------------------------------
# weak convergence of surface measures


def _tent_sums(cloud: SurfaceCloud, origin: tuple, spacing: float, rho: float, shape: tuple) -> np.ndarray:
    acc = np.zeros(shape)
    x = (cloud.points[:, 0] - origin[0]) / spacing
    y = (cloud.points[:, 1] - origin[1]) / spacing
    ix, iy = np.floor(x).astype(int), np.floor(y).astype(int)
    reach = int(math.ceil(rho / spacing))
    for dj in range(-reach, reach + 2):
        for di in range(-reach, reach + 2):
            ci, cj = ix + di, iy + dj
            dist = np.hypot(ci - x, cj - y) * spacing
            val = np.maximum(0.0, 1.0 - dist / rho) * cloud.weights
            ok = (val > 0) & (ci >= 0) & (cj >= 0) & (ci < shape[1]) & (cj < shape[0])
            np.add.at(acc, (cj[ok], ci[ok]), val[ok])
    return acc


def flat_distance(mu: SurfaceCloud, nu: SurfaceCloud, rho: float, spacing: Optional[float] = None) -> float:
    """Largest discrepancy over tents max(0, 1 - |x - c|/rho) and the constant 1.

    Tent centres form a square lattice of the given spacing (default rho/2)
    covering both clouds.
    """
    if len(mu) == 0 or len(nu) == 0:
        raise EmptyCloud("flat distance needs two nonempty clouds")
    spacing = rho / 2 if spacing is None else spacing
    pts = np.vstack([mu.points, nu.points])
    origin = (float(pts[:, 0].min()) - 2 * rho, float(pts[:, 1].min()) - 2 * rho)
    nx = int(math.ceil((pts[:, 0].max() - origin[0] + 2 * rho) / spacing)) + 1
    ny = int(math.ceil((pts[:, 1].max() - origin[1] + 2 * rho) / spacing)) + 1
    diff = _tent_sums(mu, origin, spacing, rho, (ny, nx)) - _tent_sums(nu, origin, spacing, rho, (ny, nx))
    return max(float(np.abs(diff).max()), abs(mu.mass - nu.mass))


@dataclass
class ConvergenceReport:
    r0: float
    mass0: float
    rows: list            # (k, r, flat distance, mass gap)
    differentiable: bool
    verdict: bool
    one_sided_gaps: list = field(default_factory=list)   # (k, mass(r0 - e) - mass(r0 + e))
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _eventually_decreasing(seq: Sequence[float], tail: int = 3) -> bool:
    t = list(seq)[-tail:]
    return all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(t, t[1:]))


def weak_convergence_report(field: DistanceField, r0: float, delta: Optional[float] = None, ks: Sequence[int] = range(1, 7),
                            rho: Optional[float] = None, nondiff: Sequence[float] = (),
                            rel_tol: float = 0.02) -> ConvergenceReport:
    """Flat distances and mass gaps of level sets along r0 +- 2^-k delta.

    At a differentiability radius the verdict asks for eventually decreasing
    flat distances ending below ``rel_tol`` times the mass at r0, and
    masses within ``rel_tol``.  At a listed non-differentiability radius the
    one-sided gaps mass(r0 - e) - mass(r0 + e) are recorded instead.
    The default ``delta`` is 5h: the gaps also carry the smooth change of
    mass over 2e, which must stay small next to the jump.
    """
    h = field.h
    rho = 4 * h if rho is None else rho
    delta = 5 * h if delta is None else delta
    others = [s for s in nondiff if abs(s - r0) > 2 * h and abs(s - r0) < delta]
    if others:
        raise ScheduleRejected(f"schedule around {r0} crosses non-differentiability radius {others[0]}")
    at_kink = any(abs(s - r0) <= 2 * h for s in nondiff)
    c0 = extract_level_set(field, r0)
    rows, gaps = [], []
    for k in ks:
        e = delta * 2.0 ** (-k)
        lo, hi = extract_level_set(field, r0 - e), extract_level_set(field, r0 + e)
        fd = max(flat_distance(lo, c0, rho), flat_distance(hi, c0, rho))
        mg = max(abs(lo.mass - c0.mass), abs(hi.mass - c0.mass))
        rows.append((k, e, fd, mg))
        gaps.append((k, lo.mass - hi.mass))
    if at_kink:
        return ConvergenceReport(r0, c0.mass, rows, False, True, gaps, "non-differentiability radius")
    fds = [r[2] for r in rows]
    ok = _eventually_decreasing(fds) and fds[-1] < rel_tol * c0.mass and rows[-1][3] <= rel_tol * c0.mass
    return ConvergenceReport(r0, c0.mass, rows, True, bool(ok), gaps)
