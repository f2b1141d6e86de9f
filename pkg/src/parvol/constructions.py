"""Compact sets with a prescribed set of non-differentiability radii.

* :func:`construct_dim1` -- points on the line whose consecutive gaps are 2s.
* :func:`construct_dim2_eps` -- a rectangle with stadium-shaped holes, for
  radius sets bounded away from zero.
* :func:`construct_dim2_full` -- dyadic banding, a greedy split of every band
  into pieces of small gap sum, one rectangle per piece, shelf-packed into a
  disk.
* :func:`construct_boxes_dimd` -- box boundaries [0,3s]^(d-1) x [0,2s] packed
  into a ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BoundViolated,
    ConditionViolated,
    SeparationCheckFailed,
    SummabilityViolated,
)
from .fractal_strings import (
    TargetRadii,
    check_dim2_conditions,
    fractal_string_of,
    gap_sum_of_points,
)
from .geometry import Difference, Disk, Rect, Set1D, Stadium, Union, translate

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# dimension one


def construct_dim1(n: TargetRadii) -> Set1D:
    """Points a_0 = 0, a_k = 2(s_1 + ... + s_k) for the radii in decreasing order.

    Arithmetic is exact: float radii are converted to fractions, so every gap
    equals ``2 s`` exactly.
    """
    if len(n.values) == 0:
        raise SummabilityViolated("empty target set")
    if n.family is not None and not math.isfinite(n.family.power_sum(1)):
        raise SummabilityViolated("sum of radii diverges")
    pts = [Fraction(0)]
    for s in sorted(n.values, reverse=True):
        pts.append(pts[-1] + 2 * Fraction(s))
    return Set1D(points=tuple(pts))


def predicted_nondiff_1d(a: Set1D) -> TargetRadii:
    """Radii where the 1D volume kinks: half of every fractal-string length."""
    half = {x / 2 for x in fractal_string_of(a).lengths}
    return TargetRadii.finite(half)


# ---------------------------------------------------------------------------
# dimension two, radii bounded away from zero


@dataclass(frozen=True)
class GammaPolicy:
    """Segment lengths gamma_{s_k} = gamma0 * ratio**k, radii in decreasing order.

    ``gamma0=None`` means 0.05 times the smallest radius.
    """

    gamma0: Optional[float] = None
    ratio: float = 0.5

    def base(self, radii: Sequence[float]) -> float:
        return 0.05 * min(radii) if self.gamma0 is None else float(self.gamma0)

    def assign(self, radii: Sequence[float], total: Optional[float] = None) -> dict:
        order = sorted((float(s) for s in radii), reverse=True)
        if not order:
            return {}
        w = [self.ratio ** k for k in range(len(order))]
        if total is None:
            g0 = self.base(order)
            return {s: g0 * wk for s, wk in zip(order, w)}
        z = sum(w)
        return {s: total * wk / z for s, wk in zip(order, w)}


@dataclass
class ConstructionMetadata2D:
    b: float
    eps: float
    g_table: dict
    gamma: dict
    Gamma_s: dict
    Gamma: float
    J: dict
    rect: Rect
    geometry: Difference
    realized: tuple
    gap_sum_half: float
    tangent: list = field(default_factory=list)

    @property
    def predicted_jumps(self) -> dict:
        return {s: 2.0 * self.gamma[s] for s in self.realized}

    @property
    def critical_segments(self) -> dict:
        return {s: (self.J[s][0], self.J[s][1], s) for s in self.J}

    @property
    def max_J(self) -> float:
        return max(hi for _, hi in self.J.values())

    def to_dict(self) -> dict:
        key = lambda s: format(s, ".17g")  # noqa: E731
        return {
            "b": self.b,
            "eps": self.eps,
            "gap_sum_half": self.gap_sum_half,
            "Gamma": self.Gamma,
            "rect": [self.rect.xmin, self.rect.xmax, self.rect.ymin, self.rect.ymax],
            "g_table": {key(s): v for s, v in sorted(self.g_table.items())},
            "gamma": {key(s): v for s, v in sorted(self.gamma.items())},
            "J": {key(s): list(v) for s, v in sorted(self.J.items())},
            "critical_segments": {key(s): list(v) for s, v in sorted(self.critical_segments.items())},
            "predicted_jumps": {key(s): v for s, v in sorted(self.predicted_jumps.items())},
            "tangent_to_rect": [key(s) for s in self.tangent],
        }


def _realize(closure: np.ndarray, values: set, b: float, gamma: dict) -> ConstructionMetadata2D:
    """Rectangle-minus-stadiums realisation for a finite closure inside [eps, b]."""
    pts = np.sort(np.asarray(closure, dtype=float))
    eps = float(pts[0])
    root = math.sqrt(2.0 * b)
    gaps = np.sqrt(np.diff(pts))
    G_prefix = np.concatenate([[0.0], np.cumsum(gaps)])
    g_table = {float(s): root * float(G) for s, G in zip(pts, G_prefix)}
    gam = {float(s): (float(gamma.get(float(s), 0.0)) if float(s) in values else 0.0) for s in pts}
    Gamma_s = {}
    acc = 0.0
    for s in pts:
        Gamma_s[float(s)] = acc
        acc += gam[float(s)]
    Gamma = acc
    G_total = float(G_prefix[-1])
    J = {}
    holes = []
    for s in pts:
        s = float(s)
        lo = g_table[s] + Gamma_s[s]
        hi = lo + gam[s]
        J[s] = (lo, hi)
        holes.append(Stadium(lo, 0.0, hi, 0.0, s) if hi > lo else Disk(lo, 0.0, s))
    rect = Rect(-b, b + root * G_total + Gamma, -b, b)
    tangent = [float(s) for s in pts if float(s) >= b or J[float(s)][0] - float(s) <= -b]
    geom = Difference(rect, tuple(holes))
    realized = tuple(sorted((float(s) for s in pts if gam[float(s)] > 0), reverse=True))
    return ConstructionMetadata2D(b, eps, g_table, gam, Gamma_s, Gamma, J, rect, geom, realized,
                                  G_total, tangent)


def separation_check(meta: ConstructionMetadata2D, rel: float = 1e-12) -> float:
    """Worst slack of s'^2 - s^2 <= (g(s') - g(s))^2 over all pairs s < s'.

    Returns the minimum of rhs - lhs (nonnegative when the check passes).
    """
    s = np.array(sorted(meta.g_table))
    g = np.array([meta.g_table[x] for x in s])
    lhs = s[None, :] ** 2 - s[:, None] ** 2
    rhs = (g[None, :] - g[:, None]) ** 2
    iu = np.triu_indices(len(s), 1)
    if iu[0].size == 0:
        return math.inf
    slack = rhs[iu] - lhs[iu] + rel * np.maximum(1.0, np.abs(lhs[iu]))
    return float(slack.min())


def construct_dim2_eps(n: TargetRadii, eps: Optional[float] = None,
                       gamma_policy: GammaPolicy = GammaPolicy()) -> ConstructionMetadata2D:
    closure = n.closure()
    if eps is None:
        eps = float(closure.min())
    report = check_dim2_conditions(n, eps)
    if not report.verdict_i:
        raise ConditionViolated("radius set violates the gap-sum condition for bounded-away sets")
    b = float(closure.max())
    gamma = gamma_policy.assign([float(v) for v in n.values])
    meta = _realize(closure, {float(v) for v in n.values}, b, gamma)
    if separation_check(meta) < 0:
        raise SeparationCheckFailed("s'^2 - s^2 <= (g(s') - g(s))^2 failed numerically")
    return meta


# ---------------------------------------------------------------------------
# dyadic decomposition and packing


@dataclass
class TailDecomposition:
    n: int
    delta_n: float
    pieces: list
    gap_sums: list
    p_n: int
    band_gap_sum: float

    @property
    def piece_bound(self) -> float:
        return 2.0 * math.sqrt(self.delta_n)

    @property
    def count_bound(self) -> float:
        return self.band_gap_sum / math.sqrt(self.delta_n) + 1.0


def band(closure: np.ndarray, b: float, level: int) -> np.ndarray:
    """Closure points in (b 2^-(level+1), b 2^-level]; level 0 includes b."""
    hi = b * 2.0 ** (-level)
    lo = hi / 2.0
    c = np.asarray(closure, dtype=float)
    return np.sort(c[(c > lo) & (c <= hi)])


def greedy_split(points: np.ndarray, budget: float) -> list:
    """Left-to-right split into consecutive runs of gap sum at most ``budget``."""
    pieces = []
    cur = [float(points[0])] if len(points) else []
    G = 0.0
    for p in points[1:]:
        step = math.sqrt(float(p) - cur[-1])
        if G + step <= budget:
            cur.append(float(p))
            G += step
        else:
            pieces.append(np.array(cur))
            cur, G = [float(p)], 0.0
    if cur:
        pieces.append(np.array(cur))
    return pieces


def decompose_tail(n: TargetRadii, level: int, b: Optional[float] = None) -> TailDecomposition:
    if level < 0:
        raise ValueError("level must be nonnegative")
    closure = n.closure()
    b = float(closure.max()) if b is None else b
    delta = b * 2.0 ** (-level)
    K = band(closure, b, level)
    budget = 2.0 * math.sqrt(delta)
    pieces = greedy_split(K, budget) if K.size else []
    sums = [gap_sum_of_points(p) for p in pieces]
    dec = TailDecomposition(level, delta, pieces, sums, len(pieces), gap_sum_of_points(K))
    if any(g > budget * (1 + 1e-12) for g in sums) or dec.p_n > dec.count_bound + 1e-9:
        raise BoundViolated(f"band {level}: greedy split misses the certified bounds")
    return dec


@dataclass
class PackingResult:
    shifts: list
    center: tuple
    radius: float
    placed: list

    def pairwise_disjoint(self) -> bool:
        P = self.placed
        for i in range(len(P)):
            for j in range(i + 1, len(P)):
                a, c = P[i], P[j]
                if a.xmin <= c.xmax and c.xmin <= a.xmax and a.ymin <= c.ymax and c.ymin <= a.ymax:
                    return False
        return True


def _corner_radius(rects, cx: float, cy: float) -> float:
    return max(math.hypot(max(abs(r.xmin - cx), abs(r.xmax - cx)), max(abs(r.ymin - cy), abs(r.ymax - cy)))
               for r in rects)


def pack_rectangles(rects: Sequence[Rect], gap: Optional[float] = None) -> PackingResult:
    """Shelf next-fit by decreasing height, then centred in a disk.

    A single rectangle is left in place with the disk around its centre.
    Otherwise translates are separated by ``gap`` (default 2% of the
    smallest side) and the enclosing disk is centred at the origin.
    """
    rects = list(rects)
    if not rects:
        raise ValueError("nothing to pack")
    if len(rects) == 1:
        r = rects[0]
        c = ((r.xmin + r.xmax) / 2, (r.ymin + r.ymax) / 2)
        return PackingResult([(0.0, 0.0)], c, _corner_radius(rects, *c), [r])
    if gap is None:
        gap = 0.02 * min(min(r.xmax - r.xmin, r.ymax - r.ymin) for r in rects)
    order = sorted(range(len(rects)), key=lambda i: (-(rects[i].ymax - rects[i].ymin), i))
    area = sum((r.xmax - r.xmin + gap) * (r.ymax - r.ymin + gap) for r in rects)
    width = max(max(r.xmax - r.xmin for r in rects), math.sqrt(area))
    x = y = 0.0
    shelf_h = None
    lower_left = [None] * len(rects)
    for i in order:
        r = rects[i]
        w, h = r.xmax - r.xmin, r.ymax - r.ymin
        if shelf_h is None:
            shelf_h = h
        if x > 0 and x + w > width:
            y += shelf_h + gap
            x = 0.0
            shelf_h = h
        lower_left[i] = (x, y)
        x += w + gap
    placed = [Rect(ll[0], ll[0] + r.xmax - r.xmin, ll[1], ll[1] + r.ymax - r.ymin)
              for ll, r in zip(lower_left, rects)]
    cx = (min(p.xmin for p in placed) + max(p.xmax for p in placed)) / 2
    cy = (min(p.ymin for p in placed) + max(p.ymax for p in placed)) / 2
    placed = [p.translated(-cx, -cy) for p in placed]
    shifts = [(p.xmin - r.xmin, p.ymin - r.ymin) for p, r in zip(placed, rects)]
    return PackingResult(shifts, (0.0, 0.0), _corner_radius(placed, 0.0, 0.0), placed)


@dataclass
class FullConstruction:
    pieces: list  # (level, ConstructionMetadata2D)
    packing: PackingResult
    geometry: Union
    unrealized: list
    area_sum: float
    area_bound: float

    @property
    def predicted_jumps(self) -> dict:
        out = {}
        for _, m in self.pieces:
            out.update(m.predicted_jumps)
        return out

    @property
    def shifts(self) -> list:
        return self.packing.shifts


def construct_dim2_full(n: TargetRadii, max_level: int = 12,
                        gamma_policy: GammaPolicy = GammaPolicy()) -> FullConstruction:
    report = check_dim2_conditions(n)
    if not report.verdict_ii:
        raise ConditionViolated("radius set violates the integral condition")
    closure = n.closure()
    closure = closure[closure > 0]
    values = {float(v) for v in n.values}
    b = float(closure.max())
    gamma0 = gamma_policy.base([float(v) for v in n.values])
    parts = []
    bound_terms = 0.0
    for level in range(max_level + 1):
        dec = decompose_tail(n, level, b)
        d = dec.delta_n
        bound_terms += 12 * d ** 1.5 * dec.band_gap_sum + 12 * d ** 2 * (1 if dec.p_n else 0)
        for piece, G in zip(dec.pieces, dec.gap_sums):
            vals = [float(s) for s in piece if float(s) in values]
            total = (2 - SQRT2) * math.sqrt(d) * G if G > 0 else gamma0 * d / b
            gamma = gamma_policy.assign(vals, total=total) if vals else {}
            meta = _realize(piece, values, d, gamma)
            if separation_check(meta) < 0:
                raise SeparationCheckFailed(f"band {level}")
            parts.append((level, meta))
    unrealized = sorted((float(s) for s in closure if s <= b * 2.0 ** (-(max_level + 1))), reverse=True)
    packing = pack_rectangles([m.rect for _, m in parts])
    children = [translate(m.geometry, dx, dy) for (_, m), (dx, dy) in zip(parts, packing.shifts)]
    R = packing.radius * (1 + 1e-9)
    outer = Difference(Disk(packing.center[0], packing.center[1], R), tuple(packing.placed))
    geom = Union((outer, *children))
    area = sum(m.rect.area for _, m in parts)
    return FullConstruction(parts, packing, geom, unrealized, area, bound_terms)


# ---------------------------------------------------------------------------
# boxes in dimension d


@dataclass
class BoxConstruction:
    d: int
    boxes: dict      # s -> tuple of (lo, hi) per axis, unshifted
    shifts: dict     # s -> shift vector
    enclosing_radius: float
    critical_cubes: dict  # s -> tuple of (lo, hi) per axis, shifted
    geometry: object = None

    def volume(self, s: float) -> float:
        return float(np.prod([hi - lo for lo, hi in self.boxes[s]]))

    def shifted_box(self, s: float) -> tuple:
        return tuple((lo + a, hi + a) for (lo, hi), a in zip(self.boxes[s], self.shifts[s]))

    def pairwise_disjoint(self) -> bool:
        keys = list(self.boxes)
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                A, B = self.shifted_box(keys[i]), self.shifted_box(keys[j])
                if all(a0 <= b1 and b0 <= a1 for (a0, a1), (b0, b1) in zip(A, B)):
                    return False
        return True


def construct_boxes_dimd(n: TargetRadii, d: int) -> BoxConstruction:
    if d < 1:
        raise ValueError("d must be >= 1")
    if len(n.values) == 0:
        raise SummabilityViolated("empty target set")
    if n.family is not None and not math.isfinite(n.family.power_sum(d)):
        raise SummabilityViolated(f"sum of s^{d} diverges")
    radii = sorted((float(s) for s in n.values), reverse=True)
    boxes = {s: tuple([(0.0, 3 * s)] * (d - 1) + [(0.0, 2 * s)]) for s in radii}
    if d == 1:
        gap = 0.1 * min(radii)
        shifts, x = {}, 0.0
        for s in radii:
            shifts[s] = (x,)
            x += 2 * s + gap
        span = x - gap
        shifts = {s: (v[0] - span / 2,) for s, v in shifts.items()}
        R = span / 2 + gap
        ends = sorted((shifts[s][0], shifts[s][0] + 2 * s) for s in radii)
        ivs = [(-R, ends[0][0])] + [(e0[1], e1[0]) for e0, e1 in zip(ends, ends[1:])] + [(ends[-1][1], R)]
        crit = {s: ((shifts[s][0] + s, shifts[s][0] + s),) for s in radii}
        return BoxConstruction(1, boxes, shifts, R, crit, Set1D(intervals=tuple(ivs)))
    # pack footprints in the first two coordinates
    foot = [Rect(0.0, 3 * s, 0.0, (2 * s if d == 2 else 3 * s)) for s in radii]
    pk = pack_rectangles(foot)
    shifts = {s: (dx, dy) + (0.0,) * (d - 2) for s, (dx, dy) in zip(radii, pk.shifts)}
    R = 0.0
    for s in radii:
        sb = tuple((lo + a, hi + a) for (lo, hi), a in zip(boxes[s], shifts[s]))
        R = max(R, math.sqrt(sum(max(abs(lo), abs(hi)) ** 2 for lo, hi in sb)))
    R *= 1 + 1e-9
    crit = {}
    for s in radii:
        a = shifts[s]
        crit[s] = tuple([(s + a[i], 2 * s + a[i]) for i in range(d - 1)] + [(s + a[d - 1], s + a[d - 1])])
    geom = None
    if d == 2:
        holes = tuple(Rect(*[v for lohi in (( lo + a, hi + a) for (lo, hi), a in zip(boxes[s], shifts[s])) for v in lohi])
                      for s in radii)
        geom = Difference(Disk(0.0, 0.0, R), holes)
    return BoxConstruction(d, boxes, shifts, R, crit, geom)
