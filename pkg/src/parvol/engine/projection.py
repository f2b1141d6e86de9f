"""Metric projection onto compact planar sets: nearest points, multiplicity, criticality."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import Arc, bounding_box, boundary_pieces, contains, contains_many, nearest_candidates

CHUNK = 40_000


@dataclass(frozen=True)
class ProjectionRecord:
    x: tuple
    distance: float
    nearest: tuple
    directions: tuple

    @property
    def multiplicity(self) -> int:
        return len(self.nearest)

    @property
    def unique(self) -> bool:
        return len(self.nearest) == 1


def _cluster(points, radius: float) -> list:
    reps: list = []
    for p in points:
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) > radius for q in reps):
            reps.append(p)
    return reps


def hull_distance(x, pts) -> float:
    """Distance from ``x`` to the convex hull of a small planar point list."""
    px, py = float(x[0]), float(x[1])
    P = [(float(a), float(b)) for a, b in pts]
    best = min(math.hypot(px - a, py - b) for a, b in P)
    n = len(P)
    for i in range(n):
        for j in range(i + 1, n):
            (ax, ay), (bx, by) = P[i], P[j]
            dx, dy = bx - ax, by - ay
            L2 = dx * dx + dy * dy
            if L2 > 0:
                t = min(1.0, max(0.0, ((px - ax) * dx + (py - ay) * dy) / L2))
                best = min(best, math.hypot(px - ax - t * dx, py - ay - t * dy))
            for k in range(j + 1, n):
                if _in_triangle(px, py, P[i], P[j], P[k]):
                    return 0.0
    return best


def _in_triangle(px, py, a, b, c) -> bool:
    def cross(o, p, q):
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])

    x = (px, py)
    s1, s2, s3 = cross(a, b, x), cross(b, c, x), cross(c, a, x)
    return (s1 >= 0 and s2 >= 0 and s3 >= 0) or (s1 <= 0 and s2 <= 0 and s3 <= 0)


def project(g, x, tol_multi: float = 1e-9) -> ProjectionRecord:
    """All nearest points of ``g`` to ``x`` within ``tol_multi`` of the minimum.

    Points of ``g`` project to themselves.
    """
    px, py = float(x[0]), float(x[1])
    if contains(g, (px, py)):
        return ProjectionRecord((px, py), 0.0, ((px, py),), ())
    cands = nearest_candidates(g, (px, py))
    dmin = min(c[0] for c in cands)
    close = [(c[1], c[2]) for c in sorted(cands) if c[0] <= dmin + tol_multi]
    feet = _cluster(close, max(tol_multi, 1e-12 * max(1.0, dmin)))
    dirs = tuple(((px - a) / dmin, (py - b) / dmin) for a, b in feet)
    return ProjectionRecord((px, py), dmin, tuple(feet), dirs)


def project_field(field, x) -> ProjectionRecord:
    """Grid fallback: one step down the numerical gradient of the distance field."""
    gy, gx = np.gradient(field.values, field.h)
    j, i = field.grid.index_of(*x)
    d = float(field.values[j, i])
    if d == 0.0:
        return ProjectionRecord(tuple(x), 0.0, (tuple(x),), ())
    n = math.hypot(gx[j, i], gy[j, i]) or 1.0
    u = (gx[j, i] / n, gy[j, i] / n)
    foot = (x[0] - d * u[0], x[1] - d * u[1])
    return ProjectionRecord(tuple(x), d, (foot,), (u,))


def merge_radius(d: float, tol: float) -> float:
    return max(tol, 2.0 * math.sqrt(max(d, 0.0) * tol))


@dataclass
class Classification:
    """Vectorised projection summary for a batch of points."""

    distance: np.ndarray
    foot_x: np.ndarray
    foot_y: np.ndarray
    multiplicity: np.ndarray
    critical: np.ndarray

    @property
    def multi(self) -> np.ndarray:
        return self.multiplicity >= 2


def classify_points(g, X, Y, tol_multi: float, hull_tol: float) -> Classification:
    """Distance, one nearest point, multiplicity and criticality for many points.

    Candidate nearest points are those within ``tol_multi`` of the minimal
    distance.  Candidates closer than :func:`merge_radius` are one point:
    just past a convex corner the near-ties differ by about sqrt(d tol).
    A point is critical when it lies within ``hull_tol`` of the convex hull
    of its distinct nearest points.
    """
    X = np.asarray(X, dtype=float).ravel()
    Y = np.asarray(Y, dtype=float).ravel()
    n = X.size
    out = Classification(np.empty(n), np.empty(n), np.empty(n), np.ones(n, dtype=int), np.zeros(n, dtype=bool))
    pieces = boundary_pieces(g)
    arcs = [p for p in pieces if isinstance(p, Arc)]
    for a in range(0, n, CHUNK):
        b = min(n, a + CHUNK)
        x, y = X[a:b], Y[a:b]
        D = np.empty((len(pieces), b - a))
        FX = np.empty_like(D)
        FY = np.empty_like(D)
        for k, p in enumerate(pieces):
            D[k], FX[k], FY[k] = p.nearest(x, y)
        am = D.argmin(0)
        cols = np.arange(b - a)
        dmin = D[am, cols]
        inside = contains_many(g, x, y)
        dmin[inside] = 0.0
        out.distance[a:b] = dmin
        out.foot_x[a:b] = np.where(inside, x, FX[am, cols])
        out.foot_y[a:b] = np.where(inside, y, FY[am, cols])
        near = D <= dmin[None, :] + tol_multi
        spread = np.zeros(b - a, dtype=bool)
        for c in arcs:
            spread |= (np.hypot(x - c.cx, y - c.cy) <= tol_multi) & (np.abs(dmin - c.r) <= tol_multi)
        todo = np.nonzero(((near.sum(0) >= 2) | spread) & ~inside)[0]
        for t in todo:
            ks = np.nonzero(near[:, t])[0]
            pts = [(FX[k, t], FY[k, t]) for k in ks]
            for c in arcs:
                if math.hypot(x[t] - c.cx, y[t] - c.cy) <= tol_multi and abs(dmin[t] - c.r) <= tol_multi:
                    pts.extend(c.point(c.span * q / 16.0) for q in range(17))
            feet = _cluster(pts, merge_radius(dmin[t], tol_multi))
            out.multiplicity[a + t] = len(feet)
            if len(feet) >= 2:
                out.critical[a + t] = hull_distance((x[t], y[t]), feet) <= hull_tol
    return out


def geometry_scale(g) -> float:
    b = bounding_box(g)
    return max(b.width, b.height, 1.0)
