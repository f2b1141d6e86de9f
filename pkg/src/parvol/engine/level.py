"""Level sets of distance fields as weighted point clouds, and local measures."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from skimage import measure

from ..errors import EmptyLevelSet, RadiusOutOfBand
from .grid import DistanceField
from .projection import Classification, classify_points
from .volume import cell_fractions

# predicate(foot_x, foot_y, dir_x, dir_y) -> bool array
Predicate = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class SurfaceCloud:
    """Polyline segment midpoints of a contour, weighted by segment length."""

    points: np.ndarray
    weights: np.ndarray
    r: float
    level: float
    proj: Optional[Classification] = None

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def subset(self, mask: np.ndarray) -> "SurfaceCloud":
        proj = None
        if self.proj is not None:
            p = self.proj
            proj = Classification(p.distance[mask], p.foot_x[mask], p.foot_y[mask],
                                  p.multiplicity[mask], p.critical[mask])
        return replace(self, points=self.points[mask], weights=self.weights[mask], proj=proj)

    def directions(self) -> tuple[np.ndarray, np.ndarray]:
        p = self.proj
        dx = self.points[:, 0] - p.foot_x
        dy = self.points[:, 1] - p.foot_y
        n = np.hypot(dx, dy)
        n[n == 0] = 1.0
        return dx / n, dy / n

    def to_rows(self):
        rows = []
        for k in range(len(self)):
            x, y = self.points[k]
            if self.proj is not None:
                rows.append((x, y, self.weights[k], self.proj.foot_x[k], self.proj.foot_y[k],
                             int(self.proj.multiplicity[k])))
            else:
                rows.append((x, y, self.weights[k], float("nan"), float("nan"), 0))
        return rows


def extract_level_set(field: DistanceField, r: float, level: Optional[float] = None,
                      project: bool = False, tol_multi: Optional[float] = None,
                      hull_tol: Optional[float] = None) -> SurfaceCloud:
    """Marching-squares contour of ``field == level`` (default ``level = r``)."""
    h = field.h
    if not (r > 2 * h and r <= field.r_max):
        raise RadiusOutOfBand(f"r={r} outside ({2 * h}, {field.r_max}]")
    lev = r if level is None else level
    pts, wts = [], []
    for c in measure.find_contours(field.values, lev):
        x, y = field.grid.to_xy(c[:, 0], c[:, 1])
        seg = np.hypot(np.diff(x), np.diff(y))
        keep = seg > 0
        pts.append(np.column_stack([(x[:-1] + x[1:]) / 2, (y[:-1] + y[1:]) / 2])[keep])
        wts.append(seg[keep])
    if not pts or sum(len(w) for w in wts) == 0:
        raise EmptyLevelSet(f"no contour at level {lev}")
    cloud = SurfaceCloud(np.concatenate(pts), np.concatenate(wts), r, lev)
    if project:
        attach_projections(cloud, field.geometry, tol_multi if tol_multi is not None else 1.1 * h,
                           hull_tol if hull_tol is not None else 2 * h)
    return cloud


def attach_projections(cloud: SurfaceCloud, g, tol_multi: float, hull_tol: float) -> SurfaceCloud:
    cloud.proj = classify_points(g, cloud.points[:, 0], cloud.points[:, 1], tol_multi, hull_tol)
    return cloud


# ---------------------------------------------------------------------------
# local measures


def half_plane(nx: float, ny: float, c: float = 0.0) -> Predicate:
    """Base points with ``nx*x + ny*y >= c``."""
    return lambda fx, fy, ux, uy: nx * fx + ny * fy >= c


def complement(pred: Predicate) -> Predicate:
    return lambda fx, fy, ux, uy: ~np.asarray(pred(fx, fy, ux, uy), dtype=bool)


def upper_directions(fx, fy, ux, uy):
    """Directions with angle in [0, pi); with :func:`lower_directions` a partition."""
    return (uy > 0) | ((uy == 0) & (ux > 0))


def lower_directions(fx, fy, ux, uy):
    return ~upper_directions(fx, fy, ux, uy)


def local_measure(field: DistanceField, r: float, predicate: Predicate, mode: str = "volume",
                  estimator: str = "auto"):
    """Volume of ``A_r`` (or the level set) restricted to points whose
    projection satisfies ``predicate``.

    Uses the nearest points stored in an exact-method field; the predicate
    receives base points and unit directions (zero for points of the set).
    """
    if mode == "surface":
        cloud = extract_level_set(field, r, project=True)
        ux, uy = cloud.directions()
        mask = np.asarray(predicate(cloud.proj.foot_x, cloud.proj.foot_y, ux, uy), dtype=bool)
        return cloud.subset(mask)
    if mode != "volume":
        raise ValueError(f"unknown mode {mode!r}")
    if field.feet is None:
        raise ValueError("local volumes need a field with nearest points (method='exact')")
    if not field.trusted(r):
        raise RadiusOutOfBand(f"r={r}")
    h = field.h
    fx, fy = field.feet
    total = 0.0
    xs = field.grid.xs
    for a, b in field.grid.row_chunks():
        d = field.values[a:b]
        X, Y = np.meshgrid(xs, field.grid.ys[a:b])
        w = cell_fractions(field, r, slice(a, b), estimator)
        live = w > 0
        dd = np.where(d > 0, d, 1.0)
        ux = np.where(d > 0, (X - fx[a:b]) / dd, 0.0)
        uy = np.where(d > 0, (Y - fy[a:b]) / dd, 0.0)
        m = np.asarray(predicate(fx[a:b], fy[a:b], ux, uy), dtype=bool)
        total += float(w[live & m].sum())
    return h * h * total
