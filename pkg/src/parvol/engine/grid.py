"""Cell-centred grids, membership bitmaps and distance fields."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from ..errors import EmptySet, GridTooLarge, UnsupportedShape
from ..geometry import Box, Set1D, bounding_box, contains_many, distance_many, to_json

DEFAULT_MAX_CELLS = 16_000_000
CHUNK = 1 << 19


def max_cells() -> int:
    return int(os.environ.get("PARVOL_MAX_CELLS", DEFAULT_MAX_CELLS))


@dataclass(frozen=True)
class Grid:
    """Cell centres at ``((i0 + i) h, (j0 + j) h)``; arrays are indexed ``[j, i]``."""

    h: float
    i0: int
    j0: int
    nx: int
    ny: int

    @classmethod
    def covering(cls, box: Box, h: float) -> "Grid":
        if not h > 0:
            raise ValueError("h must be positive")
        i0 = math.floor(box.xmin / h)
        j0 = math.floor(box.ymin / h)
        nx = math.ceil(box.xmax / h) - i0 + 1
        ny = math.ceil(box.ymax / h) - j0 + 1
        if nx * ny > max_cells():
            raise GridTooLarge(f"{nx}x{ny} cells exceeds budget of {max_cells()} (PARVOL_MAX_CELLS)")
        return cls(h, i0, j0, nx, ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def xs(self) -> np.ndarray:
        return (self.i0 + np.arange(self.nx)) * self.h

    @property
    def ys(self) -> np.ndarray:
        return (self.j0 + np.arange(self.ny)) * self.h

    @property
    def box(self) -> Box:
        return Box(self.i0 * self.h, (self.i0 + self.nx - 1) * self.h,
                   self.j0 * self.h, (self.j0 + self.ny - 1) * self.h)

    def index_of(self, x: float, y: float) -> tuple[int, int]:
        """Indices ``(j, i)`` of the cell whose centre is nearest to ``(x, y)``."""
        return int(round(y / self.h)) - self.j0, int(round(x / self.h)) - self.i0

    def to_xy(self, rows, cols):
        """Fractional array coordinates to plane coordinates."""
        return (self.i0 + np.asarray(cols)) * self.h, (self.j0 + np.asarray(rows)) * self.h

    def row_chunks(self):
        step = max(1, CHUNK // self.nx)
        for a in range(0, self.ny, step):
            yield a, min(self.ny, a + step)


def grid_for(g, h: float, r_max: float) -> Grid:
    """Grid covering ``g`` inflated by ``r_max`` plus a 3h margin."""
    if isinstance(g, Set1D):
        raise UnsupportedShape("grid fields are two-dimensional; use the exact 1D path")
    return Grid.covering(bounding_box(g).inflate(r_max + 3 * h), h)


def rasterize_membership(g, grid: Grid) -> np.ndarray:
    """Bit per cell centre via exact containment."""
    out = np.zeros(grid.shape, dtype=bool)
    xs = grid.xs
    for a, b in grid.row_chunks():
        X, Y = np.meshgrid(xs, grid.ys[a:b])
        out[a:b] = contains_many(g, X, Y)
    return out


def _geometry_id(g) -> str:
    import hashlib
    import json

    return hashlib.sha1(json.dumps(to_json(g), sort_keys=True).encode()).hexdigest()[:12]


@dataclass
class DistanceField:
    """Distances from cell centres to a compact set.

    ``feet`` holds a nearest point per cell when the field was computed from
    the exact boundary pieces.  ``r_max`` is the largest radius for which the
    grid still contains the whole parallel set (with a 2h safety band).
    """

    grid: Grid
    values: np.ndarray
    r_max: float
    source: str
    method: str
    feet: Optional[tuple] = None
    geometry: object = None

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def origin(self) -> tuple[float, float]:
        return (self.grid.i0 * self.h, self.grid.j0 * self.h)

    def value_at(self, x: float, y: float) -> float:
        j, i = self.grid.index_of(x, y)
        return float(self.values[j, i])

    def trusted(self, r: float) -> bool:
        return 2 * self.h <= r <= self.r_max

    def lipschitz_violation(self) -> float:
        """Largest excess of neighbour differences over h (0 when 1-Lipschitz)."""
        v = self.values
        dx = np.abs(np.diff(v, axis=1)).max(initial=0.0)
        dy = np.abs(np.diff(v, axis=0)).max(initial=0.0)
        return max(0.0, max(dx, dy) - self.h * (1 + 1e-12))

    def save(self, path: str) -> None:
        """Binary dump with origin, spacing and dimensions in the header."""
        g = self.grid
        np.savez_compressed(path, header=np.array([g.h, g.i0, g.j0, g.nx, g.ny, self.r_max]),
                            values=self.values)


def distance_field(g, h: float, r_max: float, method: str = "exact", feet: bool = True) -> DistanceField:
    """Distance field of ``g`` on a grid large enough for radii up to ``r_max``.

    ``method="exact"`` evaluates the exact distance to the boundary pieces of
    ``g`` at every cell centre (and records a nearest point).  ``"edt"``
    rasterizes the set plus sub-cell samples of its boundary and runs an
    exact Euclidean distance transform on the bitmap.
    """
    grid = grid_for(g, h, r_max)
    if method == "edt":
        bitmap = rasterize_membership(g, grid) | rasterize_boundary(g, grid)
        f = distance_transform(bitmap, grid)
        f.r_max, f.geometry, f.source = r_max, g, _geometry_id(g)
        return f
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    vals = np.empty(grid.shape)
    fx = np.empty(grid.shape) if feet else None
    fy = np.empty(grid.shape) if feet else None
    xs = grid.xs
    for a, b in grid.row_chunks():
        X, Y = np.meshgrid(xs, grid.ys[a:b])
        if feet:
            vals[a:b], fx[a:b], fy[a:b] = distance_many(g, X, Y, return_feet=True)
        else:
            vals[a:b] = distance_many(g, X, Y)
    return DistanceField(grid, vals, r_max, _geometry_id(g), "exact",
                         (fx, fy) if feet else None, g)


def rasterize_boundary(g, grid: Grid) -> np.ndarray:
    """Mark every cell containing a sample of the boundary pieces (spacing h/4)."""
    from ..geometry import boundary_pieces

    out = np.zeros(grid.shape, dtype=bool)
    for p in boundary_pieces(g):
        pts = np.atleast_2d(p.sample(grid.h / 4))
        i = np.rint(pts[:, 0] / grid.h).astype(int) - grid.i0
        j = np.rint(pts[:, 1] / grid.h).astype(int) - grid.j0
        ok = (i >= 0) & (i < grid.nx) & (j >= 0) & (j < grid.ny)
        out[j[ok], i[ok]] = True
    return out


def distance_transform(bitmap: np.ndarray, grid: Grid) -> DistanceField:
    """Exact Euclidean distance from every cell centre to the nearest occupied one."""
    if not bitmap.any():
        raise EmptySet("bitmap has no occupied cells")
    vals = ndimage.distance_transform_edt(~bitmap, sampling=grid.h)
    return DistanceField(grid, vals, r_max=math.inf, source="bitmap", method="edt")
