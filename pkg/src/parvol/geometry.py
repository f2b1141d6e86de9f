"""Exact compact sets in the line and the plane.

Two families live here:

* :class:`Set1D` -- finitely many points and closed intervals on the line.
  Coordinates may be ``fractions.Fraction`` so that gap lengths stay exact.
* planar CSG trees built from :class:`Rect`, :class:`Disk`, :class:`Stadium`
  and :class:`PointSet` leaves, :class:`Union` nodes and :class:`Difference`
  nodes (closed base minus the *open* interiors of removed primitives).

Membership is evaluated with plain comparisons (no tolerance).  Distances and
nearest points are computed from an explicit decomposition of the boundary
into segments, circular arcs and isolated vertices; the only tolerance used
is ``BOUNDARY_TOL`` when deciding whether a boundary candidate belongs to the
set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence, Union as TUnion

import numpy as np

from .errors import InvalidGeometry, UnsupportedShape

BOUNDARY_TOL = 1e-12
TWO_PI = 2.0 * math.pi

Number = TUnion[int, float, Fraction]


class Box(NamedTuple):
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def inflate(self, m: float) -> "Box":
        return Box(self.xmin - m, self.xmax + m, self.ymin - m, self.ymax + m)

    def union(self, other: "Box") -> "Box":
        return Box(min(self.xmin, other.xmin), max(self.xmax, other.xmax),
                   min(self.ymin, other.ymin), max(self.ymax, other.ymax))


# ---------------------------------------------------------------------------
# one-dimensional sets


@dataclass(frozen=True)
class Set1D:
    """Compact subset of the line: isolated points plus closed intervals."""

    points: tuple = ()
    intervals: tuple = ()

    def __post_init__(self):
        pts = tuple(self.points)
        ivs = tuple(tuple(iv) for iv in self.intervals)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "intervals", ivs)
        if not pts and not ivs:
            raise InvalidGeometry("Set1D must be nonempty")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise InvalidGeometry("points must be strictly increasing")
        for a, b in ivs:
            if not a < b:
                raise InvalidGeometry(f"degenerate interval [{a}, {b}]")
        for (a0, b0), (a1, b1) in zip(ivs, ivs[1:]):
            if not b0 < a1:
                raise InvalidGeometry("intervals must be sorted and disjoint")
        for p in pts:
            if any(a <= p <= b for a, b in ivs):
                raise InvalidGeometry(f"point {p} lies in an interval")

    @classmethod
    def from_points(cls, pts: Iterable[Number]) -> "Set1D":
        return cls(points=tuple(sorted(set(pts))))

    def components(self) -> list[tuple]:
        """Connected components as sorted (lo, hi) pairs; points have lo == hi."""
        comps = [(p, p) for p in self.points] + list(self.intervals)
        comps.sort(key=lambda c: c[0])
        return comps

    @property
    def lo(self):
        return self.components()[0][0]

    @property
    def hi(self):
        return max(c[1] for c in self.components())

    def contains(self, x) -> bool:
        return any(a <= x <= b for a, b in self.components())

    def distance(self, x):
        best = None
        for a, b in self.components():
            if a <= x <= b:
                return 0 * x
            d = a - x if x < a else x - b
            best = d if best is None or d < best else best
        return best


# ---------------------------------------------------------------------------
# boundary pieces


@dataclass(frozen=True)
class Segment:
    ax: float
    ay: float
    bx: float
    by: float

    @property
    def length(self) -> float:
        return math.hypot(self.bx - self.ax, self.by - self.ay)

    def point(self, t: float) -> tuple[float, float]:
        return (self.ax + t * (self.bx - self.ax), self.ay + t * (self.by - self.ay))

    def param_of(self, x: float, y: float) -> float:
        dx, dy = self.bx - self.ax, self.by - self.ay
        return ((x - self.ax) * dx + (y - self.ay) * dy) / (dx * dx + dy * dy)

    def nearest(self, x, y):
        """Vectorised foot point; returns (distance, fx, fy)."""
        dx, dy = self.bx - self.ax, self.by - self.ay
        L2 = dx * dx + dy * dy
        if L2 == 0.0:
            fx = np.zeros_like(np.asarray(x, dtype=float)) + self.ax
            fy = np.zeros_like(np.asarray(y, dtype=float)) + self.ay
        else:
            t = np.clip(((x - self.ax) * dx + (y - self.ay) * dy) / L2, 0.0, 1.0)
            fx = self.ax + t * dx
            fy = self.ay + t * dy
        return np.hypot(x - fx, y - fy), fx, fy

    def sub(self, t0: float, t1: float) -> "Segment":
        p, q = self.point(t0), self.point(t1)
        return Segment(p[0], p[1], q[0], q[1])

    def endpoints(self):
        return [(self.ax, self.ay), (self.bx, self.by)]

    def sample(self, spacing: float) -> np.ndarray:
        n = max(2, int(math.ceil(self.length / spacing)) + 1)
        t = np.linspace(0.0, 1.0, n)
        return np.column_stack([self.ax + t * (self.bx - self.ax), self.ay + t * (self.by - self.ay)])


@dataclass(frozen=True)
class Arc:
    """Counter-clockwise arc starting at angle ``a0`` and sweeping ``span``."""

    cx: float
    cy: float
    r: float
    a0: float
    span: float

    @property
    def length(self) -> float:
        return self.r * self.span

    @property
    def full(self) -> bool:
        return self.span >= TWO_PI

    def point(self, u: float) -> tuple[float, float]:
        a = self.a0 + u
        return (self.cx + self.r * math.cos(a), self.cy + self.r * math.sin(a))

    def param_of(self, x: float, y: float) -> float:
        return (math.atan2(y - self.cy, x - self.cx) - self.a0) % TWO_PI

    def nearest(self, x, y):
        px, py = x - self.cx, y - self.cy
        rho = np.hypot(px, py)
        ang = np.arctan2(py, px)
        if self.full:
            inside = np.ones_like(rho, dtype=bool)
        else:
            inside = np.mod(ang - self.a0, TWO_PI) <= self.span
        fx_in = self.cx + self.r * np.cos(ang)
        fy_in = self.cy + self.r * np.sin(ang)
        if self.full:
            return np.abs(rho - self.r), fx_in, fy_in
        e0 = self.point(0.0)
        e1 = self.point(self.span)
        d0 = np.hypot(x - e0[0], y - e0[1])
        d1 = np.hypot(x - e1[0], y - e1[1])
        use1 = d1 < d0
        fx_out = np.where(use1, e1[0], e0[0])
        fy_out = np.where(use1, e1[1], e0[1])
        d = np.where(inside, np.abs(rho - self.r), np.minimum(d0, d1))
        return d, np.where(inside, fx_in, fx_out), np.where(inside, fy_in, fy_out)

    def sub(self, u0: float, u1: float) -> "Arc":
        return Arc(self.cx, self.cy, self.r, self.a0 + u0, u1 - u0)

    def endpoints(self):
        if self.full:
            return []
        return [self.point(0.0), self.point(self.span)]

    def sample(self, spacing: float) -> np.ndarray:
        n = max(2, int(math.ceil(self.length / spacing)) + 1)
        u = np.linspace(0.0, self.span, n)
        return np.column_stack([self.cx + self.r * np.cos(self.a0 + u), self.cy + self.r * np.sin(self.a0 + u)])


@dataclass(frozen=True)
class Vertex:
    x: float
    y: float

    length = 0.0

    def nearest(self, x, y):
        fx = np.zeros_like(np.asarray(x, dtype=float)) + self.x
        fy = np.zeros_like(np.asarray(y, dtype=float)) + self.y
        return np.hypot(x - self.x, y - self.y), fx, fy

    def endpoints(self):
        return [(self.x, self.y)]

    def sample(self, spacing: float) -> np.ndarray:
        return np.array([[self.x, self.y]])


Piece = TUnion[Segment, Arc, Vertex]


def _param_range(p) -> float:
    return 1.0 if isinstance(p, Segment) else p.span


def _params_on(p, pts) -> list[float]:
    """Parameters of the given points on piece ``p`` (points assumed on it)."""
    out = []
    top = _param_range(p)
    for x, y in pts:
        u = p.param_of(x, y)
        if isinstance(p, Arc):
            if p.full:
                out.append(u)
                continue
            if u > top + 1e-12 and u > TWO_PI - 1e-12:
                u = 0.0
        if -1e-12 <= u <= top + 1e-12:
            out.append(min(max(u, 0.0), top))
    return out


def _line_circle(s: Segment, cx: float, cy: float, r: float):
    dx, dy = s.bx - s.ax, s.by - s.ay
    fx, fy = s.ax - cx, s.ay - cy
    a = dx * dx + dy * dy
    b = 2.0 * (fx * dx + fy * dy)
    c = fx * fx + fy * fy - r * r
    disc = b * b - 4.0 * a * c
    if a == 0.0 or disc < -1e-14 * max(1.0, b * b):
        return []
    disc = math.sqrt(max(disc, 0.0))
    ts = {(-b - disc) / (2 * a), (-b + disc) / (2 * a)}
    return [s.point(t) for t in ts if -1e-12 <= t <= 1 + 1e-12]


def _circle_circle(c1: Arc, c2: Arc):
    dx, dy = c2.cx - c1.cx, c2.cy - c1.cy
    d = math.hypot(dx, dy)
    if d == 0.0:
        return None if c1.r == c2.r else []
    if d > c1.r + c2.r + 1e-12 or d < abs(c1.r - c2.r) - 1e-12:
        return []
    a = (d * d + c1.r * c1.r - c2.r * c2.r) / (2 * d)
    h2 = c1.r * c1.r - a * a
    h = math.sqrt(max(h2, 0.0))
    mx, my = c1.cx + a * dx / d, c1.cy + a * dy / d
    if h == 0.0:
        return [(mx, my)]
    return [(mx - h * dy / d, my + h * dx / d), (mx + h * dy / d, my - h * dx / d)]


def _seg_seg(s: Segment, q: Segment):
    dx, dy = s.bx - s.ax, s.by - s.ay
    ex, ey = q.bx - q.ax, q.by - q.ay
    den = dx * ey - dy * ex
    px, py = q.ax - s.ax, q.ay - s.ay
    scale = max(s.length * q.length, 1e-300)
    if abs(den) <= 1e-14 * scale:
        if abs(px * dy - py * dx) > 1e-12 * max(s.length, 1e-300) * max(1.0, math.hypot(px, py)):
            return []
        # collinear: the overlap endpoints are the only split points
        return [p for p in s.endpoints() + q.endpoints()]
    t = (px * ey - py * ex) / den
    u = (px * dy - py * dx) / den
    if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
        return [s.point(t)]
    return []


def intersections(p, q) -> list[tuple[float, float]]:
    """Points where two boundary pieces meet (possibly including overlap ends)."""
    if isinstance(p, Vertex) or isinstance(q, Vertex):
        return []
    if isinstance(p, Segment) and isinstance(q, Segment):
        pts = _seg_seg(p, q)
    elif isinstance(p, Segment):
        pts = _line_circle(p, q.cx, q.cy, q.r)
    elif isinstance(q, Segment):
        pts = _line_circle(q, p.cx, p.cy, p.r)
    else:
        pts = _circle_circle(p, q)
        if pts is None:
            pts = p.endpoints() + q.endpoints()
    keep = []
    for pt in pts:
        if _params_on(p, [pt]) and _params_on(q, [pt]):
            keep.append(pt)
    return keep


# ---------------------------------------------------------------------------
# primitives


@dataclass(frozen=True)
class Rect:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    kind = "rectangle"

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise InvalidGeometry(f"degenerate rectangle {self}")

    def contains(self, x, y):
        return (x >= self.xmin) & (x <= self.xmax) & (y >= self.ymin) & (y <= self.ymax)

    def open_contains(self, x, y):
        return (x > self.xmin) & (x < self.xmax) & (y > self.ymin) & (y < self.ymax)

    def depth(self, x, y):
        return np.minimum(np.minimum(x - self.xmin, self.xmax - x), np.minimum(y - self.ymin, self.ymax - y))

    def pieces(self) -> list:
        a, b, c, d = self.xmin, self.xmax, self.ymin, self.ymax
        return [Segment(a, c, b, c), Segment(b, c, b, d), Segment(b, d, a, d), Segment(a, d, a, c)]

    def bbox(self) -> Box:
        return Box(self.xmin, self.xmax, self.ymin, self.ymax)

    def translated(self, dx: float, dy: float) -> "Rect":
        return Rect(self.xmin + dx, self.xmax + dx, self.ymin + dy, self.ymax + dy)

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float

    kind = "disk"

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidGeometry("disk radius must be positive")

    def contains(self, x, y):
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.r * self.r

    def open_contains(self, x, y):
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 < self.r * self.r

    def depth(self, x, y):
        return self.r - np.hypot(x - self.cx, y - self.cy)

    def pieces(self) -> list:
        return [Arc(self.cx, self.cy, self.r, 0.0, TWO_PI)]

    def bbox(self) -> Box:
        return Box(self.cx - self.r, self.cx + self.r, self.cy - self.r, self.cy + self.r)

    def translated(self, dx: float, dy: float) -> "Disk":
        return Disk(self.cx + dx, self.cy + dy, self.r)


@dataclass(frozen=True)
class Stadium:
    """Minkowski sum of the segment [(x0,y0),(x1,y1)] and a closed disk."""

    x0: float
    y0: float
    x1: float
    y1: float
    r: float

    kind = "stadium"

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidGeometry("stadium radius must be positive")

    @property
    def degenerate(self) -> bool:
        return self.x0 == self.x1 and self.y0 == self.y1

    def _seg_dist2(self, x, y):
        dx, dy = self.x1 - self.x0, self.y1 - self.y0
        L2 = dx * dx + dy * dy
        if L2 == 0.0:
            return (x - self.x0) ** 2 + (y - self.y0) ** 2
        t = np.clip(((x - self.x0) * dx + (y - self.y0) * dy) / L2, 0.0, 1.0)
        return (x - self.x0 - t * dx) ** 2 + (y - self.y0 - t * dy) ** 2

    def contains(self, x, y):
        return self._seg_dist2(x, y) <= self.r * self.r

    def open_contains(self, x, y):
        return self._seg_dist2(x, y) < self.r * self.r

    def depth(self, x, y):
        return self.r - np.sqrt(self._seg_dist2(x, y))

    def pieces(self) -> list:
        if self.degenerate:
            return [Arc(self.x0, self.y0, self.r, 0.0, TWO_PI)]
        L = math.hypot(self.x1 - self.x0, self.y1 - self.y0)
        ux, uy = (self.x1 - self.x0) / L, (self.y1 - self.y0) / L
        nx, ny = -uy, ux
        r = self.r
        th = math.atan2(ny, nx)
        return [
            Segment(self.x0 - r * nx, self.y0 - r * ny, self.x1 - r * nx, self.y1 - r * ny),
            Arc(self.x1, self.y1, r, th - math.pi, math.pi),
            Segment(self.x1 + r * nx, self.y1 + r * ny, self.x0 + r * nx, self.y0 + r * ny),
            Arc(self.x0, self.y0, r, th, math.pi),
        ]

    def bbox(self) -> Box:
        return Box(min(self.x0, self.x1) - self.r, max(self.x0, self.x1) + self.r,
                   min(self.y0, self.y1) - self.r, max(self.y0, self.y1) + self.r)

    def translated(self, dx: float, dy: float) -> "Stadium":
        return Stadium(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy, self.r)


@dataclass(frozen=True)
class PointSet:
    points: tuple

    kind = "pointset"

    def __post_init__(self):
        pts = tuple((float(p[0]), float(p[1])) for p in self.points)
        if not pts:
            raise InvalidGeometry("empty point set")
        object.__setattr__(self, "points", pts)

    def contains(self, x, y):
        out = False
        for px, py in self.points:
            out = out | ((x == px) & (y == py))
        return out

    def open_contains(self, x, y):
        return np.zeros(np.broadcast(x, y).shape, dtype=bool) if np.ndim(x) else False

    def depth(self, x, y):
        d = None
        for px, py in self.points:
            dd = np.hypot(x - px, y - py)
            d = dd if d is None else np.minimum(d, dd)
        return -d

    def pieces(self) -> list:
        return [Vertex(px, py) for px, py in self.points]

    def bbox(self) -> Box:
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return Box(min(xs), max(xs), min(ys), max(ys))

    def translated(self, dx: float, dy: float) -> "PointSet":
        return PointSet(tuple((x + dx, y + dy) for x, y in self.points))


Primitive = TUnion[Rect, Disk, Stadium, PointSet]
PRIMITIVES = (Rect, Disk, Stadium, PointSet)


# ---------------------------------------------------------------------------
# CSG nodes


@dataclass(frozen=True)
class Union:
    children: tuple

    kind = "union"

    def __post_init__(self):
        ch = tuple(self.children)
        if not ch:
            raise InvalidGeometry("empty union")
        object.__setattr__(self, "children", ch)

    def contains(self, x, y):
        out = self.children[0].contains(x, y)
        for c in self.children[1:]:
            out = out | c.contains(x, y)
        return out

    def bbox(self) -> Box:
        b = self.children[0].bbox()
        for c in self.children[1:]:
            b = b.union(c.bbox())
        return b


@dataclass(frozen=True)
class Difference:
    """Closed ``base`` minus the open interiors of ``removed``."""

    base: Primitive
    removed: tuple

    kind = "difference"

    def __post_init__(self):
        rem = tuple(self.removed)
        object.__setattr__(self, "removed", rem)
        if not isinstance(self.base, (Rect, Disk, Stadium)):
            raise InvalidGeometry("difference base must be a rectangle, disk or stadium")
        for r in rem:
            if not isinstance(r, PRIMITIVES):
                raise InvalidGeometry("only primitives can be removed")
            if not _inside_closure(r, self.base):
                raise InvalidGeometry(f"removed {r} is not inside the base")

    def contains(self, x, y):
        out = self.base.contains(x, y)
        for r in self.removed:
            out = out & ~r.open_contains(x, y) if np.ndim(out) else out and not r.open_contains(x, y)
        return out

    def bbox(self) -> Box:
        return self.base.bbox()


Geometry2D = TUnion[Rect, Disk, Stadium, PointSet, Union, Difference]


def _inside_closure(r, base, tol: float = 1e-9) -> bool:
    pts = []
    if isinstance(r, Rect):
        pts = [(r.xmin, r.ymin), (r.xmax, r.ymin), (r.xmin, r.ymax), (r.xmax, r.ymax)]
        slack = 0.0
    elif isinstance(r, Disk):
        pts = [(r.cx, r.cy)]
        slack = r.r
    elif isinstance(r, Stadium):
        pts = [(r.x0, r.y0), (r.x1, r.y1)]
        slack = r.r
    else:
        pts, slack = list(r.points), 0.0
    scale = tol * max(1.0, base.bbox().width, base.bbox().height)
    return all(float(base.depth(px, py)) >= slack - scale for px, py in pts)


# ---------------------------------------------------------------------------
# operations


def contains(g, x) -> bool:
    """Exact membership of a point (scalar or ``(x, y)``) in ``g``."""
    if isinstance(g, Set1D):
        return g.contains(x)
    return bool(g.contains(float(x[0]), float(x[1])))


def contains_many(g, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    out = g.contains(X, Y)
    return np.broadcast_to(np.asarray(out, dtype=bool), np.broadcast(X, Y).shape).copy()


def in_set_tol(g, x, y, tol: float = BOUNDARY_TOL):
    """Membership allowing boundary points to sit ``tol`` outside."""
    if isinstance(g, Union):
        out = in_set_tol(g.children[0], x, y, tol)
        for c in g.children[1:]:
            out = out | in_set_tol(c, x, y, tol)
        return out
    if isinstance(g, Difference):
        out = g.base.depth(x, y) >= -tol
        for r in g.removed:
            if isinstance(r, PointSet):
                continue
            out = out & (r.depth(x, y) <= tol)
        return out
    return g.depth(x, y) >= -tol


def _scale(g) -> float:
    b = g.bbox()
    return max(1.0, abs(b.xmin), abs(b.xmax), abs(b.ymin), abs(b.ymax))


def _split_piece(p, cuts: list[float]) -> list:
    top = _param_range(p)
    if isinstance(p, Arc) and p.full:
        if not cuts:
            return [p]
        cs = sorted(set(cuts))
        out = []
        for u0, u1 in zip(cs, cs[1:] + [cs[0] + TWO_PI]):
            if u1 - u0 > 1e-13:
                out.append(Arc(p.cx, p.cy, p.r, p.a0 + u0, u1 - u0))
        return out
    cs = sorted(set([0.0, top] + [c for c in cuts if 0.0 < c < top]))
    return [p.sub(u0, u1) for u0, u1 in zip(cs, cs[1:]) if u1 - u0 > 1e-13 * max(1.0, top)]


def _midpoint(p):
    if isinstance(p, Segment):
        return p.point(0.5)
    return p.point(0.5 * p.span)


@lru_cache(maxsize=64)
def boundary_pieces(g) -> tuple:
    """Segments, arcs and vertices whose union contains the boundary of ``g``.

    For a :class:`Difference` the pieces are clipped exactly at mutual
    intersections and only sub-pieces lying on the boundary of the set are
    kept, together with every intersection point that belongs to the set.
    Unions return the pieces of their children.
    """
    if isinstance(g, PRIMITIVES):
        return tuple(g.pieces())
    if isinstance(g, Union):
        out = []
        for c in g.children:
            out.extend(boundary_pieces(c))
        return tuple(out)
    if not isinstance(g, Difference):
        raise UnsupportedShape(f"no boundary decomposition for {type(g).__name__}")
    raw = list(g.base.pieces())
    for r in g.removed:
        if not isinstance(r, PointSet):
            raw.extend(r.pieces())
    cuts: list[list[float]] = [[] for _ in raw]
    corner_pts = []
    for i in range(len(raw)):
        for j in range(i + 1, len(raw)):
            pts = intersections(raw[i], raw[j])
            if pts:
                cuts[i].extend(_params_on(raw[i], pts))
                cuts[j].extend(_params_on(raw[j], pts))
                corner_pts.extend(pts)
    tol = BOUNDARY_TOL * _scale(g)
    kept = []
    seen = set()
    for p, c in zip(raw, cuts):
        for sp in _split_piece(p, c):
            mx, my = _midpoint(sp)
            if not bool(in_set_tol(g, mx, my, tol)):
                continue
            key = _piece_key(sp)
            if key in seen:
                continue
            seen.add(key)
            kept.append(sp)
    for x, y in corner_pts:
        if bool(in_set_tol(g, x, y, tol)):
            key = ("v", round(x, 12), round(y, 12))
            if key not in seen:
                seen.add(key)
                kept.append(Vertex(x, y))
    return tuple(kept)


def _piece_key(p):
    if isinstance(p, Segment):
        a = (round(p.ax, 12), round(p.ay, 12))
        b = (round(p.bx, 12), round(p.by, 12))
        return ("s",) + tuple(sorted([a, b]))
    return ("a", round(p.cx, 12), round(p.cy, 12), round(p.r, 12),
            round(p.a0 % TWO_PI, 12), round(p.span, 12))


def _check_supported(g):
    if isinstance(g, Set1D) or isinstance(g, PRIMITIVES) or isinstance(g, Difference):
        return
    if isinstance(g, Union):
        for c in g.children:
            _check_supported(c)
        return
    raise UnsupportedShape(f"exact distance unavailable for {type(g).__name__}")


def exact_distance(g, x) -> float:
    """Distance from ``x`` to the compact set ``g``."""
    if isinstance(g, Set1D):
        return g.distance(x)
    _check_supported(g)
    px, py = float(x[0]), float(x[1])
    if contains(g, (px, py)):
        return 0.0
    return float(min(float(p.nearest(px, py)[0]) for p in boundary_pieces(g)))


def distance_many(g, X: np.ndarray, Y: np.ndarray, return_feet: bool = False):
    """Vectorised exact distance with optional nearest points."""
    _check_supported(g)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    best = np.full(np.broadcast(X, Y).shape, np.inf)
    fx = np.zeros_like(best) if return_feet else None
    fy = np.zeros_like(best) if return_feet else None
    for p in boundary_pieces(g):
        d, px, py = p.nearest(X, Y)
        better = d < best
        best = np.where(better, d, best)
        if return_feet:
            fx = np.where(better, px, fx)
            fy = np.where(better, py, fy)
    inside = contains_many(g, X, Y)
    best[inside] = 0.0
    if return_feet:
        fx[inside] = np.broadcast_to(X, best.shape)[inside]
        fy[inside] = np.broadcast_to(Y, best.shape)[inside]
        return best, fx, fy
    return best


def nearest_candidates(g, x: tuple[float, float]) -> list[tuple[float, float, float]]:
    """All candidate nearest points ``(distance, px, py)`` on the boundary pieces."""
    _check_supported(g)
    px, py = float(x[0]), float(x[1])
    out = []
    for p in boundary_pieces(g):
        d, fx, fy = p.nearest(px, py)
        out.append((float(d), float(fx), float(fy)))
        for ex, ey in p.endpoints():
            out.append((math.hypot(px - ex, py - ey), ex, ey))
        if isinstance(p, Arc) and math.hypot(px - p.cx, py - p.cy) <= 1e-12 * max(1.0, p.r):
            # every point of the arc is equidistant; report a spread of them
            for k in range(1, 8):
                ex, ey = p.point(p.span * k / 8.0)
                out.append((p.r, ex, ey))
    return out


def bounding_box(g) -> Box:
    if isinstance(g, Set1D):
        return Box(float(g.lo), float(g.hi), 0.0, 0.0)
    return g.bbox()


def diameter_bound(g) -> float:
    if isinstance(g, Set1D):
        return g.hi - g.lo
    b = g.bbox()
    return math.hypot(b.width, b.height)


def translate(g, dx: float, dy: float):
    if isinstance(g, PRIMITIVES):
        return g.translated(dx, dy)
    if isinstance(g, Union):
        return Union(tuple(translate(c, dx, dy) for c in g.children))
    if isinstance(g, Difference):
        return Difference(g.base.translated(dx, dy), tuple(r.translated(dx, dy) for r in g.removed))
    raise UnsupportedShape(type(g).__name__)


def primitives_of(g) -> list:
    if isinstance(g, PRIMITIVES):
        return [g]
    if isinstance(g, Union):
        return [p for c in g.children for p in primitives_of(c)]
    return [g.base, *g.removed]


# ---------------------------------------------------------------------------
# convenience constructors


def rect_boundary(s: float = 1.0, origin: Sequence[float] = (0.0, 0.0)) -> Difference:
    """Boundary of the box [0,3s] x [0,2s] (shifted by ``origin``)."""
    R = Rect(origin[0], origin[0] + 3 * s, origin[1], origin[1] + 2 * s)
    return Difference(R, (R,))


def two_points(dist: float = 2.0) -> PointSet:
    return PointSet(((-dist / 2, 0.0), (dist / 2, 0.0)))


# ---------------------------------------------------------------------------
# JSON


def _num(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _parse(s, exact: bool = False):
    if isinstance(s, (int, float)):
        return s
    if exact:
        return Fraction(s)
    return float(s)


def to_json(g) -> dict:
    """Lossless JSON form; numbers are decimal (or p/q) strings."""
    if isinstance(g, Set1D):
        exact = any(isinstance(v, (Fraction, int)) for c in g.components() for v in c)
        return {"kind": "set1d", "exact": exact, "points": [_num(p) for p in g.points],
                "intervals": [[_num(a), _num(b)] for a, b in g.intervals]}
    if isinstance(g, Rect):
        return {"kind": "rectangle", "xmin": _num(g.xmin), "xmax": _num(g.xmax),
                "ymin": _num(g.ymin), "ymax": _num(g.ymax)}
    if isinstance(g, Disk):
        return {"kind": "disk", "center": [_num(g.cx), _num(g.cy)], "radius": _num(g.r)}
    if isinstance(g, Stadium):
        return {"kind": "stadium", "segment": [[_num(g.x0), _num(g.y0)], [_num(g.x1), _num(g.y1)]],
                "radius": _num(g.r)}
    if isinstance(g, PointSet):
        return {"kind": "pointset", "points": [[_num(x), _num(y)] for x, y in g.points]}
    if isinstance(g, Union):
        return {"kind": "union", "children": [to_json(c) for c in g.children]}
    if isinstance(g, Difference):
        return {"kind": "difference", "base": to_json(g.base), "removed": [to_json(r) for r in g.removed]}
    raise UnsupportedShape(type(g).__name__)


def from_json(d: dict):
    k = d["kind"]
    if k == "set1d":
        exact = bool(d.get("exact", False))
        pts = [_parse(p, exact) for p in d.get("points", [])]
        ivs = [(_parse(a, exact), _parse(b, exact)) for a, b in d.get("intervals", [])]
        return Set1D(tuple(pts), tuple(ivs))
    f = lambda v: float(_parse(v))  # noqa: E731
    if k == "rectangle":
        return Rect(f(d["xmin"]), f(d["xmax"]), f(d["ymin"]), f(d["ymax"]))
    if k == "disk":
        return Disk(f(d["center"][0]), f(d["center"][1]), f(d["radius"]))
    if k == "stadium":
        (x0, y0), (x1, y1) = d["segment"]
        return Stadium(f(x0), f(y0), f(x1), f(y1), f(d["radius"]))
    if k == "pointset":
        return PointSet(tuple((f(x), f(y)) for x, y in d["points"]))
    if k == "union":
        return Union(tuple(from_json(c) for c in d["children"]))
    if k == "difference":
        return Difference(from_json(d["base"]), tuple(from_json(r) for r in d["removed"]))
    raise InvalidGeometry(f"unknown geometry kind {k!r}")
