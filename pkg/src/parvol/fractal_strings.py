"""Fractal strings, gap sums and the planar admissibility conditions.

A fractal string is the non-increasing list of lengths of the bounded
complementary intervals of a compact subset of the line.  Infinite strings
and infinite radius sets are carried as a finite explicit part plus a
level generator; every verdict about an infinite object is drawn from
level-wise partial sums with the divergence rule below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateFit, InconclusiveTail
from .geometry import Set1D

DIVERGENCE_CAP = 1e12
RATIO_MARGIN = 1e-3
MAX_LEVELS = 4000
MAX_LEVEL_SIZE = 1 << 22


# ---------------------------------------------------------------------------
# strings


@dataclass(frozen=True)
class FractalString:
    """Non-increasing gap lengths, optionally continued by a level generator.

    ``tail(k)`` returns ``(counts, lengths)`` arrays for level ``k`` and is
    consulted for ``k >= tail_start``.  Every generated length must be no
    larger than the last explicit one.
    """

    lengths: tuple = ()
    tail: Optional[Callable[[int], tuple]] = field(default=None, compare=False)
    tail_start: int = 0

    def __post_init__(self):
        ls = tuple(self.lengths)
        object.__setattr__(self, "lengths", ls)
        if any(x <= 0 for x in ls):
            raise ValueError("fractal string lengths must be positive")
        if any(b > a for a, b in zip(ls, ls[1:])):
            raise ValueError("fractal string lengths must be non-increasing")

    @property
    def infinite(self) -> bool:
        return self.tail is not None

    def scaled(self, c: float) -> "FractalString":
        tail = None
        if self.tail is not None:
            t = self.tail
            tail = lambda k: (t(k)[0], np.asarray(t(k)[1]) * c)  # noqa: E731
        return FractalString(tuple(c * x for x in self.lengths), tail, self.tail_start)


def fractal_string_of(a: Set1D) -> FractalString:
    comps = a.components()
    gaps = [c1[0] - c0[1] for c0, c1 in zip(comps, comps[1:])]
    return FractalString(tuple(sorted(gaps, reverse=True)))


def _level_sums(fs: FractalString, alpha: float):
    k = fs.tail_start
    while k < fs.tail_start + MAX_LEVELS:
        counts, lengths = fs.tail(k)
        counts = np.asarray(counts, dtype=float)
        lengths = np.asarray(lengths, dtype=float)
        yield float(np.sum(counts * lengths ** alpha))
        k += 1


def sum_with_divergence_rule(terms, start: float = 0.0, min_levels: int = 4) -> float:
    """Sum an iterable of nonnegative level terms; ``inf`` on detected divergence.

    Divergent when the partial sum exceeds ``DIVERGENCE_CAP`` or when the
    ratio of consecutive nonzero terms stays above ``1 - RATIO_MARGIN`` for
    ``min_levels`` levels.  Convergent once a term drops below 1e-17 of the
    partial sum, or once the ratio has settled below ``1 - RATIO_MARGIN``
    for ``min_levels`` levels; the geometric remainder is then added.
    """
    total = start
    prev = None
    prev_ratio = None
    stuck = 0
    settled = 0
    zeros = 0
    for t in terms:
        total += t
        if total > DIVERGENCE_CAP:
            return math.inf
        if t == 0:
            zeros += 1
            if zeros > 8:
                return total
            prev = t
            continue
        zeros = 0
        if prev:
            ratio = t / prev
            if ratio >= 1.0 - RATIO_MARGIN:
                stuck += 1
                settled = 0
                if stuck >= min_levels:
                    return math.inf
            else:
                stuck = 0
                if t <= 1e-17 * total:
                    return total + t * ratio / (1.0 - ratio)
                if prev_ratio is not None and abs(ratio - prev_ratio) <= RATIO_MARGIN * ratio:
                    settled += 1
                    if settled >= min_levels:
                        return total + t * ratio / (1.0 - ratio)
                else:
                    settled = 0
            prev_ratio = ratio
        prev = t
    raise InconclusiveTail("level generator exhausted before a verdict")


def gap_sum(fs: FractalString, alpha: float) -> float:
    """Degree-``alpha`` gap sum; ``math.inf`` when it diverges."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    explicit = math.fsum(float(x) ** alpha for x in fs.lengths)
    if fs.tail is None:
        return explicit
    return sum_with_divergence_rule(_level_sums(fs, alpha), start=explicit)


def gap_sum_of_points(points, alpha: float = 0.5) -> float:
    """Gap sum of a finite set given as any iterable of reals."""
    p = np.unique(np.asarray(list(points), dtype=float))
    if p.size < 2:
        return 0.0
    return float(math.fsum(np.diff(p) ** alpha))


# ---------------------------------------------------------------------------
# radius sets


@dataclass(frozen=True)
class RadiiFamily:
    """Generator for an infinite radius set, organised in levels.

    ``level(k)`` returns the radii first appearing at level ``k``.
    ``closure_string`` (if known) is the fractal string of the closure.
    ``resolved_above(depth)`` is a radius above which a depth-``depth``
    truncation already contains the full closure.
    """

    name: str
    params: tuple
    level: Callable[[int], np.ndarray] = field(compare=False)
    closure_extra: tuple = ()
    origin_accumulates: bool = False
    closure_string: Optional[FractalString] = field(default=None, compare=False)
    resolved_above: Optional[Callable[[int], float]] = field(default=None, compare=False)
    default_depth: int = 12
    gallery: bool = True

    def truncate(self, depth: Optional[int] = None) -> "TargetRadii":
        depth = self.default_depth if depth is None else depth
        pts = np.concatenate([np.asarray(self.level(k), dtype=float) for k in range(depth)])
        vals = np.unique(pts)[::-1]
        extra = tuple(e for e in self.closure_extra if e not in set(vals.tolist()))
        return TargetRadii(tuple(float(v) for v in vals), extra, self.origin_accumulates, self, depth)

    def power_sum(self, p: float) -> float:
        def terms():
            for k in range(MAX_LEVELS):
                lv = np.asarray(self.level(k), dtype=float)
                if lv.size > MAX_LEVEL_SIZE:
                    return
                yield float(np.sum(lv ** p))

        return sum_with_divergence_rule(terms())


@dataclass(frozen=True)
class TargetRadii:
    """A prescribed set N of radii: finite values plus closure description."""

    values: tuple
    closure_extra: tuple = ()
    origin_accumulates: bool = False
    family: Optional[RadiiFamily] = None
    depth: Optional[int] = None

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "closure_extra", tuple(self.closure_extra))
        if any(v <= 0 for v in vals):
            raise ValueError("radii must be positive")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise ValueError("radii must be strictly decreasing")
        if set(vals) & set(self.closure_extra):
            raise ValueError("closure_extra must be disjoint from values")

    @classmethod
    def finite(cls, vals) -> "TargetRadii":
        return cls(tuple(sorted(set(vals), reverse=True)))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_infinite(self) -> bool:
        return self.family is not None

    def closure(self) -> np.ndarray:
        """Ascending array of the closure points (0 included if it accumulates)."""
        pts = [float(v) for v in self.values] + [float(v) for v in self.closure_extra]
        if self.origin_accumulates:
            pts.append(0.0)
        return np.unique(np.asarray(pts, dtype=float))

    @property
    def max(self) -> float:
        return float(self.closure().max())


def tail_gap_sum(n: TargetRadii, r: float, alpha: float = 0.5) -> float:
    """G_alpha of the closure of N intersected with [r, inf)."""
    if not r > 0:
        raise ValueError("r must be positive")
    c = n.closure()
    return gap_sum_of_points(c[c >= r], alpha)


def tail_gap_table(n: TargetRadii, radii) -> list[tuple[float, float]]:
    return [(float(r), tail_gap_sum(n, float(r))) for r in radii]


def _integral_finite(closure: np.ndarray) -> float:
    """Integral over r>0 of G_half(K cap [r, inf)) sqrt(r) for a finite K.

    Between consecutive closure points the integrand's gap-sum factor is
    constant, so each piece integrates in closed form.
    """
    p = closure[closure > 0]
    if p.size < 2:
        return 0.0
    g = np.sqrt(np.diff(p))
    # suffix[i] = gap sum of {p_i, ..., p_m}
    suffix = np.concatenate([np.cumsum(g[::-1])[::-1], [0.0]])
    lower = np.concatenate([[0.0], p[:-1]])
    pieces = suffix * (2.0 / 3.0) * (p ** 1.5 - lower ** 1.5)
    return float(math.fsum(pieces))


@dataclass
class IntegralCondition:
    value: float
    verdict: str  # "finite" or "infinite"
    band_terms: list
    heuristic: bool = False


def _band_terms(closure: np.ndarray, b: float, n_bands: int):
    out = []
    for n in range(n_bands):
        hi = b * 2.0 ** (-n)
        lo = hi / 2.0
        k = closure[(closure >= lo) & (closure <= hi)]
        out.append(hi ** 1.5 * gap_sum_of_points(k))
    return out


def integral_condition(n: TargetRadii, depth_step: int = 2, n_depths: int = 3) -> IntegralCondition:
    """Value and verdict for the integral admissibility condition.

    The value is the exact piecewise integral over the (truncated) closure.
    For generator-backed sets the verdict follows the dyadic band sums
    ``sum delta_n^{3/2} G_half(K_n)``: divergent if a band's gap sum keeps
    growing with the truncation depth, otherwise a ratio test on the
    resolved band terms.
    """
    value = _integral_finite(n.closure())
    if n.family is None:
        return IntegralCondition(value, "finite", _band_terms(n.closure(), n.max, 8))
    fam = n.family
    d0 = n.depth if n.depth is not None else fam.default_depth
    depths = [d0 + i * depth_step for i in range(n_depths)]
    truncs = [fam.truncate(d) for d in depths]
    b = truncs[-1].max
    n_bands = 6
    per_depth = [_band_terms(t.closure(), b, n_bands) for t in truncs]
    # band growth with depth
    for band in range(n_bands):
        seq = [pd[band] for pd in per_depth]
        inc = np.diff(seq)
        if inc.size >= 2 and inc[-2] > 0 and inc[-1] >= (1 - RATIO_MARGIN) * inc[-2] and inc[-1] > 1e-12 * seq[-1]:
            return IntegralCondition(math.inf, "infinite", per_depth[-1], heuristic=not fam.gallery)
    # ratio test over bands resolved at the deepest truncation
    deep = truncs[-1]
    res = fam.resolved_above(depths[-1]) if fam.resolved_above else 0.0
    terms = []
    c = deep.closure()
    nb = 0
    while True:
        hi = b * 2.0 ** (-nb)
        if hi / 2.0 < res or nb > 200:
            break
        k = c[(c >= hi / 2.0) & (c <= hi)]
        terms.append(hi ** 1.5 * gap_sum_of_points(k))
        nb += 1
    pos = [t for t in terms if t > 0]
    if len(pos) < 4:
        if all(t == 0 for t in terms[len(terms) // 2:]) and len(terms) >= 4:
            return IntegralCondition(value, "finite", terms, heuristic=not fam.gallery)
        raise InconclusiveTail("too few resolved dyadic bands for a decay verdict")
    tail = pos[len(pos) // 2:]
    ratio = (tail[-1] / tail[0]) ** (1.0 / max(len(tail) - 1, 1))
    verdict = "finite" if ratio < 1.0 - RATIO_MARGIN else "infinite"
    return IntegralCondition(value if verdict == "finite" else math.inf, verdict, terms,
                             heuristic=not fam.gallery)


@dataclass
class ConditionReport:
    gap_sum_half: float
    lebesgue_null: bool
    integral_value: float
    sum_s: float
    sum_s2: float
    sum_sd: float
    verdict_i: bool
    verdict_ii: bool
    integral_heuristic: bool = False
    d: int = 2

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _power_sum(n: TargetRadii, p: float) -> float:
    if n.family is not None:
        return n.family.power_sum(p)
    return math.fsum(float(v) ** p for v in n.values)


def check_dim2_conditions(n: TargetRadii, eps: float = 0.0, d: int = 2) -> ConditionReport:
    if n.family is not None and n.family.closure_string is not None:
        g_half = gap_sum(n.family.closure_string, 0.5)
    else:
        g_half = gap_sum_of_points(n.closure())
    # countable closures are null; the representation is countable by construction
    null = True
    try:
        ic = integral_condition(n)
        integral, heuristic = ic.value, ic.heuristic
    except InconclusiveTail:
        integral, heuristic = math.nan, True
    vi = bool(eps > 0 and float(n.closure().min()) >= eps and math.isfinite(g_half) and null)
    vii = bool(math.isfinite(integral) and null)
    return ConditionReport(g_half, null, integral, _power_sum(n, 1), _power_sum(n, 2),
                           _power_sum(n, d), vi, vii, heuristic, d)


# ---------------------------------------------------------------------------
# Cantor gallery


def cantor_string(q: float, explicit_levels: int = 0) -> FractalString:
    """Fractal string of the middle-gap Cantor set with ratio ``q``.

    Level ``k`` holds ``2**k`` gaps of length ``(1-2q) q**k``.
    """
    lengths = []
    for k in range(explicit_levels):
        lengths.extend([(1 - 2 * q) * q ** k] * (2 ** k))
    tail = lambda k: (np.array([2.0 ** k]), np.array([(1 - 2 * q) * q ** k]))  # noqa: E731
    return FractalString(tuple(lengths), tail, explicit_levels)


def cantor_closed_form(q: float, alpha: float) -> float:
    if 2 * q ** alpha >= 1:
        return math.inf
    return (1 - 2 * q) ** alpha / (1 - 2 * q ** alpha)


def cantor_intervals(q: float, depth: int) -> list[tuple[float, float]]:
    ivs = [(0.0, 1.0)]
    for _ in range(depth):
        nxt = []
        for a, b in ivs:
            L = b - a
            nxt.append((a, a + q * L))
            nxt.append((b - q * L, b))
        ivs = nxt
    return ivs


def _cantor_level_endpoints(q: float, k: int) -> np.ndarray:
    """Endpoints of the 2**k gaps removed at level k."""
    lefts = np.zeros(1)
    for j in range(k):
        lefts = np.concatenate([lefts, lefts + (1 - q) * q ** j])
    L = q ** k
    return np.concatenate([lefts + q * L, lefts + (1 - q) * L])


def cantor_endpoints_family(q: float) -> RadiiFamily:
    if not 0 < q < 0.5:
        raise ValueError("q must lie in (0, 1/2)")
    return RadiiFamily(
        "E_q", (q,), lambda k: _cantor_level_endpoints(q, k),
        closure_extra=(1.0,), origin_accumulates=True,
        closure_string=cantor_string(q), resolved_above=None, default_depth=10)


def _rearranged_level(q: float, k: int) -> np.ndarray:
    # all level-j gaps (j<k) are laid down before level k, right to left from 1
    # gaps of levels >= k fill [0, (2q)^k]; computing it directly avoids cancellation
    L = (1 - 2 * q) * q ** k
    start = (2 * q) ** k
    return start - L * np.arange(1, 2 ** k + 1)


def rearranged_family(q: float) -> RadiiFamily:
    """Endpoints of the Cantor gaps packed side by side from 1 downwards."""
    if not 0 < q < 0.5:
        raise ValueError("q must lie in (0, 1/2)")

    def level(k):
        pts = _rearranged_level(q, k)
        return np.concatenate([[1.0], pts]) if k == 0 else pts

    return RadiiFamily(
        "E_q_prime", (q,), level, closure_extra=(), origin_accumulates=True,
        closure_string=cantor_string(q), resolved_above=lambda depth: (2 * q) ** depth,
        default_depth=16)


def inverse_square_family(shift: float = 1.0) -> RadiiFamily:
    """{shift + j**-2 : j >= 1}, accumulating at ``shift``."""

    def level(k):
        j = np.arange(2 ** k, 2 ** (k + 1), dtype=float)
        return shift + 1.0 / j ** 2

    def tail(k):
        j = np.arange(2 ** k, 2 ** (k + 1), dtype=float)
        return np.ones_like(j), 1.0 / j ** 2 - 1.0 / (j + 1) ** 2

    return RadiiFamily(
        "inverse_square", (shift,), level, closure_extra=(shift,), origin_accumulates=False,
        closure_string=FractalString((), tail, 0), resolved_above=None, default_depth=12,
        gallery=False)


def geometric_family(b: float = 1.0, ratio: float = 0.5) -> RadiiFamily:
    return RadiiFamily(
        "geometric", (b, ratio), lambda k: np.array([b * ratio ** k]), origin_accumulates=True,
        closure_string=FractalString((), lambda k: (np.array([1.0]), np.array([b * ratio ** k * (1 - ratio)])), 0),
        resolved_above=lambda depth: b * ratio ** depth, default_depth=30, gallery=False)


@dataclass
class CantorGallery:
    q: float
    depth: int
    F: Set1D
    E: TargetRadii
    E_prime: TargetRadii
    string: FractalString

    def closed_form_gap_sum(self, alpha: float) -> float:
        return cantor_closed_form(self.q, alpha)

    @property
    def minkowski_dimension(self) -> float:
        return math.log(2) / math.log(1 / self.q)

    def level_counts(self) -> list[int]:
        out = []
        for k in range(self.depth):
            L = (1 - 2 * self.q) * self.q ** k
            out.append(sum(1 for x in self.string.lengths if math.isclose(x, L, rel_tol=1e-9)))
        return out


def cantor_gallery(q: float, depth: int) -> CantorGallery:
    if not 0 < q < 0.5:
        raise ValueError("q must lie in (0, 1/2)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    # explicit intervals only while their length stays well above float resolution
    f_depth = min(depth, int(math.log(1e-9) / math.log(q)))
    F = Set1D(intervals=tuple(cantor_intervals(q, f_depth)))
    return CantorGallery(q, depth, F, cantor_endpoints_family(q).truncate(depth),
                         rearranged_family(q).truncate(depth), cantor_string(q, depth))


# ---------------------------------------------------------------------------
# box counting


def box_count(a: Set1D, delta: float) -> int:
    cells = set()
    for lo, hi in a.components():
        i0 = math.floor(float(lo) / delta)
        i1 = math.floor(float(hi) / delta)
        cells.update(range(i0, i1 + 1))
    return len(cells)


def box_counting_dimension(a: Set1D, scales, max_slope_var: float = 1e-3) -> float:
    """Least-squares slope of log N(delta) against log(1/delta)."""
    scales = sorted(float(s) for s in scales)
    if len(scales) < 4 or math.log10(scales[-1] / scales[0]) < 2 - 1e-12:
        raise ValueError("need at least 4 scales spanning two decades")
    x = np.log(1.0 / np.asarray(scales))
    y = np.log([box_count(a, s) for s in scales])
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = max(len(x) - 2, 1)
    var = float(resid @ resid) / dof / float(np.sum((x - x.mean()) ** 2))
    if var > max_slope_var:
        raise DegenerateFit(f"slope variance {var:.3g} exceeds {max_slope_var}")
    return float(coef[0])


def as_fraction_radii(vals) -> TargetRadii:
    return TargetRadii.finite(Fraction(v) for v in vals)
