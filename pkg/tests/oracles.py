"""Independent brute-force references used to derive frozen test values."""
import math

import numpy as np


def rect_perimeter_samples(xmin, xmax, ymin, ymax, n=20000):
    t = np.linspace(0.0, 1.0, n)
    return np.concatenate([
        np.column_stack([xmin + (xmax - xmin) * t, np.full(n, ymin)]),
        np.column_stack([xmin + (xmax - xmin) * t, np.full(n, ymax)]),
        np.column_stack([np.full(n, xmin), ymin + (ymax - ymin) * t]),
        np.column_stack([np.full(n, xmax), ymin + (ymax - ymin) * t]),
    ])


def circle_samples(cx, cy, r, n=40000):
    t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    return np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])


def brute_distance(samples, x):
    return float(np.hypot(samples[:, 0] - x[0], samples[:, 1] - x[1]).min())


def monte_carlo_area(inside, box, n=400_000, seed=1):
    rng = np.random.default_rng(seed)
    xmin, xmax, ymin, ymax = box
    X = rng.uniform(xmin, xmax, n)
    Y = rng.uniform(ymin, ymax, n)
    frac = float(np.mean(inside(X, Y)))
    area = (xmax - xmin) * (ymax - ymin)
    return frac * area, area * math.sqrt(frac * (1 - frac) / n)


def union_length(intervals):
    """Length of a union of intervals by sorting (reference for 1D volumes)."""
    ivs = sorted(intervals)
    total, cur = 0.0, None
    for a, b in ivs:
        if cur is None or a > cur[1]:
            if cur is not None:
                total += cur[1] - cur[0]
            cur = [a, b]
        else:
            cur[1] = max(cur[1], b)
    return total + (cur[1] - cur[0])


def clip_polygon(poly, a, b, c):
    """Sutherland-Hodgman clip of a polygon to the half-plane a x + b y < c."""
    out = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp < 0:
            out.append(p)
        if (fp < 0) != (fq < 0):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def polygon_area(poly):
    if len(poly) < 3:
        return 0.0
    s = 0.0
    for k in range(len(poly)):
        (x0, y0), (x1, y1) = poly[k], poly[(k + 1) % len(poly)]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2
