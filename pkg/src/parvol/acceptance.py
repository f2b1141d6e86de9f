"""The end-to-end acceptance checks, shared by the test suite and ``parvol verify``.

Each ``criterion_*`` function returns a :class:`CriterionResult`.  A shared
:class:`Context` caches distance fields and volume samples so that the
Kneser/Stacho sweep and the additivity check reuse the earlier geometries.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import analysis as an
from .constructions import GammaPolicy, construct_dim1, construct_dim2_eps, predicted_nondiff_1d
from .engine import (
    complement,
    distance_field,
    extract_level_set,
    half_plane,
    local_measure,
    lower_directions,
    radii_grid,
    upper_directions,
    volume_function,
)
from .fractal_strings import (
    TargetRadii,
    cantor_closed_form,
    cantor_endpoints_family,
    cantor_string,
    gap_sum,
    integral_condition,
    rearranged_family,
)
from .geometry import Disk, rect_boundary, two_points

H = 0.002


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.title} ({self.seconds:.1f}s / {self.budget:.0f}s)"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "budget": self.budget, "details": self.details}


@dataclass
class Context:
    h: float = H
    seed: int = 0
    samples: dict = field(default_factory=dict)   # name -> (VolumeSamples, dimension)
    fields: dict = field(default_factory=dict)    # name -> (geometry, DistanceField)


def _timed(number: int, title: str, budget: float, body: Callable[[dict], bool]) -> CriterionResult:
    details: dict = {}
    t0 = time.perf_counter()
    ok = bool(body(details))
    dt = time.perf_counter() - t0
    details["within_budget"] = dt < budget
    return CriterionResult(number, title, ok and dt < budget, dt, budget, details)


def _field(ctx: Context, name: str, make, r_max: float):
    if name not in ctx.fields:
        g = make()
        ctx.fields[name] = (g, distance_field(g, ctx.h, r_max))
    return ctx.fields[name]


# ---------------------------------------------------------------------------


def random_target_sets(count: int = 200, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        size = int(rng.integers(1, 21))
        vals = set()
        while len(vals) < size:
            vals.add(float(rng.uniform(0.01, 1.0)))
        out.append(TargetRadii.finite(vals))
    return out


def criterion_1(ctx: Optional[Context] = None) -> CriterionResult:
    ctx = ctx or Context()

    def body(d):
        sets = random_target_sets(200, ctx.seed)
        round_trip = jumps_ok = 0
        worst = 0.0
        for k, n in enumerate(sets):
            a = construct_dim1(n)
            pred = predicted_nondiff_1d(a)
            if {Fraction(v) for v in n.values} == set(pred.values):
                round_trip += 1
            rep = an.detect_nondiff_1d_exact(a, pred)
            dev = max(abs(float(j) - 2.0) for _, j in rep.detected)
            worst = max(worst, dev)
            if not rep.missed and not rep.spurious and dev <= 1e-9:
                jumps_ok += 1
            if k < 20:
                top = max(float(v) for v in n.values)
                step = Fraction(1, 512)
                radii = [step * i for i in range(1, int(top / step) + 40)]
                ctx.samples[f"dim1-{k}"] = (volume_function(a, radii), 1)
        d.update(sets=len(sets), round_trip=round_trip, exact_jumps=jumps_ok, worst_jump_error=worst)
        return round_trip == len(sets) and jumps_ok == len(sets)

    return _timed(1, "dim-1 round trip and exact jumps of 2", 5.0, body)


def criterion_2(ctx: Optional[Context] = None) -> CriterionResult:
    ctx = ctx or Context()
    h = ctx.h

    def body(d):
        g, f = _field(ctx, "rect", lambda: rect_boundary(1.0), 1.52)
        vs = volume_function(f, radii_grid(0.05, 1.5, h / 2))
        ctx.samples["rect"] = (vs, 2)
        rep = an.detect_nondiff(vs)
        crit = an.characterize_differentiability(g, f, 1.0, nondiff=rep)
        d.update(detected=rep.detected, critical_weight=crit.critical_weight, verdict=crit.verdict)
        one = len(rep.detected) == 1
        r, j = rep.detected[0] if rep.detected else (math.nan, math.nan)
        return (one and abs(r - 1.0) <= 2 * h and abs(j - 2.0) <= 0.2
                and abs(crit.critical_weight - 1.0) <= 0.1)

    return _timed(2, "rectangle boundary: single kink at 1, jump 2, critical weight 1", 60.0, body)


def criterion_3(ctx: Optional[Context] = None) -> CriterionResult:
    ctx = ctx or Context()
    h = ctx.h

    def body(d):
        n = TargetRadii.finite([1.0, 0.5])
        meta = construct_dim2_eps(n, gamma_policy=GammaPolicy(gamma0=0.1))
        g, f = _field(ctx, "dim2", lambda: meta.geometry, 1.22)
        vs = volume_function(f, radii_grid(0.05, 1.2, h / 2))
        ctx.samples["dim2"] = (vs, 2)
        jumps = meta.predicted_jumps
        rep = an.detect_nondiff(vs, predicted=n, expected_jumps=list(jumps.values()))
        ok = not rep.missed and not rep.spurious
        found = {}
        for s, want in jumps.items():
            got = rep.jump_at(s, 2 * h)
            found[s] = got
            ok &= got is not None and abs(got - want) <= 0.15 * want
        samples_ok = 0
        worst = 0.0
        for s, (lo, hi) in meta.J.items():
            i_lo, i_hi = math.ceil(lo / h - 1e-9), math.floor(hi / h + 1e-9)
            idx = np.unique(np.linspace(i_lo, i_hi, 20).round().astype(int))
            for i in idx:
                x = i * h
                dist = f.value_at(x, 0.0)
                worst = max(worst, abs(dist - s))
                if abs(dist - s) <= 1e-3 and an.is_critical(g, (x, 0.0)):
                    samples_ok += 1
            ok &= len(idx) == 20
        d.update(detected=rep.detected, rejected=rep.rejected, predicted_jumps=jumps, measured_jumps=found,
                 segment_samples_ok=samples_ok, worst_distance_error=worst)
        return bool(ok and samples_ok == 20 * len(meta.J))

    return _timed(3, "dim-2 construction {1, 1/2}: kinks, jumps 2*gamma, critical segments", 120.0, body)


def criterion_4(ctx: Optional[Context] = None) -> CriterionResult:
    ctx = ctx or Context()
    h = ctx.h

    def body(d):
        g, f = _field(ctx, "two", lambda: two_points(2.0), 1.52)
        vs = volume_function(f, radii_grid(0.05, 1.5, h / 2))
        ctx.samples["two"] = (vs, 2)
        rep = an.detect_nondiff(vs)
        est = an.one_sided_derivatives(vs, 1.0)
        crit = an.characterize_differentiability(g, f, 1.0)
        cv = an.scan_critical_values(g, f)
        near_one = [r for r in rep.radii if abs(r - 1.0) <= 2 * h]
        d.update(jump_statistic=est.jump, threshold=an.NOISE_FACTOR * est.noise, detected=rep.detected,
                 verdict=crit.verdict, critical_values=cv.values)
        return (not near_one and est.jump < an.NOISE_FACTOR * est.noise
                and crit.verdict == "differentiable" and cv.contains_value(1.0, h))

    return _timed(4, "two points at r=1: no kink, differentiable, yet a critical value", 60.0, body)


def criterion_5(ctx: Optional[Context] = None) -> CriterionResult:
    ctx = ctx or Context()

    def body(d):
        if not any(k.startswith("dim1") for k in ctx.samples):
            criterion_1(ctx)
        for name, crit in (("rect", criterion_2), ("dim2", criterion_3), ("two", criterion_4)):
            if name not in ctx.samples:
                crit(ctx)
        worst_k = worst_s = -math.inf
        rows = {}
        for name, (vs, dim) in sorted(ctx.samples.items()):
            kr = an.kneser_check(vs, dim)
            sr = an.stacho_check(vs)
            rows[name] = {"kneser_worst": kr.worst_violation, "kneser_noise_multiple": kr.worst_ratio,
                          "stacho_excess": sr.worst}
            worst_k = max(worst_k, kr.worst_ratio - kr.factor)
            worst_s = max(worst_s, sr.worst)
        d.update(samples=len(rows), per_sample=rows)
        return worst_k <= 0 and worst_s <= 0

    return _timed(5, "Kneser inequality and right <= left slopes on all samples", 120.0, body)


def criterion_6(ctx: Optional[Context] = None) -> CriterionResult:
    def body(d):
        ok = True
        sums = {}
        for q in (1 / 9, 1 / 16, 1 / 25):
            got = gap_sum(cantor_string(q, 14), 0.5)
            want = cantor_closed_form(q, 0.5)
            sums[q] = (got, want)
            ok &= abs(got - want) <= 1e-6 * want
        for q in (1 / 4, 1 / 3):
            got = gap_sum(cantor_string(q, 14), 0.5)
            sums[q] = (got, math.inf)
            ok &= math.isinf(got)
        ep = integral_condition(rearranged_family(0.3).truncate())
        e = integral_condition(cantor_endpoints_family(0.3).truncate())
        d.update(gap_sums=sums, E_prime_0_3=ep.verdict, E_0_3=e.verdict)
        return bool(ok and ep.verdict == "finite" and e.verdict == "infinite")

    return _timed(6, "Cantor gap sums and integral-condition verdicts", 5.0, body)


def criterion_7(ctx: Optional[Context] = None) -> CriterionResult:
    ctx = ctx or Context()

    def body(d):
        ok = True
        _, fd = _field(ctx, "disk", lambda: Disk(0.0, 0.0, 1.0), 0.62)
        rd = an.weak_convergence_report(fd, 0.5)
        meta = construct_dim2_eps(TargetRadii.finite([1.0]))
        _, fc = _field(ctx, "dim2-one", lambda: meta.geometry, 1.12)
        rc = an.weak_convergence_report(fc, 0.7)
        rk = an.weak_convergence_report(fc, 1.0, nondiff=[1.0])
        gamma = meta.gamma[1.0]
        gaps_ok = all(gap >= 0.5 * 2 * gamma for _, gap in rk.one_sided_gaps)
        ok = rd.verdict and rc.verdict and gaps_ok
        d.update(disk=rd.rows, construction=rc.rows, kink_gaps=rk.one_sided_gaps, two_gamma=2 * gamma)
        return bool(ok)

    return _timed(7, "weak convergence of level-set measures; persistent gap at the kink", 180.0, body)


def criterion_8(ctx: Optional[Context] = None) -> CriterionResult:
    ctx = ctx or Context()
    rng = np.random.default_rng(ctx.seed + 8)

    def body(d):
        geoms = {
            "rect": _field(ctx, "rect", lambda: rect_boundary(1.0), 1.52),
            "dim2": _field(ctx, "dim2", lambda: construct_dim2_eps(
                TargetRadii.finite([1.0, 0.5]), gamma_policy=GammaPolicy(gamma0=0.1)).geometry, 1.22),
        }
        worst_ratio = 0.0
        worst_surface = 0.0
        for name, (g, f) in geoms.items():
            for _ in range(10):
                ang = rng.uniform(0, 2 * math.pi)
                c = rng.uniform(-0.5, 1.5)
                r = float(rng.uniform(0.1, 1.1))
                B = half_plane(math.cos(ang), math.sin(ang), c)
                vs = volume_function(f, [r])
                a = local_measure(f, r, B)
                b = local_measure(f, r, complement(B))
                worst_ratio = max(worst_ratio, abs(a + b - vs.V[0]) / (2 * vs.err[0]))
            for r in (0.3, 0.7):
                up = local_measure(f, r, upper_directions, mode="surface").mass
                lo = local_measure(f, r, lower_directions, mode="surface").mass
                tot = extract_level_set(f, r).mass
                worst_surface = max(worst_surface, abs(up + lo - tot) / tot)
        d.update(worst_additivity_over_2err=worst_ratio, worst_surface_relative=worst_surface)
        return worst_ratio <= 1.0 and worst_surface <= 0.03

    return _timed(8, "local volumes add up; upper + lower surface masses give the total", 120.0, body)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8)


def run_all(ctx: Optional[Context] = None, echo: Callable[[str], None] = print) -> list:
    ctx = ctx or Context()
    out = []
    for crit in CRITERIA:
        res = crit(ctx)
        echo(res.line())
        out.append(res)
    return out
