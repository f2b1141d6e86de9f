"""Command line front end: construct, analyze, verify, gallery, convergence.

Every subcommand writes CSV/JSON files into ``--out`` (default: the current
directory) and prints a JSON summary on stdout.  Errors are reported as a
JSON record on stderr with exit status 2.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import acceptance
from . import analysis as an
from . import report
from .constructions import (
    GammaPolicy,
    construct_boxes_dimd,
    construct_dim1,
    construct_dim2_eps,
    construct_dim2_full,
    predicted_nondiff_1d,
)
from .engine import distance_field, radii_grid, volume_function
from .errors import ParvolError
from .fractal_strings import (
    TargetRadii,
    as_fraction_radii,
    cantor_endpoints_family,
    cantor_gallery,
    check_dim2_conditions,
    gap_sum,
    geometric_family,
    integral_condition,
    inverse_square_family,
    rearranged_family,
)
from .geometry import Disk, Set1D, from_json, rect_boundary, to_json, two_points


@dataclass
class RunConfig:
    command: str
    geometry: Optional[str] = None
    h: float = acceptance.H
    band: tuple = (0.05, 1.5)
    threshold: Optional[float] = None
    seed: int = 0
    out: str = "."
    figures: bool = False

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        lo, hi = self.band
        if not (0 < lo < hi):
            raise ValueError("band must satisfy 0 < lo < hi")


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_number(text: str):
    text = text.strip()
    return Fraction(text) if "/" in text else float(text)


def parse_list(text: str) -> list:
    return [parse_number(t) for t in text.split(",") if t.strip()]


def parse_band(text: str) -> tuple:
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("band must be LO,HI")
    return tuple(vals)


FAMILIES = {
    "cantor": cantor_endpoints_family,
    "rearranged": rearranged_family,
    "inverse-square": inverse_square_family,
    "geometric": geometric_family,
}


def target_radii(radii: Optional[str], family: Optional[str], depth: Optional[int], exact: bool = False) -> TargetRadii:
    if family:
        name, _, arg = family.partition(":")
        if name not in FAMILIES:
            raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}")
        args = [float(v) for v in arg.split(",") if v]
        fam = FAMILIES[name](*args)
        return fam.truncate(depth)
    if not radii:
        raise ValueError("give --radii or --family")
    vals = parse_list(radii)
    return as_fraction_radii(vals) if exact else TargetRadii.finite(float(v) for v in vals)


def load_geometry(text: str, gamma0: Optional[float] = None):
    """Shorthands ``disk:R``, ``rectboundary:S``, ``twopoints:D``,
    ``dim2:S1,S2,...``, ``dim1:S1,...``; otherwise inline JSON or a JSON file."""
    text = text.strip()
    if text.startswith("{"):
        return from_json(json.loads(text)), None
    if os.path.exists(text):
        with open(text) as fh:
            return from_json(json.load(fh)), None
    kind, _, arg = text.partition(":")
    kind = kind.lower().replace("_", "").replace("-", "")
    if kind == "disk":
        return Disk(0.0, 0.0, float(arg or 1.0)), ("disk", float(arg or 1.0))
    if kind == "rectboundary":
        return rect_boundary(float(arg or 1.0)), ("rect_boundary", float(arg or 1.0))
    if kind == "twopoints":
        return two_points(float(arg or 2.0)), ("two_points", float(arg or 2.0))
    if kind == "dim1":
        n = as_fraction_radii(parse_list(arg))
        return construct_dim1(n), n
    if kind == "dim2":
        n = TargetRadii.finite(float(v) for v in parse_list(arg))
        meta = construct_dim2_eps(n, gamma_policy=GammaPolicy(gamma0=gamma0))
        return meta.geometry, meta
    raise ValueError(f"cannot read geometry {text!r}")


# ---------------------------------------------------------------------------
# output


class Output:
    def __init__(self, out_dir: str):
        self.dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.files: list[str] = []

    def json(self, name: str, obj) -> str:
        path = os.path.join(self.dir, name)
        with open(path, "w") as fh:
            fh.write(report.dumps(obj) + "\n")
        self.files.append(path)
        return path

    def csv(self, name: str, header, rows) -> str:
        path = os.path.join(self.dir, name)
        report.write_csv(path, header, rows)
        self.files.append(path)
        return path


# ---------------------------------------------------------------------------
# subcommands


def cmd_construct(args, out: Output) -> dict:
    policy = GammaPolicy(gamma0=args.gamma0)
    if args.dim == 1:
        n = target_radii(args.radii, args.family, args.depth, exact=True)
        a = construct_dim1(n)
        out.json("geometry.json", to_json(a))
        pred = predicted_nondiff_1d(a)
        meta = {"predicted_nondiff": [str(v) for v in sorted(pred.values)]}
        out.json("metadata.json", meta)
        return {"geometry": to_json(a), **meta}
    n = target_radii(args.radii, args.family, args.depth)
    if args.dim == 2:
        if args.full or n.family is not None:
            fc = construct_dim2_full(n, max_level=args.max_level, gamma_policy=policy)
            meta = {
                "pieces": [{"level": lv, **m.to_dict()} for lv, m in fc.pieces],
                "shifts": fc.shifts,
                "enclosing_radius": fc.packing.radius,
                "unrealized": fc.unrealized,
                "area_sum": fc.area_sum,
                "area_bound": fc.area_bound,
                "predicted_jumps": {report.fmt(s): j for s, j in sorted(fc.predicted_jumps.items())},
            }
            geom = fc.geometry
        else:
            m = construct_dim2_eps(n, eps=args.eps, gamma_policy=policy)
            meta = m.to_dict()
            meta["predicted_jumps"] = {report.fmt(s): j for s, j in sorted(m.predicted_jumps.items())}
            meta["critical_segments"] = {report.fmt(s): v for s, v in sorted(m.critical_segments.items())}
            geom = m.geometry
        out.json("geometry.json", to_json(geom))
        out.json("metadata.json", meta)
        return {"files": out.files, "predicted_jumps": meta["predicted_jumps"]}
    bc = construct_boxes_dimd(n, args.dim)
    desc = {
        "d": bc.d,
        "boxes": {report.fmt(s): bc.shifted_box(s) for s in bc.boxes},
        "enclosing_radius": bc.enclosing_radius,
        "critical_cubes": {report.fmt(s): v for s, v in bc.critical_cubes.items()},
        "pairwise_disjoint": bc.pairwise_disjoint(),
    }
    out.json("boxes.json", desc)
    return desc


def _analyze_1d(a: Set1D, args, out: Output, predicted=None) -> dict:
    lo, hi = args.band
    step = Fraction(args.h).limit_denominator(10 ** 9) / 2
    radii = [step * k for k in range(math.ceil(Fraction(lo) / step), math.floor(Fraction(hi) / step) + 1)]
    vs = volume_function(a, radii)
    out.csv("volume.csv", ["r", "V", "err"], vs.to_rows())
    rep = an.detect_nondiff_1d_exact(a, predicted)
    out.json("nondiff.json", rep)
    return {"nondiff": rep.to_dict(), "files": out.files}


def cmd_analyze(args, out: Output) -> dict:
    cfg = RunConfig("analyze", args.geometry, args.h, args.band, args.threshold, args.seed, args.out, args.figures)
    g, meta = load_geometry(args.geometry, args.gamma0)
    if isinstance(g, Set1D):
        return _analyze_1d(g, args, out, meta if isinstance(meta, TargetRadii) else None)
    lo, hi = cfg.band
    step = cfg.h / 2
    f = distance_field(g, cfg.h, hi + 2 * cfg.h)
    vs = volume_function(f, radii_grid(lo, hi, step))
    out.csv("volume.csv", ["r", "V", "err"], vs.to_rows())
    kwargs = {}
    if hasattr(meta, "predicted_jumps"):
        kwargs = dict(predicted=TargetRadii.finite(meta.realized), expected_jumps=list(meta.predicted_jumps.values()))
    rep = an.detect_nondiff(vs, threshold=cfg.threshold, **kwargs)
    prof = an.jump_profile(vs)
    out.csv("jump_profile.csv", ["r", "left", "right", "jump"], prof.to_rows())
    out.json("nondiff.json", rep)
    radii = sorted(set(rep.radii) | set(args.r or []))
    crit = []
    for r in radii:
        if 2 * cfg.h < r <= f.r_max - cfg.h:
            crit.append(an.characterize_differentiability(g, f, r, nondiff=rep))
    out.json("criticality.json", crit)
    summary = {"noise": vs.noise, "nondiff": rep.to_dict(),
               "criticality": [{"r": c.r, "verdict": c.verdict, "critical_weight": c.critical_weight} for c in crit]}
    if args.kneser:
        kr = an.kneser_check(vs, 2)
        sr = an.stacho_check(vs)
        out.json("kneser.json", {"kneser": kr, "stacho": sr})
        summary["kneser_passed"] = kr.passed
        summary["stacho_passed"] = sr.passed
    if cfg.figures:
        from . import plotting
        out.files.append(plotting.volume_figure(vs, out.dir, nondiff=rep))
        out.files.append(plotting.jump_figure(prof, out.dir))
    summary["files"] = out.files
    return summary


def cmd_verify(args, out: Output) -> dict:
    ctx = acceptance.Context(h=args.h, seed=args.seed)
    results = acceptance.run_all(ctx, echo=lambda s: print(s, file=sys.stderr))
    out.json("acceptance.json", [r.to_dict() for r in results])
    out.csv("acceptance.csv", ["criterion", "passed", "seconds", "budget"],
            [(r.number, r.passed, r.seconds, r.budget) for r in results])
    return {"passed": all(r.passed for r in results), "results": [r.line() for r in results]}


MAX_GALLERY_DEPTH = 20  # truncated families hold about 2**depth radii


def cmd_gallery(args, out: Output) -> dict:
    if not 0 < args.depth <= MAX_GALLERY_DEPTH:
        raise ValueError(f"depth must be in 1..{MAX_GALLERY_DEPTH}")
    gal = cantor_gallery(args.q, args.depth)
    measured = gap_sum(gal.string, args.alpha)
    closed = gal.closed_form_gap_sum(args.alpha)
    rows = []
    for k, count in enumerate(gal.level_counts()):
        rows.append((k, count, (1 - 2 * args.q) * args.q ** k))
    out.csv("fractal_string.csv", ["level", "count", "length"], rows)
    conds = {}
    for name, fam in (("E_q", cantor_endpoints_family(args.q)), ("E_q_prime", rearranged_family(args.q))):
        n = fam.truncate(args.depth)
        try:
            ic = integral_condition(n)
            ic_d = {"value": ic.value, "finite": math.isfinite(ic.value), "heuristic": ic.heuristic}
        except ParvolError as exc:
            ic_d = {"error": type(exc).__name__, "message": str(exc)}
        conds[name] = {"integral_condition": ic_d, "conditions": check_dim2_conditions(n)}
    summary = {
        "q": args.q,
        "alpha": args.alpha,
        "depth": args.depth,
        "gap_sum": measured,
        "closed_form": closed,
        "relative_error": (abs(measured - closed) / closed if math.isfinite(closed) and closed else None),
        "minkowski_dimension": gal.minkowski_dimension,
        "conditions": conds,
    }
    out.json("gallery.json", summary)
    summary["files"] = out.files
    return summary


def cmd_convergence(args, out: Output) -> dict:
    g, meta = load_geometry(args.geometry, args.gamma0)
    if isinstance(g, Set1D):
        raise ValueError("convergence needs a planar geometry")
    delta = args.delta if args.delta is not None else 5 * args.h
    r_top = max(args.r0) + delta + 4 * args.h
    f = distance_field(g, args.h, r_top)
    nondiff = list(meta.predicted_jumps) if hasattr(meta, "predicted_jumps") else []
    nondiff += list(args.nondiff or [])
    reps, rows = [], []
    for r0 in args.r0:
        rep = an.weak_convergence_report(f, r0, delta=delta, nondiff=nondiff)
        reps.append(rep)
        gaps = dict(rep.one_sided_gaps)
        for k, e, fd, mg in rep.rows:
            rows.append((r0, k, e, fd, mg, gaps.get(k, float("nan"))))
    out.csv("convergence.csv", ["r0", "k", "offset", "flat_distance", "mass_gap", "one_sided_gap"], rows)
    out.json("convergence.json", reps)
    if args.figures:
        from . import plotting
        for rep in reps:
            out.files.append(plotting.convergence_figure(rep, out.dir, f"convergence_{report.fmt(rep.r0)}.png"))
    return {"reports": [{"r0": r.r0, "differentiable": r.differentiable, "verdict": r.verdict} for r in reps],
            "files": out.files}


COMMANDS = {
    "construct": cmd_construct,
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "gallery": cmd_gallery,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parvol", description="Parallel-volume constructions and checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, geometry=False):
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--h", type=float, default=acceptance.H, help="grid spacing")
        if geometry:
            sp.add_argument("--geometry", required=True,
                            help="disk:R | rectboundary:S | twopoints:D | dim1:S,.. | dim2:S,.. | JSON | path")
            sp.add_argument("--gamma0", type=float, default=None)
            sp.add_argument("--figures", action="store_true", help="also render PNG figures (needs matplotlib)")

    c = sub.add_parser("construct", help="build a set with prescribed non-differentiability radii")
    c.add_argument("--dim", type=int, default=1)
    c.add_argument("--radii", help="comma separated radii, fractions allowed (1/2)")
    c.add_argument("--family", help="cantor:Q | rearranged:Q | inverse-square:SHIFT | geometric:B,RATIO")
    c.add_argument("--depth", type=int, default=None, help="truncation depth for families")
    c.add_argument("--gamma0", type=float, default=None)
    c.add_argument("--eps", type=float, default=None)
    c.add_argument("--max-level", type=int, default=12)
    c.add_argument("--full", action="store_true", help="dyadic band construction (dimension 2)")
    c.add_argument("--out", default=".")
    c.add_argument("--seed", type=int, default=0)

    a = sub.add_parser("analyze", help="volume samples, non-differentiability and criticality reports")
    common(a, geometry=True)
    a.add_argument("--band", type=parse_band, default=(0.05, 1.5), help="radii band LO,HI")
    a.add_argument("--threshold", type=float, default=None, help="minimum jump to report")
    a.add_argument("--r", type=float, action="append", help="extra radius to characterize (repeatable)")
    a.add_argument("--kneser", action="store_true", help="also run the Kneser and ordering checks")

    v = sub.add_parser("verify", help="run the acceptance suite; exit 0 iff all criteria pass")
    common(v)

    gl = sub.add_parser("gallery", help="Cantor-type fractal strings and their gap sums")
    gl.add_argument("--q", type=float, default=1 / 9)
    gl.add_argument("--alpha", type=float, default=0.5)
    gl.add_argument("--depth", type=int, default=14)
    gl.add_argument("--out", default=".")
    gl.add_argument("--seed", type=int, default=0)

    cv = sub.add_parser("convergence", help="flat distances of level sets approaching r0")
    common(cv, geometry=True)
    cv.add_argument("--r0", type=float, action="append", required=True)
    cv.add_argument("--delta", type=float, default=None)
    cv.add_argument("--nondiff", type=float, action="append", help="known non-differentiability radius")
    return p


def error_record(exc: BaseException) -> dict:
    return {"error": type(exc).__name__, "message": str(exc)}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        np.random.seed(args.seed)
        out = Output(args.out)
        result = COMMANDS[args.command](args, out)
    except (ParvolError, ValueError, ArithmeticError, OSError, KeyError) as exc:
        print(json.dumps(error_record(exc)), file=sys.stderr)
        return 2
    print(report.dumps(result))
    if args.command == "verify":
        return 0 if result["passed"] else 1
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
