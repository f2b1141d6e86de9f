import math
from fractions import Fraction

import numpy as np
import pytest

from parvol import analysis as an
from parvol.constructions import GammaPolicy, construct_dim1, construct_dim2_eps
from parvol.engine import distance_field, extract_level_set, radii_grid, volume_function
from parvol.engine.level import SurfaceCloud
from parvol.errors import EmptyCloud, InsufficientSamples, ScheduleRejected
from parvol.fractal_strings import TargetRadii, as_fraction_radii
from parvol.geometry import Disk, Set1D, rect_boundary, two_points

H = 0.01


def oracle_samples(kind, params, lo, hi, step):
    return volume_function((kind, params), radii_grid(lo, hi, step))


def exact_1d_samples(a, lo, hi, step):
    step = Fraction(step)
    radii = [step * k for k in range(math.ceil(Fraction(lo) / step), math.floor(Fraction(hi) / step) + 1)]
    return volume_function(a, radii)


@pytest.fixture(scope="module")
def rect():
    g = rect_boundary(1.0)
    return g, distance_field(g, H, 1.3)


@pytest.fixture(scope="module")
def two():
    g = two_points(2.0)
    return g, distance_field(g, H, 1.3)


@pytest.fixture(scope="module")
def disk():
    g = Disk(0.0, 0.0, 1.0)
    return g, distance_field(g, H, 1.0)


# one-sided derivatives

def test_disk_slopes_equal():
    vs = oracle_samples("disk", 1.0, 0.3, 0.7, 0.005)
    est = an.one_sided_derivatives(vs, 0.5)
    assert est.left == pytest.approx(3 * math.pi, rel=0.01)
    assert est.right == pytest.approx(3 * math.pi, rel=0.01)


def test_piecewise_linear_slopes():
    vs = exact_1d_samples(Set1D.from_points([0, 2, 3]), Fraction(1, 8), Fraction(7, 8), Fraction(1, 64))
    est = an.one_sided_derivatives(vs, 0.5)
    assert est.left == pytest.approx(6.0, abs=1e-9)
    assert est.right == pytest.approx(4.0, abs=1e-9)


def test_rect_oracle_jump():
    vs = oracle_samples("rect_boundary", 1.0, 0.8, 1.2, 0.001)
    est = an.one_sided_derivatives(vs, 1.0)
    assert est.left == pytest.approx(12 + 2 * math.pi, rel=1e-6)
    assert est.right == pytest.approx(10 + 2 * math.pi, rel=1e-6)
    assert est.jump == pytest.approx(2.0, rel=1e-6)


def test_insufficient_samples():
    vs = oracle_samples("disk", 1.0, 0.3, 0.35, 0.01)
    with pytest.raises(InsufficientSamples):
        an.one_sided_derivatives(vs, 0.32)


# detection

def test_detect_dim1_exact_pair():
    a = construct_dim1(as_fraction_radii([1, Fraction(1, 2)]))
    rep = an.detect_nondiff_1d_exact(a, as_fraction_radii([1, Fraction(1, 2)]))
    assert rep.detected == [(Fraction(1, 2), 2), (1, 2)]
    assert not rep.missed and not rep.spurious


def test_detect_dim1_on_samples():
    a = construct_dim1(as_fraction_radii([1, Fraction(1, 2)]))
    vs = exact_1d_samples(a, Fraction(1, 16), Fraction(3, 2), Fraction(1, 256))
    rep = an.detect_nondiff(vs)
    assert rep.radii == pytest.approx([0.5, 1.0], abs=1e-6)
    assert [j for _, j in rep.detected] == pytest.approx([2.0, 2.0], rel=1e-6)


def test_detect_disk_empty(disk):
    _, f = disk
    vs = volume_function(f, radii_grid(0.05, 0.95, H / 2))
    assert an.detect_nondiff(vs).detected == []


def test_detect_rect_single_kink(rect):
    _, f = rect
    vs = volume_function(f, radii_grid(0.05, 1.25, H / 2))
    rep = an.detect_nondiff(vs)
    assert len(rep.detected) == 1
    r, j = rep.detected[0]
    assert r == pytest.approx(1.0, abs=2 * H)
    assert j == pytest.approx(2.0, rel=0.1)
    assert all(j > 0 for _, j in rep.detected)


def test_detect_matches_predictions(rect):
    _, f = rect
    vs = volume_function(f, radii_grid(0.05, 1.25, H / 2))
    rep = an.detect_nondiff(vs, predicted=TargetRadii.finite([1.0, 0.5]))
    assert rep.matched == [1.0]
    assert rep.missed == [0.5]
    assert rep.spurious == []


# Kneser and Stacho

def test_kneser_disk_oracle():
    vs = oracle_samples("disk", 1.0, 0.01, 2.0, 0.01)
    assert an.kneser_check(vs, 2).passed


def test_kneser_1d_exact():
    vs = exact_1d_samples(Set1D.from_points([0, 2, 3]), Fraction(1, 32), 2, Fraction(1, 32))
    rep = an.kneser_check(vs, 1)
    assert rep.passed
    assert rep.worst_violation <= 1e-12


def test_kneser_detects_dent():
    vs = oracle_samples("disk", 1.0, 0.01, 2.0, 0.01)
    V = vs.V.copy()
    V[120:130] -= 0.5
    rep = an.kneser_check(vs.with_values(V), 2)
    assert not rep.passed
    assert rep.worst_violation > 0.1


@pytest.mark.parametrize("name", ["rect", "two", "disk"])
def test_kneser_and_stacho_on_grid_samples(name, request):
    _, f = request.getfixturevalue(name)
    vs = volume_function(f, radii_grid(0.05, 0.95, H / 2))
    assert an.kneser_check(vs, 2).passed
    assert an.stacho_check(vs).passed


def test_stacho_flags_convex_kink():
    vs = oracle_samples("disk", 1.0, 0.1, 1.0, 0.005)
    V = vs.V + 2.0 * np.maximum(vs.radii - 0.5, 0.0)
    assert not an.stacho_check(vs.with_values(V)).passed


# derivative continuity

def test_continuity_disk(disk):
    _, f = disk
    vs = volume_function(f, radii_grid(0.05, 0.95, H / 2))
    assert an.derivative_continuity_check(vs, 0.5).converged


def test_continuity_rect_away_from_kink(rect):
    _, f = rect
    vs = volume_function(f, radii_grid(0.05, 1.25, H / 2))
    assert an.derivative_continuity_check(vs, 0.5).converged


def test_continuity_not_applicable_at_kink(rect):
    _, f = rect
    vs = volume_function(f, radii_grid(0.05, 1.25, H / 2))
    rep = an.derivative_continuity_check(vs, 1.0, nondiff=[1.0])
    assert not rep.applicable


# criticality

@pytest.mark.parametrize("x, want", [((0.0, 0.0), True), ((0.0, 0.5), False), ((0.3, 0.0), False)])
def test_is_critical_two_points(x, want):
    assert an.is_critical(two_points(2.0), x) is want


def test_is_critical_construction_midpoint():
    m = construct_dim2_eps(TargetRadii.finite([1.0]), gamma_policy=GammaPolicy(gamma0=0.2))
    assert an.is_critical(m.geometry, (0.1, 0.0))
    assert not an.is_critical(m.geometry, (0.1, 0.3))


def test_scan_two_points(two):
    g, f = two
    cv = an.scan_critical_values(g, f)
    assert cv.contains_value(1.0, H)
    assert cv.values[0] == pytest.approx(1.0, abs=H)
    assert cv.values == pytest.approx([1.0], abs=H)


def test_scan_disk_empty(disk):
    g, f = disk
    assert an.scan_critical_values(g, f).values == []


def test_scan_rect(rect):
    g, f = rect
    cv = an.scan_critical_values(g, f)
    assert cv.contains_value(1.0, H)
    assert all(abs(v - 1.0) <= 2 * H for v in cv.values)


def test_characterize_examples(rect, two, disk):
    g, f = two
    rep = an.characterize_differentiability(g, f, 1.0)
    assert rep.verdict == "differentiable"
    g, f = rect
    rep = an.characterize_differentiability(g, f, 1.0)
    assert rep.verdict == "non-differentiable"
    assert rep.critical_weight == pytest.approx(1.0, rel=0.1)
    assert rep.counts["critical"] <= rep.counts["multi"]
    g, f = disk
    for r in (0.3, 0.8):
        rep = an.characterize_differentiability(g, f, r)
        assert rep.verdict == "differentiable"
        assert rep.critical_weight == 0.0 and rep.non_unp_weight == 0.0


def test_detected_radii_are_critical_values(rect):
    g, f = rect
    vs = volume_function(f, radii_grid(0.05, 1.25, H / 2))
    cv = an.scan_critical_values(g, f)
    for r in an.detect_nondiff(vs).radii:
        assert cv.contains_value(r, H)


def test_verdicts_agree_on_audit_radii(rect):
    g, f = rect
    vs = volume_function(f, radii_grid(0.05, 1.25, H / 2))
    rep = an.detect_nondiff(vs)
    radii = [0.2, 0.4, 0.6, 0.8, 1.0, 1.1, 1.2]
    agree = 0
    for r in radii:
        crit = an.characterize_differentiability(g, f, r, nondiff=rep)
        agree += crit.detect_agrees is True
    assert agree / len(radii) >= 0.95


# flat distance and weak convergence

def _circle_cloud(radius, n=4000, scale=1.0):
    t = (np.arange(n) + 0.5) * 2 * math.pi / n
    pts = np.column_stack([radius * np.cos(t), radius * np.sin(t)])
    return SurfaceCloud(pts, np.full(n, scale * 2 * math.pi * radius / n), radius, radius)


def test_flat_distance_identity_and_mass():
    c = _circle_cloud(1.0)
    assert an.flat_distance(c, c, 0.04) == 0.0
    d = an.flat_distance(_circle_cloud(1.0, scale=2.0), c, 0.04)
    assert d >= 2 * math.pi - 1e-9


def test_flat_distance_circles_shrink():
    base = _circle_cloud(1.0)
    d = [an.flat_distance(_circle_cloud(1.0 + e), base, 0.04) for e in (0.1, 0.05, 0.025, 0.0125)]
    assert d[0] <= 2 * math.pi * 1.1
    assert all(b < a for a, b in zip(d, d[1:]))


def test_flat_distance_empty():
    empty = SurfaceCloud(np.zeros((0, 2)), np.zeros(0), 1.0, 1.0)
    with pytest.raises(EmptyCloud):
        an.flat_distance(empty, _circle_cloud(1.0), 0.04)


def test_weak_convergence_disk(disk):
    _, f = disk
    rep = an.weak_convergence_report(f, 0.5)
    assert rep.verdict and rep.differentiable


@pytest.fixture(scope="module")
def construction_one():
    m = construct_dim2_eps(TargetRadii.finite([1.0]), gamma_policy=GammaPolicy(gamma0=0.2))
    return m, distance_field(m.geometry, H, 1.15)


def test_weak_convergence_construction(construction_one):
    m, f = construction_one
    assert an.weak_convergence_report(f, 0.7, nondiff=[1.0]).verdict
    rep = an.weak_convergence_report(f, 1.0, nondiff=[1.0])
    assert not rep.differentiable
    jump = m.predicted_jumps[1.0]
    assert all(gap >= 0.5 * jump for _, gap in rep.one_sided_gaps)


def test_schedule_rejected(construction_one):
    _, f = construction_one
    with pytest.raises(ScheduleRejected):
        an.weak_convergence_report(f, 0.98, delta=0.1, nondiff=[1.0])


def test_continuity_fails_across_oracle_kink():
    vs = oracle_samples("rect_boundary", 1.0, 0.5, 1.5, 0.002)
    rep = an.derivative_continuity_check(vs, 1.0 + 0.0, delta=0.128)
    assert rep.applicable and not rep.converged
