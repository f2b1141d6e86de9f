import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from parvol.errors import DegenerateFit
from parvol.fractal_strings import (
    FractalString,
    TargetRadii,
    box_counting_dimension,
    cantor_closed_form,
    cantor_endpoints_family,
    cantor_gallery,
    cantor_intervals,
    cantor_string,
    check_dim2_conditions,
    fractal_string_of,
    gap_sum,
    integral_condition,
    inverse_square_family,
    rearranged_family,
    tail_gap_sum,
)
from parvol.geometry import Set1D

radii_sets = st.lists(st.floats(0.01, 1.0), min_size=1, max_size=12, unique=True).map(TargetRadii.finite)


@pytest.mark.parametrize("a, want", [
    (Set1D.from_points([0, 2, 3]), (2, 1)),
    (Set1D(intervals=((0, 1),)), ()),
    (Set1D(points=(3,), intervals=((0, 1), (5, 6))), (2, 2)),
])
def test_fractal_string_of(a, want):
    assert fractal_string_of(a).lengths == want


def test_fractal_string_invariants():
    with pytest.raises(ValueError):
        FractalString((1.0, 2.0))
    with pytest.raises(ValueError):
        FractalString((1.0, 0.0))


def test_gap_sum_examples():
    assert gap_sum(FractalString((2, 1)), 1) == 3
    assert gap_sum(cantor_string(1 / 9), 0.5) == pytest.approx(math.sqrt(7), rel=1e-12)
    assert gap_sum(cantor_string(1 / 3), 0.5) == math.inf


@pytest.mark.parametrize("q", [1 / 9, 1 / 16, 1 / 25])
def test_cantor_closed_form_matches_level_sum(q):
    # closed form (1 - 2q)^a / (1 - 2 q^a) against a direct sum over 60 levels
    direct = math.fsum((2 ** k) * ((1 - 2 * q) * q ** k) ** 0.5 for k in range(400))
    assert cantor_closed_form(q, 0.5) == pytest.approx(direct, rel=1e-12)
    assert gap_sum(cantor_string(q, 14), 0.5) == pytest.approx(direct, rel=1e-6)


def test_closed_form_divergent_range():
    assert cantor_closed_form(0.25, 0.5) == math.inf
    assert cantor_closed_form(0.3, 0.5) == math.inf


def test_explicit_cantor_sums_increase_towards_closed_form():
    q = 1 / 9
    sums = [gap_sum(fractal_string_of(Set1D(intervals=tuple(cantor_intervals(q, k)))), 0.5) for k in range(1, 8)]
    assert all(b > a for a, b in zip(sums, sums[1:]))
    # after k levels the remainder is sqrt(7) * (2 sqrt(q))^k
    for k, s in enumerate(sums, start=1):
        assert s == pytest.approx(math.sqrt(7) * (1 - (2 / 3) ** k), rel=1e-12)


@pytest.mark.parametrize("r, want", [(0.3, math.sqrt(0.5)), (0.2, 0.5 + math.sqrt(0.5)), (1.5, 0.0)])
def test_tail_gap_sum(r, want):
    n = TargetRadii.finite([1.0, 0.5, 0.25])
    assert tail_gap_sum(n, r) == pytest.approx(want)


def test_tail_gap_sum_singleton():
    assert tail_gap_sum(TargetRadii.finite([1.0]), 0.5) == 0.0


def test_integral_condition_finite_pair():
    # integrand sqrt(1/2) * sqrt(r) on (0, 1/2], so the value is 1/6
    ic = integral_condition(TargetRadii.finite([1.0, 0.5]))
    assert ic.verdict == "finite"
    quad, _ = integrate.quad(lambda r: math.sqrt(0.5) * math.sqrt(r), 0, 0.5)
    assert ic.value == pytest.approx(quad, rel=1e-9)
    assert ic.value == pytest.approx(1 / 6, rel=1e-12)


@given(radii_sets)
def test_integral_matches_quadrature(n):
    pts = sorted(float(v) for v in n.values)

    def G(r):
        k = [p for p in pts if p >= r]
        return math.fsum(math.sqrt(b - a) for a, b in zip(k, k[1:]))

    quad = math.fsum(integrate.quad(lambda r: G(r) * math.sqrt(r), lo, hi)[0]
                     for lo, hi in zip([0.0] + pts, pts))
    assert integral_condition(n).value == pytest.approx(quad, rel=1e-9, abs=1e-15)


@given(radii_sets, st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_tail_gap_sum_non_increasing(n, r1, r2):
    lo, hi = sorted((r1, r2))
    assert tail_gap_sum(n, hi) <= tail_gap_sum(n, lo) + 1e-12


@given(st.lists(st.floats(0.001, 5.0), min_size=1, max_size=20), st.floats(0.1, 10.0), st.floats(0.1, 2.0))
def test_gap_sum_scaling(lengths, c, alpha):
    fs = FractalString(tuple(sorted(lengths, reverse=True)))
    assert gap_sum(fs.scaled(c), alpha) == pytest.approx(c ** alpha * gap_sum(fs, alpha), rel=1e-12)


def test_gallery_integral_verdicts():
    assert integral_condition(rearranged_family(0.3).truncate()).verdict == "finite"
    assert integral_condition(cantor_endpoints_family(0.3).truncate()).verdict == "infinite"


def test_conditions_examples():
    inv = inverse_square_family(1.0).truncate(8)
    assert check_dim2_conditions(inv, eps=1.0).verdict_i
    rep = check_dim2_conditions(cantor_endpoints_family(1 / 3).truncate())
    assert not rep.verdict_i and not rep.verdict_ii
    fin = TargetRadii.finite([0.7, 0.4, 0.2])
    assert check_dim2_conditions(fin, eps=0.2).verdict_i


def test_condition_report_invariants():
    for n in (TargetRadii.finite([1.0, 0.5]), rearranged_family(0.3).truncate(), inverse_square_family().truncate(6)):
        rep = check_dim2_conditions(n, eps=float(n.closure().min()))
        if rep.verdict_i:
            assert math.isfinite(rep.gap_sum_half) and rep.lebesgue_null
        if rep.verdict_ii:
            assert math.isfinite(rep.integral_value) and rep.lebesgue_null


def test_gallery_level_counts_and_dimension():
    gal = cantor_gallery(1 / 3, 6)
    assert gal.level_counts() == [1, 2, 4, 8, 16, 32]
    assert cantor_gallery(0.25, 4).minkowski_dimension == pytest.approx(0.5)
    assert gal.closed_form_gap_sum(1.0) == pytest.approx(1.0)


def test_gallery_sets():
    gal = cantor_gallery(1 / 3, 3)
    assert len(gal.F.intervals) == 8
    assert len(gal.E.values) + len(gal.E.closure_extra) >= 2 ** 3 - 1
    assert max(gal.E_prime.values) == 1.0


def test_rearranged_family_leading_values():
    q = 0.3
    vals = sorted(rearranged_family(q).truncate(3).values, reverse=True)
    assert vals[:4] == pytest.approx([1.0, 2 * q, 2 * q * q + q, 4 * q * q])


def test_rearranged_family_small_q_stays_positive():
    n = rearranged_family(0.04).truncate(14)
    assert min(n.values) > 0


@pytest.mark.parametrize("a, want", [
    (Set1D(intervals=((0.0, 1.0),)), 1.0),
    (Set1D(intervals=tuple(cantor_intervals(0.25, 12))), 0.5),
    (Set1D.from_points([0.0, 0.3, 0.9]), 0.0),
])
def test_box_counting_dimension(a, want):
    scales = np.logspace(-1, -3.2, 8)
    assert box_counting_dimension(a, scales) == pytest.approx(want, abs=0.05)


def test_box_counting_needs_two_decades():
    with pytest.raises(ValueError):
        box_counting_dimension(Set1D(intervals=((0.0, 1.0),)), [0.1, 0.05, 0.03, 0.02])


def test_target_radii_invariants():
    with pytest.raises(ValueError):
        TargetRadii((0.5, 1.0))
    with pytest.raises(ValueError):
        TargetRadii((1.0, -0.5))
    assert TargetRadii.finite([Fraction(1, 2), Fraction(1)]).values == (1, Fraction(1, 2))
