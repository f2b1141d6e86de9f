import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parvol.constructions import GammaPolicy, construct_dim2_eps
from parvol.engine import (
    Grid,
    VolumeSamples,
    complement,
    distance_field,
    distance_transform,
    exact_volume_oracle,
    extract_level_set,
    half_plane,
    local_measure,
    lower_directions,
    project,
    radii_grid,
    rasterize_membership,
    upper_directions,
    volume_function,
)
from parvol.engine.grid import rasterize_boundary
from parvol.engine.volume import (
    kinks_1d_exact,
    lens_area,
    rect_boundary_volume,
    square_cut_fraction,
    volume_1d_exact,
    volume_1d_sweep,
)
from parvol.errors import EmptySet, GridTooLarge, RadiusOutOfBand, UnknownKind, UnsupportedShape
from parvol.fractal_strings import TargetRadii
from parvol.geometry import Box, Disk, Set1D, exact_distance, rect_boundary, two_points

from oracles import clip_polygon, monte_carlo_area, polygon_area, union_length

H = 0.01


@pytest.fixture(scope="module")
def disk_field():
    return distance_field(Disk(0.0, 0.0, 1.0), H, 1.0)


@pytest.fixture(scope="module")
def rect_field():
    return distance_field(rect_boundary(1.0), H, 1.3)


@pytest.fixture(scope="module")
def two_field():
    return distance_field(two_points(2.0), H, 1.3)


# rasterization and transforms

def test_disk_raster_area():
    g = Disk(0.0, 0.0, 1.0)
    grid = Grid.covering(Box(-1.2, 1.2, -1.2, 1.2), H)
    assert rasterize_membership(g, grid).sum() * H * H == pytest.approx(math.pi, abs=0.05)


def test_raster_of_far_box_is_empty():
    grid = Grid.covering(Box(5.0, 6.0, 5.0, 6.0), H)
    assert not rasterize_membership(Disk(0.0, 0.0, 1.0), grid).any()


def test_rect_boundary_raster_is_thin():
    grid = Grid.covering(Box(-0.5, 3.5, -0.5, 2.5), H)
    bits = rasterize_membership(rect_boundary(1.0), grid)
    perimeter = 10.0
    assert 0 < bits.sum() <= 2 * perimeter / H


def test_single_cell_transform_is_radial():
    grid = Grid.covering(Box(0.0, 1.0, 0.0, 1.0), 0.1)
    bits = np.zeros(grid.shape, dtype=bool)
    bits[3, 4] = True
    f = distance_transform(bits, grid)
    X, Y = np.meshgrid(grid.xs, grid.ys)
    assert np.allclose(f.values, np.hypot(X - grid.xs[4], Y - grid.ys[3]), atol=1e-12)


def test_empty_bitmap():
    grid = Grid.covering(Box(0.0, 1.0, 0.0, 1.0), 0.1)
    with pytest.raises(EmptySet):
        distance_transform(np.zeros(grid.shape, dtype=bool), grid)


def test_edt_disk_within_h_of_exact():
    g = Disk(0.0, 0.0, 1.0)
    f = distance_field(g, H, 0.5, method="edt")
    rng = np.random.default_rng(0)
    j = rng.integers(0, f.grid.ny, 10_000)
    i = rng.integers(0, f.grid.nx, 10_000)
    ref = np.array([exact_distance(g, (f.grid.xs[a], f.grid.ys[b])) for a, b in zip(i, j)])
    assert np.abs(f.values[j, i] - ref).max() <= H


def test_two_points_field_is_min_of_radial(two_field):
    X, Y = np.meshgrid(two_field.grid.xs, two_field.grid.ys)
    ref = np.minimum(np.hypot(X + 1, Y), np.hypot(X - 1, Y))
    assert np.allclose(two_field.values, ref, atol=1e-12)


@pytest.mark.parametrize("name", ["disk_field", "rect_field", "two_field"])
def test_field_is_discrete_lipschitz(name, request):
    assert request.getfixturevalue(name).lipschitz_violation() == 0.0


def test_field_zero_on_set(disk_field):
    X, Y = np.meshgrid(disk_field.grid.xs, disk_field.grid.ys)
    assert np.array_equal(disk_field.values == 0, np.hypot(X, Y) <= 1.0)


def test_grid_budget(monkeypatch):
    monkeypatch.setenv("PARVOL_MAX_CELLS", "1000")
    with pytest.raises(GridTooLarge):
        distance_field(Disk(0.0, 0.0, 1.0), H, 0.5)


def test_set1d_has_no_grid_field():
    with pytest.raises(UnsupportedShape):
        distance_field(Set1D.from_points([0, 1]), 0.1, 1.0)


def test_boundary_raster_marks_thin_sets():
    grid = Grid.covering(Box(-1.0, 4.0, -1.0, 3.0), H)
    assert rasterize_boundary(rect_boundary(1.0), grid).sum() >= 10.0 / H


def test_field_save_round_trip(tmp_path, disk_field):
    path = tmp_path / "f.npz"
    disk_field.save(str(path))
    data = np.load(path)
    g = disk_field.grid
    assert list(data["header"][:5]) == [g.h, g.i0, g.j0, g.nx, g.ny]
    assert np.array_equal(data["values"], disk_field.values)


# volumes

def test_disk_volume_within_err(disk_field):
    vs = volume_function(disk_field, radii_grid(0.05, 0.95, 0.05))
    exact = np.pi * (1 + vs.radii) ** 2
    assert np.all(np.abs(vs.V - exact) <= vs.err)


@pytest.mark.parametrize("estimator", ["count", "fractional", "cutcell"])
def test_rect_boundary_volume_within_err(rect_field, estimator):
    vs = volume_function(rect_field, radii_grid(0.05, 1.25, 0.05), estimator=estimator)
    exact = np.array([rect_boundary_volume(1.0, r) for r in vs.radii])
    assert np.all(np.abs(vs.V - exact) <= vs.err)


def test_two_points_volume_within_err(two_field):
    vs = volume_function(two_field, radii_grid(0.05, 1.25, 0.05))
    exact = np.array([exact_volume_oracle("two_points", 2.0, r) for r in vs.radii])
    assert np.all(np.abs(vs.V - exact) <= vs.err)


def test_set1d_exact_volumes():
    vs = volume_function(Set1D.from_points([0, 2, 3]), [0.25, 0.75, 2.0])
    assert list(vs.V) == [1.5, 4.0, 7.0]
    assert vs.source == "exact-oracle"


@pytest.mark.parametrize("kind, params, r, want", [
    ("rect_boundary", 1.0, 1.0, 16 + math.pi),
    ("two_points", 2.0, 1.0, 2 * math.pi),
    ("interval_union_1d", [0, 2, 3], 0.5, 3.0),
    ("disk", 1.0, 0.5, math.pi * 2.25),
])
def test_oracle_examples(kind, params, r, want):
    assert exact_volume_oracle(kind, params, r) == pytest.approx(want, rel=1e-14)


def test_rect_oracle_closed_form_below_one():
    for r in (0.1, 0.5, 0.9):
        want = 6 - (3 - 2 * r) * (2 - 2 * r) + 10 * r + math.pi * r * r
        assert rect_boundary_volume(1.0, r) == pytest.approx(want)
    assert rect_boundary_volume(1.0, 1.4) == pytest.approx(6 + 14 + math.pi * 1.96)


def test_unknown_oracle_kind():
    with pytest.raises(UnknownKind):
        exact_volume_oracle("torus", 1.0, 0.5)


@pytest.mark.parametrize("r", [0.3, 0.8, 1.0, 1.3])
def test_two_point_oracle_against_monte_carlo(r):
    mc, se = monte_carlo_area(lambda X, Y: (np.hypot(X + 1, Y) < r) | (np.hypot(X - 1, Y) < r),
                              (-1 - r, 1 + r, -r, r))
    assert exact_volume_oracle("two_points", 2.0, r) == pytest.approx(mc, abs=5 * se)


def test_lens_area_zero_when_apart():
    assert lens_area(0.9, 2.0) == 0.0
    assert lens_area(1.0, 0.0) == pytest.approx(math.pi)


def test_radius_out_of_band(disk_field):
    with pytest.raises(RadiusOutOfBand):
        volume_function(disk_field, [0.001])
    with pytest.raises(RadiusOutOfBand):
        volume_function(disk_field, [1.5])


def test_radii_grid_is_integer_multiples():
    r = radii_grid(0.05, 1.5, 0.001)
    assert r[0] == pytest.approx(0.05)
    assert 1.0 in r and 0.5 in r


def test_volume_samples_validation():
    with pytest.raises(ValueError):
        VolumeSamples([0.2, 0.1], [1.0, 2.0], 0.0, "grid")
    vs = VolumeSamples([0.1, 0.2, 0.3], [1.0, 0.5, 2.0], [0.1, 0.1, 0.1], "grid")
    assert vs.monotone_violation() == pytest.approx(0.3)


@pytest.mark.parametrize("name", ["disk_field", "rect_field", "two_field"])
def test_grid_volumes_are_monotone(name, request):
    f = request.getfixturevalue(name)
    vs = volume_function(f, radii_grid(0.05, 1.0, H / 2))
    assert vs.monotone_violation() == 0.0


def test_kinks_1d():
    assert kinks_1d_exact(Set1D.from_points([0, 2, 3])) == [0.5, 1.0]


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=15, unique=True), st.floats(0.001, 3.0))
def test_1d_volume_matches_interval_union(pts, r):
    a = Set1D.from_points(pts)
    want = union_length([(p - r, p + r) for p in pts])
    assert volume_1d_exact(a, r) == pytest.approx(want, rel=1e-12, abs=1e-12)
    assert volume_1d_sweep(a, r) == pytest.approx(want, rel=1e-12, abs=1e-12)


@given(st.floats(-1.0, 1.0), st.floats(0.0, 2 * math.pi))
def test_square_cut_fraction_matches_polygon_clip(t, theta):
    ux, uy = math.cos(theta), math.sin(theta)
    a, b = max(abs(ux), abs(uy)), min(abs(ux), abs(uy))
    square = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
    want = polygon_area(clip_polygon(square, ux, uy, t))
    got = float(square_cut_fraction(np.array(t), np.array(a), np.array(b)))
    assert got == pytest.approx(want, abs=1e-12)


# level sets

def test_disk_level_set_length(disk_field):
    c = extract_level_set(disk_field, 0.5)
    assert c.mass == pytest.approx(2 * math.pi * 1.5, rel=0.02)
    d = np.hypot(c.points[:, 0], c.points[:, 1]) - 1.0
    assert np.abs(d - 0.5).max() <= H
    assert np.all(c.weights > 0)


def test_rect_level_set_length(rect_field):
    c = extract_level_set(rect_field, 0.25)
    assert c.mass == pytest.approx((10 + 2 * math.pi * 0.25) + (10 - 8 * 0.25), rel=0.02)


def test_level_set_band(disk_field):
    with pytest.raises(RadiusOutOfBand):
        extract_level_set(disk_field, H)


@pytest.mark.parametrize("name, r", [("disk_field", 0.5), ("rect_field", 0.4), ("two_field", 0.6)])
def test_surface_matches_volume_derivative(name, r, request):
    f = request.getfixturevalue(name)
    vs = volume_function(f, [r - 0.02, r + 0.02])
    slope = (vs.V[1] - vs.V[0]) / 0.04
    assert extract_level_set(f, r).mass == pytest.approx(slope, rel=0.05)


# projections

def test_project_examples():
    rec = project(two_points(2.0), (0.0, 0.0))
    assert rec.multiplicity == 2
    assert sorted(rec.directions) == [(-1.0, 0.0), (1.0, 0.0)]
    rec = project(Disk(0.0, 0.0, 1.0), (2.0, 0.0))
    assert rec.multiplicity == 1 and rec.nearest[0] == pytest.approx((1.0, 0.0))


def test_project_construction_midpoint():
    m = construct_dim2_eps(TargetRadii.finite([1.0]), gamma_policy=GammaPolicy(gamma0=0.2))
    x = 0.1
    rec = project(m.geometry, (x, 0.0))
    assert rec.multiplicity == 2
    feet = sorted(rec.nearest, key=lambda p: p[1])
    assert [tuple(p) for p in np.round(feet, 12)] == [(x, -1.0), (x, 1.0)]


def test_project_point_of_set():
    rec = project(Disk(0.0, 0.0, 1.0), (0.2, 0.1))
    assert rec.distance == 0.0 and rec.nearest == ((0.2, 0.1),)


@given(st.floats(-1.0, 4.0), st.floats(-1.0, 3.0))
def test_projection_distance_exact(x, y):
    g = rect_boundary(1.0)
    rec = project(g, (x, y))
    d = exact_distance(g, (x, y))
    for fx, fy in rec.nearest:
        assert math.hypot(x - fx, y - fy) == pytest.approx(d, abs=1e-12)


# local measures

def test_local_whole_plane_equals_volume(rect_field):
    everything = lambda fx, fy, ux, uy: np.ones_like(fx, dtype=bool)  # noqa: E731
    assert local_measure(rect_field, 0.7, everything) == pytest.approx(volume_function(rect_field, [0.7]).V[0])


def test_local_half_of_two_points(two_field):
    left = half_plane(-1.0, 0.0, 0.0)
    vs = volume_function(two_field, [0.5])
    assert local_measure(two_field, 0.5, left) == pytest.approx(math.pi * 0.25, abs=vs.err[0])


def test_local_upper_directions_of_disk(disk_field):
    r = 0.6
    vs = volume_function(disk_field, [r])
    want = math.pi + (math.pi * (1 + r) ** 2 - math.pi) / 2
    up = local_measure(disk_field, r, upper_directions)
    # points of the disk itself carry the zero direction, which counts as lower
    lo = local_measure(disk_field, r, lower_directions)
    assert up + lo == pytest.approx(vs.V[0], rel=1e-12)
    assert up == pytest.approx(want - math.pi, abs=vs.err[0])


@pytest.mark.parametrize("angle, c", [(0.3, 0.5), (2.0, 1.0), (4.0, -0.2)])
def test_local_additivity(rect_field, angle, c):
    B = half_plane(math.cos(angle), math.sin(angle), c)
    vs = volume_function(rect_field, [0.8])
    total = local_measure(rect_field, 0.8, B) + local_measure(rect_field, 0.8, complement(B))
    assert abs(total - vs.V[0]) <= 2 * vs.err[0]


def test_surface_partition(rect_field):
    up = local_measure(rect_field, 0.5, upper_directions, mode="surface").mass
    lo = local_measure(rect_field, 0.5, lower_directions, mode="surface").mass
    assert up + lo == pytest.approx(extract_level_set(rect_field, 0.5).mass, rel=1e-12)
