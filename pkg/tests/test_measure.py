import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpverify.geometry import BallConfiguration, GeometryError, RadiusFamily
from kpverify.measure import (
    arc_polygon_area,
    ball_halfspace_measure,
    ball_volume,
    cell_areas_2d,
    clip_disk_by_halfplanes,
    union_area_2d,
    union_length_1d,
    wall_length_2d,
    wall_length_s_derivative_2d,
    wall_measure_exact,
)
from kpverify.power import wall

from . import oracles

LENS_UNION = 2 * math.pi - (2 * math.pi / 3 - math.sqrt(3) / 2)
CLIPPED_AT_HALF = math.pi - (math.pi / 3 - math.sqrt(3) / 4)


def fam(centers, radii, s=0.0):
    return RadiusFamily(BallConfiguration.from_lists(centers, radii), s)


def random_family(rng, n, d=2, spread=2.0):
    return RadiusFamily(BallConfiguration(rng.uniform(0, spread, (n, d)), rng.uniform(0.2, 0.9, n)))


def test_ball_volume():
    assert ball_volume(2, 1.0) == pytest.approx(math.pi, rel=1e-15)
    assert ball_volume(3, 1.0) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    assert ball_volume(1, 2.0) == pytest.approx(4.0, rel=1e-15)


def test_clip_full_and_half_disk():
    assert arc_polygon_area(clip_disk_by_halfplanes((0, 0), 1.0, [])) == pytest.approx(math.pi, abs=1e-12)
    half = clip_disk_by_halfplanes((0, 0), 1.0, [((1, 0), 0.0)])
    assert arc_polygon_area(half) == pytest.approx(math.pi / 2, abs=1e-12)
    kinds = sorted(e.kind for e in half.edges)
    assert kinds == ["arc", "segment"]


def test_clip_by_chord_matches_segment_formula_and_grid():
    region = clip_disk_by_halfplanes((0, 0), 1.0, [((1, 0), 0.5)])
    assert arc_polygon_area(region) == pytest.approx(CLIPPED_AT_HALF, abs=1e-12)
    assert oracles.disk_halfplanes_area_grid((0, 0), 1.0, [((1, 0), 0.5)], 4001) == pytest.approx(
        CLIPPED_AT_HALF, abs=2e-3
    )


def test_clip_empty_and_untouched():
    assert clip_disk_by_halfplanes((0, 0), 1.0, [((1, 0), -1.5)]).is_empty
    assert arc_polygon_area(clip_disk_by_halfplanes((0, 0), 1.0, [((1, 0), 2.0)])) == pytest.approx(math.pi)
    assert arc_polygon_area(clip_disk_by_halfplanes((0, 0), 0.0, [])) == 0.0


def test_clip_square_inside_disk():
    hs = [((1, 0), 0.5), ((-1, 0), 0.5), ((0, 1), 0.5), ((0, -1), 0.5)]
    region = clip_disk_by_halfplanes((3, -2), 2.0, [((n[0], n[1]), b + n[0] * 3 - n[1] * 2) for n, b in hs])
    assert arc_polygon_area(region) == pytest.approx(1.0, abs=1e-12)
    assert all(e.kind == "segment" for e in region.edges)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_clip_area_matches_grid_quadrature(seed, m):
    rng = np.random.default_rng(seed)
    center = rng.uniform(-1, 1, 2)
    r = rng.uniform(0.3, 1.5)
    hs = []
    for _ in range(m):
        n = rng.standard_normal(2)
        n /= np.linalg.norm(n)
        hs.append(((n[0], n[1]), float(n @ center + r * rng.uniform(-0.7, 1.2))))
    exact = arc_polygon_area(clip_disk_by_halfplanes(center, r, hs))
    grid = oracles.disk_halfplanes_area_grid(center, r, hs, 1201)
    # midpoint-grid error scales with perimeter times cell size
    assert exact == pytest.approx(grid, abs=12 * r * (2 * r / 1201))


def test_union_area_examples():
    assert union_area_2d(fam([[0, 0]], [1])) == pytest.approx(math.pi, abs=1e-12)
    assert union_area_2d(fam([[0, 0], [1, 0]], [1, 1])) == pytest.approx(LENS_UNION, abs=1e-12)
    assert union_area_2d(fam([[0, 0], [2, 0]], [1, 1])) == pytest.approx(2 * math.pi, abs=1e-12)
    assert union_area_2d(fam([[0, 0], [3, 0]], [1, 1])) == pytest.approx(2 * math.pi, abs=1e-12)
    with pytest.raises(GeometryError):
        union_area_2d(fam([[0, 0], [0, 0]], [1, 1]))


def test_union_area_matches_boundary_oracle():
    rng = np.random.default_rng(21)
    for _ in range(50):
        f = random_family(rng, int(rng.integers(1, 9)))
        exact = union_area_2d(f)
        assert exact == pytest.approx(oracles.union_area_boundary(f.centers, f.radii), abs=1e-9)


def test_union_area_nested_and_dominated():
    f = fam([[0, 0], [0.1, 0.1]], [2.0, 0.5])
    assert union_area_2d(f) == pytest.approx(4 * math.pi, abs=1e-12)
    assert cell_areas_2d(f)[1] == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_union_area_scaling(seed, lam):
    f = random_family(np.random.default_rng(seed), 5)
    g = RadiusFamily(f.config.scaled(lam))
    assert union_area_2d(g) == pytest.approx(lam**2 * union_area_2d(f), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_union_area_rigid_invariance(seed):
    rng = np.random.default_rng(seed)
    f = random_family(rng, 5)
    th = rng.uniform(0, 2 * math.pi)
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    g = RadiusFamily(BallConfiguration(f.centers @ R.T + rng.uniform(-5, 5, 2), f.config.radii))
    assert union_area_2d(g) == pytest.approx(union_area_2d(f), abs=1e-9)


def test_union_area_nondecreasing_in_s():
    f = random_family(np.random.default_rng(22), 6)
    rmin2 = float(f.config.radii.min() ** 2)
    values = [union_area_2d(f.at(s)) for s in np.linspace(-rmin2, 2.0, 40)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_union_length_1d_examples():
    assert union_length_1d(fam([[1], [2]], [1, 1])) == 3.0
    assert union_length_1d(fam([[0.5], [2.5]], [0.5, 0.5])) == 2.0
    assert union_length_1d(fam([[2], [1.5]], [2, 0.5])) == 4.0
    with pytest.raises(GeometryError):
        union_length_1d(fam([[0, 0]], [1]))


def test_wall_length_examples():
    assert wall_length_2d(fam([[0, 0], [1, 0]], [1, 1]), 0, 1) == pytest.approx(math.sqrt(3), abs=1e-14)
    assert wall_length_2d(fam([[0, 0], [5, 0]], [1, 1]), 0, 1) == 0.0


def test_wall_length_clipped_by_third_disk():
    f = fam([[0, 0], [1, 0], [0.5, 0.9]], [1, 1, 0.8])
    length = wall_length_2d(f, 0, 1)
    assert length < math.sqrt(3)
    # fine sampling of the radical line x = 0.5 against the brute-force power test
    y = np.linspace(-1, 1, 2_000_001)
    P = np.stack([np.full_like(y, 0.5), y], axis=1)
    pw = oracles.min_power_index(P, f.centers, f.config.radii)
    ok = (pw[:, 0] <= pw[:, 2]) & (pw[:, 0] <= 0)
    assert length == pytest.approx(ok.sum() * (y[1] - y[0]), abs=2e-6)


def test_wall_length_s_derivative_closed_form():
    w = wall(fam([[0, 0], [1, 0]], [1, 1]), 0, 1)
    # L(s) = 2 sqrt(3/4 + s)
    assert wall_length_s_derivative_2d(w, 0.0) == pytest.approx(2 / math.sqrt(3), rel=1e-14)
    w3 = wall(fam([[0, 0], [1, 0], [0.5, 0.9]], [1, 1, 0.8]), 0, 1)
    # one end is cut by the third ball's bisector, so only one end moves
    assert wall_length_s_derivative_2d(w3, 0.0) == pytest.approx(0.5 / w3.radius(0.0), rel=1e-14)


def test_ball_halfspace_measure_low_dims():
    assert ball_halfspace_measure(1, 1.0, [[1.0]], [0.25]) == pytest.approx(1.25)
    assert ball_halfspace_measure(1, 1.0, [[1.0], [-1.0]], [0.25, -0.5]) == 0.0
    assert ball_halfspace_measure(2, 1.0, [[1.0, 0.0]], [0.0]) == pytest.approx(math.pi / 2)
    assert ball_halfspace_measure(0, 0.0, np.zeros((0, 0)), []) == 1.0


def test_wall_measure_exact_dimension_limit():
    w = wall(fam([[0, 0, 0], [1, 0, 0]], [1, 1]), 0, 1)
    with pytest.raises(GeometryError):
        wall_measure_exact(w, 0.0)
    w1 = wall(fam([[0], [1]], [1, 1]), 0, 1)
    assert wall_measure_exact(w1, 0.0) == 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_wall_length_nondecreasing_in_s_without_condition(seed):
    # no interaction-count filter: in the plane a clipped chord can only grow with s
    rng = np.random.default_rng(seed)
    f = random_family(rng, int(rng.integers(2, 9)))
    rmin2 = float(f.config.radii.min() ** 2)
    for s in np.linspace(-rmin2 / 2, 1.0, 6):
        for i in range(f.n):
            for j in range(i + 1, f.n):
                w = wall(f, i, j)
                assert wall_length_s_derivative_2d(w, s) >= 0.0
                assert wall_measure_exact(w, s + 0.01) >= wall_measure_exact(w, s) - 1e-12
