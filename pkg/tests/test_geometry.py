import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anisotl.errors import CapacityError, InvalidInput
from anisotl.geometry import (
    Ball, Box, ConvexPolygon, DyadicCube, Parallelotope, cube_indices, cube_meets_region, cube_of_point,
    cubes_meeting_region, parse_region,
)
from anisotl.geometry import polygons
from anisotl.geometry.montecarlo import integrate_box, integrate_mc
from anisotl.geometry.overlay import overlay_cells_1d, overlay_cells_2d, union_area
from anisotl.matrices import ExpansiveMatrix, Matrix
from conftest import FROZEN, diag, rot2, swap2

F = Fraction


def as_keys(ks):
    return sorted(tuple(k) for k in ks)


def test_cube_of_point_examples():
    assert cube_of_point(diag(2, 2), 1, (3.5, 0.2)) == (1, 0)
    assert cube_of_point(diag(2, 2), 0, (-0.5, 0)) == (-1, 0)
    assert list(cube_of_point(rot2(), 1, (1.0, 1.0))) == FROZEN["cube_of_point_rot"]


def test_cube_of_point_exact_on_boundaries():
    assert cube_of_point(diag(2, 2), 1, (F(2), F(-2))) == (1, -1)


def test_cubes_meeting_region_box_examples():
    A = diag(2, 2)
    # closed cubes [2k, 2k+2] touching [0,3]^2 from the left count too
    assert len(cubes_meeting_region(A, 1, Box((F(0), F(0)), (F(3), F(3))), closed=True)) == 9
    assert cubes_meeting_region(A, 1, Box((F(0), F(0)), (F(3), F(3))), closed=False) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    unit = Box((F(0), F(0)), (F(1), F(1)))
    assert as_keys(cubes_meeting_region(A, -1, unit, closed=True)) == as_keys(FROZEN["cubes_unit_square_closed"])
    assert as_keys(cubes_meeting_region(A, -1, unit, closed=False)) == as_keys(FROZEN["cubes_unit_square_halfopen"])


def test_exact_and_float_paths_agree():
    unit = Box((F(0), F(0)), (F(1), F(1)))
    for A in (diag(2, 2), swap2(), ExpansiveMatrix([[1, 1], [-1, 1]])):
        for j in (-2, -1, 0, 1):
            for closed in (True, False):
                exact = cubes_meeting_region(A, j, unit, closed=closed, exact=True)
                flt = cubes_meeting_region(A, j, unit, closed=closed, exact=False)
                assert exact == flt, (A, j, closed)


def test_ball_under_rotation_matches_raster():
    got = cubes_meeting_region(rot2(), 1, Ball((1.0, 1.0), 0.1))
    assert as_keys(got) == as_keys(FROZEN["cubes_ball_rot"])


def test_region_errors():
    with pytest.raises(InvalidInput):
        cubes_meeting_region(diag(2, 2), 0, Box((0, 0, 0), (1, 1, 1)))
    with pytest.raises(CapacityError):
        cubes_meeting_region(diag(2, 2), -12, Box((F(0), F(0)), (F(10), F(10))), max_candidates=1000)


def test_parse_region():
    b = parse_region("box:0,0,3,3")
    assert b.lo == (0, 0) and b.hi == (3, 3)
    ball = parse_region("ball:1,1,1/10")
    assert ball.radius == F(1, 10)
    with pytest.raises(InvalidInput):
        parse_region("disc:1,2")


def test_overlay_examples():
    sq = lambda x, y: [(F(x), F(y)), (F(x + 1), F(y)), (F(x + 1), F(y + 1)), (F(x), F(y + 1))]
    half = [(F(1, 2), F(0)), (F(3, 2), F(0)), (F(3, 2), F(1)), (F(1, 2), F(1))]
    cells = overlay_cells_2d([sq(0, 0), half])
    assert [(sorted(c.mask), c.area) for c in cells] == [([0], F(1, 2)), ([0, 1], F(1, 2)), ([1], F(1, 2))]
    cells = overlay_cells_2d([sq(0, 0), sq(0, 0)])
    assert [(sorted(c.mask), c.area) for c in cells] == [([0, 1], 1)]
    cells = overlay_cells_2d([sq(0, 0), sq(3, 0)])
    assert sorted(c.area for c in cells) == [1, 1]


def test_overlay_general_path_on_parallelograms():
    A = ExpansiveMatrix([[1, 1], [-1, 1]])
    polys = [DyadicCube(A, 0, (0, 0)).polygon(), DyadicCube(diag(2, 2), 0, (0, 0)).polygon()]
    cells = overlay_cells_2d(polys)
    inter = polygons.intersection_area(polys[0], polys[1])
    both = [c for c in cells if c.mask == frozenset({0, 1})]
    assert both and both[0].area == inter


def test_overlay_1d():
    cells = overlay_cells_1d([(0, 2), (1, 3)])
    assert [(sorted(c.mask), c.area) for c in cells] == [([0], 1), ([0, 1], 1), ([1], 1)]


def _random_parallelogram(rng):
    M = Matrix([[F(int(v)) for v in rng.integers(-3, 4, 2)] for _ in range(2)])
    if M.det() == 0:
        M = Matrix([[1, 0], [0, 1]])
    off = tuple(F(int(v), 2) for v in rng.integers(-4, 5, 2))
    return Parallelotope(M, off).polygon()


@pytest.mark.parametrize("seed", range(15))
def test_overlay_conservation(seed):
    rng = np.random.default_rng(seed)
    polys = [_random_parallelogram(rng) for _ in range(2 + seed % 2)]
    cells = overlay_cells_2d(polys)
    # inclusion-exclusion on exact intersections
    from itertools import combinations
    total = F(0)
    for r in range(1, len(polys) + 1):
        for combo in combinations(polys, r):
            inter = combo[0]
            for P in combo[1:]:
                inter = polygons.clip_convex(inter, P)
                if len(inter) < 3:
                    break
            a = polygons.area(inter) if len(inter) >= 3 else 0
            total += (-1) ** (r + 1) * a
    assert abs(float(union_area(cells)) - float(total)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 2), (2, -2), (3, 2)]), st.integers(-3, 3), st.integers(0, 10**6))
def test_partition_half_open(dg, j, seed):
    A = diag(*dg)
    rng = np.random.default_rng(seed)
    X = rng.uniform(-20, 20, (250, 2))
    K = cube_indices(A, j, X)
    Y = X @ A.power(-j).array.T - K
    assert np.all((Y >= 0) & (Y < 1))
    # no other half-open cube at scale j contains the point: neighbours fail the test
    for shift in ((1, 0), (0, 1), (-1, 0), (0, -1)):
        Z = Y - np.array(shift)
        assert not np.any(np.all((Z >= 0) & (Z < 1), axis=1))


def test_partition_rotation():
    A = rot2()
    X = np.random.default_rng(1).uniform(-5, 5, (10_000, 2))
    for j in (-2, 0, 2):
        K = cube_indices(A, j, X)
        Y = X @ A.power(-j).array.T - K
        assert np.all((Y >= -1e-12) & (Y < 1 + 1e-12))


@pytest.mark.parametrize("A", [diag(2, 2), diag(2, -2), swap2(), rot2(), ExpansiveMatrix([[1, 1], [-1, 1]])])
def test_volume_law(A):
    det = float(A.abs_det)
    for j in range(-4, 5):
        assert float(DyadicCube(A, j, (1, -2)).volume()) == pytest.approx(det ** j, rel=1e-9)


def test_mc_examples():
    est, se = integrate_box(lambda X: np.ones(len(X)), [0, 0], [1, 1], 100_000, 0)
    assert abs(est - 1) <= 3 * se + 1e-12
    est, se = integrate_mc(lambda X: np.ones(len(X)), Ball((0.0, 0.0), 1.0), 10**6, 0)
    assert abs(est - math.pi) <= 3 * se


def test_mc_matches_overlay_stack():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    sh = [(0.5, 0), (1.5, 0), (1.5, 1), (0.5, 1)]
    cells = overlay_cells_2d([sq, sh])
    exact = sum(float(c.area) * len(c.mask) ** 0.5 for c in cells)

    def f(X):
        a = ((X[:, 0] >= 0) & (X[:, 0] < 1)).astype(float)
        b = ((X[:, 0] >= 0.5) & (X[:, 0] < 1.5)).astype(float)
        return np.sqrt(a + b)

    est, se = integrate_box(f, [0, 0], [1.5, 1], 10**6, 0)
    assert abs(est - exact) <= 3 * se


def test_mc_threads_bit_identical():
    f = lambda X: np.sin(X[:, 0]) ** 2 + X[:, 1]
    one = integrate_box(f, [0, 0], [2, 1], 300_000, 7, workers=1)
    four = integrate_box(f, [0, 0], [2, 1], 300_000, 7, workers=4)
    assert (one.estimate, one.stderr) == (four.estimate, four.stderr)


def test_mc_rejects_degenerate():
    with pytest.raises(InvalidInput):
        integrate_box(lambda X: X[:, 0], [0, 0], [0, 1], 1000, 0)
