"""Geometry tests: deployments, tessellation, areas, nearest-AP queries."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavail import (
    BoundingBox,
    Deployment,
    Point2D,
    generate_deployment,
    nearest_ap,
    shoelace_area,
    voronoi_tessellate,
)
from wavail.geometry import read_deployment_points, write_deployment_csv

from conftest import (
    fan_triangulation_area,
    polygon_contains,
    random_convex_polygon,
    voronoi_cells_by_clipping,
)


class TestPoint2D:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Point2D(float("nan"), 0.0)

    def test_rejects_infinity(self):
        with pytest.raises(ValueError):
            Point2D(0.0, float("inf"))

    def test_distance(self):
        assert Point2D(0, 0).distance_to(Point2D(3, 4)) == 5.0


class TestBoundingBox:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            BoundingBox(0.0, 10.0)
        with pytest.raises(ValueError):
            BoundingBox(10.0, -1.0)

    def test_area_and_corners(self, unit_box):
        assert unit_box.area == 100.0
        assert unit_box.corners().shape == (4, 2)


class TestGenerateDeployment:
    def test_single_point_inside(self, unit_box):
        dep = generate_deployment(1, unit_box, seed=42)
        p = dep.aps[0]
        assert 0.0 <= p.x <= 10.0 and 0.0 <= p.y <= 10.0

    def test_ten_aps_inside(self, unit_box):
        dep = generate_deployment(10, unit_box, eta=4.0, seed=7)
        assert dep.n == 10
        assert all(unit_box.contains(p.x, p.y) for p in dep.aps)

    def test_same_seed_identical(self, unit_box):
        a = generate_deployment(10, unit_box, seed=123)
        b = generate_deployment(10, unit_box, seed=123)
        assert a.coords.tolist() == b.coords.tolist()

    def test_different_seed_differs(self, unit_box):
        a = generate_deployment(10, unit_box, seed=1)
        b = generate_deployment(10, unit_box, seed=2)
        assert a.coords.tolist() != b.coords.tolist()

    def test_zero_aps_rejected(self, unit_box):
        with pytest.raises(ValueError):
            generate_deployment(0, unit_box, seed=0)

    def test_points_distinct(self, unit_box):
        dep = generate_deployment(200, unit_box, seed=3)
        assert len({(p.x, p.y) for p in dep.aps}) == 200


class TestDeploymentValidation:
    def test_duplicate_aps_rejected(self, unit_box):
        with pytest.raises(ValueError):
            Deployment(aps=(Point2D(1, 1), Point2D(1, 1)), box=unit_box, eta=4.0)

    def test_outside_box_rejected(self, unit_box):
        with pytest.raises(ValueError):
            Deployment(aps=(Point2D(11, 1),), box=unit_box, eta=4.0)

    def test_eta_must_exceed_two(self, unit_box):
        with pytest.raises(ValueError):
            Deployment(aps=(Point2D(1, 1),), box=unit_box, eta=2.0)


class TestShoelaceArea:
    def test_unit_square(self):
        assert shoelace_area([(0, 0), (1, 0), (1, 1), (0, 1)]) == 1.0

    def test_triangle(self):
        assert shoelace_area([(0, 0), (4, 0), (0, 3)]) == 6.0

    def test_orientation_independent(self):
        ccw = [(0, 0), (4, 0), (0, 3)]
        assert shoelace_area(ccw) == shoelace_area(ccw[::-1])

    def test_accepts_points_and_arrays(self):
        pts = [Point2D(0, 0), Point2D(2, 0), Point2D(2, 2), Point2D(0, 2)]
        assert shoelace_area(pts) == 4.0
        assert shoelace_area(np.array([[0, 0], [2, 0], [2, 2], [0, 2]])) == 4.0

    def test_too_few_vertices(self):
        with pytest.raises(ValueError):
            shoelace_area([(0, 0), (1, 1)])

    def test_matches_fan_triangulation(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            poly = random_convex_polygon(rng, int(rng.integers(3, 12)))
            expected = fan_triangulation_area(poly)
            assert shoelace_area(poly) == pytest.approx(expected, rel=1e-12, abs=1e-14)

    @given(
        st.lists(
            st.tuples(
                st.floats(-50, 50, allow_nan=False),
                st.floats(-50, 50, allow_nan=False),
            ),
            min_size=3,
            max_size=12,
        ),
        st.integers(0, 11),
    )
    def test_invariant_under_shift_and_reversal(self, points, shift):
        arr = np.array(points)
        base = shoelace_area(arr)
        rolled = np.roll(arr, shift % len(arr), axis=0)
        assert shoelace_area(rolled) == pytest.approx(base, abs=1e-9)
        assert shoelace_area(arr[::-1]) == pytest.approx(base, abs=1e-9)


class TestVoronoiTessellate:
    def test_symmetric_pair_halves(self, symmetric_pair):
        cells = voronoi_tessellate(symmetric_pair)
        assert len(cells) == 2
        for cell, expected in zip(cells, ({(0, 0), (5, 0), (5, 10), (0, 10)},
                                          {(5, 0), (10, 0), (10, 10), (5, 10)})):
            assert cell.area == pytest.approx(50.0, abs=1e-9)
            got = {(round(p.x, 9), round(p.y, 9)) for p in cell.vertices}
            assert got == expected

    def test_single_ap_gets_whole_box(self, unit_box):
        dep = generate_deployment(1, unit_box, seed=4)
        cells = voronoi_tessellate(dep)
        assert len(cells) == 1
        assert cells[0].area == unit_box.area

    @pytest.mark.parametrize("n", [2, 5, 17, 60])
    def test_partition_of_box(self, unit_box, n):
        dep = generate_deployment(n, unit_box, seed=n)
        total = sum(c.area for c in voronoi_tessellate(dep))
        assert total == pytest.approx(unit_box.area, rel=1e-9)

    def test_cells_contain_their_ap(self, unit_box):
        dep = generate_deployment(25, unit_box, seed=9)
        for cell in voronoi_tessellate(dep):
            ap = dep.aps[cell.ap_index]
            assert polygon_contains(cell.vertex_array(), ap.x, ap.y, margin=1e-9)

    def test_cells_inside_box(self, unit_box):
        dep = generate_deployment(30, unit_box, seed=10)
        for cell in voronoi_tessellate(dep):
            arr = cell.vertex_array()
            assert (arr[:, 0] >= -1e-12).all() and (arr[:, 0] <= 10 + 1e-12).all()
            assert (arr[:, 1] >= -1e-12).all() and (arr[:, 1] <= 10 + 1e-12).all()

    def test_matches_halfplane_clipping_oracle(self, unit_box):
        for seed in (21, 22, 23):
            dep = generate_deployment(12, unit_box, seed=seed)
            oracle = voronoi_cells_by_clipping(dep.coords, unit_box)
            for cell in voronoi_tessellate(dep):
                expected = shoelace_area(oracle[cell.ap_index])
                assert cell.area == pytest.approx(expected, rel=1e-9)

    def test_degenerate_grid_deployment(self, unit_box):
        # A perfectly regular 3x3 grid: every cell is a 10/3 square.
        step = 10.0 / 3.0
        aps = tuple(
            Point2D((i + 0.5) * step, (j + 0.5) * step) for i in range(3) for j in range(3)
        )
        dep = Deployment(aps=aps, box=unit_box, eta=4.0)
        cells = voronoi_tessellate(dep)
        for cell in cells:
            assert cell.area == pytest.approx(step * step, rel=1e-9)
        assert sum(c.area for c in cells) == pytest.approx(100.0, rel=1e-9)


class TestNearestAp:
    def test_coincident_point(self, unit_box):
        dep = generate_deployment(8, unit_box, seed=5)
        for k in (0, 3, 7):
            assert nearest_ap(dep.aps[k], dep) == k

    def test_tie_breaks_to_lowest_index(self, unit_box):
        aps = (Point2D(1, 1), Point2D(4, 5), Point2D(9, 9), Point2D(6, 5))
        dep = Deployment(aps=aps, box=unit_box, eta=4.0)
        # (5, 5) is equidistant from APs 1 and 3.
        assert nearest_ap(Point2D(5, 5), dep) == 1

    def test_matches_linear_scan(self, unit_box):
        dep = generate_deployment(15, unit_box, seed=6)
        rng = np.random.default_rng(0)
        for _ in range(200):
            z = Point2D(*rng.uniform(0, 10, 2))
            dists = [z.distance_to(p) for p in dep.aps]
            assert nearest_ap(z, dep) == int(np.argmin(dists))

    def test_consistent_with_cells(self, unit_box):
        dep = generate_deployment(10, unit_box, seed=12)
        cells = voronoi_tessellate(dep)
        rng = np.random.default_rng(1)
        checked = 0
        for _ in range(2000):
            x, y = rng.uniform(0, 10, 2)
            owners = [
                c.ap_index
                for c in cells
                if polygon_contains(c.vertex_array(), x, y, margin=-1e-9)
            ]
            if len(owners) != 1:
                continue  # probe too close to a cell boundary
            assert nearest_ap(Point2D(x, y), dep) == owners[0]
            checked += 1
        assert checked > 1500


class TestDeploymentCsv:
    def test_round_trip(self, unit_box, tmp_path):
        dep = generate_deployment(12, unit_box, seed=99)
        path = tmp_path / "deployment.csv"
        write_deployment_csv(dep, path)
        text = path.read_text()
        assert text.startswith("ap_index,x,y\n")
        points = read_deployment_points(path)
        assert len(points) == 12
        for original, restored in zip(dep.aps, points):
            assert restored.x == pytest.approx(original.x, abs=1e-12)
            assert restored.y == pytest.approx(original.y, abs=1e-12)
