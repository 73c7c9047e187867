"""Hash-grid neighbor search: exactness against brute force, edge cases."""

import numpy as np
import pytest

from frmc.errors import UsageError, ValidationError
from frmc.matcher import _neighbor_cells, build_index, query_ball


def brute(points, center, radius):
    diff = points - center
    return np.where((diff * diff).sum(axis=1) <= radius * radius)[0]


class TestExactness:
    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_matches_brute_force(self, dim):
        rng = np.random.default_rng(100 + dim)
        points = rng.normal(size=(500, dim))
        radius = 0.4
        index = build_index(points, radius)
        for _ in range(50):
            center = rng.normal(size=dim)
            fast = query_ball(index, center, radius)
            assert np.array_equal(fast, brute(points, center, radius))

    def test_boundary_points_included(self):
        points = np.array([[0.0], [1.0], [2.0]])
        index = build_index(points, 1.0)
        # closed ball: the point at exactly radius distance is in
        assert np.array_equal(query_ball(index, [1.0], 1.0), [0, 1, 2])

    def test_results_sorted(self):
        rng = np.random.default_rng(3)
        points = rng.uniform(size=(300, 2))
        index = build_index(points, 0.3)
        res = query_ball(index, [0.5, 0.5], 0.3)
        assert np.all(np.diff(res) > 0)


class TestEdgeCases:
    def test_empty_index(self):
        index = build_index(np.empty((0, 2)), 0.5)
        assert query_ball(index, [0.0, 0.0], 0.5).size == 0

    def test_all_points_identical(self):
        points = np.tile([1.0, 2.0], (17, 1))
        index = build_index(points, 0.25)
        assert len(index.cells) == 1
        assert np.array_equal(query_ball(index, [1.0, 2.0], 0.25), np.arange(17))

    def test_occupied_cell_bound(self):
        rng = np.random.default_rng(8)
        points = rng.uniform(size=(1000, 2))
        index = build_index(points, 0.05)
        assert len(index.cells) <= 441  # (ceil(1/0.05) + 1)^2

    def test_every_point_in_exactly_one_cell(self):
        rng = np.random.default_rng(9)
        points = rng.normal(size=(200, 3))
        index = build_index(points, 0.7)
        seen = np.concatenate(list(index.cells.values()))
        assert np.array_equal(np.sort(seen), np.arange(200))

    def test_far_query_is_empty(self):
        index = build_index(np.zeros((5, 2)), 0.1)
        assert query_ball(index, [50.0, 50.0], 0.1).size == 0


class TestValidation:
    def test_nonfinite_point_named(self):
        points = np.zeros((4, 2))
        points[2, 1] = np.nan
        with pytest.raises(ValidationError, match="index 2"):
            build_index(points, 0.5)

    def test_radius_mismatch_is_usage_error(self):
        index = build_index(np.zeros((3, 2)), 0.5)
        with pytest.raises(UsageError):
            query_ball(index, [0.0, 0.0], 0.4)

    def test_bad_radius(self):
        with pytest.raises(ValidationError):
            build_index(np.zeros((3, 2)), 0.0)

    def test_neighbor_enumeration_is_3_to_the_d(self):
        for d in (1, 2, 3, 4):
            assert len(list(_neighbor_cells((0,) * d))) == 3**d


class TestPairCountScaling:
    def test_matched_pairs_scale_like_n2_eps_d(self):
        # standard-normal clouds in 2-d with eps = N^-0.4: the aggregate
        # candidate count divided by N^2 eps^2 stays flat in N
        ratios = []
        for exp in range(8, 13):
            n = 2**exp
            rng = np.random.default_rng(exp)
            fwd = rng.normal(size=(n, 2))
            rev = rng.normal(size=(n, 2))
            eps = n**-0.4
            radius = 3.1842984196123303 * eps
            index = build_index(fwd, radius)
            total = sum(query_ball(index, c, radius).size for c in rev)
            ratios.append(total / (n * n * eps * eps))
        mid = np.mean(ratios)
        assert all(0.5 * mid < r < 1.5 * mid for r in ratios)
