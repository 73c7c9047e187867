"""Composite grids and the reflected reverse clock."""

import numpy as np
import pytest

from frmc.errors import ValidationError
from frmc.grids import make_grid, reverse_times, uniform_grid


class TestMakeGrid:
    def test_uniform_example(self):
        grid = uniform_grid(10, 1)
        assert grid.n_pre == 1 and grid.n_post == 9
        assert grid.t_star == pytest.approx(0.1)
        assert grid.horizon == 1.0

    def test_minimal_grid(self):
        grid = make_grid([0.0, 0.5], [0.5, 1.0])
        assert grid.n_pre == grid.n_post == 1

    def test_two_three_segments(self):
        grid = make_grid([0.0, 0.2, 0.4], [0.4, 0.6, 0.8, 1.0])
        assert (grid.n_pre, grid.n_post) == (2, 3)
        assert grid.t_star == 0.4

    def test_monotonicity_error_names_index(self):
        with pytest.raises(ValidationError, match="index 2"):
            make_grid([0.0, 0.3, 0.2], [0.2, 1.0])

    def test_matching_time_mismatch(self):
        with pytest.raises(ValidationError, match="matching-time"):
            make_grid([0.0, 0.4], [0.5, 1.0])

    def test_too_short_legs(self):
        with pytest.raises(ValidationError):
            make_grid([0.5], [0.5, 1.0])
        with pytest.raises(ValidationError):
            make_grid([0.0, 0.5], [0.5])

    def test_equality_semantics(self):
        a = make_grid([0.0, 0.5], [0.5, 1.0])
        b = make_grid([0.0, 0.5], [0.5, 1.0])
        c = make_grid([0.0, 0.4], [0.4, 1.0])
        assert a == b and a != c


class TestReverseTimes:
    def test_hand_computed_example(self):
        grid = make_grid([0.0, 0.4], [0.4, 0.6, 0.8, 1.0])
        assert np.allclose(reverse_times(grid), [0.2, 0.4, 0.6], atol=1e-12)

    def test_equidistant_leg_is_translation(self):
        grid = uniform_grid(10, 4)
        shifted = grid.post_times[1:] - grid.t_star
        assert np.allclose(reverse_times(grid), shifted, atol=1e-12)

    def test_single_step(self):
        grid = make_grid([0.0, 0.25], [0.25, 1.0])
        assert np.allclose(reverse_times(grid), [0.75])

    def test_strictly_increasing_ending_at_gap(self):
        grid = make_grid([0.0, 0.1, 0.3], [0.3, 0.55, 0.7, 1.0])
        rt = reverse_times(grid)
        assert np.all(np.diff(rt) > 0)
        assert rt[-1] == pytest.approx(grid.horizon - grid.t_star)
