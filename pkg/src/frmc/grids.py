"""Composite time grids: a forward leg up to the matching time and a
second leg from the matching time to the horizon.

The forward process is simulated on pre_times = [s_0, ..., s_K] with
s_K = t*; the reverse process covers post_times = [t_0, ..., t_L] with
t_0 = t* and t_L = T, sampled on the reflected clock returned by
`reverse_times`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class TimeGrid:
    pre_times: np.ndarray
    post_times: np.ndarray

    @property
    def n_pre(self) -> int:
        """Number of segments before the matching time (K)."""
        return len(self.pre_times) - 1

    @property
    def n_post(self) -> int:
        """Number of segments after the matching time (L)."""
        return len(self.post_times) - 1

    @property
    def t_star(self) -> float:
        return float(self.pre_times[-1])

    @property
    def horizon(self) -> float:
        return float(self.post_times[-1])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TimeGrid)
            and np.array_equal(self.pre_times, other.pre_times)
            and np.array_equal(self.post_times, other.post_times)
        )


def _check_increasing(times: np.ndarray, label: str) -> None:
    diffs = np.diff(times)
    bad = np.where(diffs <= 0)[0]
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            f"{label} not strictly increasing at index {i + 1}: "
            f"{times[i]!r} -> {times[i + 1]!r}"
        )


def make_grid(pre_times, post_times) -> TimeGrid:
    """Validate and freeze a composite grid.

    Both legs need at least one segment, must be strictly increasing, and
    must share the matching time exactly (pre_times[-1] == post_times[0]).
    """
    pre = np.asarray(pre_times, dtype=float)
    post = np.asarray(post_times, dtype=float)
    if pre.ndim != 1 or len(pre) < 2:
        raise ValidationError("pre_times needs at least two entries (K >= 1)")
    if post.ndim != 1 or len(post) < 2:
        raise ValidationError("post_times needs at least two entries (L >= 1)")
    _check_increasing(pre, "pre_times")
    _check_increasing(post, "post_times")
    if pre[-1] != post[0]:
        raise ValidationError(
            f"matching-time mismatch: pre_times[-1]={pre[-1]!r} != "
            f"post_times[0]={post[0]!r}"
        )
    return TimeGrid(pre_times=pre, post_times=post)


def uniform_grid(segments: int, n_pre: int, horizon: float = 1.0) -> TimeGrid:
    """Uniform grid with `segments` total steps, the first n_pre before t*."""
    if segments < 2 or not (1 <= n_pre <= segments - 1):
        raise ValidationError("need segments >= 2 and 1 <= n_pre <= segments - 1")
    full = np.linspace(0.0, float(horizon), segments + 1)
    return make_grid(full[: n_pre + 1], full[n_pre:])


def reverse_times(grid: TimeGrid) -> np.ndarray:
    """Recording times of the reverse clock: T - t_{L-i}, i = 1..L.

    Strictly increasing; the last entry is T - t*. For an equidistant
    second leg this is the leg translated by -t*.
    """
    post = grid.post_times
    return post[-1] - post[-2::-1]
