"""Fixed-radius neighbor search on a uniform hash grid.

Cell size equals the query radius, so any closed ball of that radius is
covered by the 3^d cells around the query's cell. Build is O(N), queries
are O(1) expected; one index serves exactly one radius (rebuild to
change). Results are exact (closed Euclidean ball) and returned sorted by
point index for deterministic downstream summation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Tuple

import numpy as np

from .errors import UsageError, ValidationError


@dataclass(frozen=True)
class SpatialIndex:
    points: np.ndarray  # (N, dim)
    cell_size: float
    cells: Dict[Tuple[int, ...], np.ndarray]

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _cell_coords(points: np.ndarray, cell_size: float) -> np.ndarray:
    return np.floor(points / cell_size).astype(np.int64)


def build_index(points, radius: float) -> SpatialIndex:
    """Hash all points into cells of side `radius`."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2:
        raise ValidationError("points must be a (N, dim) array")
    if not radius > 0:
        raise ValidationError("radius must be positive")
    finite = np.isfinite(points).all(axis=1)
    if not finite.all():
        raise ValidationError(
            f"non-finite point at index {int(np.where(~finite)[0][0])}"
        )
    cells: Dict[Tuple[int, ...], np.ndarray] = {}
    if points.size:
        coords = _cell_coords(points, radius)
        order = np.lexsort(coords.T[::-1])
        sorted_coords = coords[order]
        boundaries = np.nonzero((np.diff(sorted_coords, axis=0) != 0).any(axis=1))[0] + 1
        for chunk in np.split(order, boundaries):
            chunk = np.sort(chunk)
            cells[tuple(coords[chunk[0]])] = chunk
    return SpatialIndex(points=points, cell_size=float(radius), cells=cells)


def _neighbor_cells(center_cell: Tuple[int, ...]):
    """The 3^d cells a radius-sized ball around the center can touch."""
    return (
        tuple(c + o for c, o in zip(center_cell, offsets))
        for offsets in product((-1, 0, 1), repeat=len(center_cell))
    )


def query_ball(index: SpatialIndex, center, radius: float) -> np.ndarray:
    """Indices of points with |p - center| <= radius, ascending.

    The radius must equal the index's cell size; scanning more than the
    adjacent cells would otherwise be needed.
    """
    if radius != index.cell_size:
        raise UsageError(
            f"query radius {radius!r} does not match index cell size "
            f"{index.cell_size!r}; rebuild the index"
        )
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape != (index.dim,):
        raise ValidationError(f"center must have shape ({index.dim},)")
    if not index.cells:
        return np.empty(0, dtype=np.int64)
    home = tuple(np.floor(center / index.cell_size).astype(np.int64))
    buckets = [index.cells[c] for c in _neighbor_cells(home) if c in index.cells]
    if not buckets:
        return np.empty(0, dtype=np.int64)
    cand = np.concatenate(buckets)
    diff = index.points[cand] - center
    hit = (diff * diff).sum(axis=1) <= radius * radius
    return np.sort(cand[hit])
