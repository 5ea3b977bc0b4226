"""2D occupancy and distance grids for one floor slice of the map."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.ndimage import distance_transform_edt

from ..config import FreeSpaceConfig
from ..errors import EmptyInput


class CellState(IntEnum):
    FREE = 0
    OCCUPIED = 1
    UNKNOWN = 2


@dataclass
class OccupancyGrid:
    """``cells[row, col]``: row indexes y, col indexes x; ``origin`` is the lower-left corner."""

    origin: np.ndarray
    resolution: float
    cells: np.ndarray

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        self.origin = np.asarray(self.origin, dtype=float).reshape(2)

    @property
    def height(self) -> int:
        return int(self.cells.shape[0])

    @property
    def width(self) -> int:
        return int(self.cells.shape[1])

    @classmethod
    def empty(cls, origin, resolution: float, width: int, height: int) -> OccupancyGrid:
        return cls(origin, resolution, np.full((height, width), CellState.UNKNOWN, dtype=np.uint8))

    def to_cell(self, xy: np.ndarray) -> np.ndarray:
        """(row, col) indices for 2D world points; may be out of bounds."""
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        col = np.floor((xy[:, 0] - self.origin[0]) / self.resolution).astype(int)
        row = np.floor((xy[:, 1] - self.origin[1]) / self.resolution).astype(int)
        return np.stack([row, col], axis=1)

    def cell_center(self, rc: np.ndarray) -> np.ndarray:
        rc = np.asarray(rc).reshape(-1, 2)
        x = self.origin[0] + (rc[:, 1] + 0.5) * self.resolution
        y = self.origin[1] + (rc[:, 0] + 0.5) * self.resolution
        return np.stack([x, y], axis=1)

    def in_bounds(self, rc: np.ndarray) -> np.ndarray:
        rc = np.asarray(rc).reshape(-1, 2)
        return (rc[:, 0] >= 0) & (rc[:, 0] < self.height) & (rc[:, 1] >= 0) & (rc[:, 1] < self.width)

    def count(self, state: CellState) -> int:
        return int(np.count_nonzero(self.cells == state))


@dataclass
class EsdfGrid:
    grid: OccupancyGrid
    distance: np.ndarray

    @property
    def resolution(self) -> float:
        return self.grid.resolution

    def at(self, rc: np.ndarray) -> np.ndarray:
        rc = np.asarray(rc).reshape(-1, 2)
        return self.distance[rc[:, 0], rc[:, 1]]


def _ray_cells(grid: OccupancyGrid, start: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Cells crossed by segments from ``start`` to each end, end cells excluded."""
    if len(ends) == 0:
        return np.zeros((0, 2), dtype=int)
    step = grid.resolution / 4.0
    lengths = np.linalg.norm(ends - start, axis=1)
    n = np.maximum(np.ceil(lengths / step).astype(int), 1)
    ray = np.repeat(np.arange(len(ends)), n)
    offsets = np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n)
    t = offsets / np.repeat(n, n)
    samples = start + t[:, None] * (ends[ray] - start)
    cells = grid.to_cell(samples)
    end_cells = grid.to_cell(ends)[ray]
    keep = np.any(cells != end_cells, axis=1) & grid.in_bounds(cells)
    return cells[keep]


def rasterize_map(
    map_points: Sequence[np.ndarray] | np.ndarray,
    keyframe_positions: np.ndarray,
    cfg: FreeSpaceConfig | None = None,
    *,
    base_z: float = 0.0,
) -> OccupancyGrid:
    """Occupancy grid of the ``[z_low, z_high]`` slice above ``base_z``.

    ``map_points`` holds one map-frame cloud per keyframe, aligned with
    ``keyframe_positions``; a bare ``(n, 3)`` array is accepted for a single
    keyframe. Slice points mark their cell occupied; the cells crossed by the
    ray from the keyframe to each slice point are free unless occupied.
    """
    cfg = cfg or FreeSpaceConfig()
    positions = np.atleast_2d(np.asarray(keyframe_positions, dtype=float))
    if isinstance(map_points, np.ndarray):
        if len(positions) != 1:
            raise ValueError("pass one point array per keyframe")
        clouds = [map_points]
    else:
        clouds = list(map_points)
    if not clouds or positions.size == 0:
        raise EmptyInput("no keyframes to rasterize")
    if len(clouds) != len(positions):
        raise ValueError("map_points and keyframe_positions differ in length")

    z_lo, z_hi = base_z + cfg.z_low, base_z + cfg.z_high
    sliced = []
    for cloud in clouds:
        pts = np.asarray(cloud, dtype=float).reshape(-1, 3)
        sliced.append(pts[(pts[:, 2] >= z_lo) & (pts[:, 2] <= z_hi), :2])
    if not any(len(s) for s in sliced):
        raise EmptyInput("no map points inside the height slice")

    everything = np.vstack([np.vstack(sliced), positions[:, :2]])
    res = cfg.resolution
    lo = np.floor((everything.min(axis=0) - cfg.margin) / res) * res
    hi = everything.max(axis=0) + cfg.margin
    width, height = (int(v) for v in np.ceil((hi - lo) / res))
    grid = OccupancyGrid.empty(lo, res, width, height)

    occupied = grid.to_cell(np.vstack(sliced))
    for pos, pts in zip(positions, sliced):
        # one ray per distinct end cell
        _, first = np.unique(grid.to_cell(pts), axis=0, return_index=True)
        free = _ray_cells(grid, pos[:2], pts[np.sort(first)])
        grid.cells[free[:, 0], free[:, 1]] = CellState.FREE
    grid.cells[occupied[:, 0], occupied[:, 1]] = CellState.OCCUPIED
    return grid


def compute_esdf(grid: OccupancyGrid) -> EsdfGrid:
    """Unsigned distance to the nearest non-free cell; unknown counts as occupied."""
    free = grid.cells == CellState.FREE
    if np.all(free):
        return EsdfGrid(grid, np.full(free.shape, np.inf))
    return EsdfGrid(grid, distance_transform_edt(free, sampling=grid.resolution))
