"""Sparse free-space graph over the ESDF lattice and its split into room clusters."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ..config import FreeSpaceConfig
from .grid import CellState, EsdfGrid

logger = logging.getLogger(__name__)


@dataclass
class FreeSpaceGraph:
    positions: np.ndarray
    clearance: np.ndarray
    cells: np.ndarray
    edges: np.ndarray
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.positions):
            self.labels = component_labels(len(self.positions), self.edges)

    @classmethod
    def empty(cls) -> FreeSpaceGraph:
        return cls(np.zeros((0, 2)), np.zeros(0), np.zeros((0, 2), dtype=int), np.zeros((0, 2), dtype=int))

    @property
    def num_vertices(self) -> int:
        return len(self.positions)

    @property
    def num_components(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0


@dataclass
class Cluster:
    vertex_ids: np.ndarray
    positions: np.ndarray
    clearance: np.ndarray

    @property
    def centroid(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    def __len__(self) -> int:
        return len(self.vertex_ids)


def component_labels(n: int, edges: np.ndarray) -> np.ndarray:
    if n == 0:
        return np.zeros(0, dtype=int)
    edges = np.asarray(edges, dtype=int).reshape(-1, 2)
    adj = sp.coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    return labels.astype(int)


def _segment_free(free: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """For axis-aligned cell pairs, whether every cell from a to b is free."""
    ok = np.ones(len(a), dtype=bool)
    steps = int(np.max(np.abs(b - a))) if len(a) else 0
    for k in range(1, steps):
        rc = a + (b - a) * k // steps
        ok &= free[rc[:, 0], rc[:, 1]]
    return ok


def build_free_space_graph(esdf: EsdfGrid, cfg: FreeSpaceConfig | None = None) -> FreeSpaceGraph:
    """Vertices on every ``stride``-th free cell with enough clearance; 4-neighbour lattice edges."""
    cfg = cfg or FreeSpaceConfig()
    grid = esdf.grid
    free = grid.cells == CellState.FREE
    rows = np.arange(0, grid.height, cfg.stride)
    cols = np.arange(0, grid.width, cfg.stride)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    lattice = np.stack([rr.ravel(), cc.ravel()], axis=1)
    keep = free[lattice[:, 0], lattice[:, 1]] & (esdf.at(lattice) >= cfg.min_clearance)
    cells = lattice[keep]
    if len(cells) == 0:
        return FreeSpaceGraph.empty()

    index = -np.ones((len(rows), len(cols)), dtype=int)
    index[cells[:, 0] // cfg.stride, cells[:, 1] // cfg.stride] = np.arange(len(cells))
    edges = []
    for dr, dc in ((0, 1), (1, 0)):
        src = index[: len(rows) - dr, : len(cols) - dc]
        dst = index[dr:, dc:]
        both = (src >= 0) & (dst >= 0)
        pairs = np.stack([src[both], dst[both]], axis=1)
        ok = _segment_free(free, cells[pairs[:, 0]], cells[pairs[:, 1]])
        edges.append(pairs[ok])
    edge_arr = np.vstack(edges) if edges else np.zeros((0, 2), dtype=int)

    g = FreeSpaceGraph(grid.cell_center(cells), esdf.at(cells), cells, edge_arr)
    logger.debug("free-space graph: %d vertices, %d edges", g.num_vertices, len(edge_arr))
    return g


def split_clusters(g: FreeSpaceGraph, cfg: FreeSpaceConfig | None = None) -> list[Cluster]:
    """Drop low-clearance vertices and return the large connected components.

    Clusters are ordered by their smallest vertex id.
    """
    cfg = cfg or FreeSpaceConfig()
    if g.num_vertices == 0:
        return []
    keep = g.clearance >= cfg.disconnect_clearance
    kept_ids = np.flatnonzero(keep)
    remap = -np.ones(g.num_vertices, dtype=int)
    remap[kept_ids] = np.arange(len(kept_ids))
    edges = g.edges[keep[g.edges[:, 0]] & keep[g.edges[:, 1]]] if len(g.edges) else g.edges
    labels = component_labels(len(kept_ids), remap[edges])

    clusters: list[Cluster] = []
    for label in range(int(labels.max()) + 1 if len(labels) else 0):
        members = kept_ids[labels == label]
        if len(members) >= cfg.min_cluster_size:
            clusters.append(Cluster(members, g.positions[members], g.clearance[members]))
    clusters.sort(key=lambda c: int(c.vertex_ids[0]))
    return clusters
