from __future__ import annotations

from .debug import dump_graph_json, dump_pgm
from .graph import Cluster, FreeSpaceGraph, build_free_space_graph, component_labels, split_clusters
from .grid import CellState, EsdfGrid, OccupancyGrid, compute_esdf, rasterize_map

__all__ = [
    "CellState",
    "Cluster",
    "EsdfGrid",
    "FreeSpaceGraph",
    "OccupancyGrid",
    "build_free_space_graph",
    "component_labels",
    "compute_esdf",
    "dump_graph_json",
    "dump_pgm",
    "rasterize_map",
    "split_clusters",
]
