from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..io.files import write_text_atomic
from ..io.pgm import write_pgm
from .graph import Cluster, FreeSpaceGraph
from .grid import CellState, EsdfGrid, OccupancyGrid

_SHADES = {CellState.FREE: 255, CellState.OCCUPIED: 0, CellState.UNKNOWN: 128}


def dump_pgm(layer: OccupancyGrid | EsdfGrid, path: str | Path) -> Path:
    """Grey-level image: occupancy as free/unknown/occupied, ESDF scaled to its finite maximum."""
    if isinstance(layer, OccupancyGrid):
        image = np.zeros(layer.cells.shape)
        for state, shade in _SHADES.items():
            image[layer.cells == state] = shade
        return write_pgm(path, image)
    dist = np.where(np.isfinite(layer.distance), layer.distance, 0.0)
    top = float(dist.max()) or 1.0
    return write_pgm(path, dist / top * 255.0)


def graph_to_dict(g: FreeSpaceGraph, clusters: list[Cluster] | None = None) -> dict:
    out: dict = {
        "vertices": [
            {"id": i, "position": g.positions[i].tolist(), "clearance": float(g.clearance[i])}
            for i in range(g.num_vertices)
        ],
        "edges": g.edges.tolist(),
    }
    if clusters is not None:
        out["clusters"] = [
            {"vertices": c.vertex_ids.tolist(), "centroid": c.centroid.tolist()} for c in clusters
        ]
    return out


def dump_graph_json(g: FreeSpaceGraph, path: str | Path, clusters: list[Cluster] | None = None) -> Path:
    return write_text_atomic(path, json.dumps(graph_to_dict(g, clusters), indent=1) + "\n")
