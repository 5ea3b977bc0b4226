from __future__ import annotations

import json
import logging
from pathlib import Path

from ..errors import IoError
from ..graph import dumps_graph
from ..io import write_text_atomic, write_tum, write_xyz
from ..models import RunReport
from .runner import RunState

logger = logging.getLogger(__name__)

EST_FILE = "est.tum"
MAP_FILE = "map.xyz"
GRAPH_FILE = "sgraph.json"
REPORT_FILE = "report.json"
TIMING_FILE = "timing.json"


def graph_extras(state: RunState) -> dict:
    """Free-space clusters and layer counts stored next to the graph."""
    clusters = [
        {
            "floor_id": floor_id,
            "cluster": k,
            "vertices": len(c),
            "centroid": [float(v) for v in c.centroid],
        }
        for floor_id, found in sorted(state.clusters.items())
        for k, c in enumerate(found)
    ]
    return {"layers": state.counts().model_dump(), "clusters": clusters}


def export_outputs(state: RunState, report: RunReport, out_dir: str | Path) -> dict[str, Path]:
    """Write every run artifact into ``out_dir``; all but ``timing.json`` are deterministic."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {out}: {exc}") from exc

    paths = {
        "est": write_tum(out / EST_FILE, state.estimated_trajectory()),
        "map": write_xyz(out / MAP_FILE, state.map_cloud()),
        "graph": write_text_atomic(out / GRAPH_FILE, dumps_graph(state.graph, graph_extras(state))),
        "report": write_text_atomic(out / REPORT_FILE, report.model_dump_json(indent=2) + "\n"),
        "timing": write_text_atomic(out / TIMING_FILE, json.dumps(report.timing_dump(), indent=2) + "\n"),
    }
    logger.info("wrote run outputs to %s", out)
    return paths
