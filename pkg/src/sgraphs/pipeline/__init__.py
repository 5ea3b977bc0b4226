from __future__ import annotations

from .evaluation import align_rigid, associate, compute_ate, compute_map_rmse
from .export import export_outputs, graph_extras
from .keyframes import KeyframePolicy
from .runner import RunState, evaluate, process_keyframe, run_dataset, run_slam

__all__ = [
    "KeyframePolicy",
    "RunState",
    "align_rigid",
    "associate",
    "compute_ate",
    "compute_map_rmse",
    "evaluate",
    "export_outputs",
    "graph_extras",
    "process_keyframe",
    "run_dataset",
    "run_slam",
]
