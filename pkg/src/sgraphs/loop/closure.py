from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import Executor
from dataclasses import dataclass

import numpy as np

from ..config import PipelineConfig
from ..errors import ScanMatchError, UnknownKeyframe
from ..geometry import Pose
from ..graph import FactorGraph, FactorId, KeyframeVar, LoopFactor, VariableId, VarKind
from ..graph.information import odometry_information
from .icp import IcpResult, PlanarTarget, register

logger = logging.getLogger(__name__)


@dataclass
class LoopCandidate:
    query: VariableId
    match: VariableId
    relative: Pose
    fitness: float
    overlap: float = 0.0


def _keyframe(graph: FactorGraph, vid: VariableId) -> KeyframeVar:
    kf = graph.variables.get(vid)
    if not isinstance(kf, KeyframeVar):
        raise UnknownKeyframe(f"no keyframe {vid}")
    return kf


def find_candidates(graph: FactorGraph, query_id: VariableId, cfg: PipelineConfig | None = None) -> list[VariableId]:
    """Older keyframes on the same floor within the search radius, nearest first."""
    cfg = cfg or PipelineConfig()
    lc = cfg.loop
    with graph.lock:
        query = _keyframe(graph, query_id)
        found: list[tuple[float, int, VariableId]] = []
        for vid, var in graph.items_of_kind(VarKind.KEYFRAME):
            assert isinstance(var, KeyframeVar)
            if abs(query_id.index - vid.index) < lc.min_index_gap or var.floor_id != query.floor_id:
                continue
            dist = float(np.linalg.norm(var.pose.translation - query.pose.translation))
            if dist <= lc.search_radius:
                found.append((dist, vid.index, vid))
    found.sort()
    return [vid for _, _, vid in found[: lc.max_candidates]]


def _match_one(job: tuple[np.ndarray, np.ndarray, Pose, PipelineConfig]) -> IcpResult | None:
    source, target, init, cfg = job
    try:
        planar = PlanarTarget.build(target, cfg.loop.normal_neighbors, cfg.loop.max_surface_variation)
        return register(source, planar, init, cfg.loop)
    except ScanMatchError as exc:
        logger.debug("scan match rejected: %s", exc)
        return None


def try_close_loop(
    graph: FactorGraph,
    query_id: VariableId,
    cfg: PipelineConfig | None = None,
    *,
    executor: Executor | None = None,
) -> FactorId | None:
    """Scan-match the query keyframe against its candidates and add at most one loop factor.

    Candidates are matched in parallel when ``executor`` is given; acceptance
    follows candidate order either way.
    """
    cfg = cfg or PipelineConfig()
    candidates = find_candidates(graph, query_id, cfg)
    if not candidates:
        return None

    with graph.lock:
        query = _keyframe(graph, query_id)
        if query.cloud is None:
            return None
        jobs = []
        for cid in candidates:
            match = _keyframe(graph, cid)
            if match.cloud is None:
                continue
            jobs.append((cid, (query.cloud, match.cloud, match.pose.between(query.pose), cfg)))

    inputs = [job for _, job in jobs]
    results: Sequence[IcpResult | None] = list(executor.map(_match_one, inputs)) if executor else [
        _match_one(job) for job in inputs
    ]

    matched = [
        LoopCandidate(query_id, cid, r.pose, r.fitness, r.overlap)
        for (cid, _), r in zip(jobs, results)
        if r is not None
    ]
    for cand in matched:
        if cand.fitness > cfg.loop.fitness_accept or cand.overlap < cfg.loop.min_overlap_ratio:
            logger.debug("loop %s-%s rejected: fitness %.4f overlap %.2f", cand.match, query_id, cand.fitness, cand.overlap)
            continue
        info = odometry_information(cfg.information)
        fid = graph.add_factor(LoopFactor(cand.match, query_id, cand.relative, info, fitness=cand.fitness))
        logger.info("loop closed %s -> %s (fitness %.4f)", cand.match, query_id, cand.fitness)
        return fid
    return None


def icp_odometry(
    clouds: Sequence[np.ndarray],
    increments: Sequence[Pose] | None = None,
    cfg: PipelineConfig | None = None,
) -> list[Pose]:
    """Frame-to-frame ICP trajectory starting at identity.

    ``increments`` seed each match and replace it when matching fails.
    """
    cfg = cfg or PipelineConfig()
    poses = [Pose.identity()] if len(clouds) else []
    for i in range(1, len(clouds)):
        seed = increments[i - 1] if increments is not None else Pose.identity()
        result = _match_one((clouds[i], clouds[i - 1], seed, cfg))
        if result is None or result.fitness > cfg.loop.fitness_accept:
            logger.warning("ICP odometry failed at frame %d; using the dataset increment", i)
            step = seed
        else:
            step = result.pose
        poses.append(poses[-1] @ step)
    return poses
