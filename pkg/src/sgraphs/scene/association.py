"""Room data association, in-place infinite-to-finite upgrade and duplicate-wall merging."""
from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np

from ..config import PipelineConfig
from ..errors import UnknownVariable
from ..graph import (
    FactorGraph,
    FloorVar,
    PlaneVar,
    RoomPlanePairFactor,
    RoomPriorFactor,
    RoomVar,
    VariableId,
    VarKind,
)
from .rooms import AXIS_NAMES, RoomCandidate

logger = logging.getLogger(__name__)


def _pair_factor(room: VariableId, pair: tuple[VariableId, VariableId], axis: str, cfg: PipelineConfig):
    return RoomPlanePairFactor(room, pair[0], pair[1], axis, np.eye(1) * cfg.information.room_pair)


def _prior_factor(room: VariableId, axis: str, centroid: np.ndarray, cfg: PipelineConfig) -> RoomPriorFactor:
    """Prior on the coordinate the wall pair of ``axis`` leaves free."""
    free = 1 - AXIS_NAMES.index(axis)
    info = cfg.information.room_pair * cfg.information.room_prior_ratio
    return RoomPriorFactor(room, AXIS_NAMES[free], float(centroid[free]), np.eye(1) * info)


def find_matching_room(graph: FactorGraph, candidate: RoomCandidate, cfg: PipelineConfig) -> VariableId | None:
    tol = cfg.rooms.room_match_tol
    best: VariableId | None = None
    best_dist = np.inf
    for vid, var in graph.items_of_kind(VarKind.ROOM):
        assert isinstance(var, RoomVar)
        if var.floor_id != candidate.floor_id:
            continue
        delta = var.position - candidate.center
        l2 = float(np.linalg.norm(delta))
        if candidate.finite or var.finite:
            # finite rooms never overlap, so the plain l2 distance decides
            if l2 >= tol:
                continue
            dist = l2
        else:
            if var.axis != candidate.axis:
                continue
            k = AXIS_NAMES.index(candidate.axis or "x")
            dist = abs(float(delta[k]))
            if dist >= tol or abs(float(delta[1 - k])) >= cfg.rooms.infinite_free_tol:
                continue
        if dist < best_dist:
            best, best_dist = vid, dist
    return best


def merge_planes(graph: FactorGraph, a: VariableId, b: VariableId) -> tuple[VariableId, VariableId]:
    """Fold the higher-id plane into the lower-id one; returns (survivor, removed)."""
    survivor, duplicate = (a, b) if a.index < b.index else (b, a)
    with graph.lock:
        dup = graph.variables[duplicate]
        keep = graph.variables[survivor]
        assert isinstance(dup, PlaneVar) and isinstance(keep, PlaneVar)
        for kf, pts in dup.support.items():
            keep.support.setdefault(kf, pts)
        graph.replace_variable(duplicate, survivor)
        for _, room in graph.items_of_kind(VarKind.ROOM):
            assert isinstance(room, RoomVar)
            if room.x_planes is not None:
                room.x_planes = tuple(survivor if p == duplicate else p for p in room.x_planes)  # type: ignore[assignment]
            if room.y_planes is not None:
                room.y_planes = tuple(survivor if p == duplicate else p for p in room.y_planes)  # type: ignore[assignment]
        for _, floor in graph.items_of_kind(VarKind.FLOOR):
            assert isinstance(floor, FloorVar)
            if duplicate in floor.plane_ids:
                floor.plane_ids = list(dict.fromkeys(survivor if p == duplicate else p for p in floor.plane_ids))
        graph.remove_variable(duplicate)
    logger.info("merged duplicate plane %s into %s", duplicate, survivor)
    return survivor, duplicate


def _reconcile_side(
    graph: FactorGraph,
    stored: VariableId,
    observed: VariableId,
    cfg: PipelineConfig,
    merges: dict[VariableId, VariableId],
) -> VariableId:
    if stored == observed or stored not in graph.variables or observed not in graph.variables:
        return stored
    a = graph.variables[stored]
    b = graph.variables[observed]
    assert isinstance(a, PlaneVar) and isinstance(b, PlaneVar)
    if a.category != b.category or float(a.coeffs[:3] @ b.coeffs[:3]) <= 0.0:
        return stored
    if float(np.linalg.norm(a.coeffs - b.coeffs)) >= cfg.rooms.merge_tol:
        return stored
    survivor, removed = merge_planes(graph, stored, observed)
    merges[removed] = survivor
    return survivor


def resolve_plane(merges: dict[VariableId, VariableId], vid: VariableId) -> VariableId:
    """Follow removed -> survivor links to the plane that is still in the graph."""
    while vid in merges:
        vid = merges[vid]
    return vid


def remap_candidate(candidate: RoomCandidate, merges: dict[VariableId, VariableId]) -> RoomCandidate:
    if not merges:
        return candidate

    def pair(p: tuple[VariableId, VariableId] | None) -> tuple[VariableId, VariableId] | None:
        return None if p is None else (resolve_plane(merges, p[0]), resolve_plane(merges, p[1]))

    return replace(candidate, x_pair=pair(candidate.x_pair), y_pair=pair(candidate.y_pair))


def _create_room(graph: FactorGraph, candidate: RoomCandidate, cfg: PipelineConfig) -> VariableId:
    room = RoomVar(
        candidate.center,
        candidate.finite,
        candidate.floor_id,
        candidate.axis,
        candidate.x_pair,
        candidate.y_pair,
    )
    rid = graph.add_variable(room)
    for axis, pair in zip(AXIS_NAMES, (candidate.x_pair, candidate.y_pair)):
        if pair is not None:
            graph.add_factor(_pair_factor(rid, pair, axis, cfg))
    if not candidate.finite:
        assert candidate.axis is not None
        graph.add_factor(_prior_factor(rid, candidate.axis, candidate.cluster_centroid, cfg))
    kind = "finite" if candidate.finite else f"infinite ({candidate.axis})"
    logger.info("new %s room %s at (%.2f, %.2f)", kind, rid, *candidate.center)
    return rid


def _drop_priors(graph: FactorGraph, rid: VariableId) -> None:
    for fid in graph.factors_of(rid):
        if isinstance(graph.factors[fid], RoomPriorFactor):
            graph.remove_factor(fid)


def associate_room(
    graph: FactorGraph,
    candidate: RoomCandidate,
    cfg: PipelineConfig | None = None,
    merges: dict[VariableId, VariableId] | None = None,
) -> tuple[VariableId, list[VariableId]]:
    """Match ``candidate`` to a mapped room or create one; returns (room, removed planes).

    Candidates detected from one snapshot can name planes that an earlier
    association already merged away. Pass the same ``merges`` dict
    (removed -> survivor) for every candidate of that snapshot; it is read
    to remap the candidate and extended with this call's merges.
    """
    cfg = cfg or PipelineConfig()
    merges = {} if merges is None else merges
    known = set(merges)
    with graph.lock:
        candidate = remap_candidate(candidate, merges)
        missing = [p for p in candidate.plane_ids if p not in graph.variables]
        if missing:
            raise UnknownVariable(
                f"room candidate {candidate.cluster_id} references missing planes {', '.join(map(str, missing))}"
            )
        rid = find_matching_room(graph, candidate, cfg)
        if rid is None:
            return _create_room(graph, candidate, cfg), []

        room = graph.variables[rid]
        assert isinstance(room, RoomVar)
        for axis, pair in zip(AXIS_NAMES, (candidate.x_pair, candidate.y_pair)):
            if pair is None:
                continue
            attr = f"{axis}_planes"
            stored = getattr(room, attr)
            if stored is None:
                if room.finite or not candidate.finite:
                    continue
                # infinite room gains its second pair
                setattr(room, attr, pair)
                graph.add_factor(_pair_factor(rid, pair, axis, cfg))
                continue
            sides = tuple(_reconcile_side(graph, s, o, cfg, merges) for s, o in zip(stored, pair))
            setattr(room, attr, sides)

        if not room.finite and candidate.finite and room.x_planes is not None and room.y_planes is not None:
            room.finite = True
            room.axis = None
            _drop_priors(graph, rid)
            logger.info("room %s upgraded to finite", rid)
        elif not room.finite and not candidate.finite:
            _drop_priors(graph, rid)
            assert room.axis is not None
            graph.add_factor(_prior_factor(rid, room.axis, candidate.cluster_centroid, cfg))
    return rid, [p for p in merges if p not in known]
