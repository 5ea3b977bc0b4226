"""JSON export/import of a factor graph.

Floats go through ``json`` (shortest round-trip ``repr``), and stored
poses/planes are rebuilt without renormalization, so a dump/load cycle is
bit-exact at double precision.
"""
from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import DataError
from ..geometry import Frame, PlaneCoeffs, Pose
from ..io.files import read_text, write_text_atomic
from .factors import FACTOR_TYPES, Factor
from .graph import FactorGraph
from .variables import FactorId, FloorVar, KeyframeVar, PlaneVar, RoomVar, Variable, VariableId, VarKind

FORMAT_VERSION = 1


def _pose_to_dict(pose: Pose) -> dict[str, list[float]]:
    return {"rotation": pose.rotation.tolist(), "translation": pose.translation.tolist()}


def _pose_from_dict(raw: dict[str, Any]) -> Pose:
    return Pose.from_stored(raw["rotation"], raw["translation"])


def _pair(ids: tuple[VariableId, VariableId] | None) -> list[str] | None:
    return None if ids is None else [str(i) for i in ids]


def _unpair(raw: list[str] | None) -> tuple[VariableId, VariableId] | None:
    if raw is None:
        return None
    a, b = (VariableId.parse(s) for s in raw)
    return a, b


def variable_to_dict(vid: VariableId, var: Variable) -> dict[str, Any]:
    out: dict[str, Any] = {"id": str(vid), "kind": vid.kind.value}
    if isinstance(var, KeyframeVar):
        out.update(pose=_pose_to_dict(var.pose), timestamp=float(var.timestamp), floor_id=int(var.floor_id))
    elif isinstance(var, PlaneVar):
        out.update(coeffs=var.coeffs.tolist(), category=var.category.value, floor_id=int(var.floor_id))
    elif isinstance(var, RoomVar):
        out.update(
            position=var.position.tolist(),
            finite=bool(var.finite),
            floor_id=int(var.floor_id),
            axis=var.axis,
            x_planes=_pair(var.x_planes),
            y_planes=_pair(var.y_planes),
        )
    elif isinstance(var, FloorVar):
        anchor = var.anchor if var.anchor is not None else var.position
        out.update(
            position=var.position.tolist(),
            floor_id=int(var.floor_id),
            reference_z=float(var.reference_z),
            anchor=anchor.tolist(),
            rooms=[str(r) for r in var.room_ids],
            planes=[str(p) for p in var.plane_ids],
        )
    else:
        raise TypeError(f"unsupported variable {type(var).__name__}")
    return out


def variable_from_dict(raw: dict[str, Any]) -> tuple[VariableId, Variable]:
    vid = VariableId.parse(raw["id"])
    var: Variable
    if vid.kind == VarKind.KEYFRAME:
        var = KeyframeVar(_pose_from_dict(raw["pose"]), float(raw["timestamp"]), int(raw.get("floor_id", 0)))
    elif vid.kind == VarKind.PLANE:
        var = PlaneVar(np.array(raw["coeffs"], dtype=float), raw["category"], int(raw.get("floor_id", 0)))
    elif vid.kind == VarKind.ROOM:
        var = RoomVar(
            np.array(raw["position"], dtype=float),
            bool(raw["finite"]),
            int(raw.get("floor_id", 0)),
            raw.get("axis"),
            _unpair(raw.get("x_planes")),
            _unpair(raw.get("y_planes")),
        )
    else:
        var = FloorVar(
            np.array(raw["position"], dtype=float),
            int(raw.get("floor_id", 0)),
            float(raw.get("reference_z", 0.0)),
            np.array(raw["anchor"], dtype=float) if raw.get("anchor") is not None else None,
            [VariableId.parse(s) for s in raw.get("rooms", [])],
            [VariableId.parse(s) for s in raw.get("planes", [])],
        )
    return vid, var


def _encode(value: Any) -> Any:
    if isinstance(value, VariableId):
        return str(value)
    if isinstance(value, Pose):
        return _pose_to_dict(value)
    if isinstance(value, PlaneCoeffs):
        return {"coeffs": value.vector.tolist(), "frame": value.frame.value}
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def _decode(type_name: str, value: Any) -> Any:
    # dataclass field types are strings under postponed annotations
    if "VariableId" in type_name:
        return VariableId.parse(value)
    if "PlaneCoeffs" in type_name:
        return PlaneCoeffs.from_stored(value["coeffs"], Frame(value["frame"]))
    if "Pose" in type_name:
        return _pose_from_dict(value)
    if "ndarray" in type_name:
        return np.array(value, dtype=float)
    return value


def factor_to_dict(fid: FactorId, factor: Factor) -> dict[str, Any]:
    out: dict[str, Any] = {"id": str(fid), "type": factor.TYPE}
    for f in fields(factor):  # type: ignore[arg-type]
        out[f.name] = _encode(getattr(factor, f.name))
    return out


def factor_from_dict(raw: dict[str, Any]) -> tuple[FactorId, Factor]:
    try:
        cls = FACTOR_TYPES[raw["type"]]
    except KeyError:
        raise DataError(f"unknown factor type {raw.get('type')!r}") from None
    kwargs = {f.name: _decode(str(f.type), raw[f.name]) for f in fields(cls) if f.name in raw}  # type: ignore[arg-type]
    return FactorId.parse(raw["id"]), cls(**kwargs)


def graph_to_dict(graph: FactorGraph) -> dict[str, Any]:
    with graph.lock:
        return {
            "format": "sgraphs",
            "version": FORMAT_VERSION,
            "variables": [variable_to_dict(vid, v) for vid, v in graph.variables.items()],
            "factors": [factor_to_dict(fid, f) for fid, f in graph.factors.items()],
        }


def graph_from_dict(doc: dict[str, Any]) -> FactorGraph:
    graph = FactorGraph()
    try:
        for raw in doc["variables"]:
            graph.insert_variable(*variable_from_dict(raw))
        for raw in doc["factors"]:
            graph.insert_factor(*factor_from_dict(raw))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed graph document: {exc}") from exc
    return graph


def dumps_graph(graph: FactorGraph, extra: dict[str, Any] | None = None) -> str:
    doc = graph_to_dict(graph)
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def loads_graph(text: str) -> FactorGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid graph JSON: {exc}") from exc
    return graph_from_dict(doc)


def save_graph(graph: FactorGraph, path: str | Path, extra: dict[str, Any] | None = None) -> Path:
    return write_text_atomic(path, dumps_graph(graph, extra))


def load_graph(path: str | Path) -> FactorGraph:
    return loads_graph(read_text(path))
