"""Rectangular multi-room worlds and their wall/slab boxes."""
from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigError, DataError
from ..io.files import read_text

logger = logging.getLogger(__name__)

_EDGE_TOL = 1e-6


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Rect(_Model):
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @model_validator(mode="after")
    def _non_degenerate(self) -> Rect:
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError(f"degenerate rectangle {self.bounds}")
        return self

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


class Door(_Model):
    """Full-height opening centred at (x, y) on a wall line."""

    x: float
    y: float
    width: float = Field(1.0, gt=0)


class FloorPlan(_Model):
    floor_id: int = Field(0, ge=0)
    z_base: float = 0.0
    rooms: list[Rect] = Field(default_factory=list)
    corridors: list[Rect] = Field(default_factory=list)
    doors: list[Door] = Field(default_factory=list)

    @property
    def regions(self) -> list[Rect]:
        return [*self.rooms, *self.corridors]

    @model_validator(mode="after")
    def _doors_on_walls(self) -> FloorPlan:
        lines = _wall_lines(self.regions)
        for door in self.doors:
            if _door_line(door, lines) is None:
                raise ValueError(f"door at ({door.x}, {door.y}) is not on a wall")
        return self


class World(_Model):
    floors: list[FloorPlan] = Field(default_factory=list)
    wall_height: float = Field(2.5, gt=0)
    wall_thickness: float = Field(0.1, gt=0)

    @model_validator(mode="after")
    def _unique_floors(self) -> World:
        ids = [f.floor_id for f in self.floors]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate floor ids")
        return self

    def floor(self, floor_id: int) -> FloorPlan:
        for plan in self.floors:
            if plan.floor_id == floor_id:
                return plan
        raise DataError(f"world has no floor {floor_id}")

    def floor_at(self, z: float) -> FloorPlan | None:
        for plan in self.floors:
            if plan.z_base <= z <= plan.z_base + self.wall_height:
                return plan
        return None

    def boxes(self) -> np.ndarray:
        return wall_boxes(self)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=1, sort_keys=True) + "\n"


# (orientation, coordinate) -> list of (lo, hi). "x" lines are x = const.
WallLines = dict[tuple[str, float], list[tuple[float, float]]]


def _merge(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1] + _EDGE_TOL:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _wall_lines(regions: list[Rect]) -> WallLines:
    raw: dict[tuple[str, float], list[tuple[float, float]]] = {}
    for r in regions:
        raw.setdefault(("x", r.x_min), []).append((r.y_min, r.y_max))
        raw.setdefault(("x", r.x_max), []).append((r.y_min, r.y_max))
        raw.setdefault(("y", r.y_min), []).append((r.x_min, r.x_max))
        raw.setdefault(("y", r.y_max), []).append((r.x_min, r.x_max))
    return {key: _merge(spans) for key, spans in sorted(raw.items())}


def _door_line(door: Door, lines: WallLines) -> tuple[str, float] | None:
    for (orient, coord), spans in lines.items():
        along, across = (door.y, door.x) if orient == "x" else (door.x, door.y)
        if abs(across - coord) > _EDGE_TOL:
            continue
        if any(lo - _EDGE_TOL <= along <= hi + _EDGE_TOL for lo, hi in spans):
            return orient, coord
    return None


def _cut(spans: list[tuple[float, float]], lo: float, hi: float) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for a, b in spans:
        if hi <= a or lo >= b:
            out.append((a, b))
            continue
        if lo > a:
            out.append((a, lo))
        if hi < b:
            out.append((hi, b))
    return out


def floor_wall_segments(plan: FloorPlan) -> WallLines:
    """Deduplicated wall segments of one floor with door gaps removed."""
    lines = _wall_lines(plan.regions)
    for door in plan.doors:
        key = _door_line(door, lines)
        if key is None:
            continue
        along = door.y if key[0] == "x" else door.x
        lines[key] = _cut(lines[key], along - door.width / 2, along + door.width / 2)
    return {k: v for k, v in lines.items() if v}


def wall_boxes(world: World) -> np.ndarray:
    """Axis-aligned boxes ``(n, 6)`` as ``x0 y0 z0 x1 y1 z1`` for walls, floors and ceilings."""
    half = world.wall_thickness / 2
    boxes: list[list[float]] = []
    for plan in world.floors:
        z0, z1 = plan.z_base, plan.z_base + world.wall_height
        for (orient, coord), spans in floor_wall_segments(plan).items():
            for lo, hi in spans:
                if orient == "x":
                    boxes.append([coord - half, lo - half, z0, coord + half, hi + half, z1])
                else:
                    boxes.append([lo - half, coord - half, z0, hi + half, coord + half, z1])
        regions = plan.regions
        if not regions:
            continue
        x0 = min(r.x_min for r in regions) - world.wall_thickness
        y0 = min(r.y_min for r in regions) - world.wall_thickness
        x1 = max(r.x_max for r in regions) + world.wall_thickness
        y1 = max(r.y_max for r in regions) + world.wall_thickness
        boxes.append([x0, y0, z0 - world.wall_thickness, x1, y1, z0])
        boxes.append([x0, y0, z1, x1, y1, z1 + world.wall_thickness])
    return np.asarray(boxes, dtype=float).reshape(-1, 6)


def in_free_space(world: World, point: np.ndarray, boxes: np.ndarray | None = None) -> bool:
    """True when ``point`` is inside some region of its floor and outside every wall box."""
    x, y, z = (float(v) for v in point)
    plan = world.floor_at(z)
    if plan is None or not any(r.contains(x, y) for r in plan.regions):
        return False
    boxes = world.boxes() if boxes is None else boxes
    inside = np.all((boxes[:, :3] <= [x, y, z]) & ([x, y, z] <= boxes[:, 3:]), axis=1)
    return not bool(inside.any())


def _face_grid(a0: float, a1: float, b0: float, b1: float, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    na = max(int(np.ceil((a1 - a0) / spacing)), 1) + 1
    nb = max(int(np.ceil((b1 - b0) / spacing)), 1) + 1
    a, b = np.meshgrid(np.linspace(a0, a1, na), np.linspace(b0, b1, nb), indexing="ij")
    return a.ravel(), b.ravel()


def sample_world_surfaces(world: World, spacing: float = 0.05) -> np.ndarray:
    """Dense ground-truth map: wall side faces plus the top of floor slabs and underside of ceilings."""
    if spacing <= 0:
        raise ConfigError("spacing must be positive")
    boxes = world.boxes()
    parts: list[np.ndarray] = []
    wall_height = world.wall_height
    for x0, y0, z0, x1, y1, z1 in boxes:
        if z1 - z0 > wall_height - _EDGE_TOL:
            for x in (x0, x1):
                ys, zs = _face_grid(y0, y1, z0, z1, spacing)
                parts.append(np.column_stack([np.full_like(ys, x), ys, zs]))
            for y in (y0, y1):
                xs, zs = _face_grid(x0, x1, z0, z1, spacing)
                parts.append(np.column_stack([xs, np.full_like(xs, y), zs]))
        else:
            xs, ys = _face_grid(x0, x1, y0, y1, spacing)
            # slab: floor top is z1 when below the plan, ceiling underside is z0
            is_floor = any(abs(z1 - plan.z_base) < _EDGE_TOL for plan in world.floors)
            z = z1 if is_floor else z0
            parts.append(np.column_stack([xs, ys, np.full_like(xs, z)]))
    if not parts:
        return np.zeros((0, 3))
    return np.vstack(parts)


def _load_mapping(path: Path) -> dict:
    text = read_text(path)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"{path}: expected a mapping")
    return data


def load_world(path: str | Path) -> World:
    """Read a world from YAML or JSON."""
    path = Path(path)
    try:
        return World.model_validate(_load_mapping(path))
    except ValidationError as exc:
        raise DataError(f"{path}: invalid world: {exc}") from exc

