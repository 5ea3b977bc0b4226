from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError
from .io.files import write_text_atomic


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class KeyframeConfig(_Section):
    min_translation: float = Field(0.5, gt=0)
    min_rotation_deg: float = Field(15.0, gt=0)


class PrefilterConfig(_Section):
    range_min: float = Field(0.3, ge=0)
    range_max: float = Field(100.0, gt=0)
    voxel: float = Field(0.1, gt=0)


class SegmentationConfig(_Section):
    min_inliers: int = Field(100, gt=0)
    max_planes: int = Field(12, gt=0)
    ransac_iterations: int = Field(200, gt=0)
    ransac_threshold: float = Field(0.05, gt=0)
    support_samples: int = Field(200, gt=0)


class AssociationConfig(_Section):
    plane_match_tol: float = Field(0.35, gt=0)


class FreeSpaceConfig(_Section):
    resolution: float = Field(0.1, gt=0)
    z_low: float = 0.3
    z_high: float = 1.8
    sensor_height: float = Field(1.0, gt=0)
    margin: float = Field(1.0, gt=0)
    stride: int = Field(3, gt=0)
    min_clearance: float = Field(0.25, gt=0)
    disconnect_clearance: float = Field(0.6, gt=0)
    min_cluster_size: int = Field(10, gt=0)


class RoomConfig(_Section):
    recent_keyframe_window: int = Field(3, gt=0)
    min_close_points: int = Field(20, gt=0)
    vertex_point_tol: float = Field(0.5, gt=0)
    min_side: float = Field(1.5, gt=0)
    max_side: float = Field(15.0, gt=0)
    opposed_angle_deg: float = Field(25.0, gt=0)
    room_match_tol: float = Field(2.0, gt=0)
    infinite_free_tol: float = Field(4.0, gt=0)
    merge_tol: float = Field(1.0, gt=0)
    detect_every: int = Field(1, gt=0)


class FloorConfig(_Section):
    floor_height_tol: float = Field(1.5, gt=0)
    reanchor_distance: float = Field(0.5, gt=0)


class LoopClosureConfig(_Section):
    min_index_gap: int = Field(20, gt=0)
    search_radius: float = Field(5.0, gt=0)
    max_candidates: int = Field(3, gt=0)
    fitness_accept: float = Field(0.05, gt=0)
    max_iterations: int = Field(30, gt=0)
    correspondence_cutoff: float = Field(1.0, gt=0)
    min_correspondences: int = Field(50, gt=0)
    normal_neighbors: int = Field(10, gt=2)
    max_surface_variation: float = Field(0.05, gt=0)
    min_overlap_ratio: float = Field(0.5, gt=0, le=1)


class OptimizerConfig(_Section):
    max_iterations: int = Field(50, gt=0)
    initial_damping: float = Field(1e-4, gt=0)
    relative_tolerance: float = Field(1e-8, gt=0)
    huber_delta: float = Field(1.0, gt=0)


class InformationConfig(_Section):
    odom_sigma_t: float = Field(0.01, ge=0)
    odom_sigma_rot_deg: float = Field(0.2, ge=0)
    sigma_floor_t: float = Field(1e-3, gt=0)
    sigma_floor_rot: float = Field(1e-3, gt=0)
    plane_per_inlier: float = Field(0.01, gt=0)
    plane_cap: float = Field(10.0, gt=0)
    room_pair: float = Field(1.0, gt=0)
    room_prior_ratio: float = Field(1e-2, gt=0)
    floor_room: float = Field(0.1, gt=0)
    anchor: float = Field(1e6, gt=0)


class SimulatorConfig(_Section):
    h_rays: int = Field(360, gt=0)
    v_rays: int = Field(16, gt=0)
    v_fov_deg: float = Field(15.0, ge=0)
    max_range: float = Field(30.0, gt=0)
    range_sigma: float = Field(0.01, ge=0)
    step: float = Field(0.2, gt=0)
    speed: float = Field(0.5, gt=0)
    sigma_t: float = Field(0.01, ge=0)
    sigma_rot_deg: float = Field(0.2, ge=0)
    sensor_height: float = Field(1.0, gt=0)
    wall_height: float = Field(2.5, gt=0)
    wall_thickness: float = Field(0.1, gt=0)


class LayerConfig(_Section):
    rooms: bool = True
    floors: bool = True
    loop_closure: bool = True


class PipelineConfig(_Section):
    keyframe: KeyframeConfig = Field(default_factory=KeyframeConfig)
    prefilter: PrefilterConfig = Field(default_factory=PrefilterConfig)
    segmentation: SegmentationConfig = Field(default_factory=SegmentationConfig)
    association: AssociationConfig = Field(default_factory=AssociationConfig)
    freespace: FreeSpaceConfig = Field(default_factory=FreeSpaceConfig)
    rooms: RoomConfig = Field(default_factory=RoomConfig)
    floors: FloorConfig = Field(default_factory=FloorConfig)
    loop: LoopClosureConfig = Field(default_factory=LoopClosureConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    information: InformationConfig = Field(default_factory=InformationConfig)
    simulator: SimulatorConfig = Field(default_factory=SimulatorConfig)
    layers: LayerConfig = Field(default_factory=LayerConfig)
    optimize_every: int = Field(1, gt=0)
    seed: int = Field(0, ge=0)
    odom: Literal["dataset", "icp"] = "dataset"
    single_thread: bool = False


def parse_flat(text: str) -> dict[str, Any]:
    """Parse ``a.b = value`` lines into a nested dict; values are YAML scalars."""
    nested: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        try:
            parsed = yaml.safe_load(value) if value else None
        except yaml.YAMLError as exc:
            raise ConfigError(f"line {lineno}: cannot parse value {value!r}") from exc
        node = nested
        *parents, leaf = key.split(".")
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"line {lineno}: {key!r} conflicts with a scalar entry")
            node = child
        node[leaf] = parsed
    return nested


def _flatten(data: dict[str, Any], prefix: str = "") -> list[tuple[str, Any]]:
    items: list[tuple[str, Any]] = []
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(_flatten(value, prefix=f"{name}."))
        else:
            items.append((name, value))
    return items


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg: PipelineConfig) -> str:
    lines = ["# sgraphs pipeline configuration"]
    lines.extend(f"{k} = {_format_value(v)}" for k, v in _flatten(cfg.model_dump()))
    return "\n".join(lines) + "\n"


def config_from_dict(raw: dict[str, Any] | None) -> PipelineConfig:
    try:
        return PipelineConfig.model_validate(raw or {})
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config {p} is not UTF-8 text") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    if p.suffix in (".yml", ".yaml"):
        try:
            raw: dict[str, Any] = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {p}") from exc
    else:
        raw = parse_flat(text)
    return config_from_dict(raw)


def save_config(cfg: PipelineConfig, path: str | Path) -> Path:
    return write_text_atomic(path, dump_config(cfg))
