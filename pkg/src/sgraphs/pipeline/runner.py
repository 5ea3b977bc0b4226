"""Frame-by-frame orchestration of the situational graph."""
from __future__ import annotations

import logging
import time
from collections.abc import Callable, Iterator
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import PipelineConfig
from ..errors import EmptyInput, GeometryError, SingularSystem, UnknownVariable
from ..freespace import Cluster, build_free_space_graph, compute_esdf, rasterize_map, split_clusters
from ..geometry import Pose
from ..graph import (
    FactorGraph,
    KeyframeVar,
    OdometryFactor,
    PoseAnchorFactor,
    RoomVar,
    VariableId,
    VarKind,
    optimize,
)
from ..graph.information import anchor_information, odometry_information
from ..io import Trajectory
from ..loop import icp_odometry, try_close_loop
from ..models import LayerCounts, RunReport
from ..perception import associate_and_map_plane, prefilter, segment_planes, voxel_downsample
from ..scene import associate_room, detect_floor_change, detect_rooms, mapped_planes, update_floor
from ..sim import Dataset, read_dataset, sample_world_surfaces
from .evaluation import compute_ate, compute_map_rmse
from .keyframes import KeyframePolicy

logger = logging.getLogger(__name__)

ProgressHook = Callable[[int, int], None]


@dataclass
class StageTimer:
    totals: dict[str, float] = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.totals[name] = self.totals.get(name, 0.0) + time.perf_counter() - start


@dataclass
class RunState:
    """Everything the run accumulates; exported once the last frame is in."""

    config: PipelineConfig
    graph: FactorGraph = field(default_factory=FactorGraph)
    policy: KeyframePolicy = field(default_factory=KeyframePolicy)
    timer: StageTimer = field(default_factory=StageTimer)
    floors: dict[int, float] = field(default_factory=dict)
    clusters: dict[int, list[Cluster]] = field(default_factory=dict)
    # per frame: timestamp, owning keyframe and odometry offset from it
    frame_links: list[tuple[float, VariableId, Pose]] = field(default_factory=list)
    last_keyframe: VariableId | None = None
    last_keyframe_odom: Pose | None = None
    frames_since_keyframe: int = 0
    keyframes_since_optimize: int = 0
    merged_planes: int = 0
    loop_factors: int = 0

    def keyframe(self, vid: VariableId) -> KeyframeVar:
        kf = self.graph.variables[vid]
        assert isinstance(kf, KeyframeVar)
        return kf

    def estimated_trajectory(self) -> Trajectory:
        traj = Trajectory()
        for t, kid, offset in self.frame_links:
            traj.append(t, self.keyframe(kid).pose @ offset)
        return traj

    def map_cloud(self) -> np.ndarray:
        clouds = [
            kf.pose.transform(kf.cloud)
            for _, kf in self.graph.items_of_kind(VarKind.KEYFRAME)
            if isinstance(kf, KeyframeVar) and kf.cloud is not None and len(kf.cloud)
        ]
        if not clouds:
            return np.zeros((0, 3))
        return voxel_downsample(np.vstack(clouds), self.config.prefilter.voxel)

    def counts(self) -> LayerCounts:
        rooms = [v for _, v in self.graph.items_of_kind(VarKind.ROOM) if isinstance(v, RoomVar)]
        return LayerCounts(
            keyframes=len(self.graph.ids_of_kind(VarKind.KEYFRAME)),
            planes=len(self.graph.ids_of_kind(VarKind.PLANE)),
            rooms_finite=sum(r.finite for r in rooms),
            rooms_infinite=sum(not r.finite for r in rooms),
            floors=len(self.graph.ids_of_kind(VarKind.FLOOR)),
            loop_factors=self.loop_factors,
            factors=len(self.graph.factors),
        )


def _odometry(dataset: Dataset, clouds: list[np.ndarray], cfg: PipelineConfig) -> list[Pose]:
    poses = [f.odom for f in dataset.frames]
    if cfg.odom != "icp" or not poses:
        return poses
    increments = [a.between(b) for a, b in zip(poses, poses[1:])]
    relative = icp_odometry(clouds, increments, cfg)
    return [poses[0] @ p for p in relative]


def _insert_keyframe(state: RunState, timestamp: float, odom: Pose, cloud: np.ndarray) -> VariableId:
    cfg = state.config
    graph = state.graph
    if state.last_keyframe is None:
        pose = odom
    else:
        assert state.last_keyframe_odom is not None
        pose = state.keyframe(state.last_keyframe).pose @ state.last_keyframe_odom.between(odom)
    floor_id = detect_floor_change(pose, state.floors, cfg)
    kid = graph.add_variable(KeyframeVar(pose, timestamp, floor_id, cloud))
    if state.last_keyframe is None:
        graph.add_factor(PoseAnchorFactor(kid, pose, anchor_information(cfg.information)))
    else:
        assert state.last_keyframe_odom is not None
        info = odometry_information(cfg.information, state.frames_since_keyframe)
        graph.add_factor(OdometryFactor(state.last_keyframe, kid, state.last_keyframe_odom.between(odom), info))
    state.last_keyframe = kid
    state.last_keyframe_odom = odom
    state.frames_since_keyframe = 0
    state.policy.accept(odom)
    return kid


def _floor_clusters(state: RunState, floor_id: int) -> list[Cluster]:
    cfg = state.config
    kfs = [
        kf
        for _, kf in state.graph.items_of_kind(VarKind.KEYFRAME)
        if isinstance(kf, KeyframeVar) and kf.floor_id == floor_id and kf.cloud is not None
    ]
    base_z = state.floors[floor_id] - cfg.freespace.sensor_height
    grid = rasterize_map(
        [kf.pose.transform(kf.cloud) for kf in kfs],
        np.array([kf.pose.translation for kf in kfs]),
        cfg.freespace,
        base_z=base_z,
    )
    fs_graph = build_free_space_graph(compute_esdf(grid), cfg.freespace)
    return split_clusters(fs_graph, cfg.freespace)


def _update_rooms(state: RunState, kid: VariableId, floor_id: int) -> None:
    cfg = state.config
    with state.timer.stage("freespace"):
        try:
            clusters = _floor_clusters(state, floor_id)
        except EmptyInput as exc:
            logger.debug("no free space for floor %d: %s", floor_id, exc)
            return
        state.clusters[floor_id] = clusters
    with state.timer.stage("rooms"):
        candidates = detect_rooms(
            clusters, mapped_planes(state.graph), cfg.rooms, floor_id=floor_id, latest_keyframe=kid.index
        )
        merges: dict[VariableId, VariableId] = {}
        for cand in candidates:
            try:
                rid, merged = associate_room(state.graph, cand, cfg, merges=merges)
            except (GeometryError, UnknownVariable) as exc:
                logger.debug("room candidate dropped: %s", exc)
                continue
            state.merged_planes += len(merged)
            logger.debug("room candidate %d -> %s", cand.cluster_id, rid)


def _update_floor(state: RunState, floor_id: int) -> None:
    with state.timer.stage("floors"):
        try:
            update_floor(
                state.graph,
                mapped_planes(state.graph),
                floor_id,
                state.config,
                reference_z=state.floors[floor_id],
            )
        except GeometryError as exc:
            logger.debug("floor %d not updated: %s", floor_id, exc)


def _optimize(state: RunState) -> None:
    with state.timer.stage("optimize"):
        try:
            report = optimize(state.graph, state.config.optimizer)
        except SingularSystem as exc:
            logger.warning("optimization skipped: %s", exc)
            return
    state.keyframes_since_optimize = 0
    logger.debug(
        "optimized: cost %.4g -> %.4g in %d iterations", report.initial_cost, report.final_cost, report.iterations
    )


def process_keyframe(state: RunState, kid: VariableId, executor: Executor | None) -> None:
    """Everything after keyframe insertion, in pipeline order."""
    cfg = state.config
    kf = state.keyframe(kid)
    assert kf.cloud is not None

    with state.timer.stage("segmentation"):
        planes = segment_planes(kf.cloud, cfg.segmentation, seed=cfg.seed + kid.index)
        for plane in planes:
            associate_and_map_plane(state.graph, kid, plane, cfg)

    if cfg.layers.rooms and kid.index % cfg.rooms.detect_every == 0:
        _update_rooms(state, kid, kf.floor_id)
    if cfg.layers.floors:
        _update_floor(state, kf.floor_id)
    if cfg.layers.loop_closure:
        with state.timer.stage("loop_closure"):
            if try_close_loop(state.graph, kid, cfg, executor=executor) is not None:
                state.loop_factors += 1

    state.keyframes_since_optimize += 1
    if state.keyframes_since_optimize >= cfg.optimize_every:
        _optimize(state)


def run_dataset(
    dataset: Dataset,
    config: PipelineConfig | None = None,
    *,
    progress: ProgressHook | None = None,
) -> RunState:
    """Feed every frame of ``dataset`` through the pipeline and return the final state."""
    cfg = config or PipelineConfig()
    state = RunState(cfg, policy=KeyframePolicy(cfg.keyframe))
    n = len(dataset.frames)

    with state.timer.stage("prefilter"):
        clouds = [prefilter(f.cloud, cfg.prefilter) for f in dataset.frames]
    with state.timer.stage("odometry"):
        odometry = _odometry(dataset, clouds, cfg)

    pool = nullcontext(None) if cfg.single_thread else ThreadPoolExecutor(thread_name_prefix="sgraphs")
    with pool as executor:
        for i, (frame, cloud, odom) in enumerate(zip(dataset.frames, clouds, odometry)):
            state.frames_since_keyframe += 1
            if state.policy.should_insert(odom):
                kid = _insert_keyframe(state, frame.timestamp, odom, cloud)
                process_keyframe(state, kid, executor)
            assert state.last_keyframe is not None and state.last_keyframe_odom is not None
            state.frame_links.append((frame.timestamp, state.last_keyframe, state.last_keyframe_odom.between(odom)))
            if progress is not None:
                progress(i + 1, n)

    if state.keyframes_since_optimize:
        _optimize(state)
    logger.info("processed %d frames into %d keyframes", n, len(state.graph.ids_of_kind(VarKind.KEYFRAME)))
    return state


def evaluate(state: RunState, dataset: Dataset, name: str = "") -> RunReport:
    report = RunReport(
        dataset=name,
        frames=len(dataset.frames),
        counts=state.counts(),
        merged_planes=state.merged_planes,
    )
    if not dataset.frames:
        return report
    with state.timer.stage("evaluation"):
        report.ate_rmse = compute_ate(state.estimated_trajectory(), dataset.gt)
        report.odom_ate_rmse = compute_ate(dataset.odom, dataset.gt)
        estimated = state.map_cloud()
        if dataset.world.floors and len(estimated):
            report.map_rmse = compute_map_rmse(estimated, sample_world_surfaces(dataset.world))
    return report


def run_slam(
    dataset_dir: str | Path,
    config: PipelineConfig | None = None,
    *,
    progress: ProgressHook | None = None,
) -> tuple[RunReport, RunState]:
    """Read a dataset directory, run the pipeline over it and evaluate against its ground truth."""
    start = time.perf_counter()
    dataset = read_dataset(dataset_dir)
    state = run_dataset(dataset, config, progress=progress)
    report = evaluate(state, dataset, Path(dataset_dir).name)
    report.wall_clock_s = time.perf_counter() - start
    report.timing = dict(sorted(state.timer.totals.items()))
    return report, state
