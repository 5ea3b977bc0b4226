"""TUM trajectory files: ``timestamp tx ty tz qx qy qz qw`` per line."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..geometry import Pose
from .files import read_text, write_text_atomic


@dataclass
class Trajectory:
    timestamps: list[float] = field(default_factory=list)
    poses: list[Pose] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.timestamps) != len(self.poses):
            raise ValueError("timestamps and poses differ in length")

    def __len__(self) -> int:
        return len(self.poses)

    def append(self, timestamp: float, pose: Pose) -> None:
        self.timestamps.append(float(timestamp))
        self.poses.append(pose)

    @property
    def positions(self) -> np.ndarray:
        if not self.poses:
            return np.zeros((0, 3))
        return np.array([p.translation for p in self.poses])


def format_tum_line(timestamp: float, pose: Pose) -> str:
    w, x, y, z = (float(v) for v in pose.rotation)
    tx, ty, tz = (float(v) for v in pose.translation)
    return " ".join(repr(v) for v in (float(timestamp), tx, ty, tz, x, y, z, w))


def format_tum(traj: Trajectory) -> str:
    return "".join(format_tum_line(t, p) + "\n" for t, p in zip(traj.timestamps, traj.poses))


def write_tum(path: str | Path, traj: Trajectory) -> Path:
    return write_text_atomic(path, format_tum(traj))


def _pose_from_row(values: list[float]) -> Pose:
    tx, ty, tz, qx, qy, qz, qw = values
    q = np.array([qw, qx, qy, qz])
    # values we wrote ourselves are already unit with w >= 0; keep their bits
    if qw >= 0.0 and abs(float(np.linalg.norm(q)) - 1.0) < 1e-12:
        return Pose.from_stored(q, [tx, ty, tz])
    return Pose(q, np.array([tx, ty, tz]))


def parse_tum(text: str, *, source: str = "<string>") -> Trajectory:
    traj = Trajectory()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 8:
            raise DataError(f"{source}:{lineno}: expected 8 fields, got {len(parts)}")
        try:
            values = [float(v) for v in parts]
            pose = _pose_from_row(values[1:])
        except ValueError as exc:
            raise DataError(f"{source}:{lineno}: {exc}") from exc
        traj.append(values[0], pose)
    return traj


def read_tum(path: str | Path) -> Trajectory:
    return parse_tum(read_text(path), source=str(path))
