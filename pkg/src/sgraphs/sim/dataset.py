"""Dataset directories: ``world.json``, ``gt.tum``, ``odom.tum`` and ``scans/scan_%06d.xyz``."""
from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from pydantic import ValidationError

from ..errors import BadDataset, DataError, IoError
from ..io import Trajectory, read_text, read_tum, read_xyz, write_text_atomic, write_tum, write_xyz
from .trajectory import ScanFrame
from .world import World

logger = logging.getLogger(__name__)

WORLD_FILE = "world.json"
GT_FILE = "gt.tum"
ODOM_FILE = "odom.tum"
SCAN_DIR = "scans"


def scan_name(index: int) -> str:
    return f"scan_{index:06d}.xyz"


@dataclass
class Dataset:
    world: World
    frames: list[ScanFrame] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def gt(self) -> Trajectory:
        return Trajectory([f.timestamp for f in self.frames], [f.gt for f in self.frames])

    @property
    def odom(self) -> Trajectory:
        return Trajectory([f.timestamp for f in self.frames], [f.odom for f in self.frames])


def write_dataset(frames: Sequence[ScanFrame], directory: str | Path, world: World | None = None) -> Path:
    """Write ``frames`` (and the world they came from) as a dataset directory."""
    root = Path(directory)
    try:
        (root / SCAN_DIR).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create dataset directory {root}: {exc}") from exc

    data = Dataset(world or World(), list(frames))
    write_text_atomic(root / WORLD_FILE, data.world.to_json())
    write_tum(root / GT_FILE, data.gt)
    write_tum(root / ODOM_FILE, data.odom)
    for i, frame in enumerate(data.frames):
        write_xyz(root / SCAN_DIR / scan_name(i), frame.cloud)
    logger.info("wrote dataset with %d frames to %s", len(data), root)
    return root


def read_dataset(directory: str | Path) -> Dataset:
    root = Path(directory)
    if not root.is_dir():
        raise BadDataset(f"{root} is not a directory")
    for name in (WORLD_FILE, GT_FILE, ODOM_FILE):
        if not (root / name).is_file():
            raise BadDataset(f"{root}: missing {name}")
    if not (root / SCAN_DIR).is_dir():
        raise BadDataset(f"{root}: missing {SCAN_DIR}/ directory")

    try:
        world = World.model_validate(json.loads(read_text(root / WORLD_FILE)))
        gt = read_tum(root / GT_FILE)
        odom = read_tum(root / ODOM_FILE)
    except (ValidationError, json.JSONDecodeError, DataError) as exc:
        raise BadDataset(f"{root}: {exc}") from exc

    if len(gt) != len(odom) or gt.timestamps != odom.timestamps:
        raise BadDataset(f"{root}: gt.tum and odom.tum disagree ({len(gt)} vs {len(odom)} poses)")
    if any(b <= a for a, b in zip(gt.timestamps, gt.timestamps[1:])):
        raise BadDataset(f"{root}: timestamps are not strictly increasing")

    frames: list[ScanFrame] = []
    for i, (t, g, o) in enumerate(zip(gt.timestamps, gt.poses, odom.poses)):
        path = root / SCAN_DIR / scan_name(i)
        if not path.is_file():
            raise BadDataset(f"{root}: missing {SCAN_DIR}/{scan_name(i)}")
        try:
            cloud = read_xyz(path)
        except DataError as exc:
            raise BadDataset(str(exc)) from exc
        frames.append(ScanFrame(t, g, o, cloud))
    logger.debug("read dataset %s with %d frames", root, len(frames))
    return Dataset(world, frames)
