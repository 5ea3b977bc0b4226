from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import KeyframeConfig
from ..geometry import Pose


@dataclass
class KeyframePolicy:
    """Accept a frame once odometry has moved far enough from the last keyframe."""

    cfg: KeyframeConfig = field(default_factory=KeyframeConfig)
    last: Pose | None = None

    def should_insert(self, odom: Pose) -> bool:
        if self.last is None:
            return True
        step = self.last.between(odom)
        moved = float(np.linalg.norm(step.translation)) >= self.cfg.min_translation
        turned = np.rad2deg(step.rotation_angle()) >= self.cfg.min_rotation_deg
        return bool(moved or turned)

    def accept(self, odom: Pose) -> None:
        self.last = odom
