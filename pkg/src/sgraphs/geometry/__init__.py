from __future__ import annotations

from .planes import Frame, PlaneCategory, PlaneCoeffs, fit_plane, plane_to_local, plane_to_map
from .se3 import Pose, pose_between, pose_compose, right_jacobian_inv, skew

__all__ = [
    "Frame",
    "PlaneCategory",
    "PlaneCoeffs",
    "Pose",
    "fit_plane",
    "plane_to_local",
    "plane_to_map",
    "pose_between",
    "pose_compose",
    "right_jacobian_inv",
    "skew",
]
