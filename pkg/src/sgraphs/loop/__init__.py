from __future__ import annotations

from .closure import LoopCandidate, find_candidates, icp_odometry, try_close_loop
from .icp import IcpResult, PlanarTarget, register, scan_match

__all__ = [
    "IcpResult",
    "LoopCandidate",
    "PlanarTarget",
    "find_candidates",
    "icp_odometry",
    "register",
    "scan_match",
    "try_close_loop",
]
