from __future__ import annotations

from ..io.xyz import read_xyz, write_xyz
from .association import associate_and_map_plane, find_matching_plane, plane_information, support_sample
from .prefilter import prefilter, range_filter, voxel_downsample
from .segmentation import SegmentedPlane, classify_plane, segment_planes

__all__ = [
    "SegmentedPlane",
    "associate_and_map_plane",
    "classify_plane",
    "find_matching_plane",
    "plane_information",
    "prefilter",
    "range_filter",
    "read_xyz",
    "segment_planes",
    "support_sample",
    "voxel_downsample",
    "write_xyz",
]
