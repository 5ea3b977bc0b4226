from __future__ import annotations

from .files import read_text, write_text_atomic
from .pgm import format_pgm, write_pgm
from .tum import Trajectory, format_tum, parse_tum, read_tum, write_tum
from .xyz import format_xyz, parse_xyz, read_xyz, write_xyz

__all__ = [
    "Trajectory",
    "format_pgm",
    "format_tum",
    "format_xyz",
    "parse_tum",
    "parse_xyz",
    "read_text",
    "read_tum",
    "read_xyz",
    "write_pgm",
    "write_text_atomic",
    "write_tum",
    "write_xyz",
]
