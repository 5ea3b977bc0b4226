"""ASCII point clouds, one ``x y z`` triple per line."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import DataError
from .files import read_text, write_text_atomic


def format_xyz(points: np.ndarray) -> str:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    return "".join(f"{x!r} {y!r} {z!r}\n" for x, y, z in pts.tolist())


def write_xyz(path: str | Path, points: np.ndarray) -> Path:
    return write_text_atomic(path, format_xyz(points))


def parse_xyz(text: str, *, source: str = "<string>") -> np.ndarray:
    rows: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 3:
            raise DataError(f"{source}:{lineno}: expected 'x y z'")
        try:
            # extra columns (ring, intensity) are ignored
            rows.append([float(v) for v in parts[:3]])
        except ValueError as exc:
            raise DataError(f"{source}:{lineno}: {exc}") from exc
    pts = np.array(rows, dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(pts)):
        raise DataError(f"{source}: non-finite coordinates")
    return pts


def read_xyz(path: str | Path) -> np.ndarray:
    return parse_xyz(read_text(path), source=str(path))
