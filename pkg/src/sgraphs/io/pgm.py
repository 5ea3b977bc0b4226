from __future__ import annotations

from pathlib import Path

import numpy as np

from .files import write_text_atomic


def format_pgm(image: np.ndarray, max_value: int = 255) -> str:
    """Plain (P2) PGM; row 0 of ``image`` is written last so +y points up."""
    img = np.asarray(image)
    h, w = img.shape
    scaled = np.clip(np.rint(img), 0, max_value).astype(int)[::-1]
    lines = ["P2", f"{w} {h}", str(max_value)]
    lines.extend(" ".join(str(v) for v in row) for row in scaled.tolist())
    return "\n".join(lines) + "\n"


def write_pgm(path: str | Path, image: np.ndarray, max_value: int = 255) -> Path:
    return write_text_atomic(path, format_pgm(image, max_value))
