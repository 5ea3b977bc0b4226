from __future__ import annotations

from contextlib import suppress
from pathlib import Path

from ..errors import DataError, IoError


def write_text_atomic(path: str | Path, text: str) -> Path:
    """Write ``text`` through a sibling ``.tmp`` file so readers never see a partial file."""
    p = Path(path)
    tmp = p.with_suffix(p.suffix + ".tmp")
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        with tmp.open("w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        tmp.replace(p)
    except OSError as exc:
        raise IoError(f"cannot write {p}: {exc}") from exc
    finally:
        with suppress(OSError):
            tmp.unlink(missing_ok=True)
    return p


def read_text(path: str | Path) -> str:
    p = Path(path)
    try:
        return p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{p} is not UTF-8 text: {exc}") from exc
    except OSError as exc:
        raise IoError(f"cannot read {p}: {exc}") from exc
