"""Low-level text serialization: exact float round-trip, atomic writes."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import NonFiniteValueError


def fmt_float(x: float) -> str:
    """17 significant digits: enough to reproduce any double exactly."""
    if not np.isfinite(x):
        raise NonFiniteValueError(f"refusing to serialize {x!r}")
    return format(float(x), ".17g")


def fmt_vec(v) -> str:
    return ",".join(fmt_float(x) for x in np.asarray(v, dtype=float).ravel())


def fmt_ivec(v) -> str:
    return ",".join(str(int(x)) for x in np.asarray(v).ravel())


def fmt_mat(m) -> str:
    m = np.asarray(m, dtype=float)
    return ";".join(",".join(fmt_float(x) for x in row) for row in m.reshape(m.shape[0], -1))


def parse_vec(s: str) -> np.ndarray:
    return np.array([float(x) for x in s.split(",")] if s else [], dtype=float)


def parse_ivec(s: str) -> np.ndarray:
    return np.array([int(x) for x in s.split(",")] if s else [], dtype=int)


def parse_mat(s: str) -> np.ndarray:
    if not s:
        return np.empty((0, 0))
    return np.array([[float(x) for x in row.split(",")] for row in s.split(";")])


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a sibling temp file and rename; no partial file is visible."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
