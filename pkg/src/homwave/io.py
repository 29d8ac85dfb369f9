"""Header-plus-binary table format shared by spline and basis exports.

A table is two files: ``<stem>.json`` holding metadata and the matrix shape,
and ``<stem>.bin`` holding the matrix as little-endian float64, row-major.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

DTYPE = np.dtype("<f8")


def _stem(path) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in {".json", ".bin"} else path


def _with(stem: Path, suffix: str) -> Path:
    # appended rather than substituted, so stems may contain dots
    return stem.with_name(stem.name + suffix)


def write_table(path, header: dict, matrix: np.ndarray) -> Path:
    """Write ``header`` and ``matrix``; returns the JSON path."""
    stem = _stem(path)
    matrix = np.ascontiguousarray(matrix, dtype=DTYPE)
    meta = dict(header)
    meta["shape"] = list(matrix.shape)
    meta["dtype"] = "float64"
    meta["byte_order"] = "little"
    meta["data_file"] = stem.name + ".bin"
    _with(stem, ".bin").write_bytes(matrix.tobytes(order="C"))
    out = _with(stem, ".json")
    out.write_text(json.dumps(meta, indent=1, sort_keys=True))
    return out


def read_table(path):
    """Inverse of :func:`write_table`; returns ``(header, matrix)``."""
    stem = _stem(path)
    json_path = _with(stem, ".json")
    if not json_path.exists():
        raise FileNotFoundError(f"no table header at {json_path}")
    meta = json.loads(json_path.read_text())
    raw = (stem.parent / meta["data_file"]).read_bytes()
    expected = int(np.prod(meta["shape"])) * DTYPE.itemsize
    if len(raw) != expected:
        raise ValueError(f"{meta['data_file']}: {len(raw)} bytes, header promises {expected}")
    matrix = np.frombuffer(raw, dtype=DTYPE).reshape(meta["shape"]).astype(np.float64)
    return meta, matrix
