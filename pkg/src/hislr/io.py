"""HSLR binary matrix files and small CSV matrices.

HSLR layout, little-endian::

    offset  size  field
    0       4     magic b"HSLR"
    4       4     u32 version (1)
    8       4     u32 dtype (0 = f32, 1 = f16)
    12      8     u64 rows
    20      8     u64 cols
    28      ...   rows*cols scalars, row-major

Writing with ``dtype="f16"`` rounds every value to half precision (about
3 significant decimal digits, max magnitude 65504); it is a storage option
only and values are widened back to float32 on load.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import DTYPE, as_dense
from .errors import CorruptFileError, DataError, DimensionError, MatrixFormatError, RangeError

MAGIC = b"HSLR"
VERSION = 1
HEADER = struct.Struct("<4sIIQQ")
DTYPE_CODES = {"f32": 0, "f16": 1}
CODE_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f2")}
CSV_MAX_DIM = 1024


def storage_cast(values: np.ndarray, dtype: str) -> np.ndarray:
    """Cast to the little-endian storage dtype, refusing f16 overflow."""
    if dtype not in DTYPE_CODES:
        raise DimensionError(f"unknown dtype {dtype!r}, expected one of {sorted(DTYPE_CODES)}")
    target = CODE_DTYPES[DTYPE_CODES[dtype]]
    with np.errstate(over="ignore"):
        out = np.asarray(values).astype(target)
    if dtype == "f16" and not np.isfinite(out).all():
        raise RangeError("value exceeds the f16 range (|v| > 65504)")
    return out


def encode_matrix(m, dtype: str = "f32") -> bytes:
    m = as_dense(m)
    payload = storage_cast(m, dtype)
    return HEADER.pack(MAGIC, VERSION, DTYPE_CODES[dtype], m.shape[0], m.shape[1]) + payload.tobytes()


def decode_matrix(buf: bytes) -> np.ndarray:
    if len(buf) < HEADER.size:
        raise MatrixFormatError("file too short for an HSLR header")
    magic, version, code, rows, cols = HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise MatrixFormatError(f"unsupported HSLR version {version}")
    if code not in CODE_DTYPES:
        raise MatrixFormatError(f"unknown dtype code {code}")
    if rows == 0 or cols == 0:
        raise CorruptFileError(f"degenerate dimensions {rows}x{cols}")
    dt = CODE_DTYPES[code]
    expected = rows * cols * dt.itemsize
    if len(buf) - HEADER.size != expected:
        raise CorruptFileError(
            f"payload is {len(buf) - HEADER.size} bytes, header declares {expected}"
        )
    values = np.frombuffer(buf, dtype=dt, offset=HEADER.size).reshape(rows, cols)
    values = values.astype(DTYPE)
    if not np.isfinite(values).all():
        raise DataError("matrix payload contains NaN or Inf")
    return values


def load_csv(path) -> np.ndarray:
    text = Path(path).read_text()
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise CorruptFileError(f"{path}: empty CSV")
    try:
        data = [[float(v) for v in line.split(",")] for line in rows]
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: {exc}") from None
    width = len(data[0])
    if any(len(r) != width for r in data):
        raise CorruptFileError(f"{path}: ragged CSV rows")
    if len(data) > CSV_MAX_DIM or width > CSV_MAX_DIM:
        raise DimensionError(f"CSV input limited to {CSV_MAX_DIM}x{CSV_MAX_DIM}")
    with np.errstate(over="ignore"):
        arr = np.array(data, dtype=np.float64).astype(DTYPE)
    if not np.isfinite(arr).all():
        raise DataError(f"{path}: CSV contains NaN or Inf")
    return arr


def save_csv(m, path) -> None:
    m = np.atleast_2d(np.asarray(m))
    lines = [",".join(repr(float(v)) for v in row) for row in m]
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix(path) -> np.ndarray:
    """Read a matrix from an HSLR file, or from CSV when the suffix is ``.csv``."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_csv(path)
    return decode_matrix(path.read_bytes())


def save_matrix(m, path, dtype: str = "f32") -> None:
    """Write ``m`` as HSLR (or CSV for a ``.csv`` suffix; CSV ignores ``dtype``)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        save_csv(as_dense(m), path)
        return
    path.write_bytes(encode_matrix(m, dtype))
