"""Binary container for compressed models (``.shss`` files, any method).

All integers little-endian; ``scalar`` is f32 or f16 per the header.

Header::

    4 bytes  magic b"HSLM"
    u32      version (1)
    u32      dtype (0 = f32, 1 = f16), used for every value scalar
    u32      kind (0 = sparse + low rank, 1 = hss tree, 2 = shss tree)
    u32      meta_len
    meta_len UTF-8 JSON object (sorted keys): method, rows, cols, config

Records::

    SPARSE  u64 rows, u64 cols, u64 nnz, nnz x u64 row, nnz x u64 col,
            nnz x scalar value   (canonical (row, col) order)
    DENSE   u64 rows, u64 cols, rows*cols x scalar (row-major)
    FACTOR  DENSE u, DENSE r
    PERM    u64 n (0 = no permutation), n x u64 forward (gather form)
    NODE    u8 tag
              tag 0 (leaf):     DENSE d
              tag 1 (internal): u64 split, u64 rank, u64 depth,
                                [SPARSE spikes, PERM perm]   (kind 2 only)
                                FACTOR off01, FACTOR off10, NODE child0, NODE child1

Body: kind 0 is ``SPARSE FACTOR``; kinds 1 and 2 are one NODE (the root).
Saving with f16 rounds every value scalar, spikes included.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from .core import DTYPE, Permutation, SparseMatrix
from .errors import CorruptFileError, MatrixFormatError, ValidationError
from .hss import HssLeaf, HssNode
from .io import CODE_DTYPES, DTYPE_CODES, storage_cast
from .shss import ShssConfig, ShssModel, ShssNode
from .slr import SparseLowRank
from .svd import LowRankFactor

MAGIC = b"HSLM"
VERSION = 1
KIND_SLR, KIND_HSS, KIND_SHSS = 0, 1, 2
_HEAD = struct.Struct("<4sIIII")
_U64 = struct.Struct("<Q")


class _Writer:
    def __init__(self, dtype: str):
        self.buf = io.BytesIO()
        self.dtype = dtype

    def u64(self, *values: int) -> None:
        for v in values:
            self.buf.write(_U64.pack(int(v)))

    def ints(self, arr) -> None:
        self.buf.write(np.asarray(arr, dtype="<u8").tobytes())

    def scalars(self, arr) -> None:
        self.buf.write(storage_cast(np.asarray(arr, dtype=DTYPE), self.dtype).tobytes())

    def sparse(self, s: SparseMatrix) -> None:
        self.u64(s.rows, s.cols, s.nnz)
        self.ints(s.row)
        self.ints(s.col)
        self.scalars(s.val)

    def dense(self, d: np.ndarray) -> None:
        self.u64(*d.shape)
        self.scalars(d)

    def factor(self, f: LowRankFactor) -> None:
        self.dense(f.u)
        self.dense(f.r)

    def perm(self, p) -> None:
        if p is None:
            self.u64(0)
        else:
            self.u64(len(p))
            self.ints(p.forward)

    def node(self, t, with_spikes: bool) -> None:
        if isinstance(t, HssLeaf):
            self.buf.write(b"\x00")
            self.dense(t.d)
            return
        self.buf.write(b"\x01")
        self.u64(t.split, t.rank, t.depth)
        if with_spikes:
            self.sparse(t.spikes)
            self.perm(t.perm)
        self.factor(t.off01)
        self.factor(t.off10)
        self.node(t.child0, with_spikes)
        self.node(t.child1, with_spikes)


class _Reader:
    def __init__(self, buf: bytes, scalar: np.dtype):
        self.buf = buf
        self.pos = 0
        self.scalar = scalar

    def take(self, nbytes: int) -> bytes:
        if self.pos + nbytes > len(self.buf):
            raise CorruptFileError("model file truncated")
        out = self.buf[self.pos : self.pos + nbytes]
        self.pos += nbytes
        return out

    def u64(self) -> int:
        return _U64.unpack(self.take(8))[0]

    def ints(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * n), dtype="<u8").astype(np.int64)

    def scalars(self, n: int) -> np.ndarray:
        vals = np.frombuffer(self.take(n * self.scalar.itemsize), dtype=self.scalar).astype(DTYPE)
        if not np.isfinite(vals).all():
            raise CorruptFileError("model contains NaN or Inf")
        return vals

    def sparse(self) -> SparseMatrix:
        rows, cols, nnz = self.u64(), self.u64(), self.u64()
        r, c, v = self.ints(nnz), self.ints(nnz), self.scalars(nnz)
        return SparseMatrix.from_entries(rows, cols, r, c, v)

    def dense(self) -> np.ndarray:
        rows, cols = self.u64(), self.u64()
        return self.scalars(rows * cols).reshape(rows, cols)

    def factor(self) -> LowRankFactor:
        return LowRankFactor(self.dense(), self.dense())

    def perm(self):
        n = self.u64()
        return None if n == 0 else Permutation(self.ints(n))

    def node(self, with_spikes: bool):
        tag = self.take(1)
        if tag == b"\x00":
            return HssLeaf(self.dense())
        if tag != b"\x01":
            raise CorruptFileError(f"unknown node tag {tag!r}")
        split, rank, depth = self.u64(), self.u64(), self.u64()
        spikes = perm = None
        if with_spikes:
            spikes, perm = self.sparse(), self.perm()
        off01, off10 = self.factor(), self.factor()
        c0, c1 = self.node(with_spikes), self.node(with_spikes)
        if with_spikes:
            return ShssNode(spikes, perm, off01, off10, c0, c1, split, rank, depth)
        return HssNode(off01, off10, c0, c1, split, rank, depth)


def _jsonable(v):
    if isinstance(v, np.random.SeedSequence):
        return int(v.entropy)
    if isinstance(v, (np.integer, np.floating)):
        return v.item()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def encode_model(model, dtype: str = "f32", meta: dict | None = None) -> bytes:
    w = _Writer(dtype)
    meta = dict(meta or {})
    if isinstance(model, SparseLowRank):
        kind = KIND_SLR
        meta.update(method=model.method, config=model.params)
        w.sparse(model.spikes)
        w.factor(model.factor)
    elif isinstance(model, ShssModel):
        kind = KIND_SHSS
        meta.setdefault("method", "shss-rcm" if model.config.use_rcm else "shss")
        meta["config"] = model.config.to_dict()
        w.node(model.root, with_spikes=True)
    elif isinstance(model, HssNode):
        kind = KIND_HSS
        meta.setdefault("method", "hss")
        w.node(model, with_spikes=False)
    else:
        raise ValidationError(f"cannot serialize {type(model).__name__}")
    rows, cols = _shape(model)
    meta.update(rows=rows, cols=cols)
    blob = json.dumps(meta, sort_keys=True, default=_jsonable).encode()
    head = _HEAD.pack(MAGIC, VERSION, DTYPE_CODES[dtype], kind, len(blob))
    return head + blob + w.buf.getvalue()


def _shape(model) -> tuple[int, int]:
    if isinstance(model, HssNode):
        return (model.n, model.n)
    return tuple(model.shape)


def decode_model(buf: bytes):
    if len(buf) < _HEAD.size:
        raise MatrixFormatError("file too short for a model header")
    magic, version, code, kind, meta_len = _HEAD.unpack_from(buf, 0)
    if magic != MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise MatrixFormatError(f"unsupported model version {version}")
    if code not in CODE_DTYPES:
        raise MatrixFormatError(f"unknown dtype code {code}")
    r = _Reader(buf, CODE_DTYPES[code])
    r.pos = _HEAD.size
    try:
        meta = json.loads(r.take(meta_len).decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"bad metadata: {exc}") from None
    if kind == KIND_SLR:
        spikes, factor = r.sparse(), r.factor()
        model = SparseLowRank(spikes, factor, meta["method"], meta.get("config", {}))
    elif kind == KIND_HSS:
        model = r.node(with_spikes=False)
    elif kind == KIND_SHSS:
        root = r.node(with_spikes=True)
        model = ShssModel(root, ShssConfig(**meta["config"]), (meta["rows"], meta["cols"]))
    else:
        raise MatrixFormatError(f"unknown model kind {kind}")
    if r.pos != len(buf):
        raise CorruptFileError(f"{len(buf) - r.pos} trailing bytes after model")
    if _shape(model) != (meta["rows"], meta["cols"]):
        raise CorruptFileError("model dimensions disagree with metadata")
    return model, meta


def save_model(model, path, dtype: str = "f32", meta: dict | None = None) -> None:
    Path(path).write_bytes(encode_model(model, dtype, meta))


def load_model(path):
    """Return ``(model, meta)`` from a container written by :func:`save_model`."""
    return decode_model(Path(path).read_bytes())
