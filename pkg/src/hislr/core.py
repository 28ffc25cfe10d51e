"""Matrix primitives shared by every compression method.

Dense matrices are plain 2-D ``float32`` numpy arrays. Parameters are always
*stored* in 32-bit; products and factorizations are evaluated in float64 on
those stored values so that the compressed operator and its densified form
agree to double-precision rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
import scipy.sparse

from .errors import DataError, DimensionError, ValidationError

DTYPE = np.float32

SeedLike = Union[int, np.random.SeedSequence]


def as_dense(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert ``a`` to a C-contiguous float32 2-D array.

    Raises
    ------
    DimensionError
        If ``a`` is not 2-D or has a zero dimension.
    DataError
        If any entry is NaN or infinite (also after the cast to float32).
    """
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} has an empty dimension {arr.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.ascontiguousarray(arr, dtype=DTYPE)
    if not np.isfinite(out).all():
        raise DataError(f"{name} contains NaN or Inf")
    return out


def as_vector(x, n: int, name: str = "x") -> np.ndarray:
    """Return ``x`` as float64, checking its leading dimension is ``n``.

    Accepts a vector or a 2-D block of column vectors.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[0] != n:
        raise DimensionError(f"{name} has shape {x.shape}, expected leading dimension {n}")
    return x


def make_rng(seed: SeedLike) -> np.random.Generator:
    """PCG64 generator for an integer seed or a ``SeedSequence``."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if int(seed) < 0 or int(seed) >= 2**64:
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(seed: SeedLike, path: tuple[int, ...]) -> np.random.SeedSequence:
    """Seed for a tree position.

    The position is hashed together with the root seed by numpy's
    ``SeedSequence`` (``spawn_key=path``), so the value depends only on where
    a node sits in the tree, never on the order nodes are visited.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(path))
    return np.random.SeedSequence(int(seed), spawn_key=tuple(path))


def gaussian_matrix(rows: int, cols: int, seed: SeedLike) -> np.ndarray:
    """I.i.d. standard normal matrix from PCG64 (numpy ``Generator.standard_normal``).

    Samples are drawn in float64 and rounded to float32; the same seed and
    shape always reproduce the same matrix.
    """
    if rows < 1 or cols < 1:
        raise DimensionError(f"gaussian_matrix needs positive dimensions, got {rows}x{cols}")
    return make_rng(seed).standard_normal((rows, cols)).astype(DTYPE)


@dataclass(frozen=True)
class SparseMatrix:
    """Coordinate-list sparse matrix in canonical (row, col) order.

    Use :meth:`from_entries` to build one from unsorted triplets; the plain
    constructor validates but does not reorder.
    """

    rows: int
    cols: int
    row: np.ndarray = field(repr=False)
    col: np.ndarray = field(repr=False)
    val: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DimensionError(f"sparse matrix needs positive dimensions, got {self.rows}x{self.cols}")
        row = np.asarray(self.row, dtype=np.int64)
        col = np.asarray(self.col, dtype=np.int64)
        val = np.asarray(self.val, dtype=DTYPE)
        if not (row.shape == col.shape == val.shape) or row.ndim != 1:
            raise DimensionError("row, col and val must be 1-D arrays of equal length")
        if row.size:
            if row.min() < 0 or row.max() >= self.rows or col.min() < 0 or col.max() >= self.cols:
                raise DimensionError("sparse entry index out of range")
            key = row * self.cols + col
            if np.any(np.diff(key) <= 0):
                raise ValidationError("sparse entries must be strictly sorted by (row, col) with no duplicates")
            if np.any(val == 0):
                raise ValidationError("sparse matrix stores only nonzero values")
            if not np.isfinite(val).all():
                raise DataError("sparse values contain NaN or Inf")
        object.__setattr__(self, "row", row)
        object.__setattr__(self, "col", col)
        object.__setattr__(self, "val", val)

    @classmethod
    def from_entries(cls, rows: int, cols: int, row, col, val) -> "SparseMatrix":
        """Build from triplets in any order; zero values are dropped."""
        row = np.asarray(row, dtype=np.int64).ravel()
        col = np.asarray(col, dtype=np.int64).ravel()
        val = np.asarray(val, dtype=DTYPE).ravel()
        keep = val != 0
        row, col, val = row[keep], col[keep], val[keep]
        order = np.lexsort((col, row))
        return cls(rows, cols, row[order], col[order], val[order])

    @classmethod
    def empty(cls, rows: int, cols: int) -> "SparseMatrix":
        z = np.zeros(0, dtype=np.int64)
        return cls(rows, cols, z, z, np.zeros(0, dtype=DTYPE))

    @classmethod
    def from_dense(cls, a) -> "SparseMatrix":
        a = np.asarray(a)
        r, c = np.nonzero(a)
        return cls(a.shape[0], a.shape[1], r, c, a[r, c])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return int(self.val.size)

    def entries(self) -> list[tuple[int, int, float]]:
        return [(int(i), int(j), float(v)) for i, j, v in zip(self.row, self.col, self.val)]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=DTYPE)
        out[self.row, self.col] = self.val
        return out

    @cached_property
    def _csr(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.csr_matrix(
            (self.val.astype(np.float64), (self.row, self.col)), shape=self.shape
        )

    def matvec(self, x) -> np.ndarray:
        return sparse_matvec(self, x)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.row, other.row)
            and np.array_equal(self.col, other.col)
            and np.array_equal(self.val, other.val)
        )

    __hash__ = None


def sparse_matvec(s: SparseMatrix, x) -> np.ndarray:
    """``y[i] = sum(v * x[j] for (i, j, v) in s)``, evaluated in float64."""
    x = as_vector(x, s.cols)
    if s.nnz == 0:
        return np.zeros((s.rows,) + x.shape[1:])
    return np.asarray(s._csr @ x)


@dataclass(frozen=True)
class Permutation:
    """Gather-form permutation: new position ``i`` holds old index ``forward[i]``."""

    forward: np.ndarray
    inverse: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.int64)
        if fwd.ndim != 1:
            raise DimensionError("permutation must be a 1-D index vector")
        n = fwd.size
        if n and (fwd.min() < 0 or fwd.max() >= n):
            raise ValidationError("permutation entries out of range")
        inv = np.full(n, -1, dtype=np.int64)
        inv[fwd] = np.arange(n)
        if np.any(inv < 0):
            raise ValidationError("permutation is not a bijection")
        if self.inverse is not None and not np.array_equal(np.asarray(self.inverse), inv):
            raise ValidationError("inverse does not match forward")
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "inverse", inv)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    def __len__(self) -> int:
        return int(self.forward.size)

    def inv(self) -> "Permutation":
        return Permutation(self.inverse)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.forward, np.arange(self.forward.size)))

    def matrix(self) -> np.ndarray:
        """Explicit matrix ``P`` with ``P @ x == x[forward]``."""
        n = len(self)
        p = np.zeros((n, n))
        p[np.arange(n), self.forward] = 1.0
        return p

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.forward, other.forward)

    __hash__ = None
