"""Hierarchical block compression with independent off-diagonal factors.

A node splits its square block at ``ceil(n/2)``, keeps the two diagonal
blocks (dense, or recursively compressed) and stores each off-diagonal
block as a low-rank factor. The rank requested at a child is half the
parent's (never below 1); each factor is additionally clamped to its
block's smaller dimension.

Seeds: the sketch for the upper-right block of the node at tree path
``path`` (0 = left child, 1 = right child) is drawn from
``SeedSequence(seed, spawn_key=path + (2,))`` and the lower-left block from
``path + (3,)``; see :func:`hislr.core.derive_seed`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import SeedLike, as_dense, as_vector, derive_seed
from .errors import DimensionError, ValidationError
from .svd import (
    DEFAULT_EPS,
    DEFAULT_OVERSAMPLE,
    DEFAULT_POWER_ITERS,
    LowRankFactor,
    randomized_svd,
    truncated_svd,
)

FACTORIZERS = ("rsvd", "svd")


@dataclass(frozen=True)
class TwoLevelBlocks:
    d0: np.ndarray
    d1: np.ndarray
    off01: LowRankFactor
    off10: LowRankFactor
    split: int

    def to_dense(self) -> np.ndarray:
        return _assemble(self.d0, self.d1, self.off01, self.off10)


@dataclass(frozen=True)
class HssLeaf:
    d: np.ndarray

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class HssNode:
    off01: LowRankFactor
    off10: LowRankFactor
    child0: "HssTree"
    child1: "HssTree"
    split: int
    rank: int
    depth: int

    @property
    def n(self) -> int:
        return self.child0.n + self.child1.n


HssTree = Union[HssNode, HssLeaf]


class OpCounter:
    """Tally of scalar multiply-adds performed by a matvec."""

    def __init__(self):
        self.madds = 0

    def add(self, count: int) -> None:
        self.madds += int(count)


def split_point(n: int) -> int:
    return (n + 1) // 2


def child_rank(k: int) -> int:
    return max(1, k // 2)


def factor_block(
    block: np.ndarray,
    k: int,
    eps: float,
    seed: SeedLike,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    factorizer: str = "rsvd",
) -> LowRankFactor:
    """Low-rank factor of one off-diagonal block at rank ``min(k, min(block.shape))``.

    The oversampling is reduced so the sketch never exceeds the block.
    """
    m, n = block.shape
    rank = min(k, m, n)
    if factorizer == "svd":
        res = truncated_svd(block, rank, eps)
    elif factorizer == "rsvd":
        q = min(oversample, min(m, n) - rank)
        res = randomized_svd(block, rank, q, power_iters, eps, seed)
    else:
        raise ValidationError(f"unknown factorizer {factorizer!r}, expected one of {FACTORIZERS}")
    return res.factor()


def _two_level(a, eps, k, path, seed, oversample, power_iters, factorizer) -> TwoLevelBlocks:
    n = a.shape[0]
    s = split_point(n)
    off01 = factor_block(a[:s, s:], k, eps, derive_seed(seed, path + (2,)), oversample, power_iters, factorizer)
    off10 = factor_block(a[s:, :s], k, eps, derive_seed(seed, path + (3,)), oversample, power_iters, factorizer)
    return TwoLevelBlocks(a[:s, :s].copy(), a[s:, s:].copy(), off01, off10, s)


def _check_common(a: np.ndarray, eps: float, k: int) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"hierarchical compression needs a square matrix, got {a.shape}")
    if k < 1:
        raise ValidationError(f"rank must be >= 1, got {k}")
    if eps < 0:
        raise ValidationError("eps must be nonnegative")


def check_depth(n: int, depth: int) -> None:
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    if n < 2**depth:
        raise ValidationError(f"depth exceeds matrix size: n={n} < 2**{depth}")


def two_level_compress(
    a,
    eps: float = DEFAULT_EPS,
    k: int = 1,
    *,
    seed: SeedLike = 0,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    factorizer: str = "rsvd",
    path: tuple[int, ...] = (),
) -> TwoLevelBlocks:
    """Copy the diagonal blocks; factor the two off-diagonal blocks."""
    a = as_dense(a)
    _check_common(a, eps, k)
    if a.shape[0] < 2:
        raise DimensionError("two-level compression needs n >= 2")
    return _two_level(a, eps, k, path, seed, oversample, power_iters, factorizer)


def hss_compress(
    a,
    eps: float = DEFAULT_EPS,
    k: int = 1,
    depth: int = 1,
    *,
    seed: SeedLike = 0,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    factorizer: str = "rsvd",
) -> HssNode:
    """Recursive two-level compression, ``depth`` levels of factors deep.

    ``depth=1`` gives dense leaves right below the root.
    """
    a = as_dense(a)
    _check_common(a, eps, k)
    check_depth(a.shape[0], depth)
    return _hss(a, eps, k, depth, (), seed, oversample, power_iters, factorizer)


def _hss(a, eps, k, depth, path, seed, oversample, power_iters, factorizer) -> HssNode:
    blocks = _two_level(a, eps, k, path, seed, oversample, power_iters, factorizer)
    if depth == 1:
        c0, c1 = HssLeaf(blocks.d0), HssLeaf(blocks.d1)
    else:
        kc = child_rank(k)
        c0 = _hss(blocks.d0, eps, kc, depth - 1, path + (0,), seed, oversample, power_iters, factorizer)
        c1 = _hss(blocks.d1, eps, kc, depth - 1, path + (1,), seed, oversample, power_iters, factorizer)
    return HssNode(blocks.off01, blocks.off10, c0, c1, blocks.split, k, depth)


def cross_terms(node, xa: np.ndarray, xb: np.ndarray, counter: OpCounter | None):
    """``(U01 (R01 xb), U10 (R10 xa))`` for a node's off-diagonal factors."""
    if counter is not None:
        for f in (node.off01, node.off10):
            counter.add(f.r.size + f.u.size)
    return node.off01.u @ (node.off01.r @ xb), node.off10.u @ (node.off10.r @ xa)


def hss_matvec(t: HssTree, x, counter: OpCounter | None = None) -> np.ndarray:
    """Recursive product; off-diagonal blocks are applied in factored form.

    With a ``counter``, every scalar multiply-add is tallied (for a single
    right-hand side): ``m*n`` per dense leaf and ``k*(m+n)`` per factor.
    """
    x = as_vector(x, t.n)
    return _hss_apply(t, x, counter)


def _hss_apply(t: HssTree, x: np.ndarray, counter) -> np.ndarray:
    if isinstance(t, HssLeaf):
        if counter is not None:
            counter.add(t.d.size)
        return t.d @ x
    xa, xb = x[: t.split], x[t.split :]
    ya = _hss_apply(t.child0, xa, counter)
    yb = _hss_apply(t.child1, xb, counter)
    ca, cb = cross_terms(t, xa, xb, counter)
    return np.concatenate([ya + ca, yb + cb])


def _assemble(d0, d1, off01: LowRankFactor, off10: LowRankFactor) -> np.ndarray:
    return np.block([[d0, off01.to_dense()], [off10.to_dense(), d1]]).astype(np.float64)


def densify(t: HssTree) -> np.ndarray:
    """Full float64 matrix represented by the tree."""
    if isinstance(t, HssLeaf):
        return t.d.astype(np.float64)
    return _assemble(densify(t.child0), densify(t.child1), t.off01, t.off10)


def iter_nodes(t: HssTree):
    """Pre-order traversal of internal nodes and leaves."""
    yield t
    if isinstance(t, HssNode):
        yield from iter_nodes(t.child0)
        yield from iter_nodes(t.child1)

