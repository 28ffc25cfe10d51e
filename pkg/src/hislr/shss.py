"""Sparse plus hierarchical low rank, with optional RCM reordering per level.

At every internal node:

1. the largest-magnitude entries of the node's block are moved into a
   sparse spike matrix, stored in the block's own (unpermuted) coordinates;
2. with ``use_rcm``, the residual is symmetrically permuted by the RCM order
   of its pattern (entries with ``|v| > eps``);
3. the permuted residual is split, its off-diagonal blocks are factored and
   its diagonal blocks are recursed into at half the rank.

The node therefore represents ``S + P^T A_hat P`` where ``P`` is the
permutation matrix with ``P x = x[perm.forward]``. Seeds follow the same
tree-path schedule as :mod:`hislr.hss`, so ``p=0`` without RCM reproduces
:func:`hislr.hss.hss_compress` bit for bit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from .core import SparseMatrix, Permutation, as_dense, as_vector, sparse_matvec
from .errors import ValidationError
from .hss import (
    FACTORIZERS,
    HssLeaf,
    OpCounter,
    _check_common,
    _two_level,
    check_depth,
    child_rank,
    cross_terms,
)
from .rcm import apply_sym_perm, build_adjacency, rcm_order
from .slr import extract_above, extract_top_p
from .svd import DEFAULT_EPS, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS, LowRankFactor

SPIKE_RULES = ("percent", "threshold")


@dataclass(frozen=True)
class ShssConfig:
    p: float = 10.0
    k: int = 16
    depth: int = 2
    eps: float = DEFAULT_EPS
    use_rcm: bool = False
    seed: int = 0
    oversample: int = DEFAULT_OVERSAMPLE
    power_iters: int = DEFAULT_POWER_ITERS
    factorizer: str = "rsvd"
    spike_rule: str = "percent"
    # only read when spike_rule == "threshold"
    spike_tol: Optional[float] = None

    def validate(self, n: int) -> None:
        if not 0 <= self.p <= 100:
            raise ValidationError(f"p must lie in [0, 100], got {self.p}")
        if self.k < 1:
            raise ValidationError(f"rank must be >= 1, got {self.k}")
        if self.eps < 0:
            raise ValidationError("eps must be nonnegative")
        check_depth(n, self.depth)
        if self.factorizer not in FACTORIZERS:
            raise ValidationError(f"unknown factorizer {self.factorizer!r}")
        if self.spike_rule not in SPIKE_RULES:
            raise ValidationError(f"unknown spike rule {self.spike_rule!r}")
        if self.spike_rule == "threshold" and (self.spike_tol is None or self.spike_tol < 0):
            raise ValidationError("threshold spike rule needs a nonnegative spike_tol")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ShssNode:
    spikes: SparseMatrix
    perm: Optional[Permutation]
    off01: LowRankFactor
    off10: LowRankFactor
    child0: "ShssTree"
    child1: "ShssTree"
    split: int
    rank: int
    depth: int

    @property
    def n(self) -> int:
        return self.spikes.rows


ShssTree = Union[ShssNode, HssLeaf]


@dataclass(frozen=True)
class ShssModel:
    root: ShssNode
    config: ShssConfig
    shape: tuple[int, int]

    def to_dense(self) -> np.ndarray:
        return densify_shss(self)

    def matvec(self, x) -> np.ndarray:
        return shss_matvec(self, x)


def shss_compress(
    w,
    p: float = 10.0,
    k: int = 16,
    depth: int = 2,
    eps: float = DEFAULT_EPS,
    use_rcm: bool = False,
    seed: int = 0,
    **options,
) -> ShssModel:
    """Compress a square matrix; ``options`` are further :class:`ShssConfig` fields."""
    w = as_dense(w)
    config = ShssConfig(p=p, k=k, depth=depth, eps=eps, use_rcm=use_rcm, seed=seed, **options)
    _check_common(w, eps, k)
    config.validate(w.shape[0])
    root = _compress_node(w, config.k, config.depth, (), config)
    return ShssModel(root, config, w.shape)


def _extract(block: np.ndarray, cfg: ShssConfig):
    if cfg.spike_rule == "threshold":
        return extract_above(block, cfg.spike_tol)
    return extract_top_p(block, cfg.p)


def _compress_node(block, k, depth, path, cfg: ShssConfig) -> ShssNode:
    spikes, residual = _extract(block, cfg)
    perm = None
    if cfg.use_rcm:
        perm = rcm_order(build_adjacency(residual, cfg.eps))
        residual = apply_sym_perm(residual, perm)
    blocks = _two_level(residual, cfg.eps, k, path, cfg.seed, cfg.oversample, cfg.power_iters, cfg.factorizer)
    if depth == 1:
        c0, c1 = HssLeaf(blocks.d0), HssLeaf(blocks.d1)
    else:
        kc = child_rank(k)
        c0 = _compress_node(blocks.d0, kc, depth - 1, path + (0,), cfg)
        c1 = _compress_node(blocks.d1, kc, depth - 1, path + (1,), cfg)
    return ShssNode(spikes, perm, blocks.off01, blocks.off10, c0, c1, blocks.split, k, depth)


def shss_matvec(m: ShssModel, x, counter: OpCounter | None = None) -> np.ndarray:
    """``y = S x + P^T (A_hat (P x))`` applied recursively at every node."""
    x = as_vector(x, m.shape[1])
    return _apply(m.root, x, counter)


def _apply(t: ShssTree, x: np.ndarray, counter) -> np.ndarray:
    if isinstance(t, HssLeaf):
        if counter is not None:
            counter.add(t.d.size)
        return t.d @ x
    y_s = sparse_matvec(t.spikes, x)
    if counter is not None:
        counter.add(t.spikes.nnz)
    xs = x if t.perm is None else x[t.perm.forward]
    xa, xb = xs[: t.split], xs[t.split :]
    ya = _apply(t.child0, xa, counter)
    yb = _apply(t.child1, xb, counter)
    ca, cb = cross_terms(t, xa, xb, counter)
    y_shuffled = np.concatenate([ya + ca, yb + cb])
    if t.perm is None:
        return y_s + y_shuffled
    y_hss = np.empty_like(y_shuffled)
    y_hss[t.perm.forward] = y_shuffled
    return y_s + y_hss


def _densify_tree(t: ShssTree) -> np.ndarray:
    if isinstance(t, HssLeaf):
        return t.d.astype(np.float64)
    hat = np.block(
        [
            [_densify_tree(t.child0), t.off01.to_dense()],
            [t.off10.to_dense(), _densify_tree(t.child1)],
        ]
    )
    if t.perm is None:
        out = hat
    else:
        out = np.empty_like(hat)
        out[np.ix_(t.perm.forward, t.perm.forward)] = hat
    return out + t.spikes.to_dense().astype(np.float64)


def densify_shss(m: ShssModel) -> np.ndarray:
    return _densify_tree(m.root)


def iter_shss_nodes(t: ShssTree):
    yield t
    if isinstance(t, ShssNode):
        yield from iter_shss_nodes(t.child0)
        yield from iter_shss_nodes(t.child1)
