"""Storage accounting and reconstruction error for every model type.

Only value scalars count as parameters. Integer indices (two per spike,
one per permutation entry) are reported separately as ``index_overhead``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import as_dense
from .errors import DimensionError, ValidationError
from .hss import HssLeaf, HssNode, densify, hss_matvec, iter_nodes
from .shss import ShssModel, ShssNode, densify_shss, iter_shss_nodes, shss_matvec
from .slr import SparseLowRank, slr_matvec

ZERO_NORM = 1e-12


@dataclass(frozen=True)
class StorageReport:
    dense_params: int
    stored_values: int
    index_overhead: int

    @property
    def compression_ratio(self) -> float:
        if self.stored_values == 0:
            return float("inf")
        return self.dense_params / self.stored_values

    def to_dict(self) -> dict:
        return {**asdict(self), "compression_ratio": self.compression_ratio}


@dataclass(frozen=True)
class ErrorReport:
    frobenius_abs: float
    frobenius_rel: float
    max_abs: float
    # True when ||W||_F < 1e-12 and frobenius_rel holds the absolute error
    zero_norm: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def model_shape(model) -> tuple[int, int]:
    if isinstance(model, (SparseLowRank, ShssModel)):
        return tuple(model.shape)
    if isinstance(model, (HssNode, HssLeaf)):
        return (model.n, model.n)
    raise ValidationError(f"not a compressed model: {type(model).__name__}")


def densify_model(model) -> np.ndarray:
    if isinstance(model, SparseLowRank):
        return model.to_dense()
    if isinstance(model, ShssModel):
        return densify_shss(model)
    if isinstance(model, (HssNode, HssLeaf)):
        return densify(model)
    raise ValidationError(f"not a compressed model: {type(model).__name__}")


def model_matvec(model, x) -> np.ndarray:
    if isinstance(model, SparseLowRank):
        return slr_matvec(model, x)
    if isinstance(model, ShssModel):
        return shss_matvec(model, x)
    if isinstance(model, (HssNode, HssLeaf)):
        return hss_matvec(model, x)
    raise ValidationError(f"not a compressed model: {type(model).__name__}")


def _node_counts(node) -> tuple[int, int]:
    """(values, indices) stored at one tree node, children excluded."""
    if isinstance(node, HssLeaf):
        return node.d.size, 0
    values = sum(f.u.size + f.r.size for f in (node.off01, node.off10))
    indices = 0
    if isinstance(node, ShssNode):
        values += node.spikes.nnz
        indices += 2 * node.spikes.nnz
        if node.perm is not None:
            indices += len(node.perm)
    return values, indices


def node_storage(model) -> list[tuple[int, int]]:
    """Per-node (values, indices) in pre-order."""
    if isinstance(model, ShssModel):
        return [_node_counts(t) for t in iter_shss_nodes(model.root)]
    if isinstance(model, (HssNode, HssLeaf)):
        return [_node_counts(t) for t in iter_nodes(model)]
    if isinstance(model, SparseLowRank):
        f = model.factor
        return [(model.spikes.nnz + f.u.size + f.r.size, 2 * model.spikes.nnz)]
    raise ValidationError(f"not a compressed model: {type(model).__name__}")


def storage_count(model) -> StorageReport:
    m, n = model_shape(model)
    counts = node_storage(model)
    return StorageReport(
        dense_params=m * n,
        stored_values=sum(v for v, _ in counts),
        index_overhead=sum(i for _, i in counts),
    )


def error_report(w, model) -> ErrorReport:
    w = as_dense(w)
    if w.shape != model_shape(model):
        raise DimensionError(f"matrix {w.shape} does not match model {model_shape(model)}")
    w64 = w.astype(np.float64)
    diff = w64 - densify_model(model)
    fro = float(np.linalg.norm(diff))
    norm = float(np.linalg.norm(w64))
    zero = norm < ZERO_NORM
    return ErrorReport(
        frobenius_abs=fro,
        frobenius_rel=fro if zero else fro / norm,
        max_abs=float(np.abs(diff).max()),
        zero_norm=zero,
    )
