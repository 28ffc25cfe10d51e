"""Name-based dispatch over every compression method, plus report assembly."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ValidationError
from .hss import check_depth, hss_compress
from .metrics import error_report, storage_count
from .shss import shss_compress
from .slr import rsvd_model, sparse_plus_rsvd, sparse_plus_svd, svd_model
from .svd import DEFAULT_EPS, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS

METHODS = ("svd", "rsvd", "ssvd", "srsvd", "hss", "shss", "shss-rcm")
HIERARCHICAL = ("hss", "shss", "shss-rcm")
REPORT_FIELDS = (
    "method", "p", "rank", "depth", "stored_values", "index_overhead",
    "compression_ratio", "frobenius_abs", "frobenius_rel", "max_abs",
)


def f32(x) -> float:
    """Round to float32 and back; this is the value printed in reports."""
    return float(np.float32(x))


def validate(shape, method: str, p: float, rank: int, depth: int | None,
             eps: float = DEFAULT_EPS, oversample: int = DEFAULT_OVERSAMPLE) -> None:
    """Check every precondition of ``method`` on a matrix of ``shape`` without computing."""
    m, n = shape
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}, expected one of {list(METHODS)}")
    if method in HIERARCHICAL:
        if m != n:
            raise DimensionError(f"{method} needs a square matrix, got {m}x{n}")
        check_depth(n, depth if depth is not None else 0)
    if not 0 <= p <= 100:
        raise ValidationError(f"p must lie in [0, 100], got {p}")
    if rank < 1:
        raise ValidationError(f"rank must be >= 1, got {rank}")
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    if oversample < 0:
        raise ValidationError("oversample must be nonnegative")
    if method in ("svd", "ssvd") and rank > min(m, n):
        raise ValidationError(f"rank {rank} exceeds min(m, n)={min(m, n)}")
    if method in ("rsvd", "srsvd") and rank + oversample > min(m, n):
        raise ValidationError(f"rank+oversample={rank + oversample} exceeds min(m, n)={min(m, n)}")


def compress(w, method: str, p: float = 0.0, rank: int = 16, depth: int | None = 2,
             eps: float = DEFAULT_EPS, seed: int = 0, oversample: int = DEFAULT_OVERSAMPLE,
             power_iters: int = DEFAULT_POWER_ITERS):
    validate(np.shape(w), method, p, rank, depth, eps, oversample)
    if method == "svd":
        return svd_model(w, rank, eps)
    if method == "rsvd":
        return rsvd_model(w, rank, oversample, power_iters, eps, seed)
    if method == "ssvd":
        return sparse_plus_svd(w, p, rank, eps)
    if method == "srsvd":
        return sparse_plus_rsvd(w, p, rank, oversample, power_iters, eps, seed)
    if method == "hss":
        return hss_compress(w, eps, rank, depth, seed=seed, oversample=oversample, power_iters=power_iters)
    return shss_compress(w, p, rank, depth, eps, use_rcm=(method == "shss-rcm"), seed=seed,
                         oversample=oversample, power_iters=power_iters)


def report(w, model, method: str, p: float, rank: int, depth: int | None) -> dict:
    """The JSON report: storage counts and reconstruction error, fixed field order."""
    st = storage_count(model)
    err = error_report(w, model)
    return {
        "method": method,
        "p": f32(p),
        "rank": int(rank),
        "depth": None if depth is None else int(depth),
        "stored_values": st.stored_values,
        "index_overhead": st.index_overhead,
        "compression_ratio": f32(st.compression_ratio),
        "frobenius_abs": f32(err.frobenius_abs),
        "frobenius_rel": f32(err.frobenius_rel),
        "max_abs": f32(err.max_abs),
    }
