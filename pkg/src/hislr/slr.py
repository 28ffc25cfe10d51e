"""Sparse plus low-rank: largest-magnitude spikes kept exactly, SVD on the rest."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import DTYPE, SeedLike, SparseMatrix, as_dense, as_vector, sparse_matvec
from .errors import DimensionError, ValidationError
from .svd import (
    DEFAULT_EPS,
    DEFAULT_OVERSAMPLE,
    DEFAULT_POWER_ITERS,
    LowRankFactor,
    randomized_svd,
    truncated_svd,
)

METHODS = ("svd", "rsvd", "ssvd", "srsvd")


def spike_count(p: float, size: int) -> int:
    """``round(p/100 * size)`` with halves rounded up, computed exactly."""
    frac = Fraction(str(p)) * size / 100
    return int(math.floor(frac + Fraction(1, 2)))


def _top_indices(mag: np.ndarray, n_keep: int) -> np.ndarray:
    """Flat indices of the ``n_keep`` largest magnitudes.

    Ties at the cut-off are resolved toward the smaller flat (row-major)
    index, which is the same as a stable full sort by descending magnitude.
    """
    size = mag.size
    if n_keep <= 0:
        return np.zeros(0, dtype=np.int64)
    if n_keep >= size:
        return np.arange(size)
    thresh = np.partition(mag, size - n_keep)[size - n_keep]
    above = np.flatnonzero(mag > thresh)
    at = np.flatnonzero(mag == thresh)
    return np.sort(np.concatenate([above, at[: n_keep - above.size]]))


def extract_top_p(w, p: float) -> tuple[SparseMatrix, np.ndarray]:
    """Split ``w`` into spikes (the top ``p`` percent by magnitude) and residual.

    Selection is global over all ``m*n`` entries. Selected entries that are
    exactly zero are not stored, so the spike count equals
    :func:`spike_count` whenever ``w`` has no zeros among the selected
    positions.

    Returns
    -------
    spikes : SparseMatrix
        Original values at the selected positions.
    residual : ndarray
        ``w`` with the selected positions set to zero.
    """
    w = as_dense(w)
    if not 0 <= p <= 100:
        raise ValidationError(f"p must lie in [0, 100], got {p}")
    flat = w.ravel()
    idx = _top_indices(np.abs(flat), spike_count(p, flat.size))
    rows, cols = np.divmod(idx, w.shape[1])
    spikes = SparseMatrix.from_entries(w.shape[0], w.shape[1], rows, cols, flat[idx])
    residual = w.copy()
    residual.ravel()[idx] = 0
    return spikes, residual


def extract_above(w, tol: float) -> tuple[SparseMatrix, np.ndarray]:
    """Threshold variant: every entry with ``|w| > tol`` becomes a spike."""
    w = as_dense(w)
    if tol < 0:
        raise ValidationError("threshold must be nonnegative")
    mask = np.abs(w) > tol
    rows, cols = np.nonzero(mask)
    spikes = SparseMatrix(w.shape[0], w.shape[1], rows, cols, w[rows, cols])
    residual = np.where(mask, DTYPE(0), w)
    return spikes, residual


@dataclass(frozen=True)
class SparseLowRank:
    """``spikes + factor.u @ factor.r``.

    ``method`` is one of ``svd``/``rsvd`` (no spikes) or ``ssvd``/``srsvd``.
    """

    spikes: SparseMatrix
    factor: LowRankFactor
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}")
        if self.spikes.shape != self.factor.shape:
            raise DimensionError(f"spikes {self.spikes.shape} and factor {self.factor.shape} differ")

    @property
    def shape(self) -> tuple[int, int]:
        return self.spikes.shape

    def to_dense(self) -> np.ndarray:
        return self.spikes.to_dense().astype(np.float64) + self.factor.to_dense()

    def matvec(self, x) -> np.ndarray:
        return slr_matvec(self, x)


def sparse_plus_svd(w, p: float, k: int, eps: float = DEFAULT_EPS) -> SparseLowRank:
    spikes, residual = extract_top_p(w, p)
    res = truncated_svd(residual, k, eps)
    return SparseLowRank(spikes, res.factor(), "ssvd", {"p": p, "k": k, "eps": eps})


def sparse_plus_rsvd(
    w,
    p: float,
    k: int,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    eps: float = DEFAULT_EPS,
    seed: SeedLike = 0,
) -> SparseLowRank:
    spikes, residual = extract_top_p(w, p)
    res = randomized_svd(residual, k, oversample, power_iters, eps, seed)
    params = {"p": p, "k": k, "q": oversample, "power_iters": power_iters, "eps": eps, "seed": seed}
    return SparseLowRank(spikes, res.factor(), "srsvd", params)


def svd_model(w, k: int, eps: float = DEFAULT_EPS) -> SparseLowRank:
    """Plain truncated SVD wrapped with an empty spike matrix."""
    w = as_dense(w)
    res = truncated_svd(w, k, eps)
    return SparseLowRank(SparseMatrix.empty(*w.shape), res.factor(), "svd", {"k": k, "eps": eps})


def rsvd_model(
    w,
    k: int,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    eps: float = DEFAULT_EPS,
    seed: SeedLike = 0,
) -> SparseLowRank:
    w = as_dense(w)
    res = randomized_svd(w, k, oversample, power_iters, eps, seed)
    params = {"k": k, "q": oversample, "power_iters": power_iters, "eps": eps, "seed": seed}
    return SparseLowRank(SparseMatrix.empty(*w.shape), res.factor(), "rsvd", params)


def slr_matvec(m: SparseLowRank, x) -> np.ndarray:
    """``spikes @ x + u @ (r @ x)`` without forming ``u @ r``."""
    x = as_vector(x, m.shape[1])
    return sparse_matvec(m.spikes, x) + m.factor.matvec(x)
