"""Truncated and randomized SVD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DTYPE, SeedLike, as_dense, as_vector, gaussian_matrix
from .errors import NumericalError, ValidationError

DEFAULT_EPS = 1e-6
DEFAULT_OVERSAMPLE = 8
DEFAULT_POWER_ITERS = 2


@dataclass(frozen=True)
class LowRankFactor:
    """``u @ r`` with ``u`` of shape (m, k) and ``r`` of shape (k, n)."""

    u: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=DTYPE)
        r = np.asarray(self.r, dtype=DTYPE)
        if u.ndim != 2 or r.ndim != 2 or u.shape[1] != r.shape[0]:
            raise ValidationError(f"factor shapes {u.shape} and {r.shape} do not conform")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "r", r)

    @classmethod
    def zero(cls, m: int, n: int) -> "LowRankFactor":
        return cls(np.zeros((m, 0), dtype=DTYPE), np.zeros((0, n), dtype=DTYPE))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.u.shape[0], self.r.shape[1])

    @property
    def rank(self) -> int:
        return self.u.shape[1]

    def to_dense(self) -> np.ndarray:
        return self.u.astype(np.float64) @ self.r.astype(np.float64)

    def matvec(self, x) -> np.ndarray:
        x = as_vector(x, self.shape[1])
        return self.u @ (self.r @ x)

    def __eq__(self, other):
        if not isinstance(other, LowRankFactor):
            return NotImplemented
        return np.array_equal(self.u, other.u) and np.array_equal(self.r, other.r)

    __hash__ = None


@dataclass(frozen=True)
class SvdResult:
    """Top-``k`` singular triplets; ``sigma[achieved_rank:]`` are zero."""

    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray
    achieved_rank: int

    def reconstruct(self) -> np.ndarray:
        r = self.achieved_rank
        u = self.u[:, :r].astype(np.float64)
        return (u * self.sigma[:r].astype(np.float64)) @ self.vt[:r].astype(np.float64)

    def factor(self) -> LowRankFactor:
        """Export the kept triplets with sigma absorbed into the left factor.

        The right factor keeps orthonormal rows.
        """
        r = self.achieved_rank
        u = self.u[:, :r].astype(np.float64) * self.sigma[:r].astype(np.float64)
        return LowRankFactor(u, self.vt[:r])


def _finish(u, s, vt, k, eps) -> SvdResult:
    u, s, vt = u[:, :k], s[:k].copy(), vt[:k]
    keep = s > eps
    s[~keep] = 0.0
    return SvdResult(u.astype(DTYPE), s.astype(DTYPE), vt.astype(DTYPE), int(keep.sum()))


def _svd(a: np.ndarray):
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from None


def truncated_svd(a, k: int, eps: float = DEFAULT_EPS) -> SvdResult:
    """Best rank-``k`` approximation from a full LAPACK SVD.

    Singular values ``<= eps`` are zeroed and not counted in
    ``achieved_rank``.
    """
    a = as_dense(a)
    m, n = a.shape
    if not 1 <= k <= min(m, n):
        raise ValidationError(f"rank {k} outside [1, {min(m, n)}]")
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    u, s, vt = _svd(a.astype(np.float64))
    return _finish(u, s, vt, k, eps)


def _orth(y: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(y)
    return q


def randomized_svd(
    a,
    k: int,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    eps: float = DEFAULT_EPS,
    seed: SeedLike = 0,
) -> SvdResult:
    """Sketch-and-solve SVD with a Gaussian test matrix of ``k + oversample`` columns.

    Each power iteration replaces the sketch ``Y`` by ``A (A^T Q)`` where
    ``Q`` is an orthonormal basis of ``Y``; both intermediate products are
    re-orthonormalized.
    """
    a = as_dense(a)
    m, n = a.shape
    ell = k + oversample
    if k < 1 or oversample < 0:
        raise ValidationError(f"need k >= 1 and oversample >= 0, got k={k}, oversample={oversample}")
    if ell > min(m, n):
        raise ValidationError(f"sketch size k+q={ell} exceeds min(m, n)={min(m, n)}")
    if power_iters < 0:
        raise ValidationError("power_iters must be nonnegative")
    if eps < 0:
        raise ValidationError("eps must be nonnegative")

    a64 = a.astype(np.float64)
    omega = gaussian_matrix(n, ell, seed).astype(np.float64)
    y = a64 @ omega
    for _ in range(power_iters):
        q = _orth(y)
        z = _orth(a64.T @ q)
        y = a64 @ z
    q = _orth(y)
    b = q.T @ a64
    ub, s, vt = _svd(b)
    return _finish(q @ ub, s, vt, k, eps)
