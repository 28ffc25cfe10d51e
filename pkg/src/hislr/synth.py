"""Synthetic test matrices: banded, scrambled banded, spiked low rank, Gaussian.

Each generator returns ``(matrix, info)`` where ``info`` is a JSON-ready
record of the parameters plus anything needed to undo the construction
(the scrambling permutation, spike positions).
"""

from __future__ import annotations

import numpy as np

from .core import DTYPE, Permutation, make_rng
from .errors import ValidationError
from .rcm import apply_sym_perm


def banded(n: int, band: int = 3, seed: int = 0):
    """Entries with ``|i - j| <= band`` drawn as ``±(0.5 + |N(0,1)|)``, others zero."""
    if n < 1 or band < 0:
        raise ValidationError("banded needs n >= 1 and band >= 0")
    rng = make_rng(seed)
    vals = rng.standard_normal((n, n))
    vals = np.sign(vals) * (0.5 + np.abs(vals))
    i, j = np.indices((n, n))
    a = np.where(np.abs(i - j) <= band, vals, 0.0).astype(DTYPE)
    return a, {"generator": "banded", "n": n, "band": band, "seed": seed}


def banded_scrambled(n: int, band: int = 3, seed: int = 0):
    """A banded matrix conjugated by a random permutation ``perm``.

    ``apply_sym_perm(out, perm.inv())`` recovers the banded matrix.
    """
    a, _ = banded(n, band, seed)
    perm = Permutation(make_rng(seed + 1).permutation(n))
    info = {"generator": "banded-scrambled", "n": n, "band": band, "seed": seed,
            "perm": perm.forward.tolist()}
    return apply_sym_perm(a, perm), info


def spiked_lowrank(n: int, rank: int = 8, spikes: int = 16, seed: int = 0, spike_scale: float = 10.0):
    """Rank-``rank`` matrix plus ``spikes`` isolated large entries.

    The low-rank part has orthonormal factors and singular values spaced
    evenly in [1, 2] times ``sqrt(n)``. Spikes are added at distinct random
    positions with magnitude ``spike_scale`` times the largest low-rank
    entry, so they are exactly the top-``spikes`` entries by magnitude.
    """
    if not 1 <= rank <= n:
        raise ValidationError(f"rank must lie in [1, {n}]")
    if not 0 <= spikes <= n * n:
        raise ValidationError("spike count out of range")
    rng = make_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((n, rank)))
    v, _ = np.linalg.qr(rng.standard_normal((n, rank)))
    sig = np.sqrt(n) * np.linspace(2.0, 1.0, rank)
    low = (u * sig) @ v.T
    flat = rng.choice(n * n, size=spikes, replace=False)
    rows, cols = np.divmod(np.sort(flat), n)
    mag = spike_scale * np.abs(low).max() * (1.0 + rng.random(spikes))
    values = mag * rng.choice([-1.0, 1.0], size=spikes)
    a = low.copy()
    a[rows, cols] += values
    a = a.astype(DTYPE)
    info = {
        "generator": "spiked-lowrank", "n": n, "rank": rank, "spikes": spikes, "seed": seed,
        "spike_rows": rows.tolist(), "spike_cols": cols.tolist(),
        "spike_values": [float(x) for x in values.astype(DTYPE)],
    }
    return a, info


def gaussian(n: int, seed: int = 0):
    a = make_rng(seed).standard_normal((n, n)).astype(DTYPE)
    return a, {"generator": "gaussian", "n": n, "seed": seed}


GENERATORS = {
    "banded": banded,
    "banded-scrambled": banded_scrambled,
    "spiked-lowrank": spiked_lowrank,
    "gaussian": gaussian,
}


def generate(name: str, **params):
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValidationError(f"unknown generator {name!r}, expected one of {sorted(GENERATORS)}") from None
    return gen(**params)
