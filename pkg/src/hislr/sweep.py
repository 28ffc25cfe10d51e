"""Cartesian sweep over methods, sparsity, rank and depth with CSV output.

CSV columns, in this order and no others::

    method,p,rank,depth,stored_values,index_overhead,compression_ratio,
    frobenius_rel,wall_ms,error

``error`` is empty for successful cells; failed cells leave the numeric
columns empty. Rows follow grid order (method, then p, rank, depth) no
matter which cell finishes first. Every column except ``wall_ms`` is
deterministic for a fixed configuration.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import HislrError, ValidationError
from .io import load_matrix
from .methods import METHODS, compress, f32, report, validate
from .synth import generate

CSV_COLUMNS = (
    "method", "p", "rank", "depth", "stored_values", "index_overhead",
    "compression_ratio", "frobenius_rel", "wall_ms", "error",
)


@dataclass
class SweepConfig:
    methods: list
    sparsity_percents: list
    ranks: list
    depths: list
    input: str | None = None
    # generator name plus keyword parameters, used when input is None
    synth: dict | None = None
    eps: float = 1e-6
    seed: int = 0
    output: str = "sweep.csv"
    oversample: int = 8
    power_iters: int = 2

    def __post_init__(self):
        for name in ("methods", "sparsity_percents", "ranks", "depths"):
            if not getattr(self, name):
                raise ValidationError(f"sweep grid {name} is empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValidationError(f"unknown methods {unknown}")
        if (self.input is None) == (self.synth is None):
            raise ValidationError("sweep needs exactly one of input or synth")

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        return cls(**json.loads(Path(path).read_text()))

    def cells(self):
        return list(itertools.product(self.methods, self.sparsity_percents, self.ranks, self.depths))


def load_input(cfg: SweepConfig) -> np.ndarray:
    if cfg.input is not None:
        return load_matrix(cfg.input)
    params = dict(cfg.synth)
    name = params.pop("generator")
    return generate(name, **params)[0]


def thread_count() -> int:
    raw = os.environ.get("HISLR_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"HISLR_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValidationError("HISLR_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _run_cell(w, cfg: SweepConfig, cell) -> dict:
    method, p, rank, depth = cell
    row = {"method": method, "p": f32(p), "rank": int(rank), "depth": int(depth)}
    start = time.perf_counter()
    try:
        model = compress(w, method, p, rank, depth, cfg.eps, cfg.seed, cfg.oversample, cfg.power_iters)
        rep = report(w, model, method, p, rank, depth)
    except (HislrError, np.linalg.LinAlgError) as exc:
        row.update({c: "" for c in CSV_COLUMNS[4:9]})
        row["wall_ms"] = f32((time.perf_counter() - start) * 1e3)
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row.update({k: rep[k] for k in ("stored_values", "index_overhead", "compression_ratio", "frobenius_rel")})
    row["wall_ms"] = f32((time.perf_counter() - start) * 1e3)
    row["error"] = ""
    return row


def run_sweep(cfg: SweepConfig, threads: int | None = None) -> list[dict]:
    """Validate every cell, then run them all; returns rows in grid order."""
    w = load_input(cfg)
    cells = cfg.cells()
    for method, p, rank, depth in cells:
        try:
            validate(w.shape, method, p, rank, depth, cfg.eps, cfg.oversample)
        except ValidationError as exc:
            raise ValidationError(f"invalid cell ({method}, p={p}, rank={rank}, depth={depth}): {exc}") from None
    threads = thread_count() if threads is None else threads
    if threads <= 1:
        return [_run_cell(w, cfg, c) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: _run_cell(w, cfg, c), cells))


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def summarize(cfg: SweepConfig, rows: list[dict]) -> dict:
    ok = [r for r in rows if not r["error"]]
    best = {}
    for r in ok:
        cur = best.get(r["method"])
        if cur is None or r["frobenius_rel"] < cur["frobenius_rel"]:
            best[r["method"]] = {k: r[k] for k in ("p", "rank", "depth", "frobenius_rel", "compression_ratio")}
    return {
        "config": asdict(cfg),
        "cells": len(rows),
        "succeeded": len(ok),
        "failed": len(rows) - len(ok),
        "best_by_method": best,
    }


def write_outputs(cfg: SweepConfig, rows: list[dict]) -> dict:
    """Write the CSV and its ``.json`` summary next to it; return the summary."""
    out = Path(cfg.output)
    out.write_text(rows_to_csv(rows))
    summary = summarize(cfg, rows)
    out.with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
