"""``hislr`` command line: synth, compress, matvec, densify, sweep.

Exit codes: 0 success, 1 validation, 2 I/O or file format, 3 numerical
failure. Errors print one JSON object on stderr:
``{"error": <exception class>, "exit_code": <n>, "message": <text>}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DimensionError, HislrError
from .io import load_matrix, save_matrix
from .methods import HIERARCHICAL, METHODS, compress, f32, report
from .metrics import densify_model, model_matvec, model_shape
from .persist import load_model, save_model
from .sweep import SweepConfig, run_sweep, thread_count, write_outputs
from .synth import GENERATORS, generate


def _csv_list(kind):
    def parse(text):
        return [kind(v) for v in text.split(",") if v.strip()]
    return parse


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=False))


def cmd_synth(args) -> int:
    params = {"n": args.n, "seed": args.seed}
    if args.generator in ("banded", "banded-scrambled"):
        params["band"] = args.band
    elif args.generator == "spiked-lowrank":
        params.update(rank=args.rank, spikes=args.spikes)
    a, info = generate(args.generator, **params)
    out = Path(args.out or f"{args.generator}.hslr")
    save_matrix(a, out, args.dtype)
    sidecar = out.with_name(out.name + ".json")
    sidecar.write_text(json.dumps(info, sort_keys=True) + "\n")
    _emit({"output": str(out), "sidecar": str(sidecar), "rows": a.shape[0], "cols": a.shape[1]})
    return 0


def cmd_compress(args) -> int:
    w = load_matrix(args.input)
    depth = args.depth if args.method in HIERARCHICAL else None
    model = compress(w, args.method, args.p, args.rank, depth, args.eps, args.seed,
                     args.oversample, args.power_iters)
    save_model(model, args.output, args.dtype, meta={"method": args.method})
    _emit(report(w, model, args.method, args.p, args.rank, depth))
    return 0


def _read_vector(path, n: int) -> np.ndarray:
    v = load_matrix(path)
    if 1 not in v.shape:
        raise DimensionError(f"{path}: expected a vector, got a {v.shape[0]}x{v.shape[1]} matrix")
    v = v.ravel()
    if v.size != n:
        raise DimensionError(f"vector length {v.size} does not match model dimension {n}")
    return v


def cmd_matvec(args) -> int:
    model, _ = load_model(args.model)
    m, n = model_shape(model)
    x = _read_vector(args.vector, n)
    y = model_matvec(model, x)
    save_matrix(y.reshape(-1, 1), args.output)
    out = {"output": str(args.output), "rows": m}
    if args.check_dense is not None:
        dense = densify_model(model) if args.check_dense == "" else load_matrix(args.check_dense).astype(np.float64)
        if dense.shape != (m, n):
            raise DimensionError(f"dense check matrix {dense.shape} does not match model {(m, n)}")
        ref = dense @ x.astype(np.float64)
        denom = np.linalg.norm(ref)
        diff = np.linalg.norm(y - ref)
        out["relative_error"] = f32(diff / denom if denom > 0 else diff)
    _emit(out)
    return 0


def cmd_densify(args) -> int:
    model, _ = load_model(args.model)
    save_matrix(densify_model(model), args.output, args.dtype)
    _emit({"output": str(args.output)})
    return 0


def cmd_sweep(args) -> int:
    if args.config:
        cfg = SweepConfig.from_json(args.config)
        if args.output:
            cfg.output = args.output
    else:
        synth = None
        if args.synth:
            synth = {"generator": args.synth, "n": args.n, "seed": args.seed}
            if args.synth == "spiked-lowrank":
                synth.update(rank=args.synth_rank, spikes=args.spikes)
            elif args.synth in ("banded", "banded-scrambled"):
                synth["band"] = args.band
        cfg = SweepConfig(
            methods=args.methods, sparsity_percents=args.p, ranks=args.ranks, depths=args.depths,
            input=args.input, synth=synth, eps=args.eps, seed=args.seed,
            output=args.output or "sweep.csv", oversample=args.oversample, power_iters=args.power_iters,
        )
    rows = run_sweep(cfg, thread_count())
    summary = write_outputs(cfg, rows)
    _emit(summary)
    return 0 if summary["succeeded"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hislr", description="Sparse plus hierarchical low-rank matrix compression")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def compression_args(p):
        p.add_argument("--eps", type=float, default=1e-6, help="drop singular values <= eps")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--oversample", type=int, default=8)
        p.add_argument("--power-iters", type=int, default=2)

    s = sub.add_parser("synth", help="write a synthetic test matrix")
    s.add_argument("generator", choices=sorted(GENERATORS))
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--band", type=int, default=3)
    s.add_argument("--rank", type=int, default=8)
    s.add_argument("--spikes", type=int, default=16)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dtype", choices=("f32", "f16"), default="f32")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_synth)

    c = sub.add_parser("compress", help="compress a matrix file into a model file")
    c.add_argument("--method", choices=METHODS, required=True)
    c.add_argument("--p", type=float, default=0.0, help="percent of entries kept as spikes")
    c.add_argument("--rank", type=int, default=16)
    c.add_argument("--depth", type=int, default=2)
    c.add_argument("--dtype", choices=("f32", "f16"), default="f32")
    compression_args(c)
    c.add_argument("input")
    c.add_argument("output")
    c.set_defaults(func=cmd_compress)

    m = sub.add_parser("matvec", help="multiply a stored model by a vector")
    m.add_argument("model")
    m.add_argument("vector")
    m.add_argument("output")
    m.add_argument("--check-dense", nargs="?", const="", default=None, metavar="PATH",
                   help="compare against a dense matrix file (default: the densified model)")
    m.set_defaults(func=cmd_matvec)

    d = sub.add_parser("densify", help="write the dense matrix a model represents")
    d.add_argument("model")
    d.add_argument("output")
    d.add_argument("--dtype", choices=("f32", "f16"), default="f32")
    d.set_defaults(func=cmd_densify)

    w = sub.add_parser("sweep", help="run a method x sparsity x rank x depth grid")
    w.add_argument("--config", help="JSON file with SweepConfig fields")
    w.add_argument("--input")
    w.add_argument("--synth", choices=sorted(GENERATORS))
    w.add_argument("--n", type=int, default=256)
    w.add_argument("--band", type=int, default=3)
    w.add_argument("--synth-rank", type=int, default=8)
    w.add_argument("--spikes", type=int, default=16)
    w.add_argument("--methods", type=_csv_list(str), default=["shss", "shss-rcm", "ssvd", "srsvd"])
    w.add_argument("--p", type=_csv_list(float), default=[10.0, 20.0, 30.0])
    w.add_argument("--ranks", type=_csv_list(int), default=[32])
    w.add_argument("--depths", type=_csv_list(int), default=[2])
    w.add_argument("-o", "--output")
    compression_args(w)
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HislrError, OSError, np.linalg.LinAlgError) as exc:
        if isinstance(exc, HislrError):
            code = exc.exit_code
        else:
            code = 2 if isinstance(exc, OSError) else 3
        message = " ".join(str(exc).split())
        print(json.dumps({"error": type(exc).__name__, "exit_code": code, "message": message}), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
