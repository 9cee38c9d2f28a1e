"""Command line front end: ``freqdir gen|sketch|merge|eval|bench``."""
from __future__ import annotations

import argparse
import os
import sys
import time

from . import bench
from .data import SyntheticSpec, gen_synthetic, read_matrix, write_matrix
from .fd import merge
from .metrics import DegenerateError, ErrorReport, evaluate
from .sketchfile import SketchFile


def _refuse_overwrite(path: str, force: bool) -> None:
    if os.path.exists(path) and not force:
        raise SystemExit(f"error: {path} exists (use --force to overwrite)")


def cmd_gen(args) -> int:
    _refuse_overwrite(args.out, args.force)
    try:
        spec = SyntheticSpec(n=args.n, d=args.d, m=args.m, zeta=args.zeta, seed=args.seed)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}")
    n = write_matrix(args.out, gen_synthetic(spec), fmt=args.format, header=args.header)
    print(f"wrote {n}x{spec.d} matrix to {args.out}")
    return 0


def cmd_sketch(args) -> int:
    _refuse_overwrite(args.out, args.force)
    t_io = time.perf_counter()
    stream = read_matrix(args.input, fmt=args.format, header=args.header)
    try:
        sketcher = bench.make_sketcher(args.algo, args.ell, stream.d, args.seed)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}")
    b, secs = bench.run_sketch(sketcher, stream.blocks())
    record = SketchFile.from_sketch(sketcher, kind=args.algo)
    record.write(args.out)
    io_secs = time.perf_counter() - t_io - secs
    rate = record.rows_seen / secs if secs > 0 else float("inf")
    print(f"algo={args.algo} ell={args.ell} rows={record.rows_seen} d={record.d} "
          f"seconds={secs:.6f} rows_per_s={rate:.1f} io_seconds={io_secs:.6f} delta={record.delta!r}")
    return 0


def cmd_merge(args) -> int:
    _refuse_overwrite(args.out, args.force)
    records = [SketchFile.read(p) for p in args.inputs]
    first = records[0]
    for path, rec in zip(args.inputs, records):
        if (rec.ell, rec.d) != (first.ell, first.d):
            raise SystemExit(f"error: {path} has ell={rec.ell}, d={rec.d}; expected ell={first.ell}, d={first.d}")
        if not rec.is_fd:
            raise SystemExit(f"error: {path} holds a {rec.kind!r} sketch; only Frequent Directions sketches merge")
    acc = records[0].to_sketch()
    for rec in records[1:]:
        acc = merge(acc, rec.to_sketch())
    out = SketchFile.from_sketch(acc, kind="fd-fast")
    out.write(args.out)
    print(f"merged {len(records)} sketches: rows={out.rows_seen} delta={out.delta!r}")
    return 0


def cmd_eval(args) -> int:
    a = read_matrix(args.matrix, fmt=args.format, header=args.header).to_array()
    print(ErrorReport.csv_header())
    status = 0
    for path in args.sketch:
        rec = SketchFile.read(path)
        if rec.d != a.shape[1]:
            raise SystemExit(f"error: {path} has d={rec.d}, matrix has {a.shape[1]} columns")
        try:
            rep = evaluate(a, rec.matrix, args.k, rec.kind, rec.ell, seed=args.seed)
        except DegenerateError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            status = 1
            continue
        print(rep.csv_row())
    return status


def cmd_bench(args) -> int:
    try:
        cfg = bench.BenchConfig.from_file(args.config)
    except bench.ConfigError as exc:
        raise SystemExit(f"error: {args.config}: {exc}")
    return bench.main_bench(cfg, args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freqdir", description="Frequent Directions sketching and benchmarks.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic signal-plus-noise matrix")
    g.add_argument("--n", type=int, default=10000)
    g.add_argument("--d", type=int, default=1000)
    g.add_argument("--m", type=int, default=10, help="signal dimension")
    g.add_argument("--zeta", "--eta", dest="zeta", type=float, default=10.0, help="noise attenuation")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--format", choices=["fdmx", "csv"])
    g.add_argument("--header", action="store_true", help="write a csv header line")
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sketch", help="sketch a matrix file into an FDSK file")
    s.add_argument("--algo", choices=bench.ALGORITHMS, default="fd-fast")
    s.add_argument("--ell", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=["fdmx", "csv"])
    s.add_argument("--header", action="store_true", help="csv input has a header line")
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_sketch)

    m = sub.add_parser("merge", help="merge Frequent Directions sketches (left fold)")
    m.add_argument("inputs", nargs="+")
    m.add_argument("--out", required=True)
    m.add_argument("--force", action="store_true")
    m.set_defaults(func=cmd_merge)

    e = sub.add_parser("eval", help="error measures of sketches against the full matrix")
    e.add_argument("--matrix", required=True)
    e.add_argument("--sketch", required=True, action="append")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--seed", type=int, default=0, help="label for the seed column")
    e.add_argument("--format", choices=["fdmx", "csv"])
    e.add_argument("--header", action="store_true")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run an experiment grid from a config file")
    b.add_argument("config")
    b.add_argument("--out", help="CSV output path (overrides the config)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "merge" and len(args.inputs) < 2:
        raise SystemExit("error: merge needs at least two sketches")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
