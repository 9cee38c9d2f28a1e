"""Benchmark harness: sketch a matrix with several algorithms and sketch sizes.

Config files are flat ``key = value`` text.  ``#`` starts a comment, list
values are comma separated and ``start:stop:step`` expands to an inclusive
integer range.  Recognized keys::

    input       = synthetic | <path to .fdmx or .csv>
    header      = false          # csv input has a header line
    n, d, m     = 10000, 1000, 10   (synthetic only; n and d may be lists)
    zeta        = 10             # alias: eta
    algorithms  = fd-fast, sample, hash, project, naive
    ell         = 10:100:10
    k           = 10
    trials      = 5
    seed        = 0
    evaluate    = true           # false: timings only
    out         = results.csv
"""
from __future__ import annotations

import os
import statistics
import sys
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import BASELINES
from .data import SyntheticSpec, gen_synthetic, read_matrix
from .fd import FrequentDirections, Variant
from .metrics import CSV_COLUMNS, ErrorReport, evaluate, top_eigenvalues

FD_ALGOS = {"fd": Variant.SIMPLE, "fd-fast": Variant.FAST, "fd-bounded": Variant.BOUNDED}
ALGORITHMS = tuple(FD_ALGOS) + tuple(BASELINES)
BENCH_COLUMNS = CSV_COLUMNS + ("n", "d")


def make_sketcher(algo: str, ell: int, d: int, seed: int = 0):
    if algo in FD_ALGOS:
        return FrequentDirections(ell, d, FD_ALGOS[algo])
    if algo in BASELINES:
        return BASELINES[algo](ell, d, seed)
    raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")


def run_sketch(sketcher, blocks) -> tuple[np.ndarray, float]:
    """Feed blocks to a sketcher; returns the sketch and seconds spent in update/finalize only."""
    spent = 0.0
    for block in blocks:
        t0 = time.perf_counter()
        sketcher.extend(block)
        spent += time.perf_counter() - t0
    t0 = time.perf_counter()
    b = sketcher.finalize()
    spent += time.perf_counter() - t0
    return b, spent


# ---------------------------------------------------------------------------
# config

class ConfigError(ValueError):
    pass


def _parse_item(item: str) -> list:
    if ":" in item:
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {item!r}")
        start, stop, step = (int(p) for p in parts)
        if step <= 0:
            raise ConfigError(f"range step must be positive in {item!r}")
        return list(range(start, stop + 1, step))
    for conv in (int, float):
        try:
            return [conv(item)]
        except ValueError:
            pass
    return [item]


def parse_config_text(text: str) -> dict[str, list]:
    out: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        items = [v.strip() for v in value.split(",") if v.strip()]
        if not items:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        values = []
        for item in items:
            values.extend(_parse_item(item))
        out["zeta" if key == "eta" else key] = values
    return out


def _bool(v) -> bool:
    if isinstance(v, str) and v.lower() in ("true", "yes", "on", "1"):
        return True
    if isinstance(v, str) and v.lower() in ("false", "no", "off", "0"):
        return False
    if isinstance(v, (int, float)):
        return bool(v)
    raise ConfigError(f"expected a boolean, got {v!r}")


@dataclass
class BenchConfig:
    input: str = "synthetic"
    header: bool = False
    n: list[int] = field(default_factory=lambda: [10000])
    d: list[int] = field(default_factory=lambda: [1000])
    m: int = 10
    zeta: float = 10.0
    algorithms: list[str] = field(default_factory=lambda: ["fd-fast", "sample", "hash", "project", "naive"])
    ells: list[int] = field(default_factory=lambda: list(range(10, 101, 10)))
    k: int = 10
    trials: int = 5
    seed: int = 0
    evaluate: bool = True
    out: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {algo!r}")
        if not self.ells:
            raise ConfigError("at least one ell value is required")
        if self.evaluate and any(ell <= self.k for ell in self.ells):
            raise ConfigError(f"every ell must exceed k={self.k} for projection error")

    @classmethod
    def from_text(cls, text: str) -> "BenchConfig":
        raw = parse_config_text(text)
        known = {"input", "header", "n", "d", "m", "zeta", "algorithms", "ell", "k", "trials",
                 "seed", "evaluate", "out"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
        kw: dict = {}

        def scalar(key, conv):
            if key in raw:
                if len(raw[key]) != 1:
                    raise ConfigError(f"{key} takes a single value")
                kw[key] = conv(raw[key][0])

        scalar("input", str)
        scalar("header", _bool)
        scalar("m", int)
        scalar("zeta", float)
        scalar("k", int)
        scalar("trials", int)
        scalar("seed", int)
        scalar("evaluate", _bool)
        scalar("out", str)
        for key in ("n", "d"):
            if key in raw:
                kw[key] = [int(v) for v in raw[key]]
        if "ell" in raw:
            kw["ells"] = [int(v) for v in raw["ell"]]
        if "algorithms" in raw:
            kw["algorithms"] = [str(v) for v in raw["algorithms"]]
        return cls(**kw)

    @classmethod
    def from_file(cls, path: str) -> "BenchConfig":
        with open(path) as f:
            return cls.from_text(f.read())


# ---------------------------------------------------------------------------
# grid

def cell_seed(base: int, algo: str, ell: int, trial: int) -> int:
    ss = np.random.SeedSequence(base, spawn_key=(zlib.crc32(algo.encode()), ell, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class CellResult:
    n: int
    d: int
    report: ErrorReport
    error: str | None = None

    def csv_row(self) -> str:
        r = self.report
        if self.error is not None:
            vals = [r.algo, str(r.ell), str(r.k), str(r.seed), "error", "error", "error", "error", "error"]
            return ",".join(vals + [str(self.n), str(self.d)])
        return f"{r.csv_row()},{self.n},{self.d}"


def _inputs(cfg: BenchConfig):
    if cfg.input == "synthetic":
        for n in cfg.n:
            for d in cfg.d:
                yield SyntheticSpec(n=n, d=d, m=min(cfg.m, d), zeta=cfg.zeta, seed=cfg.seed)
    else:
        yield cfg.input


def _load(cfg: BenchConfig, source) -> np.ndarray:
    if isinstance(source, SyntheticSpec):
        return gen_synthetic(source).to_array()
    return read_matrix(source, header=cfg.header).to_array()


def _worker_count() -> int:
    env = os.environ.get("FD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_bench(cfg: BenchConfig, log=None) -> list[CellResult]:
    """Run the whole grid; failures are captured per cell instead of raised."""
    results: list[CellResult] = []
    for source in _inputs(cfg):
        a = _load(cfg, source)
        n, d = a.shape
        top = None
        if cfg.evaluate:
            top = top_eigenvalues(a, min(cfg.k, d))
        cells = [(algo, ell, trial) for algo in cfg.algorithms for ell in cfg.ells
                 for trial in range(cfg.trials)]

        def run_cell(cell):
            algo, ell, trial = cell
            seed = cell_seed(cfg.seed, algo, ell, trial)
            nan = float("nan")
            try:
                sk = make_sketcher(algo, ell, d, seed)
                b, secs = run_sketch(sk, (a[i : i + 4096] for i in range(0, n, 4096)))
                if cfg.evaluate:
                    rep = evaluate(a, b, cfg.k, algo, ell, seed=seed, sketch_seconds=secs, top=top)
                else:
                    rep = ErrorReport(algo, ell, cfg.k, nan, nan, 1.0 / ell,
                                      ell / (ell - cfg.k) if ell > cfg.k else float("inf"), secs, seed)
                return CellResult(n, d, rep)
            except Exception as exc:  # recorded per row; the grid keeps going
                rep = ErrorReport(algo, ell, cfg.k, nan, nan, nan, nan, nan, seed)
                if log is not None:
                    print(f"cell {algo} ell={ell} trial={trial} failed: {exc}", file=log)
                return CellResult(n, d, rep, error=str(exc))

        with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
            results.extend(pool.map(run_cell, cells))
    return results


def median_rows(results: list[CellResult]) -> list[CellResult]:
    groups: dict[tuple, list[CellResult]] = {}
    for r in results:
        groups.setdefault((r.n, r.d, r.report.algo, r.report.ell), []).append(r)
    out = []
    for (n, d, algo, ell), rows in groups.items():
        ok = [r.report for r in rows if r.error is None]
        if not ok:
            continue
        first = ok[0]

        def med(attr):
            return float(statistics.median(getattr(r, attr) for r in ok))

        rep = ErrorReport(algo, ell, first.k, med("covar_err"), med("proj_err"), first.covar_bound,
                          first.proj_bound, med("sketch_seconds"), "median")
        out.append(CellResult(n, d, rep))
    return out


def write_results(results: list[CellResult], stream) -> None:
    stream.write(",".join(BENCH_COLUMNS) + "\n")
    for r in results + median_rows(results):
        stream.write(r.csv_row() + "\n")


def main_bench(cfg: BenchConfig, out_path: str | None = None) -> int:
    results = run_bench(cfg, log=sys.stderr)
    path = out_path or cfg.out
    if path:
        with open(path, "w") as f:
            write_results(results, f)
    else:
        write_results(results, sys.stdout)
    return 0 if all(r.error is None for r in results) else 1
