"""Row streams: the synthetic signal-plus-noise model and matrix files.

Two file formats are supported:

* ``fdmx``: magic ``b"FDMX"``, ``u32`` version, ``u64`` n, ``u64`` d, then
  ``n*d`` little-endian float64 values in row-major order.
* ``csv``: comma separated, ``.`` decimal point, optional single header
  line.  Values are written in shortest round-trip form.
"""
from __future__ import annotations

import csv
import io
import math
import os
import struct
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass

import numpy as np

FDMX_MAGIC = b"FDMX"
FDMX_VERSION = 1
_FDMX_HEADER = struct.Struct("<4sIQQ")

DEFAULT_BLOCK = 4096


class FormatError(ValueError):
    """A matrix file is malformed."""


class RowStream:
    """An iterable of ``d``-length float64 rows, consumed block by block.

    ``n`` is the row count when known up front.  Each call to
    :meth:`blocks` restarts the stream from the beginning.
    """

    def __init__(self, d: int, blocks: Callable[[int], Iterator[np.ndarray]],
                 n: int | None = None, source: str = "generator"):
        self.d = d
        self.n = n
        self.source = source
        self._blocks = blocks

    def blocks(self, size: int = DEFAULT_BLOCK) -> Iterator[np.ndarray]:
        for block in self._blocks(size):
            if block.ndim != 2 or block.shape[1] != self.d:
                raise FormatError(f"stream produced a block of shape {block.shape}, expected width {self.d}")
            yield block

    def __iter__(self) -> Iterator[np.ndarray]:
        for block in self.blocks():
            yield from block

    def to_array(self) -> np.ndarray:
        parts = list(self.blocks())
        if not parts:
            return np.zeros((0, self.d))
        return np.vstack(parts)

    @classmethod
    def from_array(cls, a) -> "RowStream":
        a = np.ascontiguousarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("from_array needs a 2-D array")

        def blocks(size):
            for i in range(0, a.shape[0], size):
                yield a[i : i + size]

        return cls(a.shape[1], blocks, n=a.shape[0], source="array")


# ---------------------------------------------------------------------------
# synthetic data

@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of ``A = S D W + N / zeta``.

    ``S`` (n x m) and ``N`` (n x d) are standard Gaussian, ``D`` is diagonal
    with ``D_ii = 1 - (i - 1) / m`` and ``W`` (m x d) has orthonormal rows.
    """

    n: int = 10000
    d: int = 1000
    m: int = 10
    zeta: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n, d >= 1, got n={self.n}, d={self.d}")
        if not 1 <= self.m <= self.d:
            raise ValueError(f"need 1 <= m <= d, got m={self.m}, d={self.d}")
        if not (self.zeta > 0 and math.isfinite(self.zeta)):
            raise ValueError(f"zeta must be positive and finite, got {self.zeta}")


def _synthetic_generators(spec: SyntheticSpec):
    basis_ss, signal_ss, noise_ss = np.random.SeedSequence(spec.seed).spawn(3)
    return (np.random.default_rng(basis_ss), np.random.default_rng(signal_ss),
            np.random.default_rng(noise_ss))


def signal_basis(spec: SyntheticSpec) -> np.ndarray:
    """The ``m x d`` orthonormal signal rows ``W``."""
    basis_rng, _, _ = _synthetic_generators(spec)
    q, _ = np.linalg.qr(basis_rng.standard_normal((spec.d, spec.m)))
    return np.ascontiguousarray(q.T)


def signal_scales(m: int) -> np.ndarray:
    return 1.0 - np.arange(m) / m


def gen_synthetic(spec: SyntheticSpec, noise: bool = True) -> RowStream:
    """Row stream of the synthetic model.

    The signal and the noise come from independent generators and are drawn
    row-major, so the values do not depend on the block size.  Memory is
    ``O(m d)`` plus one block.  ``noise=False`` drops the ``N / zeta`` term
    (same signal rows).
    """
    def blocks(size):
        _, signal_rng, noise_rng = _synthetic_generators(spec)
        w = signal_basis(spec) * signal_scales(spec.m)[:, None]
        done = 0
        while done < spec.n:
            b = min(size, spec.n - done)
            rows = signal_rng.standard_normal((b, spec.m)) @ w
            nz = noise_rng.standard_normal((b, spec.d))
            if noise:
                rows += nz / spec.zeta
            done += b
            yield rows

    return RowStream(spec.d, blocks, n=spec.n, source="generator")


# ---------------------------------------------------------------------------
# files

def _detect_format(path: str, fmt: str | None) -> str:
    if fmt:
        if fmt not in ("csv", "fdmx"):
            raise ValueError(f"unknown matrix format {fmt!r}")
        return fmt
    ext = os.path.splitext(path)[1].lower()
    if ext == ".csv":
        return "csv"
    if ext == ".fdmx":
        return "fdmx"
    raise ValueError(f"cannot infer matrix format from {path!r}; pass csv or fdmx")


def _as_blocks(source) -> tuple[int | None, Iterable[np.ndarray], int | None]:
    if isinstance(source, RowStream):
        return source.d, source.blocks(), source.n
    a = np.ascontiguousarray(source, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("matrix must be 2-D")
    return a.shape[1], [a], a.shape[0]


def write_matrix(path: str, source, fmt: str | None = None, header: bool = False) -> int:
    """Write an array or :class:`RowStream`; returns the number of rows written."""
    fmt = _detect_format(path, fmt)
    d, blocks, _ = _as_blocks(source)
    n = 0
    if fmt == "fdmx":
        with open(path, "wb") as f:
            f.write(_FDMX_HEADER.pack(FDMX_MAGIC, FDMX_VERSION, 0, d))
            for block in blocks:
                f.write(np.ascontiguousarray(block, dtype="<f8").tobytes())
                n += block.shape[0]
            f.seek(0)
            f.write(_FDMX_HEADER.pack(FDMX_MAGIC, FDMX_VERSION, n, d))
        return n
    with open(path, "w", newline="") as f:
        if header:
            f.write(",".join(f"c{j}" for j in range(d)) + "\n")
        for block in blocks:
            buf = io.StringIO()
            for row in block.tolist():
                buf.write(",".join(map(repr, row)))
                buf.write("\n")
            f.write(buf.getvalue())
            n += block.shape[0]
    return n


def _read_fdmx_header(path: str) -> tuple[int, int]:
    with open(path, "rb") as f:
        raw = f.read(_FDMX_HEADER.size)
    if len(raw) < _FDMX_HEADER.size:
        raise FormatError(f"{path}: truncated FDMX header")
    magic, version, n, d = _FDMX_HEADER.unpack(raw)
    if magic != FDMX_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FDMX_VERSION:
        raise FormatError(f"{path}: unsupported FDMX version {version}")
    expected = _FDMX_HEADER.size + n * d * 8
    if os.path.getsize(path) != expected:
        raise FormatError(f"{path}: size {os.path.getsize(path)} does not match header ({expected})")
    return n, d


def _csv_width(path: str, header: bool) -> int:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        if header:
            next(reader, None)
        for row in reader:
            if row:
                return len(row)
    raise FormatError(f"{path}: no data rows")


def read_matrix(path: str, fmt: str | None = None, header: bool = False) -> RowStream:
    """Open a matrix file as a :class:`RowStream` (nothing is loaded yet)."""
    fmt = _detect_format(path, fmt)
    if fmt == "fdmx":
        n, d = _read_fdmx_header(path)

        def blocks(size):
            with open(path, "rb") as f:
                f.seek(_FDMX_HEADER.size)
                left = n
                while left:
                    b = min(size, left)
                    raw = f.read(b * d * 8)
                    block = np.frombuffer(raw, dtype="<f8").reshape(b, d).astype(np.float64)
                    if not np.all(np.isfinite(block)):
                        bad = int(np.flatnonzero(~np.isfinite(block).all(axis=1))[0])
                        raise FormatError(f"{path}: non-finite value in row {n - left + bad}")
                    left -= b
                    yield block

        return RowStream(d, blocks, n=n, source="file")

    d = _csv_width(path, header)

    def blocks(size):
        with open(path, newline="") as f:
            reader = csv.reader(f)
            if header:
                next(reader, None)
            pending = []
            for row in reader:
                line = reader.line_num
                if not row:
                    continue
                if len(row) != d:
                    raise FormatError(f"{path}:{line}: expected {d} fields, got {len(row)}")
                try:
                    values = [float(x) for x in row]
                except ValueError as exc:
                    raise FormatError(f"{path}:{line}: {exc}") from None
                if not all(map(math.isfinite, values)):
                    raise FormatError(f"{path}:{line}: non-finite value")
                pending.append(values)
                if len(pending) == size:
                    yield np.array(pending, dtype=np.float64)
                    pending = []
            if pending:
                yield np.array(pending, dtype=np.float64)

    return RowStream(d, blocks, n=None, source="file")
