"""The ``FDSK`` container for finalized sketches.

Layout (little-endian)::

    4s   magic "FDSK"
    u32  format version
    u64  ell
    u64  d
    u8   kind (see KIND_CODES)
    f64  delta_total
    u64  rows_seen
    f64  input_frob_sq
    f64  ell * d values, row-major
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .fd import FrequentDirections, Variant, _count_nonzero_rows

MAGIC = b"FDSK"
VERSION = 1
_HEADER = struct.Struct("<4sIQQBdQd")

KIND_CODES = {
    "fd": 0,
    "fd-fast": 1,
    "fd-bounded": 2,
    "naive": 16,
    "brute": 17,
    "sample": 18,
    "hash": 19,
    "project": 20,
}
KIND_NAMES = {v: k for k, v in KIND_CODES.items()}
FD_KINDS = {"fd": Variant.SIMPLE, "fd-fast": Variant.FAST, "fd-bounded": Variant.BOUNDED}
VARIANT_KINDS = {v: k for k, v in FD_KINDS.items()}


@dataclass
class SketchFile:
    kind: str
    ell: int
    d: int
    delta: float
    rows_seen: int
    input_frob_sq: float
    matrix: np.ndarray

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ValueError(f"unknown sketch kind {self.kind!r}")
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if self.matrix.shape != (self.ell, self.d):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match ell x d = {self.ell}x{self.d}")

    @property
    def is_fd(self) -> bool:
        return self.kind in FD_KINDS

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, self.ell, self.d, KIND_CODES[self.kind],
                            self.delta, self.rows_seen, self.input_frob_sq)
        return head + self.matrix.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "SketchFile":
        if len(raw) < _HEADER.size:
            raise ValueError("truncated FDSK header")
        magic, version, ell, d, code, delta, rows_seen, frob = _HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"unsupported FDSK version {version}")
        if code not in KIND_NAMES:
            raise ValueError(f"unknown kind code {code}")
        body = raw[_HEADER.size :]
        if len(body) != ell * d * 8:
            raise ValueError(f"FDSK body has {len(body)} bytes, expected {ell * d * 8}")
        matrix = np.frombuffer(body, dtype="<f8").reshape(ell, d).astype(np.float64)
        return cls(KIND_NAMES[code], ell, d, delta, rows_seen, frob, matrix)

    def write(self, path: str) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def read(cls, path: str) -> "SketchFile":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())

    @classmethod
    def from_sketch(cls, sketch, kind: str | None = None) -> "SketchFile":
        """Finalize ``sketch`` (FD or baseline) and wrap the result."""
        matrix = sketch.finalize()
        if kind is None:
            kind = VARIANT_KINDS[sketch.variant] if isinstance(sketch, FrequentDirections) else sketch.kind
        return cls(kind, sketch.ell, sketch.d, float(sketch.delta), int(sketch.rows_seen),
                   float(sketch.input_frob_sq), matrix)

    def to_sketch(self) -> FrequentDirections:
        """Restore an FD sketch that can keep receiving rows or be merged."""
        if not self.is_fd:
            raise ValueError(f"{self.kind!r} sketches cannot be restored as Frequent Directions")
        s = FrequentDirections(self.ell, self.d, FD_KINDS[self.kind])
        if s.variant is Variant.SIMPLE:
            s._buf[:] = self.matrix
        elif s.variant is Variant.FAST:
            s._buf[: self.ell] = self.matrix
            s._filled = _count_nonzero_rows(self.matrix)
        else:
            s._active.buf[: self.ell] = self.matrix
            s._active.filled = _count_nonzero_rows(self.matrix)
        s.delta = self.delta
        s.rows_seen = self.rows_seen
        s.input_frob_sq = self.input_frob_sq
        return s
