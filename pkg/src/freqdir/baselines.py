"""Competing streaming sketchers.

Every sketcher takes rows through ``update``/``extend`` and returns an
``ell x d`` matrix from ``finalize``.  Randomized ones are fully determined
by their 64-bit seed.
"""
from __future__ import annotations

import hashlib
import struct

import numpy as np

from .linalg import sym_eig_topk

BRUTE_FORCE_MAX_D = 2048


class Sketcher:
    kind = "base"

    def __init__(self, ell: int, d: int, seed: int = 0):
        if ell < 1:
            raise ValueError(f"ell must be >= 1, got {ell}")
        if d < 1:
            raise ValueError(f"d must be >= 1, got {d}")
        self.ell = int(ell)
        self.d = int(d)
        self.seed = int(seed)
        self.rows_seen = 0
        self.input_frob_sq = 0.0
        self.last_ops = 0
        self.delta = 0.0

    def _check_row(self, row) -> np.ndarray:
        row = np.asarray(row, dtype=np.float64)
        if row.shape != (self.d,):
            raise ValueError(f"row must have shape ({self.d},), got {row.shape}")
        if not np.all(np.isfinite(row)):
            raise ValueError("row contains non-finite entries")
        return row

    def update(self, row) -> None:
        row = self._check_row(row)
        self.last_ops = self._update(row)
        self.rows_seen += 1
        self.input_frob_sq += float(row @ row)

    append = update

    def extend(self, rows) -> None:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != self.d:
            raise ValueError(f"rows must have shape (n, {self.d}), got {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows contain non-finite entries")
        self._extend(rows)
        self.rows_seen += rows.shape[0]
        self.input_frob_sq += float(np.vdot(rows, rows))

    def _extend(self, rows: np.ndarray) -> None:
        for row in rows:
            self._update(row)

    def _update(self, row: np.ndarray) -> int:
        raise NotImplementedError

    def finalize(self) -> np.ndarray:
        raise NotImplementedError


class NaiveSketch(Sketcher):
    """Ignores its input; the sketch is all zeros."""

    kind = "naive"

    def _update(self, row):
        return 0

    def _extend(self, rows):
        pass

    def finalize(self):
        return np.zeros((self.ell, self.d))


class BruteForceSketch(Sketcher):
    """Accumulates ``A^T A`` exactly and keeps its top ``ell`` eigen-directions.

    Needs ``Theta(d^2)`` memory, so ``d`` is capped by ``max_d``.
    """

    kind = "brute"

    def __init__(self, ell, d, seed=0, max_d: int = BRUTE_FORCE_MAX_D):
        if d > max_d:
            raise ValueError(f"brute force needs a {d}x{d} accumulator; d exceeds the limit {max_d}")
        super().__init__(ell, d, seed)
        self.cov = np.zeros((d, d))

    def _update(self, row):
        self.cov += np.outer(row, row)
        return self.d * self.d

    def _extend(self, rows):
        self.cov += rows.T @ rows

    def finalize(self):
        k = min(self.ell, self.d)
        cov = self.cov
        w, v = sym_eig_topk(lambda x: cov @ x, self.d, k)
        out = np.zeros((self.ell, self.d))
        out[:k] = np.sqrt(np.maximum(w, 0.0))[:, None] * v
        return out


class SamplingSketch(Sketcher):
    """``ell`` independent weighted reservoirs, weights ``||a_i||^2``.

    Slot ``j`` ends up holding row ``i`` with probability
    ``||a_i||^2 / ||A||_F^2`` and is rescaled at the end so that
    ``E[B^T B] = A^T A``.
    """

    kind = "sample"

    def __init__(self, ell, d, seed=0):
        super().__init__(ell, d, seed)
        self.rng = np.random.default_rng(self.seed)
        self.slots = np.zeros((self.ell, self.d))
        self.slot_weight = np.zeros(self.ell)
        self.total_weight = 0.0

    def _update(self, row):
        w = float(row @ row)
        self.total_weight += w
        u = self.rng.random(self.ell)
        if w == 0.0:
            return self.ell
        hit = u < w / self.total_weight
        nhit = int(np.count_nonzero(hit))
        if nhit:
            self.slots[hit] = row
            self.slot_weight[hit] = w
        return self.ell + self.d * nhit

    def _extend(self, rows):
        weights = np.einsum("ij,ij->i", rows, rows)
        totals = np.cumsum(np.concatenate([[self.total_weight], weights]))[1:]
        u = self.rng.random((rows.shape[0], self.ell))
        with np.errstate(invalid="ignore", divide="ignore"):
            p = np.where(weights > 0, weights / np.where(totals > 0, totals, 1.0), 0.0)
        hit = u < p[:, None]
        any_hit = hit.any(axis=0)
        if any_hit.any():
            # last row in the block that claimed each slot
            last = rows.shape[0] - 1 - np.argmax(hit[::-1], axis=0)
            cols = np.flatnonzero(any_hit)
            self.slots[cols] = rows[last[cols]]
            self.slot_weight[cols] = weights[last[cols]]
        if rows.shape[0]:
            self.total_weight = float(totals[-1])

    def finalize(self):
        out = np.zeros((self.ell, self.d))
        if self.total_weight == 0.0:
            return out
        filled = self.slot_weight > 0
        scale = np.sqrt(self.total_weight / (self.ell * self.slot_weight[filled]))
        out[filled] = scale[:, None] * self.slots[filled]
        return out


def hash_index_sign(seed: int, index: int, ell: int) -> tuple[int, int]:
    """Bucket in ``[0, ell)`` and sign in ``{-1, +1}`` for row ``index``.

    A keyed BLAKE2b of the row index, so the functions need no storage.
    """
    digest = hashlib.blake2b(struct.pack("<QQ", seed & (2**64 - 1), index),
                             digest_size=8).digest()
    x = int.from_bytes(digest, "little")
    return (x >> 1) % ell, 1 if x & 1 else -1


class HashingSketch(Sketcher):
    """Count-sketch of the rows: ``B[h(i)] += s(i) a_i``."""

    kind = "hash"

    def __init__(self, ell, d, seed=0):
        super().__init__(ell, d, seed)
        self.b = np.zeros((self.ell, self.d))

    def _update(self, row):
        h, s = hash_index_sign(self.seed, self.rows_seen, self.ell)
        if s > 0:
            self.b[h] += row
        else:
            self.b[h] -= row
        return self.d

    def _extend(self, rows):
        n0 = self.rows_seen
        hs = [hash_index_sign(self.seed, n0 + i, self.ell) for i in range(rows.shape[0])]
        h = np.fromiter((x[0] for x in hs), dtype=np.intp, count=len(hs))
        s = np.fromiter((x[1] for x in hs), dtype=np.float64, count=len(hs))
        np.add.at(self.b, h, s[:, None] * rows)

    def finalize(self):
        return self.b.copy()


class ProjectionSketch(Sketcher):
    """Dense random sign projection ``B = R A`` built one rank-one term per row."""

    kind = "project"

    def __init__(self, ell, d, seed=0):
        super().__init__(ell, d, seed)
        self.rng = np.random.default_rng(self.seed)
        self.b = np.zeros((self.ell, self.d))
        self._amp = 1.0 / np.sqrt(self.ell)

    def _signs(self, shape) -> np.ndarray:
        return np.where(self.rng.random(shape) < 0.5, -self._amp, self._amp)

    def _update(self, row):
        r = self._signs(self.ell)
        self.b += np.outer(r, row)
        return self.ell * self.d

    def _extend(self, rows):
        r = self._signs((rows.shape[0], self.ell))
        self.b += r.T @ rows

    def finalize(self):
        return self.b.copy()


BASELINES = {
    cls.kind: cls
    for cls in (NaiveSketch, BruteForceSketch, SamplingSketch, HashingSketch, ProjectionSketch)
}
