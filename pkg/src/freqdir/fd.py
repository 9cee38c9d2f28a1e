"""Frequent Directions sketches.

Three update strategies share one class:

``simple``
    An ``ell x d`` buffer whose last row is kept zero; every row triggers an
    SVD and a shrink.
``fast``
    A ``2 ell x d`` buffer filled row by row; the SVD and shrink only run when
    it is full, halving it to at most ``ell - 1`` non-zero rows.
``bounded``
    Two ``2 ell x d`` halves.  One takes new rows while the shrink of the
    other is computed a few fixed-size chunks per row, so no single update
    costs more than ``O(d ell)`` operations.

All variants track the total shrinkage ``delta``; together with the running
input energy it makes the error guarantees checkable at any point.
"""
from __future__ import annotations

import copy
import enum
import math

import numpy as np

from .linalg import JacobiSweeper, right_singular

# sweeps of the incremental Jacobi solve in the bounded variant
BOUNDED_JACOBI_SWEEPS = 12
JACOBI_TOL = 1e-14


class Variant(str, enum.Enum):
    SIMPLE = "simple"
    FAST = "fast"
    BOUNDED = "bounded"


# ---------------------------------------------------------------------------
# operation-count model (multiply-adds); used for instrumentation only

def gram_row_ops(rows: int, d: int) -> int:
    return 2 * rows * d


def jacobi_round_ops(rows: int) -> int:
    size = rows + rows % 2
    # size/2 rotations, each touching two rows and two columns of the
    # Gram matrix plus two eigenvector columns
    return 9 * size * size


def output_row_ops(rows: int, d: int) -> int:
    return 2 * rows * d + d


def shrink_ops(rows: int, ell: int, d: int, sweeps: int = BOUNDED_JACOBI_SWEEPS) -> int:
    """Modelled cost of one shrink of a ``rows x d`` buffer."""
    size = rows + rows % 2
    return (rows * gram_row_ops(rows, d) + sweeps * (size - 1) * jacobi_round_ops(rows)
            + (ell - 1) * output_row_ops(rows, d))


# ---------------------------------------------------------------------------

def shrink(buf: np.ndarray, ell: int) -> tuple[np.ndarray, float]:
    """One shrink step on a buffer of any shape.

    Returns the new buffer (same shape: scaled right singular vectors on top,
    zeros below) and ``delta``, the ``ell``-th largest squared singular value
    (zero if the buffer has rank below ``ell``).
    """
    sigma, vt = right_singular(buf)
    sq = sigma * sigma
    delta = float(sq[ell - 1]) if sq.shape[0] >= ell else 0.0
    scale = np.sqrt(np.maximum(sq - delta, 0.0))
    out = np.zeros_like(buf)
    out[: scale.shape[0]] = scale[:, None] * vt
    return out, delta


def _count_nonzero_rows(buf: np.ndarray) -> int:
    nz = np.flatnonzero(np.any(buf != 0.0, axis=1))
    return int(nz[-1]) + 1 if nz.size else 0


class _PendingShrink:
    """A shrink of a full ``2 ell x d`` buffer, computed in chunks.

    Chunks are: one Gram-matrix row each, one Jacobi round each, one output
    row each.  The chunk count is fixed up front so the work per update is
    a constant.
    """

    def __init__(self, buf: np.ndarray, ell: int, sweeps: int):
        self.m = buf
        self.ell = ell
        self.rows, self.d = buf.shape
        self.gram = np.zeros((self.rows, self.rows))
        self.sweeper: JacobiSweeper | None = None
        self.jacobi_chunks = sweeps * (self.rows + self.rows % 2 - 1)
        self.total_chunks = self.rows + self.jacobi_chunks + (ell - 1)
        self.done_chunks = 0
        self.out = np.zeros_like(buf)
        self.delta = 0.0
        self._eig = None
        self._converged = False

    @property
    def done(self) -> bool:
        return self.done_chunks >= self.total_chunks

    def _chunk(self) -> int:
        i = self.done_chunks
        self.done_chunks += 1
        if i < self.rows:
            self.gram[i] = self.m @ self.m[i]
            return gram_row_ops(self.rows, self.d)
        i -= self.rows
        if i < self.jacobi_chunks:
            if self.sweeper is None:
                self.sweeper = JacobiSweeper(self.gram)
                self._off_tol = JACOBI_TOL * float(np.sqrt(np.vdot(self.gram, self.gram)))
            sw = self.sweeper
            if not self._converged and i % sw.rounds_per_sweep == 0:
                self._converged = sw.off_norm() <= self._off_tol
            if not self._converged:
                sw.step()
            # charged whether or not the round was needed
            return jacobi_round_ops(self.rows)
        j = i - self.jacobi_chunks
        if self._eig is None:
            w, v = self.sweeper.result()
            w = np.maximum(w, 0.0)
            self.delta = float(w[self.ell - 1])
            self._eig = (w, v)
        w, v = self._eig
        lam = w[j]
        if lam > self.delta and lam > w[0] * 1e-24:
            scale = math.sqrt((lam - self.delta) / lam)
            self.out[j] = scale * (v[:, j] @ self.m)
        return output_row_ops(self.rows, self.d)

    def advance(self, chunks: int) -> int:
        ops = 0
        for _ in range(chunks):
            if self.done:
                break
            ops += self._chunk()
        return ops

    def finish(self) -> int:
        return self.advance(self.total_chunks - self.done_chunks)


class _Half:
    def __init__(self, rows: int, d: int):
        self.buf = np.zeros((rows, d))
        self.filled = 0


class FrequentDirections:
    """Streaming Frequent Directions sketch of an ``n x d`` row stream.

    Parameters
    ----------
    ell : int
        Sketch size; the finalized sketch has ``ell`` rows.  Must be >= 2.
    d : int
        Row dimension.
    variant : {"simple", "fast", "bounded"}
    instrument : bool
        Keep a per-update log of modelled operation counts in ``op_log``.
    """

    def __init__(self, ell: int, d: int, variant: str | Variant = Variant.FAST,
                 instrument: bool = False, jacobi_sweeps: int = BOUNDED_JACOBI_SWEEPS):
        if ell < 2:
            raise ValueError(f"ell must be >= 2, got {ell}")
        if d < 1:
            raise ValueError(f"d must be >= 1, got {d}")
        self.ell = int(ell)
        self.d = int(d)
        self.variant = Variant(variant)
        self.delta = 0.0
        self.rows_seen = 0
        self.input_frob_sq = 0.0
        self.last_ops = 0
        self.op_log: list[int] | None = [] if instrument else None
        self.jacobi_sweeps = jacobi_sweeps
        if self.variant is Variant.SIMPLE:
            self._buf = np.zeros((self.ell, self.d))
        elif self.variant is Variant.FAST:
            self._buf = np.zeros((2 * self.ell, self.d))
            self._filled = 0
        else:
            self._active = _Half(2 * self.ell, self.d)
            self._maint = _Half(2 * self.ell, self.d)
            self._pending: _PendingShrink | None = None
            total = 2 * self.ell + jacobi_sweeps * (2 * self.ell - 1) + self.ell - 1
            self._chunks_per_update = -(-total // self.ell)

    # -- state views -------------------------------------------------------

    @property
    def buffer(self) -> np.ndarray:
        """Current working rows (a copy).

        ``ell x d`` for simple, ``2 ell x d`` for fast, and the two halves
        stacked (``4 ell x d``) for bounded.  Together with ``delta`` these
        rows satisfy the sketch guarantees after every update.
        """
        if self.variant is Variant.BOUNDED:
            return np.vstack([self._active.buf, self._maint.buf])
        return self._buf.copy()

    @property
    def filled(self) -> int:
        return int(np.count_nonzero(np.any(self.buffer != 0.0, axis=1)))

    def copy(self) -> "FrequentDirections":
        return copy.deepcopy(self)

    # -- updates -----------------------------------------------------------

    def _check_row(self, row) -> np.ndarray:
        row = np.asarray(row, dtype=np.float64)
        if row.shape != (self.d,):
            raise ValueError(f"row must have shape ({self.d},), got {row.shape}")
        if not np.all(np.isfinite(row)):
            raise ValueError("row contains non-finite entries")
        return row

    def append(self, row) -> None:
        row = self._check_row(row)
        self.rows_seen += 1
        self.input_frob_sq += float(row @ row)
        if self.variant is Variant.SIMPLE:
            ops = self._append_simple(row)
        elif self.variant is Variant.FAST:
            ops = self._append_fast(row)
        else:
            ops = self._append_bounded(row)
        self.last_ops = ops
        if self.op_log is not None:
            self.op_log.append(ops)

    update = append

    def extend(self, rows) -> None:
        """Append every row of a 2-D block, in order."""
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != self.d:
            raise ValueError(f"rows must have shape (n, {self.d}), got {rows.shape}")
        if self.variant is not Variant.FAST or self.op_log is not None:
            for row in rows:
                self.append(row)
            return
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows contain non-finite entries")
        self.rows_seen += rows.shape[0]
        self.input_frob_sq += float(np.vdot(rows, rows))
        rows = rows[np.any(rows != 0.0, axis=1)]
        cap = 2 * self.ell
        start = 0
        while start < rows.shape[0]:
            take = min(cap - self._filled, rows.shape[0] - start)
            self._buf[self._filled : self._filled + take] = rows[start : start + take]
            self._filled += take
            start += take
            if self._filled == cap:
                self._shrink_fast()
        self.last_ops = 0

    def _append_simple(self, row: np.ndarray) -> int:
        self._buf[-1] = row
        self._buf, delta = shrink(self._buf, self.ell)
        self.delta += delta
        return self.d + shrink_ops(self.ell, self.ell, self.d, self.jacobi_sweeps)

    def _shrink_fast(self) -> float:
        self._buf, delta = shrink(self._buf, self.ell)
        self.delta += delta
        self._filled = _count_nonzero_rows(self._buf)
        return delta

    def _append_fast(self, row: np.ndarray) -> int:
        ops = self.d
        if not np.any(row):
            return ops
        self._buf[self._filled] = row
        self._filled += 1
        if self._filled == 2 * self.ell:
            self._shrink_fast()
            ops += shrink_ops(2 * self.ell, self.ell, self.d, self.jacobi_sweeps)
        return ops

    def _install_pending(self) -> None:
        p = self._pending
        self._maint.buf = p.out
        self._maint.filled = _count_nonzero_rows(p.out)
        self.delta += p.delta
        self._pending = None

    def _append_bounded(self, row: np.ndarray) -> int:
        ops = self.d
        if np.any(row):
            self._active.buf[self._active.filled] = row
            self._active.filled += 1
        if self._pending is not None:
            ops += self._pending.advance(self._chunks_per_update)
            if self._pending.done:
                self._install_pending()
        if self._active.filled == 2 * self.ell:
            if self._pending is not None:
                # only reachable if the schedule was outpaced; never in practice
                ops += self._pending.finish()
                self._install_pending()
            self._active, self._maint = self._maint, self._active
            self._pending = _PendingShrink(self._maint.buf, self.ell, self.jacobi_sweeps)
        return ops

    # -- output ------------------------------------------------------------

    def nonzero_rows(self) -> np.ndarray:
        buf = self.buffer
        return buf[np.any(buf != 0.0, axis=1)]

    def finalize(self) -> np.ndarray:
        """Return the ``ell x d`` sketch.

        Fast and bounded sketches may hold more than ``ell`` rows; they are
        shrunk once more (adding to ``delta``).  That shrink is applied to the
        sketch itself, so finalize is idempotent and the sketch can keep
        receiving rows afterwards.
        """
        if self.variant is Variant.SIMPLE:
            return self._buf.copy()
        if self.variant is Variant.FAST:
            if self._filled > self.ell:
                self._shrink_fast()
            return self._buf[: self.ell].copy()
        merged = FrequentDirections(self.ell, self.d, Variant.FAST)
        merged.delta = self.delta
        merged._load(self._active.buf[: self._active.filled])
        merged._load(self._maint.buf[: _count_nonzero_rows(self._maint.buf)])
        out = merged.finalize()
        self._active = _Half(2 * self.ell, self.d)
        self._active.buf[: self.ell] = out
        self._active.filled = _count_nonzero_rows(out)
        self._maint = _Half(2 * self.ell, self.d)
        self._pending = None
        self.delta = merged.delta
        return out

    def _load(self, rows: np.ndarray) -> list[float]:
        """Insert sketch rows (not new input) under fast semantics."""
        deltas = []
        for row in rows:
            if not np.any(row):
                continue
            self._buf[self._filled] = row
            self._filled += 1
            if self._filled == 2 * self.ell:
                deltas.append(self._shrink_fast())
        return deltas


def merge(s1: FrequentDirections, s2: FrequentDirections) -> FrequentDirections:
    """Combine two sketches of disjoint streams into one fast-variant sketch.

    The non-zero rows of ``s1`` and then ``s2`` are fed through a fresh
    fast sketch.  ``delta`` is ``s1.delta + s2.delta`` plus the shrinks
    incurred here, which are listed in ``merge_deltas`` of the result.  The
    inputs are not modified.
    """
    if s1.ell != s2.ell or s1.d != s2.d:
        raise ValueError(f"cannot merge sketches with (ell, d) = {(s1.ell, s1.d)} and {(s2.ell, s2.d)}")
    out = FrequentDirections(s1.ell, s1.d, Variant.FAST)
    out.delta = s1.delta + s2.delta
    deltas = out._load(s1.nonzero_rows())
    deltas += out._load(s2.nonzero_rows())
    out.rows_seen = s1.rows_seen + s2.rows_seen
    out.input_frob_sq = s1.input_frob_sq + s2.input_frob_sq
    out.merge_deltas = deltas
    return out
