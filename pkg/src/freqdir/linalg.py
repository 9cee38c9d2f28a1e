"""Dense numerical kernel used by the sketches and the error measures.

Matrices are plain 2-D ``float64`` numpy arrays (row-major).  Everything
here is a pure function of its inputs.
"""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
import scipy.sparse.linalg as spla

# relative cutoff below which a singular value counts as zero
RANK_RTOL = 1e-12


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations.

    The last iterate is kept on the exception so callers can decide whether
    it is good enough.
    """

    def __init__(self, message: str, eigvals=None, eigvecs=None):
        super().__init__(message)
        self.eigvals = eigvals
        self.eigvecs = eigvecs


class ThinSvd(NamedTuple):
    u: np.ndarray  # rows x r
    sigma: np.ndarray  # r, non-increasing
    vt: np.ndarray  # r x cols


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate ``m`` as a finite 2-D float64 array (copy only if needed)."""
    arr = np.ascontiguousarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def frobenius_sq(m) -> float:
    m = np.asarray(m, dtype=np.float64)
    return float(np.vdot(m, m))


def _normalize_signs(u: np.ndarray, vt: np.ndarray) -> None:
    # largest-magnitude entry of every right singular vector made positive
    if vt.size == 0:
        return
    idx = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), idx])
    signs[signs == 0] = 1.0
    vt *= signs[:, None]
    u *= signs[None, :]


def thin_svd(m) -> ThinSvd:
    """Thin SVD of a short-fat matrix (``rows <= cols``).

    Returns ``r = rows`` factors; trailing singular values may be zero and the
    matching rows of ``vt`` are an orthonormal completion.  Each right
    singular vector is sign-normalized so that its largest-magnitude entry is
    positive.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if rows > cols:
        raise ValueError(f"thin_svd needs rows <= cols, got {rows}x{cols}; transpose first")
    if rows == 0:
        return ThinSvd(np.zeros((0, 0)), np.zeros(0), np.zeros((0, cols)))
    u, sigma, vt = np.linalg.svd(m, full_matrices=False)
    _normalize_signs(u, vt)
    return ThinSvd(u, sigma, vt)


def right_singular(m) -> tuple[np.ndarray, np.ndarray]:
    """Singular values and right singular vectors of a matrix of any shape.

    Tall inputs are handled by factoring the transpose.  Returns
    ``(sigma, vt)`` with ``min(rows, cols)`` entries.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if rows <= cols:
        svd = thin_svd(m)
        return svd.sigma, svd.vt
    svd = thin_svd(m.T)
    # m = (svd.vt.T) S (svd.u.T), so the right factor of m is svd.u
    return svd.sigma, np.ascontiguousarray(svd.u.T)


# ---------------------------------------------------------------------------
# Jacobi eigensolver

def round_robin_pairs(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: ``n - 1`` rounds of ``n // 2`` disjoint pairs.

    ``n`` must be even.  Every unordered pair appears in exactly one round.
    """
    if n % 2:
        raise ValueError("round_robin_pairs needs an even size")
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        p = np.array(players[: n // 2])
        q = np.array(players[n // 2 :][::-1])
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


_DENSE_ROTATION_MAX = 64


class JacobiSweeper:
    """Cyclic Jacobi diagonalization of a symmetric matrix, one round at a time.

    Rotations inside a round act on disjoint index pairs, so a round is a
    single vectorized update.  ``step()`` performs one round; the bounded
    update-time sketch uses this to spread an eigendecomposition over many
    calls.
    """

    def __init__(self, s: np.ndarray):
        s = np.array(s, dtype=np.float64)
        n = s.shape[0]
        if s.ndim != 2 or s.shape[1] != n:
            raise ValueError("JacobiSweeper needs a square matrix")
        self.n = n
        size = n + (n % 2)
        self.a = np.zeros((size, size))
        self.a[:n, :n] = (s + s.T) / 2
        self.v = np.eye(size)
        self._eye = np.eye(size)
        self.rounds = round_robin_pairs(size) if size > 1 else []
        self.rounds_done = 0

    @property
    def rounds_per_sweep(self) -> int:
        return len(self.rounds)

    def off_norm(self) -> float:
        off = self.a.copy()
        np.fill_diagonal(off, 0.0)
        return float(np.sqrt(np.vdot(off, off)))

    def step(self) -> None:
        if not self.rounds:
            return
        p, q = self.rounds[self.rounds_done % len(self.rounds)]
        self.rounds_done += 1
        a = self.a
        apq = a[p, q]
        app = a[p, p]
        aqq = a[q, q]
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            theta = (aqq - app) / (2.0 * apq)
            # copysign gives t = 1 at theta = 0; theta = +-inf (apq = 0) gives t = 0
            t = np.copysign(1.0, theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
        # 0/0: nothing to rotate
        t[np.isnan(t)] = 0.0
        c = 1.0 / np.sqrt(t * t + 1.0)
        s = t * c
        if a.shape[0] <= _DENSE_ROTATION_MAX:
            # small: one dense rotation matrix beats six scattered updates
            j = self._eye.copy()
            j[p, p] = c
            j[q, q] = c
            j[p, q] = s
            j[q, p] = -s
            self.a = j.T @ a @ j
            self.v = self.v @ j
            return
        # columns, then rows: a <- J^T a J
        ap, aq = a[:, p].copy(), a[:, q]
        a[:, p] = c * ap - s * aq
        a[:, q] = s * ap + c * aq
        ap, aq = a[p, :].copy(), a[q, :]
        a[p, :] = c[:, None] * ap - s[:, None] * aq
        a[q, :] = s[:, None] * ap + c[:, None] * aq
        vp, vq = self.v[:, p].copy(), self.v[:, q]
        self.v[:, p] = c * vp - s * vq
        self.v[:, q] = s * vp + c * vq

    def sweep(self) -> None:
        for _ in range(len(self.rounds)):
            self.step()

    def result(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (non-increasing, stable order on ties) and eigenvector columns."""
        n = self.n
        w = np.diag(self.a)[:n].copy()
        v = self.v[:n, :n].copy()
        order = np.argsort(-w, kind="stable")
        return w[order], v[:, order]


def jacobi_eigh(s, tol: float = 1e-14, max_sweeps: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi.

    Converged when the off-diagonal Frobenius norm drops below
    ``tol * ||s||_F``.  Returns ``(eigvals, eigvecs)`` with eigenvalues
    non-increasing and eigenvectors as columns.
    """
    s = as_matrix(s)
    sweeper = JacobiSweeper(s)
    scale = np.sqrt(frobenius_sq(s))
    off = sweeper.off_norm()
    for _ in range(max_sweeps):
        if off <= tol * scale:
            return sweeper.result()
        sweeper.sweep()
        prev, off = off, sweeper.off_norm()
        if off >= prev and off <= 1e-12 * scale:
            # stalled at the rounding floor
            return sweeper.result()
    if off <= tol * scale:
        return sweeper.result()
    w, v = sweeper.result()
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", w, v)


# ---------------------------------------------------------------------------
# Matrix-free symmetric eigenvalues

LinearOperator = Callable[[np.ndarray], np.ndarray]


def _dense_from_operator(apply: LinearOperator, dim: int) -> np.ndarray:
    m = apply(np.eye(dim))
    if not np.all(np.isfinite(m)):
        raise FloatingPointError("non-finite value in operator application")
    return (m + m.T) / 2


def _lanczos(apply: LinearOperator, dim: int, k: int, which: str, tol: float,
             max_iter: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    def matmat(x):
        y = apply(x)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError("non-finite value in operator application")
        return y

    op = spla.LinearOperator((dim, dim), matvec=lambda x: matmat(x.reshape(dim, 1)).ravel(),
                             matmat=matmat, dtype=np.float64)
    v0 = np.random.default_rng(seed).standard_normal(dim)
    try:
        return spla.eigsh(op, k=k, which=which, tol=tol, maxiter=max_iter, v0=v0)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(f"eigensolver did not converge in {max_iter} iterations",
                               exc.eigenvalues, exc.eigenvectors) from exc
    except spla.ArpackError:
        # breakdown on exactly degenerate spectra (e.g. an invariant Krylov
        # subspace); plain orthogonal iteration does not have this failure mode
        return _orthogonal_iteration(matmat, dim, k, which, tol, max_iter, seed)


def _orthogonal_iteration(apply: LinearOperator, dim: int, k: int, which: str, tol: float,
                          max_iter: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Block power iteration with Rayleigh-Ritz.

    ``which="LM"`` ranks Ritz values by magnitude, ``"LA"`` by value.  Stops
    when successive estimates move by less than ``tol * (|lambda_1| + tol)``.
    """
    block = min(dim, 2 * k + 8)
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((dim, block)))
    prev = vals = vecs = None
    for _ in range(max_iter):
        z = apply(q)
        h = q.T @ z
        w, y = np.linalg.eigh((h + h.T) / 2)
        order = np.argsort(-np.abs(w) if which == "LM" else -w, kind="stable")
        w, y = w[order], y[:, order]
        vals, vecs = w[:k], q @ y[:, :k]
        if prev is not None and np.all(np.abs(vals - prev) < tol * (abs(w[0]) + tol)):
            return vals, vecs
        prev = vals
        if block == dim:
            q = q @ y
        else:
            q, _ = np.linalg.qr(z @ y)
    raise ConvergenceError(f"orthogonal iteration did not converge in {max_iter} iterations",
                           vals, vecs)


def sym_eig_topk(apply: LinearOperator, dim: int, k: int, tol: float = 1e-12,
                 max_iter: int = 10000, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Top-``k`` eigenpairs of a symmetric positive semidefinite operator.

    ``apply`` maps a ``dim x b`` block of column vectors to a block of the
    same shape.  Returns ``(eigvals, eigvecs)`` with eigenvalues
    non-increasing and ``eigvecs`` of shape ``k x dim``, one eigenvector per
    row.  Small problems (``k >= dim - 1``) are solved densely from
    ``apply(I)``.  Raises :class:`ConvergenceError` carrying the last iterate
    when the Krylov solver does not reach ``tol`` relative accuracy.
    """
    if not 1 <= k <= dim:
        raise ValueError(f"need 1 <= k <= dim, got k={k}, dim={dim}")
    if k >= dim - 1:
        w, v = np.linalg.eigh(_dense_from_operator(apply, dim))
    else:
        w, v = _lanczos(apply, dim, k, "LA", tol, max_iter, seed)
    order = np.argsort(-w, kind="stable")[:k]
    return w[order], np.ascontiguousarray(v[:, order].T)


def spectral_norm_psd_diff(a, b, tol: float = 1e-12, max_iter: int = 10000,
                           seed: int = 0) -> float:
    """``||A^T A - B^T B||_2`` without forming a ``d x d`` matrix.

    The difference may be indefinite (random sketches); the eigenvalue of
    largest magnitude is located, so the result is the spectral norm either
    way.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column mismatch: {a.shape[1]} vs {b.shape[1]}")
    d = a.shape[1]
    if d == 0:
        return 0.0

    def apply(x):
        return a.T @ (a @ x) - b.T @ (b @ x)

    if d <= 8:
        w = np.linalg.eigvalsh(_dense_from_operator(apply, d))
    else:
        w, _ = _lanczos(apply, d, 1, "LM", tol, max_iter, seed)
    return float(np.max(np.abs(w)))
