"""Dense reference computations shared by the tests.

Everything here works on explicitly formed ``d x d`` matrices with numpy's
LAPACK eigensolver, independent of the matrix-free routines under test.
"""
import numpy as np


def gram_eigs(a):
    """Eigenvalues of A^T A, non-increasing."""
    return np.sort(np.linalg.eigvalsh(a.T @ a))[::-1]


def tails(a):
    """tails[k] = ||A - A_k||_F^2 for k = 0..d, from a dense eigensolve."""
    w = np.maximum(gram_eigs(a), 0.0)
    total = float(np.sum(a * a))
    out = total - np.concatenate([[0.0], np.cumsum(w)])
    return np.maximum(out, 0.0)


def diff_eigs(a, b):
    """Eigenvalues of A^T A - B^T B, ascending."""
    return np.linalg.eigvalsh(a.T @ a - b.T @ b)


def projection_residual(a, b, k):
    """||A - A V_k^T V_k||_F^2 with V_k the top-k right singular vectors of B."""
    if not np.any(b):
        return float(np.sum(a * a))
    _, s, vt = np.linalg.svd(b, full_matrices=False)
    v = vt[:k][s[:k] > s[0] * 1e-12]
    r = a - (a @ v.T) @ v
    return float(np.sum(r * r))


def check_bounds(a, b, ell, rtol=1e-8):
    """Covariance and projection guarantees of an ell-row FD sketch, every k."""
    total = float(np.sum(a * a))
    tol = rtol * total
    t = tails(a)
    ev = diff_eigs(a, b)
    failures = []
    if ev[0] < -tol:
        failures.append(f"not PSD: min eig {ev[0]:.3e}")
    norm = max(abs(ev[0]), abs(ev[-1]))
    for k in range(min(ell, a.shape[1] + 1)):
        if norm > t[k] / (ell - k) + tol:
            failures.append(f"covariance bound fails at k={k}: {norm:.6e} > {t[k] / (ell - k):.6e}")
    for k in range(1, min(ell, a.shape[1] + 1)):
        res = projection_residual(a, b, k)
        if res > ell / (ell - k) * t[k] + tol:
            failures.append(f"projection bound fails at k={k}: {res:.6e} > {ell / (ell - k) * t[k]:.6e}")
    return failures


def check_properties(a, b, delta, ell, rtol=1e-8):
    """The three sketch properties for the current buffer and total shrinkage."""
    total = float(np.sum(a * a))
    tol = rtol * max(total, 1e-300)
    ev = diff_eigs(a, b)
    out = []
    if ev[0] < -tol:
        out.append(f"property 1: min eig {ev[0]:.3e}")
    if ev[-1] > delta + tol:
        out.append(f"property 2: max eig {ev[-1]:.6e} > delta {delta:.6e}")
    if delta * ell > total - float(np.sum(b * b)) + tol:
        out.append("property 3 fails")
    return out
