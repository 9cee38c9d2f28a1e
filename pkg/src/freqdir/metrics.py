"""Error measures for a sketch ``B`` of a matrix ``A`` and the FD worst-case bounds.

Both measures need ``A`` itself, so they are computed offline (a second pass
over the data).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .linalg import RANK_RTOL, as_matrix, frobenius_sq, right_singular, spectral_norm_psd_diff, sym_eig_topk

CSV_COLUMNS = ("algo", "ell", "k", "seed", "covar_err", "proj_err", "covar_bound",
               "proj_bound", "sketch_seconds")


class DegenerateError(ValueError):
    """The normalizing denominator of an error measure is (numerically) zero."""


def covariance_error(a, b) -> float:
    """``||A^T A - B^T B||_2 / ||A||_F^2``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    total = frobenius_sq(a)
    if total == 0.0:
        raise DegenerateError("covariance error undefined for A = 0")
    return spectral_norm_psd_diff(a, b) / total


def top_eigenvalues(a, k: int) -> np.ndarray:
    a = as_matrix(a, "a")
    return sym_eig_topk(lambda x: a.T @ (a @ x), a.shape[1], k)[0]


def tail_energy(a, k: int, top: np.ndarray | None = None) -> float:
    """``||A - A_k||_F^2``: the energy outside the top ``k`` singular directions.

    ``top`` may pass precomputed eigenvalues of ``A^T A`` (non-increasing,
    at least ``k`` of them).
    """
    a = as_matrix(a, "a")
    d = a.shape[1]
    if not 0 <= k <= d:
        raise ValueError(f"need 0 <= k <= d, got k={k}, d={d}")
    total = frobenius_sq(a)
    if k == 0:
        return total
    if top is None:
        top = top_eigenvalues(a, k)
    return max(total - float(np.sum(top[:k])), 0.0)


def sketch_basis(b, k: int) -> np.ndarray:
    """Top-``k`` right singular vectors of ``b`` as rows.

    Directions with singular value at or below ``sigma_1 * 1e-12`` are
    dropped, so fewer than ``k`` rows may come back.
    """
    sigma, vt = right_singular(b)
    if sigma.size == 0 or sigma[0] == 0.0:
        return np.zeros((0, vt.shape[1]))
    keep = sigma > sigma[0] * RANK_RTOL
    return vt[keep][:k]


def projection_residual(a, b, k: int) -> float:
    """``||A - A V_k^T V_k||_F^2`` with ``V_k`` the top-``k`` right singular vectors of ``B``."""
    a = as_matrix(a, "a")
    v = sketch_basis(b, k)
    resid = a - (a @ v.T) @ v
    return frobenius_sq(resid)


def projection_error(a, b, k: int, tail: float | None = None) -> float:
    """``||A - pi_B^k(A)||_F^2 / ||A - A_k||_F^2``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column mismatch: {a.shape[1]} vs {b.shape[1]}")
    if not 1 <= k < a.shape[1]:
        raise ValueError(f"need 1 <= k < d, got k={k}")
    if tail is None:
        tail = tail_energy(a, k)
    if tail <= 1e-12 * frobenius_sq(a):
        raise DegenerateError(f"denominator degenerate: A is numerically of rank <= {k}")
    return projection_residual(a, b, k) / tail


def fd_bound_covar(ell: int) -> float:
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    return 1.0 / ell


def fd_bound_proj(ell: int, k: int) -> float:
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    if not 0 <= k < ell:
        raise ValueError(f"need k < ell, got k={k}, ell={ell}")
    return ell / (ell - k)


def _fmt(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


@dataclass
class ErrorReport:
    algo: str
    ell: int
    k: int
    covar_err: float
    proj_err: float
    covar_bound: float
    proj_bound: float
    sketch_seconds: float = float("nan")
    seed: int | str = 0

    def csv_row(self) -> str:
        return ",".join(_fmt(getattr(self, c)) for c in CSV_COLUMNS)

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(CSV_COLUMNS)

    @classmethod
    def from_csv_row(cls, line: str) -> "ErrorReport":
        parts = line.strip().split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"expected {len(CSV_COLUMNS)} fields, got {len(parts)}")
        raw = dict(zip(CSV_COLUMNS, parts))
        kwargs = {}
        for f in fields(cls):
            v = raw[f.name]
            if f.name == "algo":
                kwargs[f.name] = v
            elif f.name in ("ell", "k"):
                kwargs[f.name] = int(v)
            elif f.name == "seed":
                kwargs[f.name] = int(v) if v.lstrip("-").isdigit() else v
            else:
                kwargs[f.name] = float(v)
        return cls(**kwargs)

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(a, b, k: int, algo: str, ell: int, seed: int | str = 0,
             sketch_seconds: float = float("nan"), top: np.ndarray | None = None) -> ErrorReport:
    """Build the full :class:`ErrorReport` of one sketch.

    ``top`` optionally passes the top eigenvalues of ``A^T A`` so a grid of
    evaluations against the same ``A`` shares one eigensolve.
    """
    covar = covariance_error(a, b)
    proj = projection_error(a, b, k, tail=tail_energy(a, k, top))
    proj_bound = fd_bound_proj(ell, k) if k < ell else float("inf")
    return ErrorReport(algo=algo, ell=ell, k=k, seed=seed, covar_err=covar, proj_err=proj,
                       covar_bound=fd_bound_covar(ell), proj_bound=proj_bound,
                       sketch_seconds=sketch_seconds)
