"""Dense symmetric linear algebra shared across the package.

Covariances use the 1/n normalizer throughout (it is what the closed-form
direction estimator divides by), not the unbiased 1/(n-1) variant.
Matrices are small (p <= ~15), so everything is plain dense LAPACK.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import InsufficientData, SingularMatrix

__all__ = ["sample_covariance", "pd_solve", "moore_penrose", "cholesky_factor"]

_SYM_RTOL = 1e-10


def _as_symmetric(a, name="matrix"):
    """Validate a square symmetric array and return its symmetrized copy."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} entries must be finite")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if a.size and np.max(np.abs(a - a.T)) > _SYM_RTOL * max(scale, np.finfo(float).tiny):
        raise ValueError(f"{name} is not symmetric within {_SYM_RTOL:g} relative")
    return (a + a.T) / 2.0


def sample_covariance(x):
    """Centered second-moment matrix (1/n) * sum_i (x_i - xbar)(x_i - xbar)'."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-d sample matrix, got ndim={x.ndim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample entries must be finite")
    n = x.shape[0]
    if n < 2:
        raise InsufficientData(f"sample covariance needs at least 2 rows, got {n}")
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / n
    return (cov + cov.T) / 2.0


def cholesky_factor(a):
    """Lower-triangular L with L @ L.T == a, for positive definite a.

    Raises :class:`SingularMatrix` when a pivot falls at or below
    ``dim * eps * max(diag)``, i.e. the matrix is not numerically
    positive definite.
    """
    a = _as_symmetric(a)
    p = a.shape[0]
    low = np.zeros_like(a)
    floor = p * np.finfo(float).eps * max(float(np.max(np.diagonal(a), initial=0.0)), 0.0)
    for j in range(p):
        pivot = a[j, j] - low[j, :j] @ low[j, :j]
        if pivot <= floor:
            raise SingularMatrix(
                f"matrix is not positive definite (pivot {pivot:.3e} at column {j})"
            )
        low[j, j] = np.sqrt(pivot)
        if j + 1 < p:
            low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low


def pd_solve(a, b):
    """Solve a @ x = b for symmetric positive definite a via Cholesky.

    ``b`` may be a vector or a matrix of stacked right-hand sides.
    """
    low = cholesky_factor(a)
    b = np.asarray(b, dtype=float)
    y = solve_triangular(low, b, lower=True)
    return solve_triangular(low.T, y, lower=False)


def moore_penrose(a, rel_tol=None):
    """Eigendecomposition-based pseudoinverse of a symmetric matrix.

    Eigenvalues with ``|w| <= rel_tol * max|w|`` are treated as exact
    zeros; ``rel_tol`` defaults to ``dim * eps``. Returns ``(pinv, rank)``
    where ``rank`` counts the retained eigenvalues.
    """
    a = _as_symmetric(a)
    if rel_tol is None:
        rel_tol = a.shape[0] * np.finfo(float).eps
    w, v = np.linalg.eigh(a)
    cut = rel_tol * (np.max(np.abs(w)) if w.size else 0.0)
    keep = np.abs(w) > cut
    inv_w = np.zeros_like(w)
    inv_w[keep] = 1.0 / w[keep]
    pinv = (v * inv_w) @ v.T
    return (pinv + pinv.T) / 2.0, int(np.count_nonzero(keep))
