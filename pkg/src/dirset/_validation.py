"""Input validation helpers for the estimator API."""

from __future__ import annotations

import numpy as np

from .exceptions import InsufficientData, InvalidResponse

__all__ = ["check_data", "check_binary_response"]


def check_data(x, y):
    """Validate a covariate matrix / response vector pair.

    Returns float64 arrays shaped ``(n, p)`` and ``(n,)``. Raises
    :class:`InsufficientData` below two rows and ``ValueError`` on
    shape mismatches or non-finite entries.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise ValueError(f"X must be 2-dimensional, got ndim={x.ndim}")
    if x.shape[0] != y.shape[0]:
        raise ValueError(
            f"X and y disagree on the number of rows ({x.shape[0]} vs {y.shape[0]})"
        )
    if x.shape[0] < 2:
        raise InsufficientData(f"need at least 2 observations, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("covariates must be finite")
    if not np.all(np.isfinite(y)):
        raise ValueError("responses must be finite")
    return x, y


def check_binary_response(y, require_both_classes=False):
    """Assert the response is coded 0/1; optionally that both labels occur."""
    values = np.unique(y)
    if not np.all(np.isin(values, (0.0, 1.0))):
        bad = values[~np.isin(values, (0.0, 1.0))][:5]
        raise InvalidResponse(f"response must be coded 0/1, found values {bad.tolist()}")
    if require_both_classes and values.size < 2:
        raise InvalidResponse("response contains a single class; both 0 and 1 required")
    return y
