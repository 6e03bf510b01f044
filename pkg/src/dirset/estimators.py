"""Closed-form least-squares estimation of the index direction.

The model is ``E[Y|X] = g(X'b)`` with an unknown monotone link ``g``, so
only the direction ``b/||b||`` is identifiable. For elliptically
distributed covariates it can be read off a single linear solve:
``Cov(X)^-1 Cov(X, Y)`` is proportional to ``b``. The estimator below
returns that direction with unit norm plus the plug-in scalars the
asymptotic covariance needs, and never touches the link.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_data
from .exceptions import DegenerateDirection, SingularCovariance, SingularMatrix
from .linalg import pd_solve, sample_covariance

__all__ = ["DirectionEstimator", "LeastSquaresDirection", "cosine_to"]

# An accumulated moment vector is "zero" when it sits at rounding level
# relative to the magnitudes that were summed to produce it.
_DEGENERATE_RTOL = 1e-12


def cosine_to(direction, truth):
    """Cosine of the angle between two nonzero vectors of equal length.

    Returns a value clipped to [-1, 1]; 1 means identical direction,
    -1 the exact opposite.
    """
    d = np.asarray(direction, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if d.shape != t.shape:
        raise ValueError(f"vectors have different lengths ({d.size} vs {t.size})")
    nd = np.linalg.norm(d)
    nt = np.linalg.norm(t)
    if not np.isfinite(nd) or not np.isfinite(nt) or nd <= 0.0 or nt <= 0.0:
        raise DegenerateDirection("cosine is undefined for zero or non-finite vectors")
    return float(np.clip((d @ t) / (nd * nt), -1.0, 1.0))


def _degenerate_moment(moment, accumulated):
    """True when the column-wise accumulation cancelled to rounding noise."""
    scale = float(np.max(accumulated)) if accumulated.size else 0.0
    return float(np.max(np.abs(moment), initial=0.0)) <= _DEGENERATE_RTOL * scale


def plugin_lambda(x, y, direction):
    """Plug-in slope (1/n) sum_i y_i d' Cov(X)^-1 (x_i - xbar).

    Diagnostic companion for any unit direction ``d``; returns ``nan``
    when the covariate covariance is singular.
    """
    x, y = check_data(x, y)
    xt = x - x.mean(axis=0)
    try:
        z = pd_solve(sample_covariance(x), np.asarray(direction, dtype=float))
    except SingularMatrix:
        return float("nan")
    return float(y @ (xt @ z)) / x.shape[0]


class DirectionEstimator(BaseEstimator):
    """Shared behaviour for unit-direction estimators.

    Subclasses set ``direction_`` (unit norm), ``raw_norm_``, ``lambda_``,
    ``gamma_``, ``n_samples_`` and ``n_features_in_`` during ``fit``.
    """

    def transform(self, X):
        """Project rows of X onto the fitted index, returning ``X @ direction_``."""
        check_is_fitted(self, "direction_")
        x = np.asarray(X, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        return x @ self.direction_

    def fit_transform(self, X, y):
        return self.fit(X, y).transform(X)

    def cosine_to(self, truth):
        """Cosine between the fitted direction and a reference vector."""
        check_is_fitted(self, "direction_")
        return cosine_to(self.direction_, truth)


class LeastSquaresDirection(DirectionEstimator):
    """Closed-form least-squares estimator of the index direction.

    Solves ``Cov(X) v = sum_i y_i (x_i - xbar)`` and normalizes ``v``.
    The response may be continuous or binary-coded 0/1; binary responses
    get no special casing.

    Parameters
    ----------
    centered : bool, default=True
        Use the covariate-centered moment. The uncentered variant
        (``sum_i y_i x_i``) targets mean-zero designs; it stays
        well-defined for constant responses but is shift-sensitive.

    Attributes
    ----------
    direction_ : ndarray of shape (n_features,)
        Unit-norm estimate of ``b/||b||``. For an increasing link it
        converges to ``+b/||b||``; a decreasing link flips the sign and
        callers own that interpretation. No automatic flip is attempted.
    raw_norm_ : float
        Euclidean norm of the unnormalized solve (always positive).
    lambda_ : float
        Plug-in index slope, computed with the fitted unit direction in
        place of the unknown truth. Equals ``raw_norm_ / n``.
    gamma_ : float
        Sample mean of the response.
    n_samples_, n_features_in_ : int
        Training sample dimensions.

    Raises
    ------
    SingularCovariance
        When the sample covariance of X is numerically singular
        (in particular whenever ``n <= p``).
    DegenerateDirection
        When the moment vector cancels to rounding level, e.g. for a
        constant response (the ``b = 0`` regime).
    """

    def __init__(self, centered=True):
        self.centered = centered

    @property
    def method_tag(self):
        return "new" if self.centered else "new-uncentered"

    def fit(self, X, y):
        x, y = check_data(X, y)
        n, p = x.shape
        cov = sample_covariance(x)
        xt = x - x.mean(axis=0) if self.centered else x
        moment = y @ xt
        accumulated = (np.abs(xt) * np.abs(y)[:, None]).sum(axis=0)
        if _degenerate_moment(moment, accumulated):
            raise DegenerateDirection(
                "moment vector sum_i y_i x_i cancelled to rounding level; "
                "the direction is unidentified (constant response?)"
            )
        try:
            raw = pd_solve(cov, moment)
        except SingularMatrix as exc:
            raise SingularCovariance(
                f"sample covariance of X is singular for n={n}, p={p}: {exc}"
            ) from exc
        raw_norm = float(np.linalg.norm(raw))
        if raw_norm <= 0.0:  # pragma: no cover - caught by the moment guard
            raise DegenerateDirection("unnormalized direction estimate is zero")
        self.direction_ = raw / raw_norm
        self.raw_norm_ = raw_norm
        # lambda-hat = (1/n) sum_i y_i d' Cov^-1 xt_i = d'raw/n = ||raw||/n.
        self.lambda_ = raw_norm / n
        self.gamma_ = float(y.mean())
        self.n_samples_ = n
        self.n_features_in_ = p
        return self
