"""Comparison estimators: maximum score, linearized MRC, and probit MLE.

All three return unit-norm directions through the same fitted-attribute
surface as the least-squares estimator, so the Monte Carlo engine and the
CLI treat them interchangeably.
"""

from __future__ import annotations

import numpy as np
from scipy.special import log_ndtr

from ._validation import check_binary_response, check_data
from .estimators import DirectionEstimator, _degenerate_moment, plugin_lambda
from .exceptions import (
    DegenerateDirection,
    DimensionTooLarge,
    SeparationError,
    SingularMatrix,
)
from .linalg import pd_solve

__all__ = ["MaximumScoreDirection", "LMRCDirection", "ProbitDirection"]

_TWO_PI = 2.0 * np.pi
_MAX_SCORE_DIM = 6


def _signed_score(x, w, b):
    """sum_i w_i 1{x_i' b >= 0} for integer weights w, at a concrete b."""
    return int(w[(x @ b) >= 0.0].sum())


def _best_on_circle(x, w, b, u):
    """Exact maximum of the signed score along theta -> cos(theta) b + sin(theta) u.

    Along the circle, x_i' b(theta) = r_i cos(theta - phi_i), so sample i
    predicts nonnegative exactly on a closed half-circle. The score is
    piecewise constant with breakpoints at the 2m arc endpoints; a sweep
    over them scores every open region in O(m log m). Returns the best
    region's (score, midpoint angle). Boundary-only optima are ignored:
    they cannot be reproduced by a reconstructed float direction anyway,
    and the caller re-scores the reconstruction directly.
    """
    a = x @ b
    c = x @ u
    active = (a != 0.0) | (c != 0.0)
    base = int(w[~active].sum())  # inactive rows always predict nonnegative
    if not np.any(active):
        return base, 0.0
    wa = w[active]
    phi = np.arctan2(c[active], a[active])
    ang = np.concatenate([np.mod(phi - 0.5 * np.pi, _TWO_PI), np.mod(phi + 0.5 * np.pi, _TWO_PI)])
    delta = np.concatenate([wa, -wa])
    order = np.argsort(ang, kind="stable")
    ang = ang[order]
    delta = delta[order]
    # Arc starts and ends are pi apart, so there are always >= 2 distinct
    # event angles and the wrap-around gap below is positive.
    gap = ang[0] + _TWO_PI - ang[-1]
    probe = ang[0] - 0.5 * gap
    run0 = base + int(wa[np.cos(probe - phi) >= 0.0].sum())
    levels = run0 + np.cumsum(delta)
    last = np.append(np.flatnonzero(np.diff(ang) > 0.0), ang.size - 1)
    group_ang = ang[last]
    group_lvl = levels[last]
    mids = 0.5 * (group_ang + np.append(group_ang[1:], group_ang[0] + _TWO_PI))
    k = int(np.argmax(group_lvl))
    return int(group_lvl[k]), float(mids[k])


class MaximumScoreDirection(DirectionEstimator):
    """Manski's maximum score estimator for binary responses.

    Maximizes ``S(b) = sum_i (2 y_i - 1) 1{x_i' b >= 0}`` over unit
    directions. The objective is piecewise constant (non-convex,
    non-smooth), so the search runs seeded uniform random unit starts and
    refines each one with exact great-circle line searches through the
    coordinate axes; along such a circle the objective changes only where
    one sample's predicted sign flips, which the sweep enumerates. For two
    covariates a single sweep covers the whole circle, making the search
    exact there.

    Ties are resolved by keeping the first direction that attains the best
    score in search order. Everything is deterministic given ``seed``.

    Parameters
    ----------
    n_random_starts : int, default=200
    refine_rounds : int, default=5
        Upper bound on sweep rounds per start; refinement stops early once
        a full round over the coordinates yields no improvement.
    seed : int, default=0

    Attributes
    ----------
    direction_ : ndarray of shape (n_features,)
    score_ : int
        Correctly signed predictions at ``direction_`` (the maximized sum
        plus the number of zero labels), re-evaluated on the returned
        vector so the two always agree.
    """

    method_tag = "ms"

    def __init__(self, n_random_starts=200, refine_rounds=5, seed=0):
        self.n_random_starts = n_random_starts
        self.refine_rounds = refine_rounds
        self.seed = seed

    def fit(self, X, y):
        if self.n_random_starts < 1:
            raise ValueError("n_random_starts must be at least 1")
        if self.refine_rounds < 1:
            raise ValueError("refine_rounds must be at least 1")
        x, y = check_data(X, y)
        check_binary_response(y)
        n, p = x.shape
        if p < 2:
            raise ValueError("maximum score needs at least 2 covariates")
        if p > _MAX_SCORE_DIM:
            raise DimensionTooLarge(
                f"maximum score is intractable at p={p} (limit {_MAX_SCORE_DIM})"
            )
        w = (2.0 * y - 1.0).astype(np.int64)
        rng = np.random.default_rng(self.seed)
        starts = rng.standard_normal((self.n_random_starts, p))
        starts /= np.linalg.norm(starts, axis=1, keepdims=True)
        axes = np.eye(p)
        best_b = None
        best_score = None
        for b in starts:
            score = _signed_score(x, w, b)
            for _ in range(self.refine_rounds):
                improved = False
                for j in range(p):
                    u = axes[j] - b[j] * b
                    nu = np.linalg.norm(u)
                    if nu < 1e-12:
                        continue
                    u = u / nu
                    bound, theta = _best_on_circle(x, w, b, u)
                    if bound <= score:
                        continue
                    cand = np.cos(theta) * b + np.sin(theta) * u
                    cand /= np.linalg.norm(cand)
                    cand_score = _signed_score(x, w, cand)
                    if cand_score > score:
                        b, score = cand, cand_score
                        improved = True
                if not improved:
                    break
            if best_score is None or score > best_score:
                best_b, best_score = b, score
        self.direction_ = np.array(best_b)
        self.score_ = best_score + int(np.count_nonzero(y == 0.0))
        self.raw_norm_ = 1.0
        self.lambda_ = plugin_lambda(x, y, best_b)
        self.gamma_ = float(y.mean())
        self.n_samples_ = n
        self.n_features_in_ = p
        return self


class LMRCDirection(DirectionEstimator):
    """Linearized maximum rank correlation direction.

    Normalizes ``v = sum_{i<j} sign(y_i - y_j)(x_i - x_j)`` with
    ``sign(0) = 0``. The pairwise sum collapses to ``sum_i c_i x_i`` with
    integer weights ``c_i = #{y_j < y_i} - #{y_j > y_i}``, which is what
    gets accumulated (O(n log n) instead of the literal O(n^2) double
    loop; the value is identical). Only the ranks of the response enter,
    so any strictly increasing transform of y leaves the fit bit-identical.
    """

    method_tag = "lmrc"

    def fit(self, X, y):
        x, y = check_data(X, y)
        ordered = np.sort(y)
        below = np.searchsorted(ordered, y, side="left")
        above = y.size - np.searchsorted(ordered, y, side="right")
        weights = (below - above).astype(float)
        raw = weights @ x
        accumulated = (np.abs(x) * np.abs(weights)[:, None]).sum(axis=0)
        if _degenerate_moment(raw, accumulated):
            raise DegenerateDirection(
                "pairwise rank accumulation is zero (constant response?)"
            )
        raw_norm = float(np.linalg.norm(raw))
        self.direction_ = raw / raw_norm
        self.raw_norm_ = raw_norm
        self.lambda_ = plugin_lambda(x, y, self.direction_)
        self.gamma_ = float(y.mean())
        self.n_samples_ = y.size
        self.n_features_in_ = x.shape[1]
        return self


def _mills(z):
    """phi(z)/Phi(z), stable in both tails."""
    return np.exp(-0.5 * z * z - 0.5 * np.log(2.0 * np.pi) - log_ndtr(z))


def _probit_loglik(design, y, theta):
    z = design @ theta
    return float(np.where(y > 0.5, log_ndtr(z), log_ndtr(-z)).sum())


class ProbitDirection(DirectionEstimator):
    """Probit maximum likelihood, keeping only the slope direction.

    Fits ``P(Y=1|X) = Phi(alpha + x'b)`` by Newton-Raphson with step
    halving on the log-likelihood (the standard parametric baseline; the
    intercept is estimated and then discarded). The probit log-likelihood
    is concave, so the recorded ``loglik_path_`` is nondecreasing.

    Parameters
    ----------
    max_iter : int, default=100
    tol : float, default=1e-8
        Convergence threshold on the max-norm of the score vector.

    Attributes
    ----------
    direction_ : ndarray
        Normalized slope vector.
    raw_norm_ : float
        Norm of the unnormalized slopes; near-zero values flag a fit with
        essentially no signal, whose direction is unstable.
    coef_, intercept_ : ndarray, float
    converged_ : bool
    n_iter_ : int
    loglik_path_ : ndarray
        Log-likelihood after the initial point and each accepted step.
    """

    method_tag = "probit"

    def __init__(self, max_iter=100, tol=1e-8):
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        x, y = check_data(X, y)
        check_binary_response(y, require_both_classes=True)
        n, p = x.shape
        design = np.column_stack([np.ones(n), x])
        theta = np.zeros(p + 1)
        loglik = _probit_loglik(design, y, theta)
        path = [loglik]
        converged = False
        for _ in range(self.max_iter):
            z = design @ theta
            lam_pos = _mills(z)
            lam_neg = _mills(-z)
            grad = design.T @ (y * lam_pos - (1.0 - y) * lam_neg)
            if np.max(np.abs(grad)) <= self.tol:
                converged = True
                break
            curve = y * lam_pos * (z + lam_pos) + (1.0 - y) * lam_neg * (lam_neg - z)
            hess = design.T @ (design * curve[:, None])
            try:
                step = pd_solve((hess + hess.T) / 2.0, grad)
            except SingularMatrix:
                raise SingularMatrix(
                    "probit Hessian is singular (collinear covariates?)"
                ) from None
            scale = 1.0
            accepted = None
            for _ in range(20):
                cand = theta + scale * step
                cand_loglik = _probit_loglik(design, y, cand)
                if cand_loglik >= loglik:
                    accepted = (cand, cand_loglik)
                    break
                scale *= 0.5
            if accepted is None:
                break  # no ascent left at 2^-20 of the Newton step
            theta, loglik = accepted
            path.append(loglik)
            if np.linalg.norm(theta) > 1e4:
                raise SeparationError(
                    "probit coefficients diverged (norm > 1e4); "
                    "the classes look perfectly separated"
                )
        # A perfect fit (every observed label predicted with probability
        # > 1 - 1e-8) means the likelihood peaks at infinity: the norm guard
        # above cannot fire because the score vanishes superexponentially
        # out in the tails, so detect separation from the plateau instead.
        if loglik >= n * np.log1p(-1e-8):
            raise SeparationError(
                "probit log-likelihood reached a perfect-classification "
                "plateau; the MLE does not exist (separated classes)"
            )
        slopes = theta[1:]
        raw_norm = float(np.linalg.norm(slopes))
        if raw_norm <= 0.0:
            raise DegenerateDirection("probit slopes are exactly zero")
        self.direction_ = slopes / raw_norm
        self.raw_norm_ = raw_norm
        self.coef_ = slopes.copy()
        self.intercept_ = float(theta[0])
        self.converged_ = converged
        self.n_iter_ = len(path) - 1
        self.loglik_path_ = np.asarray(path)
        self.lambda_ = plugin_lambda(x, y, self.direction_)
        self.gamma_ = float(y.mean())
        self.n_samples_ = n
        self.n_features_in_ = p
        return self
