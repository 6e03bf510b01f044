"""Plug-in asymptotic covariance and Wald test for the fitted direction.

The limit of ``sqrt(n) (D - b/||b||)`` is a linear image of centered
moment fluctuations, so its covariance is estimated directly as the
sample covariance of per-observation influence vectors instead of
assembling the (p + p^2)-dimensional moment covariance and the linear
map separately. The limit lives in the tangent plane of the unit sphere
at the direction, which makes the covariance rank ``p - 1`` and forces a
pseudoinverse into the Wald statistic. The norm of the index parameter
is fixed at 1 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import chdtri, gammaincc

from ._validation import check_data
from .exceptions import (
    InputError,
    InvalidNull,
    SingularCovariance,
    SingularMatrix,
    UnstableLambda,
)
from .linalg import moore_penrose, pd_solve, sample_covariance

__all__ = [
    "DirectionCovariance",
    "WaldTestResult",
    "direction_covariance",
    "wald_direction_test",
    "chi_square_upper_tail",
    "chi_square_quantile",
]

_LAMBDA_FLOOR = 1e-8


@dataclass
class DirectionCovariance:
    """Estimated covariance of the limit of sqrt(n) (D - b/||b||).

    Attributes
    ----------
    sigma_beta : ndarray of shape (p, p)
        Positive semidefinite; annihilates the fitted direction
        (tangent-plane degeneracy), so its rank is at most p - 1.
    rank : int
        Numerical rank of ``sigma_beta``; p - 1 in regular problems.
    lambda_hat, gamma_hat : float
        Plug-in scalars carried over from the estimate.
    n_samples : int
        Observations behind the estimate; per-coordinate standard errors
        are ``sqrt(diag(sigma_beta) / n_samples)``.
    """

    sigma_beta: np.ndarray
    rank: int
    lambda_hat: float
    gamma_hat: float
    n_samples: int

    def standard_errors(self):
        return np.sqrt(np.clip(np.diagonal(self.sigma_beta), 0.0, None) / self.n_samples)


@dataclass
class WaldTestResult:
    """Wald statistic against a hypothesized unit direction.

    ``dof`` is fixed at p - 1 (the rank the limit law has in regular
    problems) even when the numerical rank of the covariance disagrees;
    ``rank_mismatch`` flags that disagreement.
    """

    statistic: float
    dof: int
    p_value: float
    reject_at: dict = field(default_factory=dict)
    rank_mismatch: bool = False


def chi_square_upper_tail(x, dof):
    """P(chi2(dof) > x) via the regularized incomplete gamma function."""
    if dof < 1:
        raise ValueError("dof must be a positive integer")
    if x < 0:
        raise ValueError("chi-square statistic must be nonnegative")
    return float(gammaincc(0.5 * dof, 0.5 * x))


def chi_square_quantile(prob, dof):
    """x such that P(chi2(dof) <= x) = prob."""
    if not 0.0 < prob < 1.0:
        raise ValueError("prob must lie strictly between 0 and 1")
    return float(chdtri(dof, 1.0 - prob))


def _influence_vectors(estimator, x, y):
    """Per-observation influence vectors of the fitted direction.

    For the centered estimator the contribution of observation i is
    ``P Cov^-1 (lam^-1 (y_i - gamma) xt_i - xt_i xt_i' d)`` with centered
    covariates xt; the uncentered variant uses raw covariates and has no
    response-mean term. ``P = I - d d'`` projects onto the tangent plane.
    """
    if not hasattr(estimator, "centered"):
        raise InputError(
            "asymptotic covariance is defined for the least-squares "
            f"direction estimators, not {type(estimator).__name__}"
        )
    d = estimator.direction_
    lam = estimator.lambda_
    if abs(lam) <= _LAMBDA_FLOOR:
        raise UnstableLambda(
            f"plug-in slope {lam:.2e} is too close to zero for Wald inference"
        )
    cov = sample_covariance(x)
    if estimator.centered:
        xt = x - x.mean(axis=0)
        core = ((y - estimator.gamma_) / lam)[:, None] * xt - xt * (xt @ d)[:, None]
    else:
        core = (y / lam)[:, None] * x - x * (x @ d)[:, None]
    try:
        z = pd_solve(cov, core.T).T
    except SingularMatrix as exc:
        raise SingularCovariance(str(exc)) from exc
    return z - np.outer(z @ d, d)


def direction_covariance(estimator, X, y):
    """Plug-in covariance for a fitted :class:`LeastSquaresDirection`.

    ``X, y`` must be the data the estimator was fitted on; the
    centered/uncentered variant follows the estimator's own setting.
    The uncentered variant presumes a mean-zero design.
    """
    x, y = check_data(X, y)
    d = estimator.direction_
    psi = _influence_vectors(estimator, x, y)
    psi = psi - psi.mean(axis=0)
    sigma = psi.T @ psi / x.shape[0]
    # pin the tangent-plane degeneracy exactly: P sigma P with P = I - dd'
    sigma -= np.outer(d, sigma.T @ d)
    sigma -= np.outer(sigma @ d, d)
    sigma = (sigma + sigma.T) / 2.0
    _, rank = moore_penrose(sigma)
    return DirectionCovariance(
        sigma_beta=sigma,
        rank=rank,
        lambda_hat=estimator.lambda_,
        gamma_hat=estimator.gamma_,
        n_samples=x.shape[0],
    )


def wald_direction_test(estimator, covariance, beta0, levels=(0.05,)):
    """Wald test of H0: direction equals ``beta0`` (a unit vector).

    The statistic is ``n (d - beta0)' sigma_beta^+ (d - beta0)``, referred
    to a chi-square with p - 1 degrees of freedom. Because the covariance
    annihilates the fitted direction, the test has no power along it; in
    particular H0 at the exact antipode ``-d`` yields a statistic near 0.
    Callers own the sign convention of the fitted direction.
    """
    d = estimator.direction_
    b0 = np.asarray(beta0, dtype=float).ravel()
    if b0.shape != d.shape:
        raise InvalidNull(
            f"hypothesized direction has length {b0.size}, expected {d.size}"
        )
    if abs(np.linalg.norm(b0) - 1.0) > 1e-8:
        raise InvalidNull("hypothesized direction must have unit norm")
    dof = d.size - 1
    pinv, rank = moore_penrose(covariance.sigma_beta)
    delta = d - b0
    statistic = max(float(covariance.n_samples * delta @ pinv @ delta), 0.0)
    reject = {
        float(a): statistic > chi_square_quantile(1.0 - float(a), dof) for a in levels
    }
    return WaldTestResult(
        statistic=statistic,
        dof=dof,
        p_value=chi_square_upper_tail(statistic, dof),
        reject_at=reject,
        rank_mismatch=(rank != dof),
    )
