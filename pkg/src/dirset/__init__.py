"""Direction estimation for single-index models.

Estimate b/||b|| in E[Y|X] = g(X'b) without knowing the link g, compare
against maximum-score, rank-correlation and probit baselines, attach
plug-in asymptotic covariances and Wald tests, and drive reproducible
Monte Carlo studies from a library API or the ``dirset`` command line.
"""

from . import exceptions
from .baselines import LMRCDirection, MaximumScoreDirection, ProbitDirection
from .estimators import DirectionEstimator, LeastSquaresDirection, cosine_to
from .inference import (
    DirectionCovariance,
    WaldTestResult,
    chi_square_quantile,
    chi_square_upper_tail,
    direction_covariance,
    wald_direction_test,
)
from .simulate import (
    CellResult,
    Scenario,
    SimulationTable,
    ar1_covariance,
    draw_beta,
    draw_error,
    generate,
    run_table,
)

__version__ = "0.1.0"

__all__ = [
    "CellResult",
    "DirectionCovariance",
    "DirectionEstimator",
    "LMRCDirection",
    "LeastSquaresDirection",
    "MaximumScoreDirection",
    "ProbitDirection",
    "Scenario",
    "SimulationTable",
    "WaldTestResult",
    "ar1_covariance",
    "chi_square_quantile",
    "chi_square_upper_tail",
    "cosine_to",
    "direction_covariance",
    "draw_beta",
    "draw_error",
    "exceptions",
    "generate",
    "run_table",
    "wald_direction_test",
]
