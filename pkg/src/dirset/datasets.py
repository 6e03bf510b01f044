"""Synthetic stand-in for the export-participation case study.

The original firm-level records are not redistributable, so the CLI ships
a generator that mimics their shape: 1614 firms, a binary exporter flag
as the response, seven continuous covariates and one binary zone dummy,
with the response drawn from a probit model at a known index vector. That
keeps the whole CSV-to-report pipeline exercisable end to end.
"""

from __future__ import annotations

import numpy as np

__all__ = ["EXPORT_COLUMNS", "RESPONSE_COLUMN", "make_export_data", "write_export_csv"]

RESPONSE_COLUMN = "exporter"
EXPORT_COLUMNS = ("lemp", "lprod", "lcapint", "intastr", "cmp", "cmp2", "ltastx", "sez")

# Index vector behind the synthetic response (unit norm below); firm size,
# capital intensity and the zone dummy carry most of the signal.
_RAW_BETA = np.array([0.76, 0.02, 0.15, -0.08, -0.12, 0.08, -0.18, 0.58])
_INTERCEPT = -0.4


def make_export_data(n=1614, seed=2006):
    """Return ``(X, y, beta)`` with covariates ordered as EXPORT_COLUMNS.

    The continuous covariates are correlated Gaussians (cmp and its square
    proxy cmp2 strongly so); sez is Bernoulli(0.3). ``beta`` is the unit
    direction that generated the probit response.
    """
    rng = np.random.default_rng(seed)
    corr = np.eye(7)
    pairs = {
        (0, 1): 0.35,  # size vs productivity
        (0, 2): 0.20,
        (2, 3): 0.15,
        (4, 5): 0.90,  # cmp vs its square proxy
        (0, 6): 0.25,
    }
    for (i, j), r in pairs.items():
        corr[i, j] = corr[j, i] = r
    chol = np.linalg.cholesky(corr)
    cont = rng.standard_normal((n, 7)) @ chol.T
    sez = (rng.random(n) < 0.3).astype(float)
    x = np.column_stack([cont, sez])
    beta = _RAW_BETA / np.linalg.norm(_RAW_BETA)
    latent = _INTERCEPT + x @ beta + rng.standard_normal(n)
    y = (latent > 0.0).astype(float)
    return x, y, beta


def write_export_csv(path, n=1614, seed=2006):
    """Write the synthetic dataset as an RFC-4180 CSV with a header row."""
    x, y, _ = make_export_data(n=n, seed=seed)
    header = ",".join((RESPONSE_COLUMN,) + EXPORT_COLUMNS)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for yi, row in zip(y, x):
            cells = [f"{yi:.0f}"] + [f"{v:.6f}" for v in row]
            fh.write(",".join(cells) + "\n")
