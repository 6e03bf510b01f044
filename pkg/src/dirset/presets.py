"""Built-in scenario presets and the bundled reference values they mirror."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .simulate import Scenario

__all__ = ["PRESETS", "preset_scenarios", "load_reference"]

RHO_GRID = (-0.6, -0.3, 0.0, 0.3, 0.6)
PRESETS = ("table1", "table2", "table3")


def _cell_seed(base_seed, index):
    return int(np.random.SeedSequence((int(base_seed), 3, int(index))).generate_state(1)[0])


def table1_scenarios(seed=0, reps=100, ms_starts=200):
    """Binary cases I-III at p=3: 3 cases x 3 sample sizes x 5 rho values."""
    out = []
    for case in ("I", "II", "III"):
        for n in (100, 300, 500):
            for rho in RHO_GRID:
                out.append(
                    Scenario(
                        case=case,
                        n=n,
                        p=3,
                        rho=rho,
                        reps=reps,
                        seed=_cell_seed(seed, len(out)),
                        estimators=("new", "ms", "lmrc", "probit"),
                        ms_starts=ms_starts,
                    )
                )
    return out


def table2_scenarios(seed=0, reps=100):
    """Higher-dimensional binary design with t(1) noise; maximum score is
    intractable at these p and is left out."""
    out = []
    for p in (10, 15):
        for rho in RHO_GRID:
            out.append(
                Scenario(
                    case="II",
                    n=500,
                    p=p,
                    rho=rho,
                    reps=reps,
                    seed=_cell_seed(seed, 1000 + len(out)),
                    estimators=("new", "lmrc", "probit"),
                )
            )
    return out


def table3_scenarios(seed=0, reps=100):
    """Continuous-response cases 1-4 against the rank-correlation baseline."""
    out = []
    for case in ("C1", "C2", "C3", "C4"):
        for n in (100, 300, 500):
            for rho in (-0.3, 0.0, 0.3):
                out.append(
                    Scenario(
                        case=case,
                        n=n,
                        p=3,
                        rho=rho,
                        reps=reps,
                        seed=_cell_seed(seed, 2000 + len(out)),
                        estimators=("new", "lmrc"),
                    )
                )
    return out


def preset_scenarios(name, seed=0, reps=100, ms_starts=200):
    if name == "table1":
        return table1_scenarios(seed=seed, reps=reps, ms_starts=ms_starts)
    if name == "table2":
        return table2_scenarios(seed=seed, reps=reps)
    if name == "table3":
        return table3_scenarios(seed=seed, reps=reps)
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")


def load_reference(name):
    """Bundled benchmark values, keyed by (case, n, p, rho, method).

    These are transcribed external reference numbers shipped for diffing
    reproduction runs; they are Monte Carlo outputs themselves and are not
    tight ground truth.
    """
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")
    text = (
        resources.files("dirset.data")
        .joinpath(f"reference_{name}.csv")
        .read_text(encoding="utf-8")
    )
    out = {}
    for line in text.splitlines():
        if not line or line.startswith("#") or line.startswith("case,"):
            continue
        case, n, p, rho, method, cos, se = line.split(",")
        out[(case, int(n), int(p), float(rho), method)] = (float(cos), float(se))
    return out
