"""Monte Carlo engine: scenario generation, repetition loop, result tables.

Determinism contract: every repetition draws from its own RNG stream,
derived from ``(scenario.seed, rep_index)`` alone, and the aggregation is
keyed by repetition index. Two runs of the same scenario list therefore
produce bit-identical tables regardless of how many worker threads
execute the repetitions (capped by the DIRSET_THREADS environment
variable, default 1).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, ndtr

from .baselines import LMRCDirection, MaximumScoreDirection, ProbitDirection
from .estimators import LeastSquaresDirection, cosine_to
from .exceptions import NumericalError
from .linalg import cholesky_factor

__all__ = [
    "CASES",
    "METHODS",
    "Scenario",
    "CellResult",
    "SimulationTable",
    "ar1_covariance",
    "draw_beta",
    "draw_error",
    "generate",
    "run_table",
    "table_to_csv",
    "table_to_markdown",
    "read_table_csv",
]

# Binary cases threshold a latent index with case-specific noise; the
# numbered cases add standard normal noise to a transformed index.
CASES = ("I", "II", "III", "C1", "C2", "C3", "C4")
METHODS = ("new", "new-uncentered", "ms", "lmrc", "probit")
ERROR_LAWS = ("std_normal", "t1_cauchy", "normal_mixture")

CSV_COLUMNS = ("case", "n", "p", "rho", "method", "mean_cos", "se_cos", "failures")


@dataclass(frozen=True)
class Scenario:
    """One simulation cell: a data-generating design plus estimator tags.

    ``mixture_sd`` switches the second parameter of the mixture error
    components from variance (the default reading) to standard deviation.
    ``fixed_beta`` freezes one index vector across repetitions instead of
    redrawing it every repetition (the default).
    """

    case: str
    n: int
    p: int
    rho: float
    reps: int
    seed: int
    estimators: tuple = ("new",)
    fixed_beta: bool = False
    mixture_sd: bool = False
    ms_starts: int = 200
    ms_refine_rounds: int = 5

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {CASES}")
        if self.p < 1:
            raise ValueError("p must be positive")
        if self.n <= self.p:
            raise ValueError(f"need n > p, got n={self.n}, p={self.p}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        estimators = tuple(self.estimators)
        if not estimators:
            raise ValueError("estimators must be nonempty")
        for tag in estimators:
            if tag not in METHODS:
                raise ValueError(f"unknown estimator tag {tag!r}; expected one of {METHODS}")
        object.__setattr__(self, "estimators", estimators)


@dataclass
class CellResult:
    """Aggregate of one (scenario, method) cell.

    ``mean_cos``/``se_cos`` are the sample mean and sample standard
    deviation of the cosine across the successful repetitions; both are
    NaN when every repetition failed.
    """

    scenario: Scenario
    method: str
    mean_cos: float
    se_cos: float
    failures: int


@dataclass
class SimulationTable:
    """Cells in scenario x estimator order plus run metadata.

    The metadata never enters the CSV/markdown serializations, which stay
    byte-stable across reruns with the same seeds.
    """

    cells: list
    metadata: dict = field(default_factory=dict)

    def fully_failed_cells(self):
        return [c for c in self.cells if c.failures >= c.scenario.reps]


def ar1_covariance(p, rho):
    """AR(1) covariance with entries rho^|i-j|; positive definite for |rho|<1."""
    if p < 1:
        raise ValueError("p must be positive")
    if not -1.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (-1, 1), got {rho}")
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def draw_beta(p, rng):
    """Unit vector with pre-normalization components i.i.d. uniform on (-1, 1)."""
    while True:
        s = rng.uniform(-1.0, 1.0, size=p)
        norm = np.linalg.norm(s)
        if norm >= 1e-8:
            return s / norm


def draw_error(law, size, rng, mixture_sd=False):
    """Draw i.i.d. noise from one of the three error laws.

    ``t1_cauchy`` is realized as a ratio of independent standard normals
    (equal in law to t(1)). The mixture is 0.4*N(-3, 1) + 0.6*N(2, 2)
    with the second parameter read as a variance unless ``mixture_sd``.
    """
    if law == "std_normal":
        return rng.standard_normal(size)
    if law == "t1_cauchy":
        with np.errstate(divide="ignore", invalid="ignore"):
            return rng.standard_normal(size) / rng.standard_normal(size)
    if law == "normal_mixture":
        second_scale = 2.0 if mixture_sd else np.sqrt(2.0)
        pick = rng.random(size) < 0.4
        draws = np.where(
            pick,
            -3.0 + rng.standard_normal(size),
            2.0 + second_scale * rng.standard_normal(size),
        )
        return draws
    raise ValueError(f"unknown error law {law!r}; expected one of {ERROR_LAWS}")


def _case_error_law(case):
    return {"I": "std_normal", "II": "t1_cauchy", "III": "normal_mixture"}.get(
        case, "std_normal"
    )


def _response(case, index, eps):
    """Map a latent index and a noise draw to the response of one case."""
    if case in ("I", "II", "III"):
        return (index + eps > 0.0).astype(float)
    if case == "C1":
        return index + eps
    if case == "C2":
        return ndtr(index) + eps
    if case == "C3":
        return np.logaddexp(0.0, index) + eps
    if case == "C4":
        return expit(index) + eps
    raise ValueError(f"unknown case {case!r}")


def _rep_rng(seed, rep_index):
    return np.random.default_rng(np.random.SeedSequence((int(seed), 1, int(rep_index))))


def _beta_rng(seed):
    return np.random.default_rng(np.random.SeedSequence((int(seed), 0)))


def _ms_seed(seed, rep_index):
    return int(
        np.random.SeedSequence((int(seed), 2, int(rep_index))).generate_state(1)[0]
    )


def generate(scenario, rep_index):
    """Data for one repetition: returns ``(X, y, true_beta)``.

    X rows are i.i.d. N(0, ar1_covariance(p, rho)) via Cholesky; the index
    vector is redrawn per repetition unless ``scenario.fixed_beta``. The
    stream is a pure function of ``(scenario.seed, rep_index)``, and the
    same data reaches every estimator of the cell.
    """
    rng = _rep_rng(scenario.seed, rep_index)
    if scenario.fixed_beta:
        beta = draw_beta(scenario.p, _beta_rng(scenario.seed))
    else:
        beta = draw_beta(scenario.p, rng)
    chol = cholesky_factor(ar1_covariance(scenario.p, scenario.rho))
    x = rng.standard_normal((scenario.n, scenario.p)) @ chol.T
    eps = draw_error(
        _case_error_law(scenario.case), scenario.n, rng, mixture_sd=scenario.mixture_sd
    )
    return x, _response(scenario.case, x @ beta, eps), beta


def _build_estimator(tag, scenario, rep_index):
    if tag == "new":
        return LeastSquaresDirection(centered=True)
    if tag == "new-uncentered":
        return LeastSquaresDirection(centered=False)
    if tag == "lmrc":
        return LMRCDirection()
    if tag == "probit":
        return ProbitDirection()
    if tag == "ms":
        return MaximumScoreDirection(
            n_random_starts=scenario.ms_starts,
            refine_rounds=scenario.ms_refine_rounds,
            seed=_ms_seed(scenario.seed, rep_index),
        )
    raise ValueError(f"unknown estimator tag {tag!r}")


def _run_one_rep(scenario, rep_index):
    """cos(estimate, truth) per method; NaN marks a failed estimator."""
    x, y, beta = generate(scenario, rep_index)
    out = {}
    for tag in scenario.estimators:
        est = _build_estimator(tag, scenario, rep_index)
        try:
            est.fit(x, y)
            out[tag] = cosine_to(est.direction_, beta)
        except NumericalError:
            out[tag] = np.nan
    return out


def resolve_workers(max_workers=None):
    """Worker-thread cap: explicit argument, else DIRSET_THREADS, else 1."""
    if max_workers is not None:
        return max(1, int(max_workers))
    return max(1, int(os.environ.get("DIRSET_THREADS", "1")))


def run_table(scenarios, max_workers=None):
    """Run every scenario and aggregate per (scenario, estimator) cell.

    Repetitions may execute on several threads; results are reduced in
    repetition order, so the output is identical for any worker count.
    Estimator failures inside a repetition are excluded from the mean and
    counted in ``failures``.
    """
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError("scenario list is empty")
    seen = set()
    for sc in scenarios:
        for tag in sc.estimators:
            key = (sc.case, sc.n, sc.p, sc.rho, sc.seed, tag)
            if key in seen:
                raise ValueError(f"duplicate (scenario, method) cell: {key}")
            seen.add(key)
    workers = resolve_workers(max_workers)
    cells = []
    for sc in scenarios:
        reps = range(sc.reps)
        if workers == 1:
            per_rep = [_run_one_rep(sc, r) for r in reps]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                per_rep = list(pool.map(lambda r: _run_one_rep(sc, r), reps))
        for tag in sc.estimators:
            values = np.array([per_rep[r][tag] for r in reps])
            good = values[np.isfinite(values)]
            failures = int(values.size - good.size)
            if good.size == 0:
                mean, se = float("nan"), float("nan")
            else:
                mean = float(good.mean())
                se = float(good.std(ddof=1)) if good.size > 1 else 0.0
            cells.append(CellResult(sc, tag, mean, se, failures))
    from . import __version__

    meta = {"version": __version__, "workers": workers}
    return SimulationTable(cells=cells, metadata=meta)


def _fmt(value):
    """Shortest round-trip decimal form, with NA for undefined cells."""
    if value is None or (isinstance(value, float) and not np.isfinite(value)):
        return "NA"
    return repr(float(value))


def table_to_csv(table):
    lines = [",".join(CSV_COLUMNS)]
    for c in table.cells:
        sc = c.scenario
        lines.append(
            ",".join(
                [
                    sc.case,
                    str(sc.n),
                    str(sc.p),
                    _fmt(sc.rho),
                    c.method,
                    _fmt(c.mean_cos),
                    _fmt(c.se_cos),
                    str(c.failures),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def read_table_csv(text):
    """Parse a results CSV back into plain row dicts (NA becomes NaN)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = tuple(lines[0].split(","))
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected header {header!r}")

    def _num(s):
        return float("nan") if s == "NA" else float(s)

    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append(
            {
                "case": parts[0],
                "n": int(parts[1]),
                "p": int(parts[2]),
                "rho": float(parts[3]),
                "method": parts[4],
                "mean_cos": _num(parts[5]),
                "se_cos": _num(parts[6]),
                "failures": int(parts[7]),
            }
        )
    return rows


def table_to_markdown(table, reference=None):
    """Aligned markdown table; optional reference values add diff columns."""
    header = list(CSV_COLUMNS)
    if reference is not None:
        header += ["ref_cos", "ref_se", "delta_cos"]
    rows = []
    for c in table.cells:
        sc = c.scenario
        row = [
            sc.case,
            str(sc.n),
            str(sc.p),
            f"{sc.rho:g}",
            c.method,
            "NA" if not np.isfinite(c.mean_cos) else f"{c.mean_cos:.4f}",
            "NA" if not np.isfinite(c.se_cos) else f"{c.se_cos:.4f}",
            str(c.failures),
        ]
        if reference is not None:
            key = (sc.case, sc.n, sc.p, sc.rho, c.method)
            ref = reference.get(key)
            if ref is None or not np.isfinite(c.mean_cos):
                row += ["NA", "NA", "NA"]
            else:
                row += [
                    f"{ref[0]:.4f}",
                    f"{ref[1]:.4f}",
                    f"{c.mean_cos - ref[0]:+.4f}",
                ]
        rows.append(row)
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
    def _line(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
    sep = "|-" + "-|-".join("-" * w for w in widths) + "-|"
    return "\n".join([_line(header), sep] + [_line(r) for r in rows]) + "\n"
