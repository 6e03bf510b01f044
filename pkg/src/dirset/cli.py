"""Command-line interface.

Subcommands: ``estimate`` (direction from a CSV), ``test`` (Wald test of a
hypothesized direction), ``simulate`` (run a JSON scenario config),
``reproduce`` (built-in table presets diffed against bundled reference
values) and ``demo-data`` (synthetic case-study CSV).

Exit codes: 0 success, 1 user/input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv as _csv
import json
import sys
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from . import __version__
from .baselines import LMRCDirection, MaximumScoreDirection, ProbitDirection
from .datasets import write_export_csv
from .estimators import LeastSquaresDirection
from .exceptions import InputError, InvalidNull, NumericalError, ParseError
from .inference import direction_covariance, wald_direction_test
from .presets import PRESETS, load_reference, preset_scenarios
from .simulate import (
    METHODS,
    Scenario,
    run_table,
    table_to_csv,
    table_to_markdown,
)

_Z975 = float(ndtri(0.975))


def read_csv_dataset(path, response, covariates=None, header=True):
    """Load ``(X, y, covariate_names)`` from a CSV file.

    Columns are addressed by name (from the header row, or generated as
    col0..colN with ``header=False``). Every referenced cell must parse as
    a finite real; violations raise :class:`ParseError` with the row and
    column.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in _csv.reader(fh) if r]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: file is empty")
    if header:
        names = [c.strip() for c in rows[0]]
        data_rows = rows[1:]
        first_line = 2
    else:
        names = [f"col{i}" for i in range(len(rows[0]))]
        data_rows = rows
        first_line = 1
    if len(set(names)) != len(names):
        raise ParseError(f"{path}: duplicate column names in header")
    if response not in names:
        raise ParseError(f"{path}: response column {response!r} not found")
    if covariates is None:
        covariates = [c for c in names if c != response]
    for c in covariates:
        if c not in names:
            raise ParseError(f"{path}: covariate column {c!r} not found")
    if response in covariates:
        raise ParseError(f"{path}: response column {response!r} also listed as covariate")
    if not covariates:
        raise ParseError(f"{path}: no covariate columns left")
    col_index = {c: names.index(c) for c in names}

    def cell(row, line_no, name):
        idx = col_index[name]
        if idx >= len(row):
            raise ParseError(f"{path}: row {line_no} has only {len(row)} fields")
        text = row[idx].strip()
        try:
            value = float(text)
        except ValueError:
            raise ParseError(
                f"{path}: row {line_no}, column {name!r}: cannot parse {text!r} as a number"
            ) from None
        if not np.isfinite(value):
            raise ParseError(f"{path}: row {line_no}, column {name!r}: non-finite value")
        return value

    y = np.empty(len(data_rows))
    x = np.empty((len(data_rows), len(covariates)))
    for i, row in enumerate(data_rows):
        line_no = first_line + i
        y[i] = cell(row, line_no, response)
        for j, name in enumerate(covariates):
            x[i, j] = cell(row, line_no, name)
    return x, y, list(covariates)


def _build_estimator(method, seed):
    if method == "new":
        return LeastSquaresDirection(centered=True)
    if method == "new-uncentered":
        return LeastSquaresDirection(centered=False)
    if method == "ms":
        return MaximumScoreDirection(seed=seed)
    if method == "lmrc":
        return LMRCDirection()
    if method == "probit":
        return ProbitDirection()
    raise InputError(f"unknown method {method!r}; expected one of {METHODS}")


def _check_mean_zero(x, force):
    """The uncentered covariance presumes a mean-zero design; refuse loudly
    when the column means are many standard errors away from zero."""
    n = x.shape[0]
    sd = x.std(axis=0, ddof=1)
    sd[sd == 0.0] = np.inf
    z = np.abs(x.mean(axis=0)) * np.sqrt(n) / sd
    worst = float(z.max())
    if worst > 4.0 and not force:
        raise InputError(
            f"covariate means are far from zero (max |z| = {worst:.1f}); the "
            "uncentered variant assumes a mean-zero design. Center the data, "
            "use --method new, or pass --force to proceed anyway."
        )


def _parse_float_list(text, option):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise InputError(f"{option} expects comma-separated numbers, got {text!r}") from None


def cmd_estimate(args):
    covs = args.covariates.split(",") if args.covariates else None
    x, y, names = read_csv_dataset(
        args.input, args.response, covs, header=not args.no_header
    )
    est = _build_estimator(args.method, args.seed).fit(x, y)
    ses = t_stats = None
    if args.method in ("new", "new-uncentered"):
        if args.method == "new-uncentered":
            _check_mean_zero(x, args.force)
        cov = direction_covariance(est, x, y)
        ses = cov.standard_errors()
        with np.errstate(divide="ignore"):
            t_stats = est.direction_ / ses
    report = {
        "method": args.method,
        "n": est.n_samples_,
        "p": est.n_features_in_,
        "columns": names,
        "direction": est.direction_.tolist(),
        "raw_norm": est.raw_norm_,
        "lambda_hat": est.lambda_,
        "gamma_hat": est.gamma_,
        "se": None if ses is None else ses.tolist(),
        "t": None if t_stats is None else t_stats.tolist(),
        "significant_05": None
        if t_stats is None
        else [bool(abs(t) > _Z975) for t in t_stats],
    }
    if args.json:
        print(json.dumps(report, indent=2))
        return 0
    print(f"method: {args.method}   n: {report['n']}   p: {report['p']}")
    print(f"lambda_hat: {est.lambda_:.6f}   gamma_hat: {est.gamma_:.6f}   "
          f"raw_norm: {est.raw_norm_:.6f}")
    if ses is None:
        print(f"{'column':<12} {'direction':>12}")
        for name, d in zip(names, est.direction_):
            print(f"{name:<12} {d:>12.4f}")
        print("(plug-in standard errors are reported for the LS methods only)")
    else:
        print(f"{'column':<12} {'direction':>12} {'se':>10} {'t':>9}  sig@0.05")
        for name, d, s, t in zip(names, est.direction_, ses, t_stats):
            flag = "*" if abs(t) > _Z975 else ""
            print(f"{name:<12} {d:>12.4f} {s:>10.4f} {t:>9.2f}  {flag}")
        print("(se = sqrt(diag(sigma_beta)/n), plug-in asymptotic; T = direction/se)")
    return 0


def cmd_test(args):
    if args.method not in ("new", "new-uncentered"):
        raise InputError("the Wald test is defined for --method new or new-uncentered")
    covs = args.covariates.split(",") if args.covariates else None
    x, y, names = read_csv_dataset(
        args.input, args.response, covs, header=not args.no_header
    )
    beta0 = np.asarray(_parse_float_list(args.beta0, "--beta0"))
    if beta0.size != len(names):
        raise InvalidNull(
            f"--beta0 has length {beta0.size}, expected {len(names)} covariates"
        )
    norm = float(np.linalg.norm(beta0))
    if norm <= 0.0:
        raise InvalidNull("--beta0 must be a nonzero vector")
    if abs(norm - 1.0) > 1e-8:
        print(f"note: normalizing --beta0 (norm was {norm:.8f})", file=sys.stderr)
        beta0 = beta0 / norm
    levels = _parse_float_list(args.alpha, "--alpha")
    est = _build_estimator(args.method, args.seed).fit(x, y)
    if args.method == "new-uncentered":
        _check_mean_zero(x, args.force)
    cov = direction_covariance(est, x, y)
    res = wald_direction_test(est, cov, beta0, levels=levels)
    if args.json:
        print(
            json.dumps(
                {
                    "statistic": res.statistic,
                    "dof": res.dof,
                    "p_value": res.p_value,
                    "reject_at": {str(k): v for k, v in res.reject_at.items()},
                    "rank_mismatch": res.rank_mismatch,
                },
                indent=2,
            )
        )
        return 0
    print(f"W* = {res.statistic:.6f}   dof = {res.dof}   p-value = {res.p_value:.6g}")
    if res.rank_mismatch:
        print("warning: numerical rank of sigma_beta differs from p-1", file=sys.stderr)
    for a, rej in res.reject_at.items():
        print(f"alpha = {a:g}: {'reject' if rej else 'accept'} H0")
    return 0


def _scenario_from_config(obj, where, overrides):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    required = {"case", "n", "p", "rho", "reps", "seed"}
    missing = required - obj.keys()
    if missing:
        raise ParseError(f"{where}: missing keys {sorted(missing)}")
    known = required | {"estimators", "fixed_beta", "mixture_sd", "ms_starts", "ms_refine_rounds"}
    unknown = obj.keys() - known
    if unknown:
        raise ParseError(f"{where}: unknown keys {sorted(unknown)}")
    fields = dict(obj)
    fields.setdefault("estimators", ["new"])
    if not isinstance(fields["estimators"], (list, tuple)):
        raise ParseError(f"{where}.estimators: expected a list of method tags")
    fields["estimators"] = tuple(fields["estimators"])
    fields.update(overrides)
    try:
        return Scenario(**fields)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from exc


def load_config(path, overrides):
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(payload, list) or not payload:
        raise ParseError(f"{path}: expected a nonempty JSON array of scenario objects")
    return [
        _scenario_from_config(obj, f"{path}: scenario[{i}]", overrides)
        for i, obj in enumerate(payload)
    ]


def _write_outputs(table, out_path, reference=None):
    out_path = Path(out_path)
    out_path.write_text(table_to_csv(table), encoding="utf-8")
    md_path = out_path.with_suffix(".md")
    md_path.write_text(table_to_markdown(table, reference=reference), encoding="utf-8")
    return out_path, md_path


def cmd_simulate(args):
    overrides = {}
    if args.fixed_beta:
        overrides["fixed_beta"] = True
    if args.mixture_sd:
        overrides["mixture_sd"] = True
    scenarios = load_config(args.config, overrides)
    table = run_table(scenarios)
    out_path, md_path = _write_outputs(table, args.out)
    print(f"wrote {out_path} and {md_path} ({len(table.cells)} cells)")
    failed = table.fully_failed_cells()
    if failed:
        for c in failed:
            print(
                f"cell {c.scenario.case}/n={c.scenario.n}/{c.method}: "
                f"all {c.scenario.reps} repetitions failed",
                file=sys.stderr,
            )
        return 2
    return 0


def cmd_reproduce(args):
    scenarios = preset_scenarios(args.table, seed=args.seed, reps=args.reps)
    reference = load_reference(args.table)
    table = run_table(scenarios)
    out = args.out or f"{args.table}_reproduction.csv"
    out_path, md_path = _write_outputs(table, out, reference=reference)
    deltas = [
        abs(c.mean_cos - reference[(c.scenario.case, c.scenario.n, c.scenario.p,
                                    c.scenario.rho, c.method)][0])
        for c in table.cells
        if np.isfinite(c.mean_cos)
        and (c.scenario.case, c.scenario.n, c.scenario.p, c.scenario.rho, c.method)
        in reference
    ]
    print(f"wrote {out_path} and {md_path} ({len(table.cells)} cells)")
    if deltas:
        print(
            f"|mean_cos - reference|: median {np.median(deltas):.4f}, "
            f"max {max(deltas):.4f} over {len(deltas)} cells"
        )
    return 2 if table.fully_failed_cells() else 0


def cmd_demo_data(args):
    write_export_csv(args.out, n=args.n, seed=args.seed)
    print(f"wrote {args.out} ({args.n} rows)")
    return 0


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with code 1; code 2 is reserved for numerical failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="dirset",
        description="Direction estimation for single-index models.",
    )
    parser.add_argument("--version", action="version", version=f"dirset {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--input", required=True, help="input CSV file")
        p.add_argument("--response", required=True, help="response column name")
        p.add_argument("--covariates", help="comma-separated covariate columns (default: all others)")
        p.add_argument("--no-header", action="store_true",
                       help="file has no header row; columns are named col0..colN")
        p.add_argument("--method", default="new", choices=list(METHODS))
        p.add_argument("--seed", type=int, default=0, help="seed for seeded methods (ms)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--force", action="store_true",
                       help="run the uncentered covariance even on non-mean-zero data")

    p_est = sub.add_parser("estimate", help="estimate the index direction from a CSV")
    add_io(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_test = sub.add_parser("test", help="Wald test of a hypothesized direction")
    add_io(p_test)
    p_test.add_argument("--beta0", required=True,
                        help="comma-separated hypothesized direction (normalized if needed)")
    p_test.add_argument("--alpha", default="0.05", help="comma-separated test levels")
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="run a JSON scenario config")
    p_sim.add_argument("--config", required=True, help="JSON array of scenario objects")
    p_sim.add_argument("--out", required=True, help="output CSV path (markdown written alongside)")
    p_sim.add_argument("--fixed-beta", action="store_true",
                       help="freeze the index vector across repetitions")
    p_sim.add_argument("--mixture-sd", action="store_true",
                       help="read the mixture noise's second parameter as an sd, not a variance")
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("reproduce", help="run a built-in table preset and diff against "
                                             "bundled reference values")
    p_rep.add_argument("table", choices=list(PRESETS))
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--reps", type=int, default=100, help="repetitions per cell")
    p_rep.add_argument("--out", help="output CSV path (default <table>_reproduction.csv)")
    p_rep.set_defaults(func=cmd_reproduce)

    p_demo = sub.add_parser("demo-data", help="write the synthetic case-study CSV")
    p_demo.add_argument("--out", required=True)
    p_demo.add_argument("--n", type=int, default=1614)
    p_demo.add_argument("--seed", type=int, default=2006)
    p_demo.set_defaults(func=cmd_demo_data)
    return parser


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())
