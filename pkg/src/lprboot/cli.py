"""Command-line front end: ``lprboot {ci,simulate,cv,diagnose}``.

Exit status is 0 on success, 2 for invalid input (files, flags, scenario
fields) and 3 when a numerical step fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bootstrap import ESTIMATORS, METHODS, QUANTILES, BootstrapConfig, bootstrap_intervals
from .csvio import read_matrix, read_vector, write_table
from .diagnostics import diagnose
from .errors import DimensionMismatch, ScenarioError
from .regression import fit_lasso_ols, standardize
from .simgen import METHOD_NAMES, Scenario
from .simulation import run_scenario, write_outputs
from .tuning import CvConfig, cv_lasso_ols

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _load_xy(x_path, y_path):
    x = read_matrix(x_path)
    y = read_vector(y_path)
    if y.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"{y_path} has {y.shape[0]} values but {x_path} has {x.shape[0]} rows")
    return x, y


def _parse_grid(text):
    if text is None:
        return None
    if Path(text).is_file():
        return read_vector(text)
    return np.array([float(v) for v in text.split(",") if v.strip()])


def _cv(data, args):
    cfg = CvConfig(k_folds=args.k_folds, grid=_parse_grid(getattr(args, "grid", None)),
                   seed=args.seed)
    return cv_lasso_ols(data, cfg)


def _log(msg):
    print(msg, file=sys.stderr)


def cmd_ci(args):
    x, y = _load_xy(args.x, args.y)
    data = standardize(x, y)
    lambda1 = args.lambda1
    if lambda1 is None:
        lambda1 = _cv(data, args).lambda_optimal
        _log(f"lambda1 chosen by {args.k_folds}-fold CV: {lambda1!r}")
    cfg = BootstrapConfig(lambda1=lambda1, b_replicates=args.b, alpha=args.alpha,
                          method=args.method, estimator=args.estimator, lambda2=args.lambda2,
                          seed=args.seed, quantile=args.quantile, threads=args.threads)
    iv = bootstrap_intervals(data, cfg)[args.estimator]
    selected = np.zeros(data.p, dtype=bool)
    selected[iv.support] = True
    rows = [(j, iv.point[j], iv.lower[j], iv.upper[j], bool(selected[j])) for j in range(data.p)]
    write_table(args.out, ["index", "point", "lower", "upper", "selected_by_lasso"], rows)
    for flag in sorted(iv.flags):
        _log(f"warning: {flag}")


def cmd_simulate(args):
    sc = Scenario.load(args.scenario)
    overrides = {
        "b_replicates": args.b, "alpha": args.alpha, "seed": args.seed, "reps": args.reps,
        "lambda2": args.lambda2, "k_folds": args.k_folds,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.method:
        overrides["methods"] = list(dict.fromkeys(args.method))
    if overrides:
        sc = replace(sc, **overrides)
        sc.validate()
    progress = None
    if args.progress:
        def progress(rep):
            _log(f"rep {rep + 1}/{sc.reps}")
    result = run_scenario(sc, threads=args.threads, progress=progress)
    write_outputs(result, args.out)


def cmd_cv(args):
    x, y = _load_xy(args.x, args.y)
    res = _cv(standardize(x, y), args)
    payload = {"lambda_optimal": res.lambda_optimal, "grid": res.grid.tolist(),
               "cve": [None if not np.isfinite(v) else float(v) for v in res.cve]}
    _write_json(args.out, payload)


def cmd_diagnose(args):
    x = read_matrix(args.x)
    if (args.beta is None) == (args.y is None):
        raise ValueError("give exactly one of --beta or --y")
    if args.beta is not None:
        beta = read_vector(args.beta)
        if beta.shape[0] != x.shape[1]:
            raise DimensionMismatch(f"beta has {beta.shape[0]} entries, design has {x.shape[1]} columns")
        data = standardize(x, np.zeros(x.shape[0]))
        beta_std = data.to_std(beta)
    else:
        _, y = _load_xy(args.x, args.y)
        data = standardize(x, y)
        lam = args.lambda1 if args.lambda1 is not None else _cv(data, args).lambda_optimal
        beta_std = fit_lasso_ols(data, lam).beta_std
    _write_json(args.out, diagnose(data.x, beta_std, args.threshold_factor))


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="lprboot", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed_default=0):
        p.add_argument("--seed", type=_nonneg_int, default=seed_default)
        p.add_argument("--k-folds", type=int, default=5)

    ci = sub.add_parser("ci", help="bootstrap confidence intervals for every coefficient")
    ci.add_argument("x", help="n x p design CSV")
    ci.add_argument("y", help="response CSV with n values")
    ci.add_argument("--method", choices=METHODS, default="paired")
    ci.add_argument("--estimator", choices=ESTIMATORS, default="lpr")
    ci.add_argument("--alpha", type=float, default=0.05)
    ci.add_argument("--b", type=int, default=1000, help="bootstrap replicates")
    ci.add_argument("--lambda1", type=float, help="skip CV and use this Lasso penalty")
    ci.add_argument("--lambda2", type=float, help="Partial Ridge penalty (default 1/n)")
    ci.add_argument("--quantile", choices=QUANTILES, default="linear")
    ci.add_argument("--grid", help="CV grid: comma list or CSV file")
    ci.add_argument("--threads", type=_pos_int, default=1)
    ci.add_argument("--out", default="intervals.csv")
    common(ci)
    ci.set_defaults(func=cmd_ci)

    sim = sub.add_parser("simulate", help="Monte-Carlo coverage study from a scenario JSON")
    sim.add_argument("scenario")
    sim.add_argument("--method", action="append", choices=METHOD_NAMES,
                     help="repeat to run several methods (overrides the scenario)")
    sim.add_argument("--alpha", type=float)
    sim.add_argument("--b", type=int, help="bootstrap replicates per rep")
    sim.add_argument("--reps", type=int)
    sim.add_argument("--lambda2", type=float)
    sim.add_argument("--k-folds", type=int)
    sim.add_argument("--seed", type=_nonneg_int)
    sim.add_argument("--threads", type=_pos_int, default=1)
    sim.add_argument("--progress", action="store_true")
    sim.add_argument("--out", default="sim_out")
    sim.set_defaults(func=cmd_simulate)

    cv = sub.add_parser("cv", help="cross-validated lambda1 for Lasso+OLS")
    cv.add_argument("x")
    cv.add_argument("y")
    cv.add_argument("--grid", help="comma list or CSV file, strictly decreasing")
    cv.add_argument("--out", default="cv.json")
    common(cv)
    cv.set_defaults(func=cmd_cv)

    dg = sub.add_parser("diagnose", help="irrepresentable margin and cliff split")
    dg.add_argument("x")
    dg.add_argument("--beta", help="coefficient CSV on the raw column scale")
    dg.add_argument("--y", help="response CSV; beta is then estimated by Lasso+OLS")
    dg.add_argument("--lambda1", type=float)
    dg.add_argument("--grid")
    dg.add_argument("--threshold-factor", type=float, default=1.0)
    dg.add_argument("--out", default="diagnose.json")
    common(dg)
    dg.set_defaults(func=cmd_diagnose)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ScenarioError as exc:
        for problem in exc.problems:
            _log(f"error: {problem}")
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_INVALID
    except (np.linalg.LinAlgError, RuntimeError, FloatingPointError) as exc:
        _log(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
