"""Command line interface.

Subcommands:
  simulate   --config c.json --out data.csv
  fit        --config c.json --data data.csv --out fit.json
  pursuit    --config c.json --data data.csv --out pursuit.json
  experiment --config c.json --out dir/ [--no-figures] [--workers N]

Exit codes: 0 ok, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, DataError, WavesieveError
from ..estimator import fit as fit_estimator
from ..inference import estimate_sigma2, profile_blocks
from ..likelihood import hessian_blocks
from ..model import Dataset, child_seed, simulate, truncate
from ..pursuit import fit_pursuit
from .config import (build_basis, build_estimator_config, build_model_spec,
                     parse_config)
from .experiments import run_experiment
from .report import render_figures, write_data_csv, write_rows_csv, \
    write_summary_json
from .stats import angular_error_deg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def read_data_csv(path) -> Dataset:
    """Read a plain x1..xp,y table into a Dataset (no truncation applied)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"data file is empty: {path}") from None
        expected_tail = "y"
        if len(header) < 2 or header[-1].strip() != expected_tail or not all(
                h.strip() == f"x{i + 1}" for i, h in enumerate(header[:-1])):
            raise DataError(
                f"bad header {header!r}; expected x1,...,xp,{expected_tail}"
            )
        rows = []
        for line_no, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DataError(f"row {line_no} has {len(rec)} fields, "
                                f"expected {len(header)}")
            try:
                rows.append([float(v) for v in rec])
            except ValueError as exc:
                raise DataError(f"row {line_no}: {exc}") from exc
    if not rows:
        raise DataError(f"no data rows in {path}")
    arr = np.asarray(rows, dtype=float)
    X, Y = arr[:, :-1], arr[:, -1]
    return Dataset(X=X, Y=Y, s_X=float(np.linalg.norm(X, axis=1).max()),
                   kept=np.arange(X.shape[0]), seed=-1)


def _cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    basis = build_basis(cfg)
    spec = build_model_spec(cfg, basis)
    n = cfg.n_grid[0]
    data = simulate(spec, n, child_seed(cfg.seed, n, 0))
    write_data_csv(args.out, data.X, data.Y)
    print(f"wrote {n} rows to {args.out}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    cfg = parse_config(args.config)
    basis = build_basis(cfg)
    est_cfg = build_estimator_config(cfg)
    data = truncate(read_data_csv(args.data), cfg.estimator.s_X)
    result = fit_estimator(data, basis, est_cfg)
    rho = profile_blocks(hessian_blocks(data, basis, result.param)).rho
    payload = {
        "theta": [float(v) for v in result.theta],
        "angles": [float(v) for v in result.param.angles.phi],
        "eta": [float(v) for v in result.param.eta],
        "loglik": result.loglik,
        "sigma2_hat": estimate_sigma2(data, basis, result.param),
        "rho": rho,
        "n_kept": int(data.n_kept),
        "diagnostics": _plain(result.diagnostics),
    }
    if cfg.model.get("theta_star"):
        theta_star = np.asarray(cfg.model["theta_star"], dtype=float)
        theta_star = np.atleast_2d(theta_star)[0]
        theta_star = theta_star / np.linalg.norm(theta_star)
        payload["angular_error_deg"] = angular_error_deg(result.theta, theta_star)
    Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"fit written to {args.out} (loglik {result.loglik:.6g})")
    return EXIT_OK


def _cmd_pursuit(args) -> int:
    cfg = parse_config(args.config)
    basis = build_basis(cfg)
    est_cfg = build_estimator_config(cfg)
    data = truncate(read_data_csv(args.data), cfg.estimator.s_X)
    model = fit_pursuit(data, basis, est_cfg,
                        max_components=int(cfg.pursuit.get("max_components", 2)),
                        var_threshold=cfg.pursuit.get("var_threshold", 1e-2))
    payload = {
        "components": [
            {"theta": [float(v) for v in c.theta],
             "eta": [float(v) for v in c.eta],
             "loglik": c.loglik}
            for c in model.components
        ],
        "initial_variance": model.initial_variance,
        "residual_variance": model.residual_variance,
        "stopped_by": model.stopped_by,
        "failed_stage": model.failed_stage,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"pursuit model with {model.n_components} components written to {args.out}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = parse_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.no_figures:
        cfg.figures = False
    outdir = Path(args.out or cfg.output_dir or "experiment-out")
    report = run_experiment(cfg)
    write_rows_csv(outdir / "replications.csv", report.rows, report.columns)
    write_summary_json(outdir / "summary.json", report.summary)
    files = ["replications.csv", "summary.json"]
    if cfg.figures:
        files += render_figures(report, outdir)
    print(f"{report.experiment}: {report.summary['rows_ok']}/"
          f"{report.summary['rows_total']} replications ok; wrote "
          f"{', '.join(files)} in {outdir}")
    return EXIT_OK


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavesieve",
        description="Wavelet-sieve single-index estimation and Monte Carlo harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a synthetic dataset to CSV")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    fit_p = sub.add_parser("fit", help="fit the single-index estimator to a CSV")
    fit_p.add_argument("--config", required=True)
    fit_p.add_argument("--data", required=True)
    fit_p.add_argument("--out", required=True)
    fit_p.set_defaults(func=_cmd_fit)

    pur = sub.add_parser("pursuit", help="fit a projection-pursuit model to a CSV")
    pur.add_argument("--config", required=True)
    pur.add_argument("--data", required=True)
    pur.add_argument("--out", required=True)
    pur.set_defaults(func=_cmd_pursuit)

    exp = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", default=None)
    exp.add_argument("--workers", type=int, default=None)
    exp.add_argument("--no-figures", action="store_true")
    exp.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except WavesieveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
