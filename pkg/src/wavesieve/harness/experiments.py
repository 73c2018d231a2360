"""Monte Carlo experiment runner: simulate -> fit -> infer pipelines.

Each replication is keyed by a child seed derived from
(master seed, n, replication index), so batches are deterministic and
order-independent under parallel execution.  Failed replications become
rows with status != "ok"; they are counted but excluded from summaries.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import WavesieveError
from ..estimator import fit
from ..inference import (estimate_sigma2, fisher_expansion, profile_blocks,
                         wilks_stat)
from ..likelihood import hessian_blocks
from ..model import child_seed, simulate, truncate
from ..pursuit import fit_pursuit
from .config import (ExperimentConfig, build_basis, build_estimator_config,
                     build_model_spec, parse_config)
from .stats import angular_error_deg, chi2_quantile, ks_distance, loglog_slope

#: fixed per-experiment CSV schemas (documented in the README); runtimes
#: stay out of the tables so reruns are byte-identical, and are reported
#: in the summary instead
ROW_COLUMNS = {
    "single-fit": ["experiment", "n", "replication", "seed", "status",
                   "angular_error_deg", "loglik", "iterations",
                   "converged", "rho", "sigma2_hat", "message"],
    "wilks-calibration": ["experiment", "n", "replication", "seed", "status",
                          "wilks_raw", "sigma2_hat",
                          "wilks_scaled", "angular_error_deg", "message"],
    "coverage": ["experiment", "n", "replication", "seed", "status",
                 "wilks_scaled", "covered_df_pm1", "covered_df_p",
                 "message"],
    "root-n-rate": ["experiment", "n", "replication", "seed", "status",
                    "angular_error_deg", "angular_error_rad",
                    "message"],
    "fisher-residual": ["experiment", "n", "replication", "seed", "status",
                        "fisher_residual", "xi_norm",
                        "xi_raw_norm", "ratio", "message"],
    "pursuit-recovery": ["experiment", "n", "replication", "seed", "status",
                         "n_components", "stopped_by",
                         "match_errors_deg", "max_match_error_deg",
                         "variance_trace", "variances_decreasing", "message"],
}


@dataclass
class Report:
    """Per-replication rows plus the experiment summary."""

    experiment: str
    columns: list[str]
    rows: list[dict]
    summary: dict
    extras: dict = field(default_factory=dict)

    @property
    def ok_rows(self) -> list[dict]:
        return [r for r in self.rows if r["status"] == "ok"]


def _base_row(cfg_raw: dict, n: int, rep: int, seed: int) -> dict:
    return {"experiment": cfg_raw["experiment"], "n": n, "replication": rep,
            "seed": seed, "status": "ok", "message": ""}


def _prepare_objects(cfg_raw: dict):
    cfg = parse_config(cfg_raw)
    basis = build_basis(cfg)
    spec = build_model_spec(cfg, basis)
    est_cfg = build_estimator_config(cfg)
    return cfg, basis, spec, est_cfg


def run_replication(cfg_raw: dict, n: int, rep: int) -> tuple[dict, dict]:
    """One replication; returns (row, extras). Never raises for model errors."""
    cfg, basis, spec, est_cfg = _prepare_objects(cfg_raw)
    seed = child_seed(cfg.seed, n, rep)
    row = _base_row(cfg_raw, n, rep, seed)
    extras: dict = {}
    started = time.perf_counter()
    try:
        data = truncate(simulate(spec, n, seed), cfg.estimator.s_X)
        kind = cfg.experiment
        if kind == "single-fit":
            _fill_single_fit(row, extras, data, basis, spec, est_cfg)
        elif kind == "wilks-calibration":
            _fill_wilks(row, data, basis, spec, est_cfg)
        elif kind == "coverage":
            _fill_coverage(row, data, basis, spec, est_cfg, cfg.level)
        elif kind == "root-n-rate":
            _fill_rate(row, data, basis, spec, est_cfg)
        elif kind == "fisher-residual":
            _fill_fisher(row, data, basis, spec, est_cfg)
        else:
            _fill_pursuit(row, extras, data, basis, spec, est_cfg, cfg)
    except WavesieveError as exc:
        row["status"] = "error"
        row["message"] = str(exc)
    row["runtime_s"] = round(time.perf_counter() - started, 6)
    return row, extras


def _fill_single_fit(row, extras, data, basis, spec, est_cfg):
    res = fit(data, basis, est_cfg)
    row["angular_error_deg"] = angular_error_deg(res.theta, spec.theta_star[0])
    row["loglik"] = res.loglik
    row["iterations"] = res.trace.iterations_used
    row["converged"] = res.trace.converged
    row["sigma2_hat"] = estimate_sigma2(data, basis, res.param)
    blocks = hessian_blocks(data, basis, res.param)
    row["rho"] = profile_blocks(blocks).rho
    extras["theta_hat"] = res.theta
    extras["eta_hat"] = res.param.eta
    extras["data_seed"] = data.seed


def _fill_wilks(row, data, basis, spec, est_cfg):
    res = fit(data, basis, est_cfg)
    s2 = estimate_sigma2(data, basis, res.param)
    raw = wilks_stat(data, basis, res.theta, spec.theta_star[0],
                     ridge=est_cfg.ridge)
    row["wilks_raw"] = raw
    row["sigma2_hat"] = s2
    row["wilks_scaled"] = raw / s2
    row["angular_error_deg"] = angular_error_deg(res.theta, spec.theta_star[0])


def _fill_coverage(row, data, basis, spec, est_cfg, level):
    res = fit(data, basis, est_cfg)
    s2 = estimate_sigma2(data, basis, res.param)
    scaled = wilks_stat(data, basis, res.theta, spec.theta_star[0],
                        ridge=est_cfg.ridge) / s2
    p = spec.p
    row["wilks_scaled"] = scaled
    row["covered_df_pm1"] = bool(scaled <= chi2_quantile(level, p - 1))
    row["covered_df_p"] = bool(scaled <= chi2_quantile(level, p))


def _fill_rate(row, data, basis, spec, est_cfg):
    res = fit(data, basis, est_cfg)
    deg = angular_error_deg(res.theta, spec.theta_star[0])
    row["angular_error_deg"] = deg
    row["angular_error_rad"] = float(np.radians(deg))


def _fill_fisher(row, data, basis, spec, est_cfg):
    res = fit(data, basis, est_cfg)
    fe = fisher_expansion(data, basis, res.theta, spec.theta_star[0],
                          ridge=est_cfg.ridge)
    row["fisher_residual"] = fe.residual
    row["xi_norm"] = fe.xi_norm
    row["xi_raw_norm"] = fe.xi_raw_norm
    row["ratio"] = fe.residual / fe.xi_norm if fe.xi_norm > 0 else float("nan")


def _fill_pursuit(row, extras, data, basis, spec, est_cfg, cfg):
    model = fit_pursuit(data, basis, est_cfg,
                        max_components=int(cfg.pursuit.get("max_components", 2)),
                        var_threshold=cfg.pursuit.get("var_threshold", 1e-2))
    errors = _greedy_match_errors(model, spec.theta_star)
    trace = model.variance_trace()
    row["n_components"] = model.n_components
    row["stopped_by"] = model.stopped_by
    row["match_errors_deg"] = ";".join(f"{e:.6g}" for e in errors)
    row["max_match_error_deg"] = max(errors) if errors else float("nan")
    row["variance_trace"] = ";".join(f"{v:.10g}" for v in trace)
    row["variances_decreasing"] = bool(
        all(trace[i + 1] < trace[i] for i in range(len(trace) - 1)))
    extras["components"] = [(c.theta, c.eta) for c in model.components]


def _greedy_match_errors(model, theta_true: np.ndarray) -> list[float]:
    """Per true direction: angle to its greedily matched fitted component."""
    remaining = list(range(model.n_components))
    errors = []
    for theta_t in theta_true:
        if not remaining:
            errors.append(180.0)
            continue
        best = min(remaining,
                   key=lambda i: angular_error_deg(model.components[i].theta,
                                                   theta_t))
        errors.append(angular_error_deg(model.components[best].theta, theta_t))
        remaining.remove(best)
    return errors


def _jobs(cfg: ExperimentConfig) -> list[tuple[int, int]]:
    return [(n, rep) for n in cfg.n_grid for rep in range(cfg.replications)]


def _run_job(args):
    cfg_raw, n, rep = args
    return (n, rep), run_replication(cfg_raw, n, rep)


def run_experiment(config) -> Report:
    """Run every replication of the configured experiment and summarize."""
    cfg = config if isinstance(config, ExperimentConfig) else parse_config(config)
    cfg_raw = cfg.raw()
    jobs = _jobs(cfg)
    results: dict[tuple[int, int], tuple[dict, dict]] = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for key, payload in pool.map(_run_job,
                                         [(cfg_raw, n, rep) for n, rep in jobs]):
                results[key] = payload
    else:
        for n, rep in jobs:
            results[(n, rep)] = run_replication(cfg_raw, n, rep)

    rows = [results[key][0] for key in jobs]        # replication order
    extras = {key: results[key][1] for key in jobs if results[key][1]}
    summary = summarize(cfg, rows)
    return Report(experiment=cfg.experiment, columns=ROW_COLUMNS[cfg.experiment],
                  rows=rows, summary=summary, extras=extras)


def summarize(cfg: ExperimentConfig, rows: list[dict]) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    summary = {
        "experiment": cfg.experiment,
        "n_grid": list(cfg.n_grid),
        "replications": cfg.replications,
        "seed": cfg.seed,
        "rows_total": len(rows),
        "rows_ok": len(ok),
        "rows_failed": len(rows) - len(ok),
    }
    runtimes = [r.get("runtime_s", 0.0) for r in rows]
    summary["total_runtime_s"] = float(np.sum(runtimes))
    summary["median_runtime_s"] = float(np.median(runtimes)) if runtimes else 0.0
    if not ok:
        return summary
    kind = cfg.experiment
    if kind == "single-fit":
        summary["median_angular_error_deg"] = _median(ok, "angular_error_deg")
        summary["median_rho"] = _median(ok, "rho")
    elif kind == "wilks-calibration":
        stats = np.array([r["wilks_scaled"] for r in ok])
        p = cfg.model["p"]
        by_df = {}
        for df in (p - 1, p):
            by_df[str(df)] = {
                "mean_gap": float(abs(stats.mean() - df)),
                "ks_distance": ks_distance(stats, df) if len(stats) >= 20 else None,
            }
        better = min((p - 1, p), key=lambda df: abs(stats.mean() - df))
        summary.update({
            "mean_scaled": float(stats.mean()),
            "var_scaled": float(stats.var()),
            "fit_by_df": by_df,
            "better_df": int(better),
            "mean_gap_better_df": float(abs(stats.mean() - better)),
            "ks_better_df": ks_distance(stats, better) if len(stats) >= 20 else None,
            "sigma2_note": "scaled by residual variance RSS/(kept - p - m)",
        })
    elif kind == "coverage":
        summary.update({
            "level": cfg.level,
            "coverage_df_pm1": float(np.mean([r["covered_df_pm1"] for r in ok])),
            "coverage_df_p": float(np.mean([r["covered_df_p"] for r in ok])),
        })
    elif kind == "root-n-rate":
        medians = {}
        pairs = []
        for n in cfg.n_grid:
            errs = [r["angular_error_rad"] for r in ok if r["n"] == n]
            if errs:
                med = float(np.median(errs))
                medians[str(n)] = med
                pairs.append((n, med))
        summary["median_angular_error_rad_by_n"] = medians
        summary["loglog_slope"] = loglog_slope(pairs) if len(pairs) >= 3 else None
    elif kind == "fisher-residual":
        by_n = {}
        for n in cfg.n_grid:
            sub = [r for r in ok if r["n"] == n]
            if sub:
                med_res = float(np.median([r["fisher_residual"] for r in sub]))
                med_xi = float(np.median([r["xi_norm"] for r in sub]))
                by_n[str(n)] = {
                    "median_fisher_residual": med_res,
                    "median_xi_norm": med_xi,
                    "ratio": med_res / med_xi if med_xi > 0 else None,
                }
        summary["by_n"] = by_n
        ns = sorted(cfg.n_grid)
        if len(ns) >= 2:
            lo, hi = str(ns[0]), str(ns[-1])
            if lo in by_n and hi in by_n and by_n[lo]["ratio"]:
                summary["ratio_shrink_factor"] = by_n[hi]["ratio"] / by_n[lo]["ratio"]
    elif kind == "pursuit-recovery":
        tol = 10.0
        hits = [r for r in ok if r["max_match_error_deg"] <= tol]
        summary.update({
            "success_tolerance_deg": tol,
            "success_rate": len(hits) / len(ok),
            "median_max_match_error_deg": _median(ok, "max_match_error_deg"),
            "variances_always_decreasing": bool(
                all(r["variances_decreasing"] for r in ok)),
        })
    return summary


def _median(rows: list[dict], key: str) -> float:
    return float(np.median([r[key] for r in rows]))
