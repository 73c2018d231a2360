"""Report writers: delimited tables, JSON summaries, and figures.

CSV bytes are deterministic: fixed column order, fixed float formatting,
rows in replication order.  Figures are rendered next to the tables with
the Agg backend and stripped of volatile PNG metadata.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from scipy.stats import chi2

FIG_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_rows_csv(path, rows: list[dict], columns: list[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in columns])


def write_summary_json(path, summary: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def write_data_csv(path, X: np.ndarray, Y: np.ndarray) -> None:
    """Plain data table with header x1,...,xp,y."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    p = X.shape[1]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(p)] + ["y"])
        for xi, yi in zip(X, Y):
            writer.writerow([_fmt(float(v)) for v in xi] + [_fmt(float(yi))])


def _save(fig, path: Path):
    fig.savefig(path, metadata={"Date": None, "Software": None})
    plt.close(fig)


def render_figures(report, outdir) -> list[str]:
    """Write the figures for one experiment report; returns file names."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ok = report.ok_rows
    written: list[str] = []
    if not ok:
        return written
    with plt.rc_context(FIG_STYLE):
        kind = report.experiment
        if kind == "wilks-calibration":
            written += _fig_wilks(report, ok, outdir)
        elif kind == "root-n-rate":
            written += _fig_rate(report, ok, outdir)
        elif kind == "fisher-residual":
            written += _fig_fisher(report, ok, outdir)
        elif kind == "coverage":
            written += _fig_coverage(report, ok, outdir)
        elif kind == "pursuit-recovery":
            written += _fig_pursuit(report, ok, outdir)
        elif kind == "single-fit":
            written += _fig_single_fit(report, ok, outdir)
    return written


def _fig_wilks(report, ok, outdir):
    stats = np.array([r["wilks_scaled"] for r in ok])
    p_dim = int(report.summary.get("better_df", 1)) + 0  # better df for overlay
    fig, ax = plt.subplots()
    hi = float(np.quantile(stats, 0.995))
    ax.hist(stats, bins=40, range=(0, hi), density=True, alpha=0.6,
            label="scaled statistic")
    xs = np.linspace(1e-3, hi, 400)
    for df, style in ((p_dim, "-"), (p_dim + 1, "--")):
        ax.plot(xs, chi2(df).pdf(xs), style, label=f"chi2 df={df}")
    ax.set_xlabel("2 * profile log-likelihood ratio / sigma^2")
    ax.set_ylabel("density")
    ax.legend()
    _save(fig, outdir / "wilks_hist.png")

    fig, ax = plt.subplots()
    qs = (np.arange(1, stats.size + 1) - 0.5) / stats.size
    ax.plot(chi2(p_dim).ppf(qs), np.sort(stats), ".", ms=4)
    lim = max(chi2(p_dim).ppf(qs[-1]), stats.max())
    ax.plot([0, lim], [0, lim], "k--", lw=1)
    ax.set_xlabel(f"chi2 df={p_dim} quantiles")
    ax.set_ylabel("empirical quantiles")
    _save(fig, outdir / "wilks_qq.png")
    return ["wilks_hist.png", "wilks_qq.png"]


def _fig_rate(report, ok, outdir):
    medians = report.summary.get("median_angular_error_rad_by_n", {})
    if not medians:
        return []
    ns = np.array(sorted(int(k) for k in medians))
    meds = np.array([medians[str(n)] for n in ns])
    fig, ax = plt.subplots()
    for n in ns:
        errs = [r["angular_error_rad"] for r in ok if r["n"] == n]
        ax.plot([n] * len(errs), errs, ".", color="0.7", ms=3)
    ax.plot(ns, meds, "o-", label="median")
    slope = report.summary.get("loglog_slope")
    if slope is not None:
        ref = meds[0] * (ns / ns[0]) ** slope
        ax.plot(ns, ref, "--", label=f"slope {slope:.3f}")
        ref5 = meds[0] * (ns / ns[0]) ** -0.5
        ax.plot(ns, ref5, ":", label="slope -0.5")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("angular error (rad)")
    ax.legend()
    _save(fig, outdir / "rate_loglog.png")
    return ["rate_loglog.png"]


def _fig_fisher(report, ok, outdir):
    by_n = report.summary.get("by_n", {})
    if not by_n:
        return []
    ns = sorted(int(k) for k in by_n)
    ratios = [by_n[str(n)]["ratio"] for n in ns]
    fig, ax = plt.subplots()
    ax.plot(ns, ratios, "o-")
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("median residual / median score norm")
    _save(fig, outdir / "fisher_ratio.png")
    return ["fisher_ratio.png"]


def _fig_coverage(report, ok, outdir):
    s = report.summary
    fig, ax = plt.subplots()
    labels = ["df = p-1", "df = p"]
    values = [s.get("coverage_df_pm1", np.nan), s.get("coverage_df_p", np.nan)]
    ax.bar(labels, values, width=0.5, alpha=0.7)
    ax.axhline(s.get("level", 0.9), color="k", ls="--", lw=1,
               label=f"nominal {s.get('level', 0.9)}")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("empirical coverage")
    ax.legend()
    _save(fig, outdir / "coverage.png")
    return ["coverage.png"]


def _fig_pursuit(report, ok, outdir):
    fig, ax = plt.subplots()
    for r in ok:
        trace = [float(v) for v in r["variance_trace"].split(";")]
        ax.plot(range(len(trace)), trace, "-", color="0.6", alpha=0.6, lw=1)
    ax.set_xlabel("stage")
    ax.set_ylabel("residual variance")
    ax.set_yscale("log")
    _save(fig, outdir / "pursuit_variance.png")

    errs = [r["max_match_error_deg"] for r in ok]
    fig, ax = plt.subplots()
    ax.hist(errs, bins=20, alpha=0.7)
    ax.axvline(10.0, color="k", ls="--", lw=1, label="10 degrees")
    ax.set_xlabel("worst matched direction error (deg)")
    ax.set_ylabel("count")
    ax.legend()
    _save(fig, outdir / "pursuit_errors.png")
    return ["pursuit_variance.png", "pursuit_errors.png"]


def _fig_single_fit(report, ok, outdir):
    fig, ax = plt.subplots()
    errs = [r["angular_error_deg"] for r in ok]
    lls = [r["loglik"] for r in ok]
    ax.plot(errs, lls, "o", ms=4)
    ax.set_xlabel("angular error (deg)")
    ax.set_ylabel("log-likelihood at the fit")
    _save(fig, outdir / "fit_overview.png")
    return ["fit_overview.png"]
