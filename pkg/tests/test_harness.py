import hashlib
import json
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import chi2

from wavesieve.errors import ConfigurationError, DataError
from wavesieve.harness import (ks_distance, loglog_slope, parse_config,
                               run_experiment)
from wavesieve.harness.cli import main, read_data_csv
from wavesieve.harness.report import (render_figures, write_data_csv,
                                      write_rows_csv, write_summary_json)


def tiny_config(**overrides):
    cfg = {
        "experiment": "single-fit",
        "model": {
            "p": 2, "theta_star": [[0.8, 0.6]],
            "links": [{"kind": "fitted", "target": "sin", "scale": 1.5}],
            "noise_sigma": 0.1,
            "design": {"kind": "uniform-ball", "radius": 1.2},
        },
        "estimator": {"m": 17, "s_X": 1.0, "depth": 12, "tau": 0.15, "tol": 1e-8},
        "n_grid": [200], "replications": 2, "seed": 42,
    }
    cfg.update(overrides)
    return cfg


# ----------------------------------------------------------------- stats --

def test_ks_distance_consistency():
    rng = np.random.default_rng(0)
    samples = chi2(3).rvs(size=20_000, random_state=rng)
    assert ks_distance(samples, 3) < 0.02


def test_ks_distance_separates_wrong_df():
    rng = np.random.default_rng(1)
    samples = chi2(2).rvs(size=1000, random_state=rng)
    assert ks_distance(samples, 5) > 0.2


def test_ks_distance_needs_enough_samples():
    with pytest.raises(DataError):
        ks_distance(np.ones(5), 2)
    with pytest.raises(DataError):
        ks_distance(np.array([1.0, np.nan] + [1.0] * 30), 2)


def test_loglog_slope_exact_half_power():
    ns = np.array([100, 400, 1600, 6400], dtype=float)
    pairs = np.stack([ns, ns**-0.5], axis=1)
    assert loglog_slope(pairs) == pytest.approx(-0.5, abs=1e-12)


def test_loglog_slope_validation():
    with pytest.raises(DataError):
        loglog_slope([(100, 0.1), (200, 0.05)])
    with pytest.raises(DataError):
        loglog_slope([(100, 0.1), (200, -0.05), (400, 0.02)])


# ---------------------------------------------------------------- config --

def test_parse_config_roundtrip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(tiny_config()))
    cfg = parse_config(path)
    assert cfg.experiment == "single-fit"
    assert cfg.n_grid == [200]


@pytest.mark.parametrize("mutation", [
    {"experiment": "nope"},
    {"n_grid": []},
    {"n_grid": [0]},
    {"replications": 0},
    {"level": 1.5},
    {"model": {"p": 1, "theta_star": [[1.0]], "links": [{"kind": "named", "name": "sin"}]}},
    {"model": {"p": 2, "theta_star": [[0.8, 0.6]], "links": [{"kind": "named", "name": "nope"}]}},
    {"estimator": {"m": 17, "tau": 2.0}},
])
def test_parse_config_rejects_bad_input(mutation):
    with pytest.raises(ConfigurationError):
        parse_config(tiny_config(**mutation))


def test_parse_config_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigurationError):
        parse_config(path)


# ------------------------------------------------------------ experiments --

def test_single_fit_experiment_rows(tmp_path):
    report = run_experiment(tiny_config())
    assert len(report.rows) == 2
    assert all(r["status"] == "ok" for r in report.rows)
    assert report.summary["rows_ok"] == 2
    assert "median_angular_error_deg" in report.summary


def test_experiment_rows_cover_grid():
    cfg = tiny_config(experiment="root-n-rate", n_grid=[100, 200],
                      replications=3)
    report = run_experiment(cfg)
    assert len(report.rows) == 6
    assert sorted({r["n"] for r in report.rows}) == [100, 200]


def test_replication_failure_becomes_row():
    # truncation radius far beyond the design radius keeps zero rows
    cfg = tiny_config()
    cfg["estimator"]["s_X"] = 1e-6
    report = run_experiment(cfg)
    assert report.summary["rows_failed"] == len(report.rows)
    assert all(r["status"] == "error" and r["message"] for r in report.rows)


def test_csv_bytes_identical_on_rerun(tmp_path):
    cfg = tiny_config(replications=3)
    digests = []
    for run in range(2):
        report = run_experiment(cfg)
        path = tmp_path / f"r{run}.csv"
        write_rows_csv(path, report.rows, report.columns)
        digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_parallel_workers_deterministic(tmp_path):
    serial = run_experiment(tiny_config(replications=4))
    parallel = run_experiment(tiny_config(replications=4, workers=2))
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    write_rows_csv(a, serial.rows, serial.columns)
    write_rows_csv(b, parallel.rows, parallel.columns)
    assert a.read_bytes() == b.read_bytes()


def test_summary_json_roundtrips(tmp_path):
    report = run_experiment(tiny_config())
    path = tmp_path / "summary.json"
    write_summary_json(path, report.summary)
    assert json.loads(path.read_text())["experiment"] == "single-fit"


def test_figures_rendered(tmp_path):
    report = run_experiment(tiny_config(replications=2))
    files = render_figures(report, tmp_path)
    assert files
    for name in files:
        assert (tmp_path / name).exists()
        assert (tmp_path / name).stat().st_size > 0


# -------------------------------------------------------------- data csv --

def test_data_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(20, 3))
    Y = rng.normal(size=20)
    path = tmp_path / "d.csv"
    write_data_csv(path, X, Y)
    header = path.read_text().splitlines()[0]
    assert header == "x1,x2,x3,y"
    data = read_data_csv(path)
    assert np.allclose(data.X, X, atol=1e-11)
    assert np.allclose(data.Y, Y, atol=1e-11)


def test_read_data_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,y\n1,2,3\n")
    with pytest.raises(DataError):
        read_data_csv(path)


def test_read_data_csv_rejects_bad_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2,y\n1,2\n")
    with pytest.raises(DataError):
        read_data_csv(path)
    path.write_text("x1,x2,y\n1,2,zzz\n")
    with pytest.raises(DataError):
        read_data_csv(path)


def test_read_data_csv_missing_file(tmp_path):
    with pytest.raises(DataError):
        read_data_csv(tmp_path / "missing.csv")


# -------------------------------------------------------------------- cli --

def write_cfg(tmp_path, cfg):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_cli_simulate_fit_pursuit(tmp_path):
    cfg_path = write_cfg(tmp_path, tiny_config(n_grid=[300]))
    data_path = str(tmp_path / "data.csv")
    assert main(["simulate", "--config", cfg_path, "--out", data_path]) == 0
    assert read_data_csv(data_path).n == 300

    fit_path = str(tmp_path / "fit.json")
    assert main(["fit", "--config", cfg_path, "--data", data_path,
                 "--out", fit_path]) == 0
    payload = json.loads(Path(fit_path).read_text())
    assert abs(np.linalg.norm(payload["theta"]) - 1.0) < 1e-9
    assert payload["angular_error_deg"] < 20.0

    pursuit_path = str(tmp_path / "pursuit.json")
    assert main(["pursuit", "--config", cfg_path, "--data", data_path,
                 "--out", pursuit_path]) == 0
    payload = json.loads(Path(pursuit_path).read_text())
    assert payload["components"]


def test_cli_experiment_writes_outputs(tmp_path):
    cfg_path = write_cfg(tmp_path, tiny_config(replications=2))
    outdir = tmp_path / "out"
    assert main(["experiment", "--config", cfg_path, "--out", str(outdir)]) == 0
    assert (outdir / "replications.csv").exists()
    assert (outdir / "summary.json").exists()
    assert list(outdir.glob("*.png"))


def test_cli_experiment_no_figures(tmp_path):
    cfg_path = write_cfg(tmp_path, tiny_config(replications=2))
    outdir = tmp_path / "out2"
    assert main(["experiment", "--config", cfg_path, "--out", str(outdir),
                 "--no-figures"]) == 0
    assert not list(outdir.glob("*.png"))


def test_cli_exit_code_config_error(tmp_path):
    cfg_path = write_cfg(tmp_path, tiny_config(experiment="bogus"))
    assert main(["experiment", "--config", cfg_path,
                 "--out", str(tmp_path / "x")]) == 2
    missing = str(tmp_path / "missing.json")
    assert main(["experiment", "--config", missing,
                 "--out", str(tmp_path / "x")]) == 2


def test_cli_exit_code_data_error(tmp_path):
    cfg_path = write_cfg(tmp_path, tiny_config())
    assert main(["fit", "--config", cfg_path,
                 "--data", str(tmp_path / "missing.csv"),
                 "--out", str(tmp_path / "f.json")]) == 3


@pytest.mark.parametrize("kind,extra", [
    ("root-n-rate", {"n_grid": [100, 150, 200], "replications": 2}),
    ("fisher-residual", {"n_grid": [100, 200], "replications": 2}),
    ("coverage", {"replications": 2}),
    ("wilks-calibration", {"replications": 2}),
    ("pursuit-recovery",
     {"replications": 1,
      "model": {
          "p": 2,
          "theta_star": [[0.8, 0.6]],
          "links": [{"kind": "named", "name": "sin"}],
          "noise_sigma": 0.1,
          "design": {"kind": "uniform-ball", "radius": 1.2},
      },
      "pursuit": {"max_components": 1, "var_threshold": None}}),
])
def test_every_experiment_kind_runs_and_renders(tmp_path, kind, extra):
    cfg = tiny_config(experiment=kind, **extra)
    report = run_experiment(cfg)
    assert report.summary["rows_ok"] >= 1
    files = render_figures(report, tmp_path / kind)
    assert files
