"""Experiment configuration: JSON schema, validation, and object building.

A config file looks like

    {
      "experiment": "wilks-calibration",
      "model": {
        "p": 2,
        "theta_star": [[0.8, 0.6]],
        "links": [{"kind": "fitted", "target": "sin", "scale": 1.5}],
        "noise_sigma": 0.1,
        "noise_kind": "gaussian",
        "design": {"kind": "uniform-ball", "radius": 1.2},
        "bias_term": "none"
      },
      "estimator": {"m": 17, "s_X": 1.0, "depth": 12, "tau": 0.05,
                    "max_alt_iters": 60, "theta_step_iters": 50,
                    "tol": 1e-9, "ridge": null, "eta_radius": null},
      "n_grid": [2000],
      "replications": 300,
      "seed": 7,
      "level": 0.9,
      "pursuit": {"max_components": 2, "var_threshold": null},
      "workers": 1,
      "figures": true,
      "output_dir": "out"
    }

Link kinds: "named" (closed form by name), "coeffs" (explicit coefficient
vector on the basis), "fitted" (coefficients from a dense least-squares
fit of a named target to the basis; deterministic).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from ..estimator import EstimatorConfig
from ..model import NAMED_BIAS_TERMS, NAMED_LINKS, LinkSpec, ModelSpec
from ..wavelet import Basis, make_basis

EXPERIMENTS = ("single-fit", "wilks-calibration", "root-n-rate",
               "fisher-residual", "coverage", "pursuit-recovery")


@dataclass
class EstimatorSection:
    m: int = 17
    s_X: float = 1.0
    depth: int = 12
    tau: float = 0.1
    max_alt_iters: int = 60
    theta_step_iters: int = 50
    tol: float = 1e-9
    ridge: float | None = None
    eta_radius: float | None = None


@dataclass
class ExperimentConfig:
    experiment: str
    model: dict
    estimator: EstimatorSection
    n_grid: list[int]
    replications: int
    seed: int
    level: float = 0.9
    pursuit: dict = field(default_factory=lambda: {"max_components": 2})
    workers: int = 1
    figures: bool = True
    output_dir: str | None = None

    def raw(self) -> dict:
        """Picklable plain-dict form for worker processes."""
        out = {
            "experiment": self.experiment,
            "model": self.model,
            "estimator": vars(self.estimator).copy(),
            "n_grid": list(self.n_grid),
            "replications": self.replications,
            "seed": self.seed,
            "level": self.level,
            "pursuit": dict(self.pursuit),
            "workers": self.workers,
            "figures": self.figures,
            "output_dir": self.output_dir,
        }
        return out


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigurationError(msg)


def parse_config(source) -> ExperimentConfig:
    """Validate a config dict, JSON string, or file path."""
    if isinstance(source, (str, Path)) and Path(source).exists():
        try:
            raw = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    elif isinstance(source, str):
        try:
            raw = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"config path does not exist and string is not JSON: {exc}"
            ) from exc
    elif isinstance(source, dict):
        raw = source
    else:
        raise ConfigurationError(f"cannot read a config from {type(source)}")

    _require(isinstance(raw, dict), "config must be a JSON object")
    exp = raw.get("experiment")
    _require(exp in EXPERIMENTS,
             f"experiment must be one of {EXPERIMENTS}, got {exp!r}")

    model = raw.get("model")
    _require(isinstance(model, dict), "config needs a 'model' object")
    _validate_model_section(model)

    est_raw = raw.get("estimator", {})
    _require(isinstance(est_raw, dict), "'estimator' must be an object")
    known = set(vars(EstimatorSection()))
    unknown = set(est_raw) - known
    _require(not unknown, f"unknown estimator keys: {sorted(unknown)}")
    est = EstimatorSection(**est_raw)
    _require(est.m >= 1, "estimator.m must be >= 1")
    _require(est.s_X > 0, "estimator.s_X must be positive")
    _require(0 < est.tau < 1, "estimator.tau must lie in (0, 1)")

    n_grid = raw.get("n_grid")
    _require(isinstance(n_grid, list) and len(n_grid) >= 1
             and all(isinstance(n, int) and n >= 1 for n in n_grid),
             "n_grid must be a nonempty list of positive integers")
    reps = raw.get("replications")
    _require(isinstance(reps, int) and reps >= 1,
             "replications must be an integer >= 1")
    seed = raw.get("seed", 0)
    _require(isinstance(seed, int) and seed >= 0, "seed must be a nonnegative integer")
    level = raw.get("level", 0.9)
    _require(isinstance(level, (int, float)) and 0 < level < 1,
             "level must lie in (0, 1)")
    pursuit = raw.get("pursuit", {"max_components": 2})
    _require(isinstance(pursuit, dict), "'pursuit' must be an object")
    _require(int(pursuit.get("max_components", 2)) >= 1,
             "pursuit.max_components must be >= 1")
    workers = raw.get("workers", 1)
    _require(isinstance(workers, int) and workers >= 1, "workers must be >= 1")

    return ExperimentConfig(
        experiment=exp, model=model, estimator=est,
        n_grid=n_grid, replications=reps, seed=seed, level=float(level),
        pursuit=pursuit, workers=workers,
        figures=bool(raw.get("figures", True)),
        output_dir=raw.get("output_dir"),
    )


def _validate_model_section(model: dict):
    p = model.get("p")
    _require(isinstance(p, int) and p >= 2, "model.p must be an integer >= 2")
    th = model.get("theta_star")
    _require(isinstance(th, list) and th, "model.theta_star must be a nonempty list")
    links = model.get("links")
    _require(isinstance(links, list) and links, "model.links must be a nonempty list")
    for link in links:
        _require(isinstance(link, dict) and "kind" in link,
                 "each link needs a 'kind'")
        kind = link["kind"]
        if kind == "named":
            _require(link.get("name") in NAMED_LINKS,
                     f"unknown link name {link.get('name')!r}")
        elif kind == "coeffs":
            _require(isinstance(link.get("values"), list),
                     "coeffs link needs 'values'")
        elif kind == "fitted":
            _require(link.get("target") in NAMED_LINKS,
                     f"unknown fitted-link target {link.get('target')!r}")
        else:
            raise ConfigurationError(f"unknown link kind {kind!r}")
    bias = model.get("bias_term", "none")
    _require(bias in NAMED_BIAS_TERMS, f"unknown bias term {bias!r}")
    design = model.get("design", {"kind": "uniform-ball"})
    _require(isinstance(design, dict) and design.get("kind", "uniform-ball")
             in ("uniform-ball", "truncated-gaussian"),
             "design.kind must be uniform-ball or truncated-gaussian")


def build_basis(cfg: ExperimentConfig) -> Basis:
    return make_basis(cfg.estimator.m, cfg.estimator.s_X, cfg.estimator.depth)


def fitted_link_coefficients(basis: Basis, target: str, scale: float = 1.0,
                             n_points: int = 4001) -> np.ndarray:
    """Dense least-squares projection of a named target onto the basis.

    The rank cutoff discards the interval-degenerate directions of the
    dictionary so the coefficients stay tame.
    """
    from ..wavelet import basis_matrix

    fn = NAMED_LINKS[target]
    t = np.linspace(-basis.s_X, basis.s_X, n_points)
    B = basis_matrix(basis, t)
    coeffs, *_ = np.linalg.lstsq(B, fn(scale * t), rcond=1e-3)
    return coeffs


def build_model_spec(cfg: ExperimentConfig, basis: Basis) -> ModelSpec:
    model = cfg.model
    links = []
    for link in model["links"]:
        kind = link["kind"]
        if kind == "named":
            links.append(LinkSpec(name=link["name"]))
        elif kind == "coeffs":
            links.append(LinkSpec(coeffs=np.asarray(link["values"], dtype=float),
                                  basis=basis))
        else:
            links.append(LinkSpec(
                coeffs=fitted_link_coefficients(
                    basis, link["target"], float(link.get("scale", 1.0))),
                basis=basis))
    theta = np.atleast_2d(np.asarray(model["theta_star"], dtype=float))
    norms = np.linalg.norm(theta, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ConfigurationError("theta_star rows must be nonzero")
    theta = theta / norms
    design = model.get("design", {})
    return ModelSpec(
        p=model["p"],
        theta_star=theta,
        links=tuple(links),
        noise_sigma=float(model.get("noise_sigma", 0.1)),
        noise_kind=model.get("noise_kind", "gaussian"),
        design=design.get("kind", "uniform-ball"),
        design_radius=float(design.get("radius", 1.2 * cfg.estimator.s_X)),
        bias_term=model.get("bias_term", "none"),
        bias_scale=float(model.get("bias_scale", 0.5)),
    )


def build_estimator_config(cfg: ExperimentConfig) -> EstimatorConfig:
    e = cfg.estimator
    return EstimatorConfig(m=e.m, tau=e.tau, max_alt_iters=e.max_alt_iters,
                           theta_step_iters=e.theta_step_iters, tol=e.tol,
                           ridge=e.ridge, eta_radius=e.eta_radius)
