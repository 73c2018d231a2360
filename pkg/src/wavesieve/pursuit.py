"""Projection pursuit: greedily fit single-index components to residuals.

Each stage runs the full sieve estimator on the current residuals and
subtracts the fitted component.  Because the zero coefficient vector is
always feasible, the residual sum of squares can never increase across
stages (up to solver tolerance).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, WavesieveError
from .estimator import EstimatorConfig, fit
from .likelihood import link_on_basis
from .model import Dataset
from .wavelet import Basis


@dataclass(frozen=True)
class PursuitComponent:
    theta: np.ndarray
    eta: np.ndarray
    loglik: float


@dataclass
class PursuitModel:
    """Ordered fitted components with the residual-variance trace."""

    basis: Basis
    components: list[PursuitComponent] = field(default_factory=list)
    initial_variance: float = 0.0
    residual_variance: list[float] = field(default_factory=list)
    stopped_by: str = "max-components"
    failed_stage: int | None = None

    @property
    def n_components(self) -> int:
        return len(self.components)

    def variance_trace(self) -> list[float]:
        return [self.initial_variance, *self.residual_variance]


def fit_pursuit(data: Dataset, basis: Basis, config: EstimatorConfig,
                max_components: int, var_threshold: float | None = 1e-2) -> PursuitModel:
    """Fit up to ``max_components`` single-index components to residuals.

    Stops early when the fractional variance reduction of a stage falls
    below ``var_threshold`` (pass None to always run all stages); a stage
    whose fit fails outright ends the loop with the model so far flagged.
    """
    if max_components < 1:
        raise ConfigurationError("max_components must be >= 1")
    kept = data.kept
    residual = data.Y.copy()
    model = PursuitModel(basis=basis,
                         initial_variance=float(np.var(residual[kept])))
    prev_var = model.initial_variance
    for stage in range(1, max_components + 1):
        stage_data = data.with_responses(residual)
        try:
            est = fit(stage_data, basis, config)
        except WavesieveError:
            model.failed_stage = stage
            model.stopped_by = "stage-failure"
            break
        fitted = link_on_basis(basis, est.param.eta, data.X @ est.theta)
        residual = residual - fitted
        new_var = float(np.var(residual[kept]))
        model.components.append(PursuitComponent(
            theta=est.theta, eta=est.param.eta, loglik=est.loglik))
        model.residual_variance.append(new_var)
        gain = 1.0 - new_var / prev_var if prev_var > 0 else 0.0
        prev_var = new_var
        if var_threshold is not None and gain < var_threshold:
            model.stopped_by = "variance-threshold"
            break
    else:
        model.stopped_by = "max-components"
    return model


def predict(model: PursuitModel, x) -> np.ndarray | float:
    """Sum of component link evaluations at x (a vector or a matrix of rows)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    out = np.zeros(X.shape[0])
    for comp in model.components:
        out += link_on_basis(model.basis, comp.eta, X @ comp.theta)
    return float(out[0]) if single else out
