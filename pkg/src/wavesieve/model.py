"""Synthetic data generation for single- and multi-index regression models.

Responses follow Y_i = sum_l f_l(X_i' theta_l) + bias(X_i) + eps_i with
centered subgaussian noise.  Generation is a pure function of
(spec, n, seed); the counter-based Philox generator keyed off the seed
makes replication batches reproducible under parallel execution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateDataError
from .likelihood import link_on_basis
from .wavelet import Basis

NOISE_KINDS = ("gaussian", "uniform", "scaled-rademacher")
DESIGN_KINDS = ("uniform-ball", "truncated-gaussian")

#: closed-form scalar links available by name in model specs
NAMED_LINKS = {
    "sin": np.sin,
    "cubic": lambda t: t**3 / 3.0,
    "logistic": lambda t: 1.0 / (1.0 + np.exp(-t)),
}

#: additive bias terms creating model misspecification on the ball
NAMED_BIAS_TERMS = {
    "none": None,
    "quadratic-cross": lambda x, c: c * x[:, 0] * x[:, 1],
}


@dataclass(frozen=True)
class LinkSpec:
    """Scalar link: either coefficients on a Basis or a named closed form."""

    name: str | None = None
    coeffs: np.ndarray | None = None
    basis: Basis | None = None

    def __post_init__(self):
        if (self.name is None) == (self.coeffs is None):
            raise ConfigurationError("link needs exactly one of name / coeffs")
        if self.name is not None and self.name not in NAMED_LINKS:
            raise ConfigurationError(
                f"unknown link {self.name!r}; known: {sorted(NAMED_LINKS)}"
            )
        if self.coeffs is not None:
            if self.basis is None:
                raise ConfigurationError("coefficient links need the basis")
            object.__setattr__(self, "coeffs",
                               np.asarray(self.coeffs, dtype=float))
            if self.coeffs.shape != (self.basis.m,):
                raise ConfigurationError(
                    f"link coefficients have length {self.coeffs.shape}, "
                    f"basis has m={self.basis.m}"
                )

    def __call__(self, t: np.ndarray) -> np.ndarray:
        if self.name is not None:
            return NAMED_LINKS[self.name](np.asarray(t, dtype=float))
        return link_on_basis(self.basis, self.coeffs, t)


@dataclass(frozen=True)
class ModelSpec:
    """Generator description for one or more single-index components."""

    p: int
    theta_star: np.ndarray          # (n_components, p), rows unit with first coord > 0
    links: tuple[LinkSpec, ...]
    noise_sigma: float = 0.1
    noise_kind: str = "gaussian"
    design: str = "uniform-ball"
    design_radius: float = 1.2
    bias_term: str = "none"
    bias_scale: float = 0.5

    def __post_init__(self):
        th = np.atleast_2d(np.asarray(self.theta_star, dtype=float))
        if th.shape[1] != self.p:
            raise ConfigurationError(
                f"theta_star has dimension {th.shape[1]}, expected p={self.p}"
            )
        norms = np.linalg.norm(th, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-10):
            raise ConfigurationError("every theta_star must have unit norm")
        if np.any(th[:, 0] <= 0):
            raise ConfigurationError("every theta_star needs a positive first coordinate")
        if len(self.links) != th.shape[0]:
            raise ConfigurationError("one link per index component is required")
        if self.noise_kind not in NOISE_KINDS:
            raise ConfigurationError(
                f"unknown noise kind {self.noise_kind!r}; known: {NOISE_KINDS}"
            )
        if self.design not in DESIGN_KINDS:
            raise ConfigurationError(
                f"unknown design {self.design!r}; known: {DESIGN_KINDS}"
            )
        if self.bias_term not in NAMED_BIAS_TERMS:
            raise ConfigurationError(
                f"unknown bias term {self.bias_term!r}; known: {sorted(NAMED_BIAS_TERMS)}"
            )
        if self.noise_sigma < 0 or self.design_radius <= 0:
            raise ConfigurationError("noise_sigma must be >= 0 and design_radius > 0")
        object.__setattr__(self, "theta_star", th)

    @property
    def n_components(self) -> int:
        return self.theta_star.shape[0]

    def regression_function(self, X: np.ndarray) -> np.ndarray:
        g = np.zeros(X.shape[0])
        for theta, link in zip(self.theta_star, self.links):
            g += link(X @ theta)
        bias = NAMED_BIAS_TERMS[self.bias_term]
        if bias is not None:
            g += bias(X, self.bias_scale)
        return g


@dataclass(frozen=True)
class Dataset:
    """Design matrix, responses, and truncation metadata."""

    X: np.ndarray
    Y: np.ndarray
    s_X: float
    kept: np.ndarray       # indices with ||X_i|| <= s_X
    seed: int

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def n_kept(self) -> int:
        return self.kept.shape[0]

    def with_responses(self, Y: np.ndarray) -> "Dataset":
        """Same design and truncation, different responses (pursuit stages)."""
        Y = np.asarray(Y, dtype=float)
        if Y.shape != self.Y.shape:
            raise ConfigurationError("replacement responses have the wrong length")
        return Dataset(X=self.X, Y=Y, s_X=self.s_X, kept=self.kept, seed=self.seed)


def _rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def child_seed(*parts: int) -> int:
    """Stable child seed from an integer tuple (seed, n, replication, ...)."""
    ss = np.random.SeedSequence(list(parts))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _sample_design(spec: ModelSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    R = spec.design_radius
    if spec.design == "uniform-ball":
        # direction times radius with the ball volume law
        z = rng.normal(size=(n, spec.p))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        u = rng.uniform(size=n) ** (1.0 / spec.p)
        return z * (R * u)[:, None]
    # truncated-gaussian: N(0, I) conditioned on the ball of radius R
    out = np.empty((n, spec.p))
    filled = 0
    while filled < n:
        cand = rng.normal(size=(max(n, 64), spec.p))
        ok = cand[np.linalg.norm(cand, axis=1) <= R]
        take = min(n - filled, ok.shape[0])
        out[filled:filled + take] = ok[:take]
        filled += take
    return out


def _sample_noise(spec: ModelSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    s = spec.noise_sigma
    if s == 0:
        return np.zeros(n)
    if spec.noise_kind == "gaussian":
        return rng.normal(scale=s, size=n)
    if spec.noise_kind == "uniform":
        half = s * np.sqrt(3.0)
        return rng.uniform(-half, half, size=n)
    return s * rng.choice([-1.0, 1.0], size=n)


def simulate(spec: ModelSpec, n: int, seed: int) -> Dataset:
    """Draw a dataset; deterministic in (spec, n, seed)."""
    if n < 1:
        raise ConfigurationError(f"sample size must be >= 1, got {n}")
    rng = _rng_for(seed)
    X = _sample_design(spec, n, rng)
    Y = spec.regression_function(X) + _sample_noise(spec, n, rng)
    s_X = float(np.linalg.norm(X, axis=1).max())
    return Dataset(X=X, Y=Y, s_X=s_X, kept=np.arange(n), seed=seed)


def truncate(data: Dataset, s_X: float) -> Dataset:
    """Restrict the usable rows to the ball of radius s_X (rows are shared)."""
    if s_X <= 0:
        raise ConfigurationError(f"s_X must be positive, got {s_X}")
    kept = np.flatnonzero(np.linalg.norm(data.X, axis=1) <= s_X)
    if kept.size == 0:
        raise DegenerateDataError(
            f"no observations with ||X_i|| <= {s_X}; smallest norm is "
            f"{np.linalg.norm(data.X, axis=1).min():.4g}"
        )
    return Dataset(X=data.X, Y=data.Y, s_X=float(s_X), kept=kept, seed=data.seed)
