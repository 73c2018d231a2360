"""Sieve profile estimation: exact eta-step, half-sphere theta-step,
grid-search initialization, and the alternating maximization loop.

The eta-step solves its least-squares problem exactly (truncated SVD,
stable under the dictionary's boundary rank deficiency); the theta-step
is quasi-Newton ascent in the angle chart with backtracking, clamped to
the chart box.  Alternation repeats the two until the joint parameter
change drops below tolerance; the likelihood trace never decreases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lstsq

from .errors import (ConfigurationError, InitializationError,
                     RankDeficiencyError)
from .likelihood import FullParam, loglik, value_and_angle_score
from .model import Dataset
from .sphere import (SphereAngles, SphereGrid, angles_of, clamp_angles,
                     embed, make_grid)
from .wavelet import Basis, basis_matrix

GRAM_COND_LIMIT = 1e12
ARMIJO = 1e-4


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning knobs for fit(); m must match the basis in use."""

    m: int
    tau: float = 0.2
    max_alt_iters: int = 60
    theta_step_iters: int = 50
    tol: float = 1e-9
    ridge: float | None = None        # None: truncated-SVD solve; value: Gram ridge
    eta_radius: float | None = None   # optional ||eta|| cap (flag only)
    grid_budget: int = 500_000

    def __post_init__(self):
        if self.tol <= 0:
            raise ConfigurationError("tol must be positive")
        if self.ridge is not None and self.ridge < 0:
            raise ConfigurationError("ridge must be nonnegative")
        if self.max_alt_iters < 1 or self.theta_step_iters < 1:
            raise ConfigurationError("iteration budgets must be >= 1")


@dataclass
class EtaStep:
    """Closed-form eta maximizer at a fixed direction."""

    eta: np.ndarray
    gram_cond: float
    ridged: bool
    rank: int
    at_radius_bound: bool


SV_CUTOFF = 1e-6


def eta_step(data: Dataset, basis: Basis, theta: np.ndarray,
             ridge: float | None = None,
             eta_radius: float | None = None) -> EtaStep:
    """Exact maximizer of L(theta, .) over the coefficient vector.

    The normal equations (B'B) eta = B'Y are solved by an SVD least
    squares on the design B itself; directions below a relative singular
    value cutoff (boundary members with no mass on the index range) are
    truncated, which leaves the fitted values and the maximal value exact
    while keeping the representative coefficient vector unique.  Passing
    an explicit ``ridge`` switches to the Gram + ridge solve when the Gram
    condition exceeds 1e12, flagged; ridge = 0 raises instead.
    """
    X = data.X[data.kept]
    Y = data.Y[data.kept]
    t = X @ np.asarray(theta, dtype=float)
    B = basis_matrix(basis, t)

    eta, _, rank, sv = lstsq(B, Y, cond=SV_CUTOFF, lapack_driver="gelsd")
    smax = float(sv[0]) if sv is not None and sv.size else 0.0
    if smax == 0.0 or rank == 0:
        raise RankDeficiencyError("all basis members vanish on the index range")
    smin = float(sv[-1])
    cond = float((smax / smin) ** 2) if smin > 0 else np.inf

    ridged = False
    if ridge is not None and (not np.isfinite(cond) or cond > GRAM_COND_LIMIT):
        if ridge == 0:
            raise RankDeficiencyError(
                f"Gram matrix condition {cond:.3g} exceeds {GRAM_COND_LIMIT:.0e} "
                "and ridge is disabled"
            )
        gram = B.T @ B
        eta = np.linalg.solve(gram + ridge * np.eye(basis.m), B.T @ Y)
        rank = basis.m
        ridged = True

    at_bound = bool(eta_radius is not None and np.linalg.norm(eta) > eta_radius)
    return EtaStep(eta=eta, gram_cond=cond, ridged=ridged, rank=int(rank),
                   at_radius_bound=at_bound)


@dataclass
class ThetaStep:
    """Result of the ascent over angles at fixed eta."""

    angles: SphereAngles
    value: float
    n_iters: int
    stalled: bool
    grad_norm: float


def theta_step(data: Dataset, basis: Basis, eta: np.ndarray,
               start_angles: SphereAngles, budget: int = 50,
               tol: float = 1e-10) -> ThetaStep:
    """BFGS-style ascent of L(., eta) in the angle chart.

    Accepted steps satisfy an Armijo ascent condition, so the returned
    value is never below the start; if no step is ever accepted the start
    is returned with the stall flag set.
    """
    p = data.p
    phi = clamp_angles(np.asarray(start_angles.phi, dtype=float), p)
    q = phi.shape[0]

    def value_grad(ph):
        return value_and_angle_score(data, basis,
                                     FullParam(angles=SphereAngles(ph), eta=eta))

    val, grad = value_grad(phi)
    Hinv = np.eye(q)
    moved = False
    at_stationary = False
    it = 0
    for it in range(1, budget + 1):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= tol * (1.0 + abs(val)):
            at_stationary = True
            break
        d = Hinv @ grad
        if d @ grad <= 0:          # curvature went bad; reset to steepest ascent
            Hinv = np.eye(q)
            d = grad.copy()
        alpha = 1.0
        accepted = False
        while alpha > 1e-13:
            cand = clamp_angles(phi + alpha * d, p)
            s = cand - phi
            if np.linalg.norm(s) == 0.0:
                break
            cand_val, cand_grad = value_grad(cand)
            if cand_val >= val + ARMIJO * (grad @ s):
                # inverse-BFGS update for maximization: s'y < 0 along an
                # ascent of a locally concave objective
                y = cand_grad - grad
                sy = s @ y
                if sy < -1e-14 * np.linalg.norm(s) * np.linalg.norm(y):
                    rho = 1.0 / sy
                    V = np.eye(q) - rho * np.outer(s, y)
                    Hinv = V @ Hinv @ V.T - rho * np.outer(s, s)
                gain = cand_val - val
                step_norm = float(np.linalg.norm(s))
                phi, val, grad = cand, cand_val, cand_grad
                moved = True
                accepted = True
                # stop polishing once steps stop moving the parameter at
                # the tolerance scale; the square root keeps value accuracy
                # at tol (the objective is locally quadratic)
                if step_norm <= np.sqrt(tol) * 1e-2 and gain <= tol * (1.0 + abs(val)):
                    at_stationary = True
                break
            alpha *= 0.5
        if not accepted or at_stationary:
            break

    return ThetaStep(angles=SphereAngles(phi), value=val, n_iters=it,
                     stalled=not moved and not at_stationary,
                     grad_norm=float(np.linalg.norm(grad)))


def grid_init(data: Dataset, basis: Basis, grid: SphereGrid,
              ridge: float | None = None) -> tuple[FullParam, float]:
    """Best (theta_l, eta_step(theta_l)) over the grid; lowest index wins ties."""
    if grid.n_points == 0:
        raise InitializationError("empty initialization grid")
    best: FullParam | None = None
    best_val = -np.inf
    failures = 0
    for idx in range(grid.n_points):
        try:
            step = eta_step(data, basis, grid.points[idx], ridge=ridge)
        except RankDeficiencyError:
            failures += 1
            continue
        par = FullParam(angles=SphereAngles(grid.angles[idx]), eta=step.eta)
        val = loglik(data, basis, par)
        if val > best_val:
            best, best_val = par, val
    if best is None:
        raise InitializationError(
            f"all {grid.n_points} grid points were rank deficient"
        )
    return best, best_val


@dataclass
class AlternatingTrace:
    """Iterates and values of the alternating loop (values nondecreasing)."""

    iterates: list[tuple[FullParam, float]] = field(default_factory=list)
    converged: bool = False
    iterations_used: int = 0
    flags: dict = field(default_factory=dict)

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.iterates]


def alternate(data: Dataset, basis: Basis, config: EstimatorConfig,
              init: FullParam) -> tuple[FullParam, AlternatingTrace]:
    """Repeat eta-step then theta-step until the joint update is below tol."""
    trace = AlternatingTrace()
    current = init
    trace.iterates.append((current, loglik(data, basis, current)))
    flags = {"ridged": 0, "stalled": 0, "eta_bound": 0}
    for k in range(1, config.max_alt_iters + 1):
        prev = current.packed()

        estep = eta_step(data, basis, current.theta, ridge=config.ridge,
                         eta_radius=config.eta_radius)
        flags["ridged"] += estep.ridged
        flags["eta_bound"] += estep.at_radius_bound
        current = FullParam(angles=current.angles, eta=estep.eta)
        trace.iterates.append((current, loglik(data, basis, current)))

        tstep = theta_step(data, basis, current.eta, current.angles,
                           budget=config.theta_step_iters, tol=config.tol)
        flags["stalled"] += tstep.stalled
        current = FullParam(angles=tstep.angles, eta=current.eta)
        trace.iterates.append((current, tstep.value))

        trace.iterations_used = k
        if np.linalg.norm(current.packed() - prev) <= config.tol:
            trace.converged = True
            break
    trace.flags = flags
    return current, trace


@dataclass
class SieveEstimate:
    """Fitted parameter with trace and solver diagnostics."""

    param: FullParam
    theta: np.ndarray
    loglik: float
    trace: AlternatingTrace
    grid_points: int
    diagnostics: dict


def fit(data: Dataset, basis: Basis, config: EstimatorConfig) -> SieveEstimate:
    """Grid-search initialization followed by alternating maximization."""
    if config.m != basis.m:
        raise ConfigurationError(
            f"config.m={config.m} does not match basis.m={basis.m}"
        )
    grid = make_grid(data.p, config.tau, max_points=config.grid_budget)
    init, init_val = grid_init(data, basis, grid, ridge=config.ridge)
    final, trace = alternate(data, basis, config, init)
    theta = embed(final.angles)
    diagnostics = {
        "init_value": init_val,
        "converged": trace.converged,
        "iterations": trace.iterations_used,
        **trace.flags,
    }
    return SieveEstimate(param=final, theta=theta, loglik=trace.values[-1],
                         trace=trace, grid_points=grid.n_points,
                         diagnostics=diagnostics)


def profiled_loglik(data: Dataset, basis: Basis, theta: np.ndarray,
                    ridge: float | None = None) -> tuple[float, FullParam]:
    """max_eta L(theta, eta) and the profile point attaining it."""
    step = eta_step(data, basis, theta, ridge=ridge)
    theta = np.asarray(theta, dtype=float)
    par = FullParam(angles=angles_of(theta), eta=step.eta)
    return loglik(data, basis, par), par
