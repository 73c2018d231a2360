"""Profile inference: Schur-complement curvature, profile score, Wilks
statistic, Fisher-expansion residual, identifiability diagnostic, and
likelihood-ratio confidence sets.

All quantities are empirical (data-conditional); population versions are
what the Monte Carlo harness approximates by replication.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DiagnosticError, RankDeficiencyError
from .estimator import profiled_loglik
from .likelihood import (FullParam, LikelihoodBlocks, hessian_blocks,
                         loglik)
from .model import Dataset
from .sphere import angles_of
from .wavelet import Basis

EIG_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class ProfileQuantities:
    """Profile curvature and the identifiability coefficient.

    breve_D2 is the angle-block Schur complement D2 - A H2^-1 A', equal to
    the inverse of the projected inverse information; rho is the spectral
    norm of H2^-1/2 A' D2^-1/2 (below 1 on well-posed fits).
    """

    breve_D2: np.ndarray
    rho: float


def _eigh_sym(mat: np.ndarray):
    """Eigendecomposition of the symmetrized matrix: (lam, V)."""
    mat = 0.5 * (mat + mat.T)
    return np.linalg.eigh(mat)


# eigenvalue cutoff matching the eta-solver's singular-value truncation:
# directions of H2 below this relative size are outside the identifiable
# model and are excluded rather than inverted
H2_EIG_CUTOFF = 1e-12


def _h2_pinv(H2: np.ndarray) -> np.ndarray:
    lam, V = _eigh_sym(H2)
    top = lam.max() if lam.size else 0.0
    if top <= 0:
        raise RankDeficiencyError(
            f"H2 is not positive definite (max eigenvalue {top:.3g})"
        )
    keep = lam > H2_EIG_CUTOFF * top
    inv = np.where(keep, 1.0 / np.where(keep, lam, 1.0), 0.0)
    return (V * inv) @ V.T


def profile_blocks(blocks: LikelihoodBlocks) -> ProfileQuantities:
    """Schur complement and rho from assembled curvature blocks.

    Directions of H2 below the identifiability cutoff are excluded from
    the inversions (they are outside the numerically identifiable model).
    """
    lamH, VH = _eigh_sym(blocks.H2)
    top = lamH.max() if lamH.size else 0.0
    if top <= 0:
        raise RankDeficiencyError(
            f"H2 is not positive definite (max eigenvalue {top:.3g})"
        )
    keep = lamH > H2_EIG_CUTOFF * top
    H_inv = (VH * np.where(keep, 1.0 / np.where(keep, lamH, 1.0), 0.0)) @ VH.T
    breve = blocks.D2 - blocks.A @ H_inv @ blocks.A.T
    breve = 0.5 * (breve + breve.T)

    lamD, VD = _eigh_sym(blocks.D2)
    lamD = np.maximum(lamD, 0.0)
    with np.errstate(divide="ignore"):
        invs_D = np.where(lamD > 0, 1.0 / np.sqrt(np.maximum(lamD, 1e-300)), 0.0)
    D_inv_half = (VD * invs_D) @ VD.T
    H_inv_half = (VH * np.where(keep, 1.0 / np.sqrt(np.where(keep, lamH, 1.0)), 0.0)) @ VH.T
    rho = float(np.linalg.norm(H_inv_half @ blocks.A.T @ D_inv_half, ord=2))
    return ProfileQuantities(breve_D2=breve, rho=rho)


def profile_score(data: Dataset, basis: Basis, param: FullParam,
                  gauss_newton_only: bool = True) -> np.ndarray:
    """Projected score: grad_theta L - A H2^-1 grad_eta L at ``param``.

    At a profile point (theta, eta_step(theta)) the eta-score vanishes and
    this is the envelope gradient of the profiled objective.
    """
    blocks = hessian_blocks(data, basis, param, gauss_newton_only=gauss_newton_only)
    H_inv = _h2_pinv(blocks.H2)
    return blocks.score_theta - blocks.A @ (H_inv @ blocks.score_eta)


def wilks_stat(data: Dataset, basis: Basis, theta_hat: np.ndarray,
               theta_ref: np.ndarray, ridge: float | None = None) -> float:
    """2 * (profiled loglik at theta_hat - profiled loglik at theta_ref).

    Unscaled; divide by a noise-variance estimate to compare with chi^2
    quantiles when sigma differs from 1.
    """
    val_hat, _ = profiled_loglik(data, basis, theta_hat, ridge=ridge)
    val_ref, _ = profiled_loglik(data, basis, theta_ref, ridge=ridge)
    return float(2.0 * (val_hat - val_ref))


@dataclass(frozen=True)
class FisherExpansion:
    """Pieces of the linearization breve_D (theta - theta_ref) ~ xi."""

    residual: float            # || breve_D * dphi - breve_D^-1 * xi_raw ||
    xi_raw_norm: float         # raw projected score norm
    xi_norm: float             # normalized score norm || breve_D^-1 xi_raw ||
    rho: float


def fisher_expansion(data: Dataset, basis: Basis, theta_hat: np.ndarray,
                     theta_ref: np.ndarray, ridge: float | None = None,
                     gauss_newton_only: bool = True) -> FisherExpansion:
    """Evaluate the expansion at the profile point of ``theta_ref``.

    The angle-chart difference is weighted by the PSD square root of the
    Schur complement; the projected score enters through the matching
    inverse square root, the normalization under which its squared norm
    tracks the Wilks statistic.
    """
    _, par_ref = profiled_loglik(data, basis, theta_ref, ridge=ridge)
    blocks = hessian_blocks(data, basis, par_ref,
                            gauss_newton_only=gauss_newton_only)
    quant = profile_blocks(blocks)

    lam, V = _eigh_sym(quant.breve_D2)
    scale = float(np.abs(lam).max()) if lam.size else 0.0
    if lam.min() < -1e-8 * max(scale, 1.0):
        raise DiagnosticError(
            "profile curvature is not positive semidefinite",
            eigenvalues=lam,
        )
    lam = np.maximum(lam, 0.0)
    root = (V * np.sqrt(lam)) @ V.T
    with np.errstate(divide="ignore"):
        inv_root = (V * np.where(lam > EIG_FLOOR_REL * max(scale, 1.0),
                                 1.0 / np.sqrt(np.maximum(lam, 1e-300)), 0.0)) @ V.T

    H_inv = _h2_pinv(blocks.H2)
    xi_raw = blocks.score_theta - blocks.A @ (H_inv @ blocks.score_eta)
    xi_white = inv_root @ xi_raw

    dphi = angles_of(np.asarray(theta_hat, dtype=float)).phi - par_ref.angles.phi
    resid = root @ dphi - xi_white
    return FisherExpansion(
        residual=float(np.linalg.norm(resid)),
        xi_raw_norm=float(np.linalg.norm(xi_raw)),
        xi_norm=float(np.linalg.norm(xi_white)),
        rho=quant.rho,
    )


def fisher_residual(data: Dataset, basis: Basis, theta_hat: np.ndarray,
                    theta_ref: np.ndarray, ridge: float | None = None) -> float:
    return fisher_expansion(data, basis, theta_hat, theta_ref, ridge=ridge).residual


def estimate_sigma2(data: Dataset, basis: Basis, param: FullParam) -> float:
    """Residual variance estimate RSS / (n_kept - (p + m))."""
    rss = -2.0 * loglik(data, basis, param)
    dof = data.n_kept - (data.p + basis.m)
    if dof <= 0:
        raise RankDeficiencyError(
            f"cannot estimate sigma^2 with {data.n_kept} rows and "
            f"{data.p + basis.m} parameters"
        )
    return float(rss / dof)


@dataclass
class ConfidenceSet:
    """Likelihood-ratio region on the half-sphere at the given level."""

    theta_hat: np.ndarray
    level: float
    df: int
    quantile: float
    sigma2: float
    contains: Callable[[np.ndarray], bool]
    boundary: np.ndarray | None     # (n_vertices, p) polyline sample, p <= 3


def confidence_set(data: Dataset, basis: Basis, fitted, level: float,
                   sigma2: float | None = None, df: int | None = None,
                   ridge: float | None = None,
                   scan_points: int = 256) -> ConfidenceSet:
    """Region {theta : wilks(theta_hat, theta)/sigma2 <= chi2 quantile}.

    ``fitted`` is a SieveEstimate (or anything with .theta and .param).
    The degrees of freedom default to the angle-chart dimension p - 1; the
    noise variance defaults to the residual estimate at the fitted point.
    """
    from scipy.stats import chi2

    theta_hat = np.asarray(fitted.theta, dtype=float)
    p = theta_hat.shape[0]
    if not 0.0 < level < 1.0:
        raise DiagnosticError(f"level must lie in (0, 1), got {level}")
    if df is None:
        df = p - 1
    if sigma2 is None:
        sigma2 = estimate_sigma2(data, basis, fitted.param)
    q = float(chi2.ppf(level, df))
    val_hat, _ = profiled_loglik(data, basis, theta_hat, ridge=ridge)

    def scaled_excess(theta: np.ndarray) -> float:
        val, _ = profiled_loglik(data, basis, theta, ridge=ridge)
        return 2.0 * (val_hat - val) / sigma2 - q

    def contains(theta: np.ndarray) -> bool:
        return scaled_excess(np.asarray(theta, dtype=float)) <= 0.0

    boundary = None
    if p in (2, 3):
        # quadratic-scale window around the fit: semi-axes of
        # {dphi : dphi' breve_D2 dphi <= q sigma2} from the curvature
        center = angles_of(theta_hat).phi
        blocks = hessian_blocks(data, basis, fitted.param)
        lam, _ = _eigh_sym(profile_blocks(blocks).breve_D2)
        lam = np.maximum(lam, 1e-12)
        half_width = 4.0 * float(np.sqrt(q * sigma2 / lam.min())) + 1e-4
        if p == 2:
            boundary = _trace_boundary_circle(scaled_excess, scan_points,
                                              center, half_width)
        else:
            boundary = _trace_boundary_surface(scaled_excess, scan_points,
                                               center, half_width)

    return ConfidenceSet(theta_hat=theta_hat, level=level, df=df, quantile=q,
                         sigma2=float(sigma2), contains=contains,
                         boundary=boundary)


def _trace_boundary_circle(excess, scan_points: int,
                           center: np.ndarray | None = None,
                           half_width: float | None = None) -> np.ndarray:
    """Sign-change bisection along the half-circle chart [0, pi]."""
    from .sphere import SphereAngles, embed

    eps = 1e-7
    lo, hi = eps, np.pi - eps
    if center is not None and half_width is not None:
        lo = max(lo, float(center[0]) - half_width)
        hi = min(hi, float(center[0]) + half_width)
    phis = np.linspace(lo, hi, scan_points)
    vals = np.array([excess(embed(SphereAngles([ph]))) for ph in phis])
    pts = []
    for i in range(scan_points - 1):
        a, b = phis[i], phis[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            pts.append(a)
            continue
        if fa * fb < 0:
            for _ in range(40):
                mid = 0.5 * (a + b)
                fm = excess(embed(SphereAngles([mid])))
                if fa * fm <= 0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
            pts.append(0.5 * (a + b))
    return np.array([embed(SphereAngles([ph])) for ph in pts]).reshape(-1, 2)


def _trace_boundary_surface(excess, scan_points: int,
                            center: np.ndarray | None = None,
                            half_width: float | None = None) -> np.ndarray:
    """Marching-squares level trace over the 2-angle chart, as one polyline
    vertex array (segments concatenated pairwise)."""
    from .sphere import SphereAngles, angle_box, embed

    side = max(int(np.sqrt(scan_points)), 17)
    lo, hi = angle_box(3)
    (lo0, lo1), (hi0, hi1) = lo, hi
    eps = 1e-7
    if center is not None and half_width is not None:
        lo0 = max(lo0, center[0] - half_width)
        hi0 = min(hi0, center[0] + half_width)
        lo1 = max(lo1, center[1] - half_width)
        hi1 = min(hi1, center[1] + half_width)
    g0 = np.linspace(lo0 + eps, hi0 - eps, side)
    g1 = np.linspace(lo1 + eps, hi1 - eps, side)
    F = np.empty((side, side))
    for i, a in enumerate(g0):
        for j, b in enumerate(g1):
            F[i, j] = excess(embed(SphereAngles([a, b])))

    verts = []

    def cross(pa, pb, fa, fb):
        t = fa / (fa - fb)
        return pa + t * (pb - pa)

    for i in range(side - 1):
        for j in range(side - 1):
            corners = [
                (np.array([g0[i], g1[j]]), F[i, j]),
                (np.array([g0[i + 1], g1[j]]), F[i + 1, j]),
                (np.array([g0[i + 1], g1[j + 1]]), F[i + 1, j + 1]),
                (np.array([g0[i], g1[j + 1]]), F[i, j + 1]),
            ]
            hits = []
            for k in range(4):
                (pa, fa), (pb, fb) = corners[k], corners[(k + 1) % 4]
                if fa * fb < 0:
                    hits.append(cross(pa, pb, fa, fb))
            if len(hits) >= 2:
                verts.extend(hits[:2])

    if not verts:
        return np.zeros((0, 3))
    return np.array([embed(SphereAngles(v)) for v in verts]).reshape(-1, 3)
