"""Quasi log-likelihood of the sieve single-index model in the angle chart.

The objective is L(phi, eta) = -1/2 * sum over kept rows of
(Y_i - f_eta(X_i' Phi(phi)))^2, an unnormalized sum (Wilks statistics
need this scaling).  Gradient and curvature blocks are exact analytic
expressions; the only tabulated quantity is the link curvature f'',
obtained by differencing the tabulated first derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .sphere import SphereAngles, embed, grad_embed, hess_embed
from .wavelet import (Basis, basis_and_deriv_matrices, basis_deriv_matrix,
                      basis_matrix)


@dataclass(frozen=True)
class FullParam:
    """The pair (angles, eta) addressing one point of the parameter set."""

    angles: SphereAngles
    eta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))

    @property
    def theta(self) -> np.ndarray:
        return embed(self.angles)

    @property
    def dim(self) -> int:
        return self.angles.phi.shape[0] + self.eta.shape[0]

    def packed(self) -> np.ndarray:
        return np.concatenate([self.angles.phi, self.eta])

    @classmethod
    def unpack(cls, vec: np.ndarray, p: int) -> "FullParam":
        vec = np.asarray(vec, dtype=float)
        return cls(angles=SphereAngles(vec[: p - 1]), eta=vec[p - 1:])


def link_on_basis(basis: Basis, eta: np.ndarray, t) -> np.ndarray:
    """f_eta(t) = sum_k eta_k e_k(t) for scalar or array t."""
    vals = basis_matrix(basis, np.atleast_1d(t)) @ np.asarray(eta, dtype=float)
    return float(vals[0]) if np.isscalar(t) else vals


def link_eval(basis: Basis, eta: np.ndarray, x):
    return link_on_basis(basis, eta, x)


def link_deriv(basis: Basis, eta: np.ndarray, x):
    vals = basis_deriv_matrix(basis, np.atleast_1d(x)) @ np.asarray(eta, dtype=float)
    return float(vals[0]) if np.isscalar(x) else vals


def second_deriv_step(basis: Basis) -> float:
    """Differencing step for the link curvature: two table cells wide."""
    return 2.0 ** (-basis.table.depth + 1) * basis.s_X


def link_second_deriv(basis: Basis, eta: np.ndarray, x):
    """f'' by centered differencing of the tabulated first derivative."""
    h = second_deriv_step(basis)
    xs = np.atleast_1d(x)
    eta = np.asarray(eta, dtype=float)
    up = basis_deriv_matrix(basis, xs + h) @ eta
    dn = basis_deriv_matrix(basis, xs - h) @ eta
    vals = (up - dn) / (2.0 * h)
    return float(vals[0]) if np.isscalar(x) else vals


def _check_param(basis: Basis, param: FullParam):
    if param.eta.shape != (basis.m,):
        raise ConfigurationError(
            f"eta has length {param.eta.shape[0]}, basis has m={basis.m}"
        )


def _prepare(data, basis: Basis, param: FullParam):
    """Shared per-evaluation quantities over the kept rows."""
    _check_param(basis, param)
    X = data.X[data.kept]
    Y = data.Y[data.kept]
    theta = embed(param.angles)
    t = X @ theta
    B = basis_matrix(basis, t)
    f = B @ param.eta
    resid = Y - f
    return X, Y, t, B, resid


def loglik(data, basis: Basis, param: FullParam) -> float:
    """Quadratic quasi log-likelihood over the kept rows."""
    _, _, _, _, resid = _prepare(data, basis, param)
    return float(-0.5 * resid @ resid)


def score(data, basis: Basis, param: FullParam) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradient of loglik in the (angles, eta) chart."""
    X, _, t, B, resid = _prepare(data, basis, param)
    fp = basis_deriv_matrix(basis, t) @ param.eta
    W = X @ grad_embed(param.angles)        # rows are dPhi' X_i
    score_theta = W.T @ (resid * fp)
    score_eta = B.T @ resid
    return score_theta, score_eta


def value_and_angle_score(data, basis: Basis, param: FullParam) -> tuple[float, np.ndarray]:
    """loglik and its angle gradient in one pass (inner optimizer loop)."""
    _check_param(basis, param)
    X = data.X[data.kept]
    Y = data.Y[data.kept]
    t = X @ embed(param.angles)
    B, Bp = basis_and_deriv_matrices(basis, t)
    resid = Y - B @ param.eta
    fp = Bp @ param.eta
    W = X @ grad_embed(param.angles)
    return float(-0.5 * resid @ resid), W.T @ (resid * fp)


@dataclass(frozen=True)
class LikelihoodBlocks:
    """Curvature blocks of the negative Hessian of loglik.

    D2 is the angle block, H2 the coefficient block (always the empirical
    Gram of the basis at the current index), A the cross block.  With
    gauss_newton_only the blocks are the score outer-product part only,
    which is positive semidefinite by construction; otherwise the
    residual-weighted curvature terms are included.
    """

    D2: np.ndarray
    A: np.ndarray
    H2: np.ndarray
    score_theta: np.ndarray
    score_eta: np.ndarray
    gauss_newton_only: bool

    def full_matrix(self) -> np.ndarray:
        top = np.hstack([self.D2, self.A])
        bottom = np.hstack([self.A.T, self.H2])
        return np.vstack([top, bottom])


def hessian_blocks(data, basis: Basis, param: FullParam,
                   gauss_newton_only: bool = True) -> LikelihoodBlocks:
    """Empirical information blocks at ``param`` (negative Hessian of loglik)."""
    _check_param(basis, param)
    X = data.X[data.kept]
    t = X @ embed(param.angles)
    B, Bp = basis_and_deriv_matrices(basis, t)
    resid = data.Y[data.kept] - B @ param.eta
    fp = Bp @ param.eta
    W = X @ grad_embed(param.angles)
    Wf = W * fp[:, None]

    D2 = Wf.T @ Wf
    A = Wf.T @ B
    H2 = B.T @ B
    score_theta = W.T @ (resid * fp)
    score_eta = B.T @ resid

    if not gauss_newton_only:
        fpp = link_second_deriv(basis, param.eta, t)
        # angle block: residual-weighted link curvature plus chart curvature
        D2 = D2 - (W * (resid * fpp)[:, None]).T @ W
        M = np.einsum("ic,cab->iab", X, hess_embed(param.angles))
        D2 = D2 - np.einsum("i,iab->ab", resid * fp, M)
        D2 = 0.5 * (D2 + D2.T)
        A = A - (W * resid[:, None]).T @ Bp

    return LikelihoodBlocks(
        D2=D2, A=A, H2=H2,
        score_theta=score_theta, score_eta=score_eta,
        gauss_newton_only=gauss_newton_only,
    )
