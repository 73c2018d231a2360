"""Spherical-coordinate chart of the half-sphere {theta : ||theta|| = 1, theta_1 > 0}.

The chart box is W_S = [0, pi] x [-pi/2, pi/2]^(p-2).  With angles
phi = (phi_1, ..., phi_{p-1}) the embedding is

    theta_1 = sin(phi_1) * cos(phi_2) * ... * cos(phi_{p-1})
    theta_2 = cos(phi_1) * cos(phi_2) * ... * cos(phi_{p-1})
    theta_i = sin(phi_{i-1}) * cos(phi_i) * ... * cos(phi_{p-1}),  3 <= i <= p

so theta_1 > 0 on the interior of the box and the map is a smooth
bijection onto the open half-sphere.  Every coordinate is a product of
one sine/cosine factor per angle, which makes the exact gradient and
Hessian a bookkeeping exercise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ResourceError

# stay this far inside W_S when clamping iterates; the chart degenetates at
# the poles
BOUNDARY_MARGIN = 1e-8


@dataclass(frozen=True)
class SphereAngles:
    """A point of the chart box W_S."""

    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phi", np.atleast_1d(np.asarray(self.phi, dtype=float)))

    @property
    def p(self) -> int:
        return self.phi.shape[0] + 1


def angle_box(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper bounds of W_S for dimension p."""
    if p < 2:
        raise ConfigurationError(f"dimension p must be >= 2, got {p}")
    lo = np.full(p - 1, -np.pi / 2)
    hi = np.full(p - 1, np.pi / 2)
    lo[0], hi[0] = 0.0, np.pi
    return lo, hi


def clamp_angles(phi: np.ndarray, p: int, margin: float = BOUNDARY_MARGIN) -> np.ndarray:
    lo, hi = angle_box(p)
    return np.clip(phi, lo + margin, hi - margin)


def in_box(phi: np.ndarray, p: int) -> bool:
    lo, hi = angle_box(p)
    return bool(np.all(phi >= lo) and np.all(phi <= hi))


def _kind_table(p: int) -> list[list[str]]:
    """Factor kinds: coordinate i is the product over angles a of kinds[i][a]."""
    q = p - 1
    kinds = [["one"] * q for _ in range(p)]
    for a in range(q):
        kinds[0][a] = "sin" if a == 0 else "cos"
        kinds[1][a] = "cos"
    for i in range(2, p):
        kinds[i][i - 1] = "sin"
        for a in range(i, q):
            kinds[i][a] = "cos"
    return kinds


def _factor_values(phi: np.ndarray):
    q = phi.shape[0]
    p = q + 1
    kinds = _kind_table(p)
    s, c = np.sin(phi), np.cos(phi)
    val = np.ones((p, q))
    d1 = np.zeros((p, q))
    d2 = np.zeros((p, q))
    for i in range(p):
        for a in range(q):
            k = kinds[i][a]
            if k == "sin":
                val[i, a], d1[i, a], d2[i, a] = s[a], c[a], -s[a]
            elif k == "cos":
                val[i, a], d1[i, a], d2[i, a] = c[a], -s[a], -c[a]
    return val, d1, d2


def embed(angles: SphereAngles) -> np.ndarray:
    """Map chart angles to the unit vector theta."""
    val, _, _ = _factor_values(angles.phi)
    return val.prod(axis=1)


def angles_of(theta: np.ndarray) -> SphereAngles:
    """Chart preimage of a half-sphere point (theta_1 > 0 on the interior)."""
    theta = np.asarray(theta, dtype=float)
    p = theta.shape[0]
    phi = np.zeros(p - 1)
    rest = theta.copy()
    for a in range(p - 2, 0, -1):
        phi[a] = np.arcsin(np.clip(rest[a + 1], -1.0, 1.0))
        ca = np.cos(phi[a])
        if ca > 0:
            rest = rest / ca
    phi[0] = np.arctan2(rest[0], rest[1])
    return SphereAngles(phi=phi)


def grad_embed(angles: SphereAngles) -> np.ndarray:
    """Jacobian of the embedding: shape (p, p-1), columns tangent to theta."""
    val, d1, _ = _factor_values(angles.phi)
    p, q = val.shape
    grad = np.empty((p, q))
    for a in range(q):
        cols = val.copy()
        cols[:, a] = d1[:, a]
        grad[:, a] = cols.prod(axis=1)
    return grad


def hess_embed(angles: SphereAngles) -> np.ndarray:
    """Second derivatives of the embedding: shape (p, p-1, p-1), symmetric."""
    val, d1, d2 = _factor_values(angles.phi)
    p, q = val.shape
    hess = np.empty((p, q, q))
    for a in range(q):
        for b in range(a, q):
            cols = val.copy()
            if a == b:
                cols[:, a] = d2[:, a]
            else:
                cols[:, a] = d1[:, a]
                cols[:, b] = d1[:, b]
            prod = cols.prod(axis=1)
            hess[:, a, b] = prod
            hess[:, b, a] = prod
    return hess


@dataclass(frozen=True)
class SphereGrid:
    """Finite half-sphere net with covering radius at most ``tau``."""

    points: np.ndarray        # (N, p) unit vectors, theta_1 > 0
    angles: np.ndarray        # (N, p-1) chart coordinates of the points
    tau: float                # realized covering-radius bound

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def make_grid(p: int, tau: float, max_points: int = 500_000) -> SphereGrid:
    """Product grid in the chart whose image covers the half-sphere.

    Cell centers along each axis with spacing tau * min(1, 2/sqrt(p-1)):
    the chart is 1-Lipschitz onto the sphere, so the image covering radius
    is at most tau.  Centers keep every node strictly inside W_S.
    """
    if not 0 < tau < 1:
        raise ConfigurationError(f"grid fineness tau must lie in (0, 1), got {tau}")
    lo, hi = angle_box(p)
    q = p - 1
    spacing = tau * min(1.0, 2.0 / np.sqrt(q))
    axes = []
    n_total = 1
    for a in range(q):
        count = int(np.ceil((hi[a] - lo[a]) / spacing))
        n_total *= count
        if n_total > max_points:
            raise ResourceError(
                f"tau={tau} needs more than {max_points} grid points at p={p}"
            )
        step = (hi[a] - lo[a]) / count
        axes.append(lo[a] + (np.arange(count) + 0.5) * step)
    mesh = np.meshgrid(*axes, indexing="ij")
    phis = np.stack([m.ravel() for m in mesh], axis=1)
    pts = np.stack([embed(SphereAngles(phi)) for phi in phis], axis=0)
    # realized bound: half cell diagonal in the chart dominates the image
    half_diag = 0.5 * np.sqrt(sum(((hi[a] - lo[a]) / len(axes[a])) ** 2 for a in range(q)))
    return SphereGrid(points=pts, angles=phis, tau=float(half_diag))
