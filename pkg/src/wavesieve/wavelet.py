"""Compactly supported orthonormal wavelet basis on an interval.

The dictionary is built from the 9-vanishing-moment Daubechies pair
(filter length 18, mother support [0, 17]): 17 translates of the scaling
function cover [-s_X, s_X], followed by complete wavelet levels whose
shifts keep an open support overlap with the interval.  Mother functions
are tabulated once on a dyadic grid by the cascade refinement (exact at
dyadic rationals); members are evaluated by affine rescaling plus linear
interpolation into the table.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import ConfigurationError

# Orthonormal 9-vanishing-moment Daubechies lowpass filter (extremal phase,
# published ordering).  Verified in tests: sum = sqrt(2), even-shift
# orthonormality, and 9 vanishing moments of the induced highpass.
DB9_DEC_LO = np.array([
    0.038077947363878347,
    0.24383467461259035,
    0.60482312369011111,
    0.65728807805130054,
    0.13319738582500758,
    -0.29327378327917491,
    -0.096840783222976461,
    0.14854074933810638,
    0.030725681479333379,
    -0.067632829061329974,
    0.00025094711483145196,
    0.022361662123679097,
    -0.0047232047577513973,
    -0.0042815036824634298,
    0.0018476468830562265,
    0.00023038576352319597,
    -0.00025196318894271014,
    3.9347320316271599e-05,
])

FILTER_LEN = len(DB9_DEC_LO)      # 18
SUPPORT_LEN = FILTER_LEN - 1      # mother support is [0, 17]
N_SCALING = SUPPORT_LEN           # translates kept in the scaling block

MIN_DEPTH, MAX_DEPTH = 8, 16


@dataclass(frozen=True)
class WaveletTable:
    """Dyadic samples of the mother pair on [0, 17] at spacing 2**-depth."""

    depth: int
    phi_samples: np.ndarray
    psi_samples: np.ndarray
    phi_deriv_samples: np.ndarray
    psi_deriv_samples: np.ndarray

    @property
    def spacing(self) -> float:
        return 2.0 ** -self.depth

    @property
    def psi_sup(self) -> float:
        """Sup norm of the mother wavelet (used in norm diagnostics)."""
        return float(np.abs(self.psi_samples).max())


def _cascade_phi(depth: int) -> np.ndarray:
    """Scaling-function values on the dyadic grid of [0, 17].

    Integer values come from the eigenvector of the refinement transfer
    matrix at eigenvalue 1 (endpoints are exactly zero); each refinement
    level then fills dyadic midpoints through the two-scale relation, which
    is exact at dyadic rationals.
    """
    h = DB9_DEC_LO
    root2 = np.sqrt(2.0)
    n_int = SUPPORT_LEN - 1  # interior integers 1..16
    T = np.zeros((n_int, n_int))
    for k in range(1, SUPPORT_LEN):
        for j in range(1, SUPPORT_LEN):
            idx = 2 * k - j
            if 0 <= idx < FILTER_LEN:
                T[k - 1, j - 1] = root2 * h[idx]
    eigvals, eigvecs = np.linalg.eig(T)
    i = int(np.argmin(np.abs(eigvals - 1.0)))
    interior = np.real(eigvecs[:, i])
    interior /= interior.sum()  # partition of unity at the integers

    vals = np.zeros(SUPPORT_LEN + 1)
    vals[1:-1] = interior
    for d in range(1, depth + 1):
        n_old = vals.shape[0]
        refined = np.zeros(2 * (n_old - 1) + 1)
        refined[::2] = vals
        xs = np.arange(1, 2 * (n_old - 1), 2) / 2.0**d
        acc = np.zeros_like(xs)
        for n in range(FILTER_LEN):
            k_old = np.round((2.0 * xs - n) * 2.0 ** (d - 1)).astype(np.int64)
            ok = (k_old >= 0) & (k_old < n_old)
            acc[ok] += root2 * h[n] * vals[k_old[ok]]
        refined[1::2] = acc
        vals = refined
    return vals


def _psi_from_phi(phi: np.ndarray, depth: int) -> np.ndarray:
    """Mother wavelet on the same grid via the quadrature-mirror relation."""
    h = DB9_DEC_LO
    g = np.array([(-1.0) ** n * h[FILTER_LEN - 1 - n] for n in range(FILTER_LEN)])
    n_nodes = phi.shape[0]
    xs = np.arange(n_nodes) / 2.0**depth
    psi = np.zeros(n_nodes)
    for n in range(FILTER_LEN):
        k = np.round((2.0 * xs - n) * 2.0**depth).astype(np.int64)
        ok = (k >= 0) & (k < n_nodes)
        psi[ok] += np.sqrt(2.0) * g[n] * phi[k[ok]]
    return psi


def _centered_diff(vals: np.ndarray, spacing: float) -> np.ndarray:
    out = np.zeros_like(vals)
    out[1:-1] = (vals[2:] - vals[:-2]) / (2.0 * spacing)
    # the mothers vanish identically outside [0, 17], so the endpoint
    # derivatives are zero
    return out


@lru_cache(maxsize=8)
def build_table(depth: int) -> WaveletTable:
    """Tabulate the mother pair and first derivatives at dyadic resolution."""
    if not MIN_DEPTH <= depth <= MAX_DEPTH:
        raise ConfigurationError(
            f"table depth must lie in [{MIN_DEPTH}, {MAX_DEPTH}], got {depth}"
        )
    phi = _cascade_phi(depth)
    psi = _psi_from_phi(phi, depth)
    spacing = 2.0 ** -depth
    table = WaveletTable(
        depth=depth,
        phi_samples=phi,
        psi_samples=psi,
        phi_deriv_samples=_centered_diff(phi, spacing),
        psi_deriv_samples=_centered_diff(psi, spacing),
    )
    for arr in (phi, psi, table.phi_deriv_samples, table.psi_deriv_samples):
        arr.setflags(write=False)
    return table


@dataclass(frozen=True)
class BasisIndex:
    """Structured address of one dictionary member.

    ``k`` is the 1-based flat index under the canonical ordering: scaling
    block first (shift = k - 1), then wavelet levels in ascending ``j``
    with shifts ascending within a level.
    """

    k: int
    kind: str            # "scaling" | "wavelet"
    j: int | None = None  # wavelet refinement level, >= 0
    r: int = 0           # shift


def level_shifts(j: int) -> range:
    """Admissible shifts at wavelet level ``j``.

    These are the nonnegative shifts (the canonical per-level range) whose
    rescaled support keeps a nonempty open intersection with the interval;
    measure-zero touching is excluded.
    """
    if j < 0:
        raise ConfigurationError(f"wavelet level must be >= 0, got {j}")
    return range(0, min(SUPPORT_LEN * 2**j - 1, 2**j + 15) + 1)


def level_count(j: int) -> int:
    return len(level_shifts(j))


def admissible_sizes(max_level: int = 8) -> list[int]:
    """Cumulative basis sizes: scaling block plus complete wavelet levels."""
    sizes = [N_SCALING]
    total = N_SCALING
    for j in range(max_level + 1):
        total += level_count(j)
        sizes.append(total)
    return sizes


def enumerate_levels(s_X: float, max_level: int) -> list[BasisIndex]:
    """Canonical index list: 17 scaling translates, then levels 0..max_level.

    ``max_level = -1`` returns the scaling block only.  The enumeration is
    scale-free: ``s_X`` only fixes units and never changes the counts.
    """
    if s_X <= 0:
        raise ConfigurationError(f"s_X must be positive, got {s_X}")
    if max_level < -1:
        raise ConfigurationError(f"max_level must be >= -1, got {max_level}")
    out = [BasisIndex(k=k, kind="scaling", j=None, r=k - 1)
           for k in range(1, N_SCALING + 1)]
    k = N_SCALING + 1
    for j in range(max_level + 1):
        for r in level_shifts(j):
            out.append(BasisIndex(k=k, kind="wavelet", j=j, r=r))
            k += 1
    return out


def support(idx: BasisIndex, s_X: float) -> tuple[float, float]:
    """Closed support interval of member ``idx`` in data units.

    Scaling members shift supp(phi_{9,s_X}) = [-s_X, 16 s_X] left by
    r = k - 1 units; wavelets additionally contract by 2^-j.
    """
    scale = s_X if idx.kind == "scaling" else 2.0 ** -idx.j * s_X
    return ((-1 - idx.r) * scale, (16 - idx.r) * scale)


@dataclass(frozen=True)
class Basis:
    """Finite wavelet dictionary e_1..e_m on [-s_X, s_X].

    Immutable after construction; safe to share across workers.
    """

    m: int
    s_X: float
    table: WaveletTable
    index_map: tuple[BasisIndex, ...]

    def __post_init__(self):
        sizes = set(admissible_sizes(max_level=24))
        if self.m not in sizes:
            near = sorted(s for s in sizes if s <= max(self.m * 2, 96))
            raise ConfigurationError(
                f"m={self.m} is not a cumulative level count; admissible sizes "
                f"start {near[:6]}"
            )

    @property
    def max_level(self) -> int:
        levels = [ix.j for ix in self.index_map if ix.kind == "wavelet"]
        return max(levels) if levels else -1

    @cached_property
    def _packed(self):
        """Per-member affine coefficients mapping x to a table coordinate.

        For member k the table argument is u = a_k * x + b_k with u in
        [0, 17]; the value is amp_k * tbl(u) and the derivative
        amp_k * a_k * tbl'(u), with tbl = phi or psi by member kind.
        Tables are stored concatenated; ``offset`` selects phi or psi.
        """
        s = self.s_X
        a = np.empty(self.m)
        b = np.empty(self.m)
        amp = np.empty(self.m)
        offset = np.zeros(self.m, dtype=np.int64)
        n_phi = self.table.phi_samples.shape[0]
        for i, ix in enumerate(self.index_map):
            if ix.kind == "scaling":
                a[i] = 1.0 / s
                b[i] = float(ix.k)          # u = x/s + k
                amp[i] = s ** -0.5
            else:
                a[i] = 2.0**ix.j / s
                b[i] = ix.r + 1.0           # u = 2^j x/s + r + 1
                amp[i] = 2.0 ** (ix.j / 2.0) * s ** -0.5
                offset[i] = n_phi
        return a, b, amp, offset

    @cached_property
    def _tables(self):
        """phi/psi sample tables concatenated, for values and derivatives."""
        t = self.table
        return (np.concatenate([t.phi_samples, t.psi_samples]),
                np.concatenate([t.phi_deriv_samples, t.psi_deriv_samples]))


def make_basis(m: int, s_X: float, depth: int = 12) -> Basis:
    """Construct the basis with ``m`` members (a cumulative level count)."""
    if s_X <= 0:
        raise ConfigurationError(f"s_X must be positive, got {s_X}")
    table = build_table(depth)
    level = -1
    total = N_SCALING
    while total < m:
        level += 1
        if level > 24:
            raise ConfigurationError(f"m={m} is beyond the supported level range")
        total += level_count(level)
    return Basis(m=m, s_X=s_X, table=table,
                 index_map=tuple(enumerate_levels(s_X, level)[:m]))


def _eval_members(basis: Basis, x, deriv: bool,
                  pair: bool = False) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
    """Values (and optionally derivatives) of all members at all x.

    One fused gather into the concatenated sample tables; exactly zero
    outside each member's support.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    a, b, amp, offset = basis._packed
    tbl_val, tbl_der = basis._tables
    n_nodes = basis.table.phi_samples.shape[0]

    u = xs[:, None] * a[None, :] + b[None, :]
    inside = (u > 0.0) & (u < SUPPORT_LEN)
    pos = u * 2.0**basis.table.depth
    np.clip(pos, 0.0, n_nodes - 2, out=pos)
    i0 = pos.astype(np.int64)
    frac = pos - i0
    i0 += offset[None, :]

    def gather(tbl):
        return tbl[i0] * (1.0 - frac) + tbl[i0 + 1] * frac

    if pair:
        vals = gather(tbl_val)
        vals *= inside
        vals *= amp[None, :]
        ders = gather(tbl_der)
        ders *= inside
        ders *= (amp * a)[None, :]
        return vals, ders
    out = gather(tbl_der if deriv else tbl_val)
    out *= inside
    out *= (amp * a)[None, :] if deriv else amp[None, :]
    return out


def basis_matrix(basis: Basis, x) -> np.ndarray:
    """Member values at every x: shape (len(x), m)."""
    return _eval_members(basis, x, deriv=False)


def basis_deriv_matrix(basis: Basis, x) -> np.ndarray:
    """First derivatives at every x: shape (len(x), m)."""
    return _eval_members(basis, x, deriv=True)


def basis_and_deriv_matrices(basis: Basis, x) -> tuple[np.ndarray, np.ndarray]:
    """Values and first derivatives in one pass (shared index arithmetic)."""
    return _eval_members(basis, x, deriv=False, pair=True)


def basis_vector(basis: Basis, x: float) -> np.ndarray:
    """e(x) = (e_1(x), ..., e_m(x))."""
    return basis_matrix(basis, [x])[0]


def basis_deriv_vector(basis: Basis, x: float) -> np.ndarray:
    return basis_deriv_matrix(basis, [x])[0]


def eval_basis(basis: Basis, k: int, x):
    """Evaluate member k (1-based) at x (scalar or array)."""
    _check_member(basis, k)
    vals = _eval_members(basis, np.atleast_1d(x), deriv=False)[:, k - 1]
    return float(vals[0]) if np.isscalar(x) else vals


def eval_basis_deriv(basis: Basis, k: int, x):
    _check_member(basis, k)
    vals = _eval_members(basis, np.atleast_1d(x), deriv=True)[:, k - 1]
    return float(vals[0]) if np.isscalar(x) else vals


def _check_member(basis: Basis, k: int):
    if not 1 <= k <= basis.m:
        raise ConfigurationError(f"member index {k} outside 1..{basis.m}")


def overlap_count(basis: Basis, k: int, j_l: int) -> int:
    """Members at level ``j_l`` whose support starts inside supp(e_k).

    One-sided overlap count: for interior members it equals
    ceil(2^(j_l - j_k) * 17); boundary members are counted by direct
    enumeration over the admissible shift set.
    """
    _check_member(basis, k)
    idx = basis.index_map[k - 1]
    j_k = 0 if idx.kind == "scaling" else idx.j
    if j_l < j_k:
        raise ConfigurationError(f"j_l={j_l} must be >= the member level {j_k}")
    lo, hi = support(idx, basis.s_X)
    count = 0
    for r in level_shifts(j_l):
        left = (-1 - r) * 2.0 ** -j_l * basis.s_X
        if lo <= left < hi:
            count += 1
    return count


def gram_matrix(basis: Basis) -> np.ndarray:
    """Quadrature Gram matrix over the union of supports.

    Composite midpoint rule at the dyadic resolution of the finest level
    present, so every member is integrated at its own table granularity.
    """
    step = basis.s_X * 2.0 ** -(basis.table.depth + max(basis.max_level, 0))
    lo = -SUPPORT_LEN * basis.s_X
    hi = (SUPPORT_LEN - 1) * basis.s_X
    n = int(np.round((hi - lo) / step))
    x = lo + (np.arange(n) + 0.5) * step
    B = basis_matrix(basis, x)
    return (B.T @ B) * step
