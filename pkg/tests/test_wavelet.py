import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavesieve.errors import ConfigurationError
from wavesieve import wavelet as wv


# ---------------------------------------------------------------- filter --

def test_filter_sums_to_sqrt2():
    assert abs(wv.DB9_DEC_LO.sum() - np.sqrt(2.0)) < 1e-14


def test_filter_shift_orthonormality():
    h = wv.DB9_DEC_LO
    for k in range(9):
        v = sum(h[i] * h[i + 2 * k] for i in range(len(h) - 2 * k))
        assert abs(v - (1.0 if k == 0 else 0.0)) < 1e-14


def test_highpass_vanishing_moments():
    # the induced highpass annihilates polynomials up to degree 8; the
    # tolerance tracks the cancellation scale sum |g_n| n^p
    h = wv.DB9_DEC_LO
    L = len(h)
    g = np.array([(-1.0) ** n * h[L - 1 - n] for n in range(L)])
    for power in range(9):
        moment = sum(g[n] * n**power for n in range(L))
        scale = sum(abs(g[n]) * n**power for n in range(L))
        assert abs(moment) < 1e-13 * max(scale, 1.0), (power, moment)


# ----------------------------------------------------------------- table --

def test_table_compact_support_endpoints():
    tbl = wv.build_table(10)
    assert tbl.phi_samples[0] == 0.0
    assert tbl.phi_samples[-1] == 0.0
    assert tbl.psi_samples[0] == 0.0
    assert tbl.psi_samples[-1] == 0.0


def test_table_mother_normalization():
    tbl = wv.build_table(10)
    riemann = (tbl.phi_samples**2).sum() * tbl.spacing
    assert abs(riemann - 1.0) < 1e-3


def test_table_mother_orthogonality():
    tbl = wv.build_table(10)
    cross = (tbl.phi_samples * tbl.psi_samples).sum() * tbl.spacing
    assert abs(cross) < 1e-3


@pytest.mark.parametrize("depth", [7, 17, 0, -3])
def test_table_depth_out_of_range(depth):
    with pytest.raises(ConfigurationError):
        wv.build_table(depth)


# ----------------------------------------------------------- enumeration --

def test_scaling_block_has_17_members():
    idx = wv.enumerate_levels(1.0, -1)
    assert len(idx) == 17
    assert all(ix.kind == "scaling" for ix in idx)


def test_per_level_counts_match_overlap_oracle():
    # oracle: brute-force shifts via the closed support formula
    s_X = 1.0
    for j in range(4):
        admissible = []
        for r in range(-(2**j) - 40, 17 * 2**j + 40):
            lo = (-1 - r) * 2.0**-j * s_X
            hi = (16 - r) * 2.0**-j * s_X
            if 0 <= r <= 17 * 2**j - 1 and lo < s_X and hi > -s_X:
                admissible.append(r)
        assert list(wv.level_shifts(j)) == admissible


def test_counts_are_scale_free():
    for j in (-1, 0, 1, 2):
        assert len(wv.enumerate_levels(1.0, j)) == len(wv.enumerate_levels(2.0, j))


def test_admissible_sizes_prefix():
    assert wv.admissible_sizes(2) == [17, 34, 52, 72]


def test_non_admissible_m_rejected():
    with pytest.raises(ConfigurationError):
        wv.make_basis(20, 1.0, 10)


# ---------------------------------------------------------------- support --

def test_wavelet_support_lengths():
    b = wv.make_basis(52, 1.0, 10)
    for ix in b.index_map:
        if ix.kind != "wavelet":
            continue
        lo, hi = wv.support(ix, 1.0)
        assert hi - lo == pytest.approx(17.0 * 2.0**-ix.j)
    # explicit instance: level 3 has length 17/8
    ix = wv.BasisIndex(k=0, kind="wavelet", j=3, r=0)
    lo, hi = wv.support(ix, 1.0)
    assert hi - lo == pytest.approx(17.0 / 8.0)


def test_scaling_support_from_rescaling():
    # phi_{9,s_X}(t) = s_X^{-1/2} phi9(s_X^{-1} t + 1) shifted by (k-1) s_X
    b = wv.make_basis(17, 1.0, 10)
    assert wv.support(b.index_map[0], 1.0) == (-1.0, 16.0)
    assert wv.support(b.index_map[16], 1.0) == (-17.0, 0.0)


# ------------------------------------------------------------- evaluation --

def test_zero_outside_support(basis34):
    rng = np.random.default_rng(0)
    for k in (1, 9, 17, 18, 25, 34):
        lo, hi = wv.support(basis34.index_map[k - 1], basis34.s_X)
        outside = np.concatenate([
            lo - rng.uniform(0.01, 5.0, size=50),
            hi + rng.uniform(0.01, 5.0, size=50),
        ])
        assert np.all(wv.eval_basis(basis34, k, outside) == 0.0)
        assert np.all(wv.eval_basis_deriv(basis34, k, outside) == 0.0)


def test_unit_l2_norm_by_quadrature(basis34):
    step = basis34.s_X * 2.0**-basis34.table.depth
    for k in (1, 5, 17, 18, 26, 34):
        lo, hi = wv.support(basis34.index_map[k - 1], basis34.s_X)
        x = np.arange(lo + step / 2, hi, step)
        vals = wv.eval_basis(basis34, k, x)
        assert abs((vals**2).sum() * step - 1.0) < 1e-3


def test_norm_bound_on_fine_grid(basis34):
    x = np.linspace(-1.0, 1.0, 4001)
    B = wv.basis_matrix(basis34, x)
    norms = np.sqrt((B**2).sum(axis=1))
    bound = np.sqrt(17.0) * basis34.table.psi_sup * np.sqrt(basis34.m)
    assert norms.max() <= bound
    # squared version quoted per member count
    assert (B**2).sum(axis=1).max() <= 17.0 * basis34.table.psi_sup**2 * basis34.m


def test_basis_vector_sparsity(basis17):
    # at any point at most one scaling level is active: <= 17 nonzeros, and
    # deep inside the interval every member whose support covers x is active
    v = wv.basis_vector(basis17, 0.3)
    assert np.count_nonzero(v) <= 17


def test_basis_vector_outside_all_supports(basis17):
    v = wv.basis_vector(basis17, 17.5)
    assert np.all(v == 0.0)


def test_vector_matches_scalar_eval(basis34):
    x = 0.37
    v = wv.basis_vector(basis34, x)
    for k in range(1, basis34.m + 1):
        assert v[k - 1] == pytest.approx(wv.eval_basis(basis34, k, x), abs=1e-15)


def test_deriv_matches_finite_difference(basis34):
    h = 2.0 * 2.0**-basis34.table.depth * basis34.s_X
    x = np.linspace(-0.95, 0.95, 801)
    for k in (2, 11, 20, 30):
        d = wv.eval_basis_deriv(basis34, k, x)
        fd = (wv.eval_basis(basis34, k, x + h) - wv.eval_basis(basis34, k, x - h)) / (2 * h)
        scale = max(np.abs(d).max(), 1.0)
        assert np.abs(d - fd).max() <= 1e-2 * scale


# ---------------------------------------------------------------- indexing --

@given(st.integers(min_value=1, max_value=176))
@settings(max_examples=60, deadline=None)
def test_flat_index_round_trip(k):
    idx = wv.enumerate_levels(1.0, 5)
    assert idx[k - 1].k == k
    # structured -> flat is the position in the canonical enumeration
    ix = idx[k - 1]
    if ix.kind == "scaling":
        assert ix.r == k - 1
    else:
        offset = 17 + sum(wv.level_count(j) for j in range(ix.j))
        assert offset + ix.r - wv.level_shifts(ix.j).start + 1 == k


def test_index_map_is_bijective(basis34):
    ks = [ix.k for ix in basis34.index_map]
    assert ks == list(range(1, basis34.m + 1))
    structured = {(ix.kind, ix.j, ix.r) for ix in basis34.index_map}
    assert len(structured) == basis34.m


# ---------------------------------------------------------------- overlap --

def test_overlap_count_equal_level_interior():
    b = wv.make_basis(176, 1.0, 10)
    # a level-4 member whose one-sided window fits in the admissible range
    k = next(ix.k for ix in b.index_map if ix.kind == "wavelet"
             and ix.j == 4 and ix.r == 20)
    assert wv.overlap_count(b, k, 4) == 17


def test_overlap_count_next_level_interior():
    b = wv.make_basis(176, 1.0, 10)
    k = next(ix.k for ix in b.index_map if ix.kind == "wavelet"
             and ix.j == 4 and ix.r == 20)
    assert wv.overlap_count(b, k, 5) == 34


def test_overlap_count_boundary_by_enumeration():
    b = wv.make_basis(52, 1.0, 10)
    for k in (18, 19, 35, 40):
        ix = b.index_map[k - 1]
        lo, hi = wv.support(ix, b.s_X)
        j_l = ix.j + 1
        expected = 0
        for r in wv.level_shifts(j_l):
            left = wv.support(wv.BasisIndex(k=0, kind="wavelet", j=j_l, r=r),
                              b.s_X)[0]
            if lo <= left < hi:
                expected += 1
        assert wv.overlap_count(b, k, j_l) == expected


def test_overlap_count_level_precondition(basis34):
    k = next(ix.k for ix in basis34.index_map if ix.kind == "wavelet")
    with pytest.raises(ConfigurationError):
        wv.overlap_count(basis34, 34, -1)


# ------------------------------------------------------------ gram matrix --

def test_gram_orthonormality_m52():
    b = wv.make_basis(52, 1.0, 12)
    G = wv.gram_matrix(b)
    assert np.abs(G - np.eye(52)).max() <= 1e-3
