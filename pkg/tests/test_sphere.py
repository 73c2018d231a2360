import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavesieve import sphere as sp
from wavesieve.errors import ConfigurationError, ResourceError


def random_interior_angles(p, rng):
    lo, hi = sp.angle_box(p)
    return lo + (hi - lo) * rng.uniform(0.02, 0.98, size=p - 1)


@pytest.mark.parametrize("p", [2, 3, 4, 5])
def test_embed_unit_norm_and_halfsphere(p):
    rng = np.random.default_rng(p)
    for _ in range(200):
        ang = sp.SphereAngles(random_interior_angles(p, rng))
        theta = sp.embed(ang)
        assert abs(np.linalg.norm(theta) - 1.0) < 5e-15
        assert theta[0] > 0


@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_angle_round_trip(p, draw):
    rng = np.random.default_rng(draw)
    phi = random_interior_angles(p, rng)
    theta = sp.embed(sp.SphereAngles(phi))
    back = sp.angles_of(theta)
    assert np.allclose(back.phi, phi, atol=1e-10)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_gradient_tangency(p):
    rng = np.random.default_rng(10 + p)
    for _ in range(50):
        ang = sp.SphereAngles(random_interior_angles(p, rng))
        theta = sp.embed(ang)
        G = sp.grad_embed(ang)
        assert np.abs(theta @ G).max() < 1e-12


@pytest.mark.parametrize("p", [2, 3, 4])
def test_gradient_matches_finite_differences(p):
    rng = np.random.default_rng(20 + p)
    h = 1e-6
    for _ in range(20):
        phi = random_interior_angles(p, rng)
        G = sp.grad_embed(sp.SphereAngles(phi))
        for a in range(p - 1):
            e = np.zeros(p - 1)
            e[a] = h
            fd = (sp.embed(sp.SphereAngles(phi + e))
                  - sp.embed(sp.SphereAngles(phi - e))) / (2 * h)
            assert np.abs(fd - G[:, a]).max() < 1e-6 * max(1.0, np.abs(G[:, a]).max())


@pytest.mark.parametrize("p", [2, 3, 4])
def test_hessian_matches_finite_differences(p):
    rng = np.random.default_rng(30 + p)
    h = 1e-5
    for _ in range(10):
        phi = random_interior_angles(p, rng)
        H = sp.hess_embed(sp.SphereAngles(phi))
        assert np.abs(H - H.transpose(0, 2, 1)).max() == 0.0
        for a in range(p - 1):
            e = np.zeros(p - 1)
            e[a] = h
            fd = (sp.grad_embed(sp.SphereAngles(phi + e))
                  - sp.grad_embed(sp.SphereAngles(phi - e))) / (2 * h)
            assert np.abs(fd - H[:, :, a]).max() < 1e-3


@pytest.mark.parametrize("p", [2, 3, 5])
def test_differential_norm_bound(p):
    # ||dPhi v|| <= (sqrt(p+2)/2) pi ||v|| spot check
    rng = np.random.default_rng(40 + p)
    bound = np.sqrt(p + 2) / 2.0 * np.pi
    for _ in range(50):
        ang = sp.SphereAngles(random_interior_angles(p, rng))
        G = sp.grad_embed(ang)
        v = rng.normal(size=p - 1)
        assert np.linalg.norm(G @ v) <= bound * np.linalg.norm(v) + 1e-12


def test_grid_point_count_half_circle():
    g = sp.make_grid(2, 0.1)
    assert g.n_points >= int(np.ceil(np.pi / 0.1))
    assert np.all(g.points[:, 0] >= 0)
    assert np.allclose(np.linalg.norm(g.points, axis=1), 1.0)


def test_grid_covering_radius():
    for p in (2, 3, 4):
        tau = 0.25
        g = sp.make_grid(p, tau)
        rng = np.random.default_rng(7)
        v = rng.normal(size=(10_000, p))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        v[:, 0] = np.abs(v[:, 0])
        d2 = ((v[:, None, :] - g.points[None]) ** 2).sum(-1)
        assert np.sqrt(d2.min(axis=1)).max() <= tau


def test_grid_halving_tau_quadruples_points_p3():
    n_fine = sp.make_grid(3, 0.2).n_points
    n_coarse = sp.make_grid(3, 0.4).n_points
    assert n_fine == pytest.approx(4 * n_coarse, rel=0.3)


def test_grid_budget_exceeded():
    with pytest.raises(ResourceError):
        sp.make_grid(5, 0.002, max_points=10_000)


def test_grid_tau_validation():
    with pytest.raises(ConfigurationError):
        sp.make_grid(3, 0.0)
    with pytest.raises(ConfigurationError):
        sp.make_grid(3, 1.5)


def test_clamp_angles_stays_inside():
    p = 4
    lo, hi = sp.angle_box(p)
    wild = np.array([10.0, -10.0, 0.1])
    clamped = sp.clamp_angles(wild, p)
    assert np.all(clamped > lo) and np.all(clamped < hi)
