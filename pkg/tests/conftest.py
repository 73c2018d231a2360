import numpy as np
import pytest

from wavesieve import (EstimatorConfig, LinkSpec, ModelSpec, make_basis,
                       simulate, truncate)
from wavesieve.wavelet import basis_matrix


@pytest.fixture(scope="session")
def basis17():
    return make_basis(17, 1.0, 12)


@pytest.fixture(scope="session")
def basis34():
    return make_basis(34, 1.0, 12)


@pytest.fixture(scope="session")
def sin_coeffs(basis17):
    """Coefficients of a smooth generator link inside the identifiable span."""
    t = np.linspace(-1.0, 1.0, 4001)
    B = basis_matrix(basis17, t)
    coeffs, *_ = np.linalg.lstsq(B, np.sin(1.5 * t), rcond=1e-3)
    return coeffs


@pytest.fixture(scope="session")
def sin_coeffs34(basis34):
    t = np.linspace(-1.0, 1.0, 4001)
    B = basis_matrix(basis34, t)
    coeffs, *_ = np.linalg.lstsq(B, np.sin(1.5 * t), rcond=1e-3)
    return coeffs


def make_spec(basis, coeffs, theta, sigma=0.1, **kw):
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    theta = theta / np.linalg.norm(theta, axis=1, keepdims=True)
    links = tuple(LinkSpec(coeffs=coeffs, basis=basis) for _ in range(theta.shape[0]))
    return ModelSpec(p=theta.shape[1], theta_star=theta, links=links,
                     noise_sigma=sigma, design_radius=1.2 * basis.s_X, **kw)


@pytest.fixture()
def small_data(basis17, sin_coeffs):
    spec = make_spec(basis17, sin_coeffs, [0.8, 0.6], sigma=0.05)
    return truncate(simulate(spec, 400, 42), 1.0)


@pytest.fixture()
def small_spec(basis17, sin_coeffs):
    return make_spec(basis17, sin_coeffs, [0.8, 0.6], sigma=0.05)


@pytest.fixture()
def default_config():
    return EstimatorConfig(m=17, tau=0.1, tol=1e-9)
