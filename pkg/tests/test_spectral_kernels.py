import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mnlslab import spectral
from mnlslab.grid import Grid
from mnlslab.kernels import (BoundaryMassWarning, CELL_AVERAGE_INV_R, LATTICE_INV_R,
                             check_boundary_mass, eta_apply, eta_convolve, eta_pairing,
                             riesz_center, riesz_convolve, x_operator)
from mnlslab.oracles import direct_eta_pairing, direct_riesz, direct_x
from mnlslab.quadrature import integrate

G8 = Grid(8, 2.0)


def test_spectral_derivative_of_periodic_mode():
    g = Grid(16, math.pi)
    x = g.coords[0]
    f = np.sin(2 * x)
    np.testing.assert_allclose(spectral.partial(g, f, 0), 2 * np.cos(2 * x), atol=1e-12)
    np.testing.assert_allclose(spectral.laplacian(g, f), -4 * f, atol=1e-11)


def test_laplacian_of_gaussian():
    g = Grid(32, 8.0)
    r2 = g.radius**2
    f = np.exp(-r2 / 4)
    np.testing.assert_allclose(spectral.laplacian(g, f), (r2 / 4 - 1.5) * f, atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dealias_is_a_projector(seed):
    f = np.random.default_rng(seed).standard_normal(G8.shape)
    once = spectral.dealias(G8, f)
    np.testing.assert_allclose(spectral.dealias(G8, once), once, atol=1e-14)
    assert np.sum(once**2) <= np.sum(f**2) + 1e-12


def test_fractional_powers_compose():
    g = Grid(16, 4.0)
    f = np.exp(-g.radius**2) * g.coords[0]
    back = spectral.fractional_gradient_power(g, spectral.fractional_gradient_power(g, f, 0.5), -0.5)
    np.testing.assert_allclose(back, f, atol=1e-10)


def test_half_derivative_norm_nonnegative():
    g = Grid(16, 4.0)
    u = np.exp(-g.radius**2 + 1j * g.coords[1])
    assert spectral.half_derivative_norm2(g, u) > 0


def test_riesz_centre_rules():
    assert riesz_center(0.5, "lattice") == LATTICE_INV_R / 0.5
    assert riesz_center(0.5, "cell_average") == CELL_AVERAGE_INV_R / 0.5
    with pytest.raises(ValueError):
        riesz_center(0.5, "bogus")


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["lattice", "cell_average"]))
def test_convolutions_match_pairwise_sums(seed, rule):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(G8.shape)
    F = rng.standard_normal((3, 3) + G8.shape)
    np.testing.assert_allclose(riesz_convolve(G8, f, rule), direct_riesz(G8, f, rule),
                               rtol=1e-10, atol=1e-10 * np.abs(f).sum())
    np.testing.assert_allclose(x_operator(G8, f, rule), direct_x(G8, f, rule),
                               rtol=1e-10, atol=1e-10 * np.abs(f).sum())
    assert eta_pairing(G8, F, f, rule) == pytest.approx(direct_eta_pairing(G8, F, f, rule),
                                                        rel=1e-10)


def test_complex_input_is_linear():
    rng = np.random.default_rng(3)
    a, b = rng.standard_normal((2,) + G8.shape)
    np.testing.assert_allclose(riesz_convolve(G8, a + 1j * b),
                               riesz_convolve(G8, a) + 1j * riesz_convolve(G8, b), atol=1e-13)


def test_point_mass_gives_inverse_distance():
    g = Grid(64, 8.0)
    f = np.zeros(g.shape)
    idx = (30, 33, 31)
    f[idx] = 1.0 / g.cell_volume
    x0 = g.coords[(slice(None),) + idx]
    d = np.sqrt(np.sum((g.coords - x0[:, None, None, None]) ** 2, axis=0))
    far = d >= 4 * g.spacing
    out = riesz_convolve(g, f)
    assert np.max(np.abs(out * d - 1)[far]) <= 0.02
    X = x_operator(g, f)
    unit = (g.coords - x0[:, None, None, None]) / np.where(d > 0, d, 1.0)
    np.testing.assert_allclose(X[:, far], unit[:, far], atol=1e-12)


def test_eta_symmetric_and_trace():
    g = Grid(16, 4.0)
    rho = np.exp(-g.radius**2)
    E = eta_convolve(g, rho)
    np.testing.assert_allclose(E, np.swapaxes(E, 0, 1), atol=1e-14)
    # Σ_j η_jj = 2/|x|
    np.testing.assert_allclose(np.trace(E), 2 * riesz_convolve(g, rho), rtol=1e-10, atol=1e-12)


def test_eta_is_positive_on_smooth_fields():
    g = Grid(16, 4.0)
    rng = np.random.default_rng(5)
    env = np.exp(-g.radius**2 / 4)
    for _ in range(5):
        v = np.stack([spectral.dealias(g, env * rng.standard_normal(g.shape)) for _ in range(3)])
        q = float(integrate(g, np.sum(v * eta_apply(g, v), axis=0)))
        assert q >= -1e-10 * float(integrate(g, np.sum(v**2, axis=0)))


def test_gradient_of_x_operator_is_eta():
    # X rho is not periodic, so differentiate with centred differences
    g = Grid(32, 8.0)
    rho = np.exp(-g.radius**2 / 2)
    X = x_operator(g, rho)
    E = eta_convolve(g, rho)
    inner = g.radius < 4
    for j in range(3):
        for k in range(3):
            dk = np.gradient(X[j], g.spacing, axis=k)
            assert np.max(np.abs(dk - E[j, k])[inner]) < 0.05 * np.max(np.abs(E))


def test_boundary_warning():
    g = Grid(8, 1.0)
    with pytest.warns(BoundaryMassWarning):
        check_boundary_mass(g, np.ones(g.shape))
    with warnings.catch_warnings():
        warnings.simplefilter("error", BoundaryMassWarning)
        g2 = Grid(32, 8.0)
        check_boundary_mass(g2, np.exp(-g2.radius**2))
