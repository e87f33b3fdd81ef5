import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mnlslab.grid import Grid
from mnlslab.quadrature import (dyadic_annulus_sup, dyadic_range, integrate, lp_norm,
                                radial_profile, simpson_weights, tree_sum)


def test_grid_rejects_bad_sizes():
    for n in (4, 12, 0):
        with pytest.raises(ValueError):
            Grid(n, 1.0)
    with pytest.raises(ValueError):
        Grid(8, -1.0)
    with pytest.raises(ValueError):
        Grid(8, 1.0, dim=2)


def test_nodes_avoid_origin_and_are_symmetric():
    g = Grid(16, 2.0)
    assert g.radius.min() == pytest.approx(math.sqrt(3) * g.spacing / 2)
    np.testing.assert_allclose(g.nodes, -g.nodes[::-1])


def test_nyquist_symbol_zeroed():
    g = Grid(8, 1.0)
    ik = g.derivative_symbols
    assert ik.shape == (3,) + g.shape
    assert np.all(ik[0][g.n // 2] == 0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=0, max_size=300))
def test_tree_sum_matches_fsum(xs):
    assert tree_sum(np.array(xs, dtype=float)) == pytest.approx(math.fsum(xs), abs=1e-6)


def test_tree_sum_is_reproducible():
    x = np.random.default_rng(0).standard_normal(10_001)
    assert tree_sum(x) == tree_sum(x.copy())


def test_gaussian_integral():
    g = Grid(32, 8.0)
    assert integrate(g, np.exp(-g.radius**2)) == pytest.approx(math.pi**1.5, rel=1e-12)


@given(st.integers(2, 40), st.floats(0.01, 2.0))
def test_simpson_weights_positive_and_exact_for_quadratics(n, h):
    w = simpson_weights(n, h)
    assert np.all(w > 0)
    t = np.arange(n) * h
    T = t[-1]
    assert w.sum() == pytest.approx(T, rel=1e-12)
    if n >= 3:
        assert w @ t**2 == pytest.approx(T**3 / 3, rel=1e-12)


def test_lp_norm_inf():
    g = Grid(8, 1.0)
    f = np.zeros(g.shape)
    f[1, 2, 3] = -4.0
    assert lp_norm(g, f, math.inf) == 4.0


def test_radial_profile_of_constant_is_shell_volume():
    g = Grid(32, 4.0)
    prof = radial_profile(g, np.ones(g.shape))
    assert prof.complete.any()
    # complete shells carry roughly the analytic shell volumes
    k = np.flatnonzero(prof.complete)[2]
    w = prof.shell_width
    vol = 4 * math.pi / 3 * (((k + 1) * w) ** 3 - (k * w) ** 3)
    assert np.real(prof.integral[k]) == pytest.approx(vol, rel=0.1)


def test_dyadic_annuli_inside_box():
    g = Grid(64, 16.0)
    js = dyadic_range(g)
    assert len(js) >= 3
    assert all(2.0 ** (j + 1) <= g.half_length for j in js)
    s = dyadic_annulus_sup(g, g.radius, js[-1])
    assert not s.empty and s.value <= 2.0 ** (js[-1] + 1) + 1e-12
