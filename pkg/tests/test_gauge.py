import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mnlslab import spectral
from mnlslab.evolve import covariant_gradient, magnetic_hamiltonian
from mnlslab.gauge import (KATO_THRESHOLD_3D, ConditionEntry, ConditionReport, audit,
                           coulomb_project, curvature, kato_norm, leray_project, make_potential)
from mnlslab.grid import Grid

G16 = Grid(16, 4.0)


@pytest.mark.parametrize("family,params", [
    ("zero", {}), ("uniform_B", {"B0": 2.0}),
    ("smooth_decay", {"amplitude": 0.2, "epsilon": 0.5, "core": 1.5}),
    ("radial_A0", {"amplitude": 0.3, "power": 3.0}),
])
def test_analytic_families_are_coulomb(family, params):
    gp = make_potential(family, params, G16)
    assert np.max(np.abs(gp.divergence())) <= 1e-12
    assert coulomb_project(gp) is gp


def test_analytic_gradients_match_differences():
    g = Grid(64, 8.0)
    gp = make_potential("smooth_decay", {"amplitude": 0.2, "core": 2.0}, g)
    # A is not periodic; centred differences in the interior
    num = np.stack([np.stack(np.gradient(gp.A[k], g.spacing)) for k in range(3)], axis=1)
    inner = g.radius < 6
    assert np.max(np.abs(num - gp.grad_A)[:, :, inner]) < 0.02 * np.max(np.abs(gp.grad_A))


def test_bad_parameters_raise():
    with pytest.raises(ValueError, match="unknown gauge family"):
        make_potential("monopole", {}, G16)
    with pytest.raises(ValueError, match="unknown parameters"):
        make_potential("uniform_B", {"B1": 1.0}, G16)
    with pytest.raises(ValueError, match="epsilon"):
        make_potential("smooth_decay", {"epsilon": 0.0}, G16)
    with pytest.raises(ValueError):
        make_potential("sampled", {"A": np.zeros((3, 4, 4, 4))}, G16)


def test_uniform_B_curvature():
    gp = make_potential("uniform_B", {"B0": 1.5}, G16)
    cf = curvature(gp)
    np.testing.assert_allclose(cf.curl[2], 1.5)
    np.testing.assert_allclose(cf.curl[:2], 0.0, atol=1e-15)
    np.testing.assert_allclose(cf.dA_magnitude, 1.5)
    # B_tau is tangential
    assert np.max(np.abs(np.einsum("k...,k...->...", G16.unit_radial, cf.B_tau))) < 1e-12


def test_leray_kills_gradients():
    phi = np.exp(-G16.radius**2) * (1 + G16.coords[0])
    phi -= phi.mean()
    A = spectral.spectral_gradient(G16, phi)
    assert np.max(np.abs(leray_project(G16, A))) <= 1e-10 * np.max(np.abs(A))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_leray_output_is_divergence_free(seed):
    A = np.random.default_rng(seed).standard_normal((3,) + G16.shape)
    P = leray_project(G16, A)
    assert np.max(np.abs(spectral.divergence(G16, P))) <= 1e-10 * np.max(np.abs(A))
    np.testing.assert_allclose(leray_project(G16, P), P, atol=1e-12)


def test_sampled_potential_is_projected():
    rng = np.random.default_rng(2)
    A = spectral.dealias(G16, rng.standard_normal((3,) + G16.shape))
    gp = coulomb_project(make_potential("sampled", {"A": A, "A0": np.zeros(G16.shape)}, G16))
    assert not gp.analytic
    assert np.max(np.abs(gp.divergence())) <= 1e-10 * np.max(np.abs(gp.grad_A))


def test_gauge_covariance_of_the_hamiltonian():
    g = Grid(32, 8.0)
    gp = make_potential("smooth_decay", {"amplitude": 0.2, "core": 2.0}, g)
    u = spectral.dealias(g, np.exp(-g.radius**2 / 4 + 0.3j * g.coords[1]))
    phi = 0.3 * np.exp(-g.radius**2 / 8)
    shifted = gp.gauge_shift(phi)
    # D' (e^{-iφ} u) = e^{-iφ} D u
    lhs = covariant_gradient(g, shifted, np.exp(-1j * phi) * u)
    rhs = np.exp(-1j * phi) * covariant_gradient(g, gp, u)
    assert np.max(np.abs(lhs - rhs)) < 1e-6
    h1 = magnetic_hamiltonian(g, shifted, np.exp(-1j * phi) * u)
    h0 = np.exp(-1j * phi) * magnetic_hamiltonian(g, gp, u)
    assert np.max(np.abs(h1 - h0)) < 1e-5


def test_kato_threshold_and_ball():
    assert KATO_THRESHOLD_3D == pytest.approx(math.pi, abs=1e-12)
    g = Grid(64, 4.0)
    R = 2.0
    assert kato_norm(g, (g.radius <= R).astype(float)) == pytest.approx(
        2 * math.pi * R**2, rel=0.01)
    assert kato_norm(g, np.zeros(g.shape)) == 0.0


def test_audit_zero_potential_all_pass():
    rep = audit(make_potential("zero", {}, Grid(32, 8.0)))
    assert rep.passed
    assert all(e.passed is not False for e in rep.entries)
    assert rep.to_csv().splitlines()[0] == "condition,value,threshold,pass,caveat"


def test_audit_uniform_B_fails_latest():
    rep = audit(make_potential("uniform_B", {}, Grid(32, 8.0)))
    assert not rep.passed
    assert rep["latest"].passed is False
    s = rep["latest"].series
    assert all(b >= 1.9 * a for a, b in zip(s[:-1], s[1:]))
    assert "FAIL" in rep.to_text()


def test_audit_rejects_bad_parameters():
    gp = make_potential("zero", {}, Grid(32, 8.0))
    with pytest.raises(ValueError):
        audit(gp, M=0.0)
    with pytest.raises(ValueError):
        audit(gp, b=1.0)


def test_approximate_entries_never_drive_the_verdict():
    rep = ConditionReport(1.0, 0.75, [
        ConditionEntry("a", 1.0, 0.5, False, approximate=True),
        ConditionEntry("b", 1.0, "bounded", None),
        ConditionEntry("c", 0.1, 0.5, True),
    ])
    assert rep.passed
    rep.entries.append(ConditionEntry("d", 1.0, 0.5, False))
    assert not rep.passed
    with pytest.raises(KeyError):
        rep["missing"]
