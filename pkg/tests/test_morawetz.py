
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mnlslab.evolve import NonlinearitySpec, evolve
from mnlslab.gauge import make_potential
from mnlslab.grid import Grid
from mnlslab.morawetz import (MORAWETZ_COLUMNS, MorawetzWeight, B_functional,
                              appendix_sign_demo, interaction_action,
                              interaction_inequality_check, p_terms,
                              spacetime_l4_ratio, virial_check)
from mnlslab.oracles import direct_p_terms
from mnlslab.quadrature import integrate
from mnlslab.selftest import smooth_random_state

G16 = Grid(16, 4.0)
CUBIC = NonlinearitySpec(1, 1.0)


def test_weight_validation():
    with pytest.raises(ValueError):
        MorawetzWeight(0.0)
    assert MorawetzWeight.cells(G16, 4).epsilon == pytest.approx(4 * G16.spacing)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 3.0))
def test_weight_hessian_is_positive_semidefinite(eps):
    w = MorawetzWeight(eps)
    H = np.moveaxis(w.hessian(G16), (0, 1), (-2, -1))
    assert np.linalg.eigvalsh(H).min() >= -1e-12


def _radial_laplacian(f, r):
    d1 = np.gradient(f, r, edge_order=2)
    return np.gradient(d1, r, edge_order=2) + 2 * d1 / r


@pytest.mark.parametrize("eps", [0.3, 1.0])
def test_weight_closed_forms_match_radial_differences(eps):
    r = np.linspace(0.2, 6.0, 20001)
    a = np.sqrt(r**2 + eps**2)
    lap = _radial_laplacian(a, r)
    np.testing.assert_allclose(lap[5:-5], (2 / a + eps**2 / a**3)[5:-5], rtol=1e-6)
    lap2 = _radial_laplacian(2 / a + eps**2 / a**3, r)
    np.testing.assert_allclose(lap2[50:-50], (-15 * eps**4 / a**7)[50:-50], rtol=1e-4, atol=1e-8)


def test_weight_methods_agree_with_closed_forms():
    w = MorawetzWeight(0.7)
    a = w.value(G16)
    np.testing.assert_allclose(np.trace(w.hessian(G16)), w.laplacian(G16), rtol=1e-13)
    np.testing.assert_allclose(np.sum(w.gradient(G16) ** 2, axis=0), G16.radius**2 / a**2,
                               rtol=1e-13)


def test_p_terms_match_oracle_and_structure():
    g = Grid(8, 3.0)
    rng = np.random.default_rng(4)
    gp = make_potential("smooth_decay", {"amplitude": 0.3, "core": 1.0}, g)
    u = smooth_random_state(g, rng)
    pt = p_terms(u, gp, CUBIC, g)
    ref = direct_p_terms(u, gp, CUBIC, g)
    for k in ("P1", "P2", "P3", "P4", "P5", "P3_kernel", "M"):
        assert getattr(pt, k) == pytest.approx(ref[k], rel=1e-10, abs=1e-14)
    assert pt.P3 == pytest.approx(2 * float(integrate(g, np.abs(u) ** 4)), rel=1e-15)
    assert pt.B == pytest.approx(B_functional(u, gp, CUBIC, g), rel=1e-10)
    assert pt.M == pytest.approx(interaction_action(u, gp, g), rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 1.5))
def test_positive_p_terms(seed, amp):
    gp = make_potential("uniform_B", {"B0": 0.5}, G16)
    u = smooth_random_state(G16, np.random.default_rng(seed), amplitude=amp)
    pt = p_terms(u, gp, CUBIC, G16)
    for v in (pt.P1, pt.P2, pt.P4, pt.P3_kernel):
        assert v >= -1e-10 * pt.scale


def test_free_potential_has_no_lorentz_term():
    u = smooth_random_state(G16, np.random.default_rng(0))
    assert p_terms(u, make_potential("zero", {}, G16), CUBIC, G16).P5 == 0.0


def test_vacuum_state():
    pt = p_terms(np.zeros(G16.shape, complex), None, CUBIC, G16)
    assert pt.values == (0.0,) * 5


def test_virial_identity_small_run():
    g = Grid(32, 8.0)
    u0 = np.exp(-g.radius**2 / 2 + 0.3j * g.coords[0])
    traj = evolve(u0, make_potential("zero", {}, g), CUBIC, 0.4, stride=0.05, grid=g)
    rep = virial_check(traj, MorawetzWeight.cells(g, 4))
    assert rep.relative_mismatch < 0.01
    assert rep.lhs == pytest.approx(rep.actions[-1] - rep.actions[0])
    assert rep.positive_part >= 0


def test_inequality_report_shape_and_refusal():
    g = Grid(16, 4.0)
    u0 = 0.5 * np.exp(-g.radius**2 / 2)
    gp = make_potential("smooth_decay", {"amplitude": 0.1, "core": 2.0}, g)
    traj = evolve(u0, gp, CUBIC, 0.4, stride=0.05, grid=g)
    rep = interaction_inequality_check(traj)
    rows = rep.rows()
    assert len(rows) == len(traj) and tuple(rows[0]) == MORAWETZ_COLUMNS
    assert rep.inequality_holds
    assert rep.ratio_2T is not None and rep.ratio_2T == pytest.approx(spacetime_l4_ratio(traj))
    focusing = evolve(u0, gp, NonlinearitySpec(-1, 1.0), 0.1, stride=0.05, grid=g)
    with pytest.raises(ValueError, match="defocusing"):
        interaction_inequality_check(focusing)


def test_sign_demo_uniform_field():
    gp = make_potential("uniform_B", {"B0": 2.0}, G16)
    d = appendix_sign_demo(gp, [1.0, 0.0, 0.0], [0.0, 0.0, 0.0], radius=0.5)
    np.testing.assert_allclose(d.y_plus, [0.0, -0.5, 0.0], atol=1e-15)
    np.testing.assert_allclose(d.y_minus, [0.0, 0.5, 0.0], atol=1e-15)
    assert d.value_plus == pytest.approx(2.0, abs=1e-12)
    assert d.value_minus == pytest.approx(-2.0, abs=1e-12)


def test_sign_demo_zero_case_is_explicit():
    with pytest.raises(ValueError, match="identically zero"):
        appendix_sign_demo(make_potential("zero", {}, G16), [1, 0, 0], [0, 0, 0])
    # momentum parallel to the field gives no force either
    with pytest.raises(ValueError, match="identically zero"):
        appendix_sign_demo(make_potential("uniform_B", {}, G16), [0, 0, 1], [0, 0, 0])
