"""Virial and interaction Morawetz diagnostics.

Kernel conventions follow ``kernels``: ``X f = ∫ (x-y)/|x-y| f(y) dy`` and
``∂_k X^j f = η_jk * f`` with ``η_jk(z) = (δ_jk |z|² - z_j z_k)/|z|³``.  With
``ρ = |u|²/2`` and ``p_j = Im(ū D_j u)`` the interaction functional
``M = 4 <Xρ, p>`` satisfies ``dM/dt = P1 + P2 + P3k + P4 + P5`` where

* ``P1 = 4 <∂_jρ ∂_kρ / ρ | η_jk * ρ>``
* ``P2 = 4 <p_j p_k / ρ | η_jk * ρ> - 4 <p_j | η_jk * p_k>``, which equals the
  double integral ``2 ∬ J_j J_k η_jk`` of the two-point momentum
  ``J(x,y) = sqrt(ρ(y)/ρ(x)) p(x) - sqrt(ρ(x)/ρ(y)) p(y)``
* ``P3k = 8 <-Δρ | ρ * 1/|x|>``, the kernel form of ``P3 = 2 ∫ |u|⁴``
  (the two differ by the factor 4π of the unnormalized kernel)
* ``P4 = 8 <μ G(|u|²) | ρ * 1/|x|>``
* ``P5 = 8 <(Xρ)_j | F_0j T00 + F_kj Tk0>``
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import spectral
from .evolve import NonlinearitySpec, Trajectory, covariant_gradient
from .gauge import GaugePotential, curvature
from .grid import Grid
from .kernels import eta_apply, eta_convolve, riesz_convolve, x_operator
from .quadrature import integrate, simpson_weights
from .stress import RHO_FLOOR, StressTensor, lorentz_source, stress_tensor


@dataclass(frozen=True)
class MorawetzWeight:
    """Smoothed distance weight ``a(x) = sqrt(|x - c|² + ε²)``."""

    epsilon: float
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @classmethod
    def cells(cls, grid: Grid, n_cells: float = 4.0, center=(0.0, 0.0, 0.0)):
        return cls(n_cells * grid.spacing, tuple(center))

    def _x(self, grid):
        return grid.coords - np.asarray(self.center, dtype=float)[:, None, None, None]

    def value(self, grid):
        x = self._x(grid)
        return np.sqrt(np.sum(x**2, axis=0) + self.epsilon**2)

    def gradient(self, grid):
        return self._x(grid) / self.value(grid)

    def hessian(self, grid):
        x = self._x(grid)
        a = self.value(grid)
        eye = np.eye(3)[:, :, None, None, None]
        return eye / a - x[:, None] * x[None] / a**3

    def laplacian(self, grid):
        a = self.value(grid)
        return 2.0 / a + self.epsilon**2 / a**3

    def bilaplacian(self, grid):
        a = self.value(grid)
        return -15.0 * self.epsilon**4 / a**7


def morawetz_action(u, gp: GaugePotential | None, w: MorawetzWeight,
                    grid: Grid | None = None) -> float:
    """``M_a = ∫ ∂_j a Tj0``."""
    grid = grid or gp.grid
    Du = covariant_gradient(grid, gp, u)
    p = np.imag(np.conj(u)[None] * Du)
    return float(integrate(grid, np.sum(w.gradient(grid) * p, axis=0)))


class VirialTerms(NamedTuple):
    hessian: float
    bilaplacian: float
    nonlinear: float
    lorentz: float

    @property
    def total(self):
        return self.hessian + self.bilaplacian + self.nonlinear + self.lorentz


def virial_density_terms(u, gp, nl: NonlinearitySpec, w: MorawetzWeight,
                         grid: Grid | None = None) -> VirialTerms:
    """Spatial integrals of the four right-hand-side terms of the virial identity."""
    grid = grid or gp.grid
    T = stress_tensor(u, gp, nl, grid)
    hess = w.hessian(grid)
    re_dd = 0.5 * T.sigma  # Re(D_j u conj(D_k u))
    t1 = 2.0 * integrate(grid, np.einsum("jk...,jk...->...", hess, re_dd))
    t2 = -0.5 * integrate(grid, w.bilaplacian(grid) * np.abs(u) ** 2)
    t3 = 0.0
    if nl.mu != 0:
        t3 = nl.mu * integrate(grid, w.laplacian(grid) * nl.G(np.abs(u) ** 2))
    t4 = integrate(grid, np.sum(w.gradient(grid) * lorentz_source(T, gp), axis=0))
    return VirialTerms(float(t1), float(t2), float(t3), float(t4))


@dataclass
class VirialReport:
    lhs: float
    rhs: float
    terms: VirialTerms  # time integrals of each term
    actions: np.ndarray
    times: np.ndarray
    positive_part: float  # time integral without the Lorentz term

    @property
    def mismatch(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), *(abs(t) for t in self.terms))

    @property
    def relative_mismatch(self) -> float:
        s = self.scale
        return self.mismatch / s if s > 0 else 0.0


def virial_check(traj: Trajectory, w: MorawetzWeight) -> VirialReport:
    """Compare ``M_a(T) - M_a(0)`` with the Simpson time integral of the virial density."""
    grid, gp, nl = traj.grid, traj.gp, traj.nl
    times = np.asarray(traj.times)
    actions = np.array([morawetz_action(u, gp, w, grid) for u in traj.states])
    per_snap = np.array([virial_density_terms(u, gp, nl, w, grid) for u in traj.states])
    wts = simpson_weights(len(times), traj.stride)
    integrated = VirialTerms(*(float(np.dot(wts, per_snap[:, i])) for i in range(4)))
    lhs = float(actions[-1] - actions[0])
    positive = integrated.hessian + integrated.bilaplacian + integrated.nonlinear
    return VirialReport(lhs, integrated.total, integrated, actions, times, positive)


def interaction_action(u, gp: GaugePotential | None = None, grid: Grid | None = None,
                       nl: NonlinearitySpec | None = None) -> float:
    """``M = 4 Σ_j <(Xρ)_j, p_j>``."""
    grid = grid or gp.grid
    T = stress_tensor(u, gp, nl or NonlinearitySpec(0, 1.0), grid)
    Xr = x_operator(grid, T.T00)
    return float(4.0 * integrate(grid, np.sum(Xr * T.Tj0, axis=0)))


@dataclass(frozen=True)
class PTerms:
    P1: float
    P2: float
    P3: float
    P4: float
    P5: float
    P3_kernel: float
    M: float
    scale: float
    rho_floor: float
    P2_parts: tuple = field(default=(0.0, 0.0))

    @property
    def values(self):
        return (self.P1, self.P2, self.P3, self.P4, self.P5)

    @property
    def derivative_sum(self) -> float:
        """``P1 + P2 + P3k + P4 + P5``, the kernel-consistent value of ``dM/dt``."""
        return self.P1 + self.P2 + self.P3_kernel + self.P4 + self.P5

    @property
    def B(self) -> float:
        """``∬ (x-y)_j/|x-y| F_αj T_α0(x) |u(y)|² dx dy``, equal to P5/4."""
        return 0.25 * self.P5


def p_terms(u, gp: GaugePotential | None, nl: NonlinearitySpec, grid: Grid | None = None,
            floor: float = RHO_FLOOR, T: StressTensor | None = None) -> PTerms:
    grid = grid or gp.grid
    T = T or stress_tensor(u, gp, nl, grid)
    rho, p, drho = T.T00, T.Tj0, T.grad_rho
    if not rho.any():
        return PTerms(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    rf = T.rho_floored(floor)
    ip = lambda f: float(integrate(grid, f))  # noqa: E731

    eta_rho = eta_convolve(grid, rho)
    eta_rf = eta_rho if np.array_equal(rf, rho) else eta_convolve(grid, rf)
    K_rho = riesz_convolve(grid, rho)
    X_rho = x_operator(grid, rho)

    P1 = 4.0 * ip(np.einsum("j...,k...,jk...->...", drho, drho, eta_rho) / rf)
    a = 4.0 * ip(np.einsum("j...,k...,jk...->...", p, p, eta_rf) / rf)
    b = 4.0 * ip(np.sum(p * eta_apply(grid, p), axis=0))
    P2 = a - b
    P3 = 2.0 * ip(np.abs(u) ** 4)
    P3k = 8.0 * ip(-spectral.laplacian(grid, rho) * K_rho)
    P4 = 8.0 * ip(nl.mu * nl.G(np.abs(u) ** 2) * K_rho) if nl.mu != 0 else 0.0
    P5 = 0.0
    if gp is not None and not gp.is_free:
        P5 = 4.0 * ip(np.sum(X_rho * lorentz_source(T, gp), axis=0))
    M = 4.0 * ip(np.sum(X_rho * p, axis=0))
    scale = abs(P1) + abs(a) + abs(b) + abs(P3k) + abs(P4) + abs(P5)
    return PTerms(P1, P2, P3, P4, P5, P3k, M, scale, floor * float(rho.max()), (a, b))


def B_functional(u, gp: GaugePotential, nl: NonlinearitySpec, grid: Grid | None = None) -> float:
    """``∬ (x-y)_j/|x-y| F_αj T_α0(x) |u(y)|²`` assembled directly."""
    grid = grid or gp.grid
    T = stress_tensor(u, gp, nl, grid)
    X_u2 = x_operator(grid, np.abs(u) ** 2)
    return float(integrate(grid, np.sum(X_u2 * 0.5 * lorentz_source(T, gp), axis=0)))


@dataclass
class MorawetzReport:
    times: np.ndarray
    M_a: np.ndarray
    M: np.ndarray
    P: np.ndarray  # rows (P1, P2, P3, P4, P5) per snapshot
    P3_kernel: np.ndarray
    scales: np.ndarray
    virial_lhs: np.ndarray
    virial_rhs: np.ndarray
    thm1_ratio: np.ndarray
    inequality_lhs: float  # ∫ (P3k + P5) dt
    inequality_rhs: float  # M(T) - M(0)
    inequality_margin: float
    ratio_T: float
    ratio_2T: float | None
    rho_floor: float
    epsilon: float
    proxy: str = "|∇|^(1/2) in place of (-Δ_A)^(1/4)"
    caveats: list = field(default_factory=list)

    @property
    def inequality_holds(self) -> bool:
        scale = max(1.0, float(self.scales.max()) if self.scales.size else 1.0)
        return self.inequality_margin >= -1e-8 * scale

    def rows(self):
        cols = []
        for i, t in enumerate(self.times):
            cols.append({
                "t": t, "M_a": self.M_a[i], "M_interaction": self.M[i],
                "P1": self.P[i, 0], "P2": self.P[i, 1], "P3": self.P[i, 2],
                "P4": self.P[i, 3], "P5": self.P[i, 4],
                "virial_lhs": self.virial_lhs[i], "virial_rhs": self.virial_rhs[i],
                "thm1_ratio": self.thm1_ratio[i],
            })
        return cols


MORAWETZ_COLUMNS = ("t", "M_a", "M_interaction", "P1", "P2", "P3", "P4", "P5",
                    "virial_lhs", "virial_rhs", "thm1_ratio")


def _cumulative(values, step):
    """Cumulative positive-weight quadrature ``∫_0^{t_k}`` at every node."""
    out = np.zeros(len(values))
    for k in range(1, len(values)):
        out[k] = float(np.dot(simpson_weights(k + 1, step), values[: k + 1]))
    return out


def spacetime_l4_ratio(traj: Trajectory, upto: int | None = None) -> float:
    """``∫_0^T ‖u‖⁴_4 dt / (mass(0) sup_t ‖|∇|^{1/2} u‖²)`` over the first ``upto`` snapshots."""
    grid = traj.grid
    states = traj.states[:upto] if upto else traj.states
    q = np.array([float(integrate(grid, np.abs(u) ** 4)) for u in states])
    num = float(np.dot(simpson_weights(len(q), traj.stride), q))
    m0 = float(integrate(grid, np.abs(states[0]) ** 2))
    den = m0 * max(spectral.half_derivative_norm2(grid, u) for u in states)
    return num / den if den > 0 else 0.0


def interaction_inequality_check(traj: Trajectory, epsilon_cells: float = 4.0,
                                 half_horizon: bool = True) -> MorawetzReport:
    """P-terms, actions and the space-time L4 ratio along a defocusing trajectory.

    ``half_horizon`` reports the ratio over the first half of the run as
    ``ratio_T`` and over the whole run as ``ratio_2T``.
    """
    grid, gp, nl = traj.grid, traj.gp, traj.nl
    if nl.mu < 0:
        raise ValueError("the interaction inequality is stated for defocusing runs only")
    n = len(traj)
    w = MorawetzWeight.cells(grid, epsilon_cells)
    P = np.zeros((n, 5))
    P3k, scales, M, Ma = (np.zeros(n) for _ in range(4))
    virial_rate = np.zeros(n)
    floor = 0.0
    q = np.zeros(n)
    h12 = np.zeros(n)
    for i, u in enumerate(traj.states):
        pt = p_terms(u, gp, nl, grid)
        P[i] = pt.values
        P3k[i], scales[i], M[i] = pt.P3_kernel, pt.scale, pt.M
        floor = max(floor, pt.rho_floor)
        Ma[i] = morawetz_action(u, gp, w, grid)
        virial_rate[i] = virial_density_terms(u, gp, nl, w, grid).total
        q[i] = float(integrate(grid, np.abs(u) ** 4))
        h12[i] = spectral.half_derivative_norm2(grid, u)
    step = traj.stride
    vrhs = _cumulative(virial_rate, step)
    vlhs = Ma - Ma[0]
    m0 = float(integrate(grid, np.abs(traj.states[0]) ** 2))
    sup_h = np.maximum.accumulate(h12)
    num = _cumulative(q, step)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(sup_h > 0, num / (m0 * sup_h), 0.0)
    ineq_lhs = float(np.dot(simpson_weights(n, step), P3k + P[:, 4]))
    ineq_rhs = float(M[-1] - M[0])
    caveats = []
    if half_horizon and (n - 1) % 2 == 0 and n >= 3:
        ratio_T, ratio_2T = float(ratio[(n - 1) // 2]), float(ratio[-1])
    else:
        ratio_T, ratio_2T = float(ratio[-1]), None
    return MorawetzReport(
        np.asarray(traj.times), Ma, M, P, P3k, scales, vlhs, vrhs, ratio,
        ineq_lhs, ineq_rhs, ineq_rhs - ineq_lhs, ratio_T, ratio_2T, floor,
        w.epsilon, caveats=caveats,
    )


@dataclass
class SignDemo:
    y_plus: np.ndarray
    y_minus: np.ndarray
    value_plus: float
    value_minus: float
    direction: np.ndarray  # the vector v with integrand = -e · v along e = (x0 - y)/|x0 - y|


def _curvature_at(gp: GaugePotential, x0):
    """curl A and ∇A0 at a point (exact for analytic families, nearest node otherwise)."""
    grid = gp.grid
    x0 = np.asarray(x0, dtype=float)
    fam, prm = gp.family, gp.params
    if fam == "zero":
        return np.zeros(3), np.zeros(3)
    if fam == "uniform_B":
        return np.array([0.0, 0.0, prm["B0"]]), np.zeros(3)
    if fam == "smooth_decay":
        c, e, ell = prm["amplitude"], prm["epsilon"], prm["core"]
        r2 = float(x0 @ x0)
        base = 1 + r2 / ell**2
        s = c * base ** (-(2 + e) / 2)
        q = -(2 + e) / ell**2 * c * base ** (-(2 + e) / 2 - 1)
        # curl of s(r)(-x2, x1, 0)
        curl = np.array([-q * x0[0] * x0[2], -q * x0[1] * x0[2],
                         2 * s + q * (x0[0] ** 2 + x0[1] ** 2)])
        return curl, np.zeros(3)
    if fam == "radial_A0":
        c, e, ell = prm["amplitude"], prm["epsilon"], prm["core"]
        power = prm.get("power", 2 + e)
        base = 1 + float(x0 @ x0) / ell**2
        return np.zeros(3), -power / ell**2 * c * base ** (-power / 2 - 1) * x0
    idx = tuple(int(np.argmin(np.abs(grid.nodes - v))) for v in x0)
    cf = curvature(gp)
    return cf.curl[(slice(None),) + idx], gp.grad_A0[(slice(None),) + idx]


def appendix_sign_demo(gp: GaugePotential, p_vec, x0, rho_x0: float = 1.0,
                       radius: float = 1.0) -> SignDemo:
    """Points ``y`` on a sphere about ``x0`` where the Lorentz integrand changes sign.

    With ``a = |x - y|`` and ``e = ∇_x a = (x0 - y)/|x0 - y|`` the integrand
    ``-curl A · (e × p) - e · ∇A0 |u(x0)|²`` equals ``-e · v`` with
    ``v = p × curl A + |u(x0)|² ∇A0``; it is maximal (value |v|) at ``e = -v/|v|``
    and minimal (value -|v|) at the antipode.
    """
    curl, grad0 = _curvature_at(gp, x0)
    p = np.asarray(p_vec, dtype=float)
    v = np.cross(p, curl) + rho_x0 * grad0
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        raise ValueError("integrand identically zero: no curvature acts on p at x0")
    x0 = np.asarray(x0, dtype=float)
    vhat = v / nv
    # e = -v/|v| gives the maximum; y = x0 - radius * e.
    y_plus = x0 + radius * vhat
    y_minus = x0 - radius * vhat

    def integrand(y):
        e = (x0 - y) / np.linalg.norm(x0 - y)
        return float(-curl @ np.cross(e, p) - rho_x0 * (e @ grad0))

    vp, vm = integrand(y_plus), integrand(y_minus)
    if not (vp > 0 > vm):
        warnings.warn("sign demo did not separate signs", RuntimeWarning)
    return SignDemo(y_plus, y_minus, vp, vm, v)
