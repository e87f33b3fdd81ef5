"""Spacetime norms, smoothing functionals, Strichartz quotients and the scattering monitor."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .evolve import Trajectory, covariant_gradient, linear_propagate
from .gauge import GaugePotential
from .grid import Grid
from .kernels import boundary_mass_fraction
from .quadrature import integrate, l2_norm, lp_norm, radial_profile, simpson_weights


@dataclass(frozen=True)
class NormSpec:
    """Exponents of ``L^q_t L^r_x``; ``math.inf`` is allowed for either."""

    q: float
    r: float

    @property
    def scaling_defect(self) -> float:
        """``2/q + 3/r - 3/2``; zero on the admissible line."""
        return 2.0 / self.q + 3.0 / self.r - 1.5

    @property
    def admissible(self) -> bool:
        return abs(self.scaling_defect) <= 1e-12 and self.q >= 2 and self.q != 2


def _space_norms(traj_or_states, grid, r):
    return np.array([lp_norm(grid, u, r) for u in traj_or_states])


def _time_norm(values, step, q):
    if math.isinf(q):
        return float(np.max(values)) if len(values) else 0.0
    w = simpson_weights(len(values), step)
    return float(np.dot(w, values**q)) ** (1.0 / q)


def spacetime_norm(traj: Trajectory, ns: NormSpec) -> float:
    """``(∫_0^T ‖u(t)‖_r^q dt)^(1/q)`` with positive composite Simpson weights."""
    vals = _space_norms(traj.states, traj.grid, ns.r)
    return _time_norm(vals, traj.stride, ns.q)


def interpolation_check(traj: Trajectory) -> tuple[float, float]:
    """``(‖u‖_{L^{9/2}L^{54/13}}, ‖u‖_{L^4}^{8/9} ‖u‖_{L^∞L^6}^{1/9})``; first ≤ second."""
    left = spacetime_norm(traj, NormSpec(4.5, 54.0 / 13.0))
    right = (spacetime_norm(traj, NormSpec(4.0, 4.0)) ** (8.0 / 9.0)
             * spacetime_norm(traj, NormSpec(math.inf, 6.0)) ** (1.0 / 9.0))
    return left, right


def tangential_gradient(u, gp: GaugePotential | None, grid: Grid | None = None) -> np.ndarray:
    """``∇_A u - x̂ (x̂ · ∇_A u)``."""
    grid = grid or gp.grid
    Du = covariant_gradient(grid, gp, u)
    xhat = grid.unit_radial
    radial = np.sum(xhat * Du, axis=0)
    return Du - xhat * radial[None]


@dataclass
class SmoothingReport:
    tangential: float
    local: float
    sphere: float
    proxy_rhs: float  # sup_t ‖|∇|^{1/2} u‖²
    M: float
    best_local_radius: float
    best_sphere_radius: float

    @property
    def ratios(self) -> tuple[float, float, float]:
        d = self.proxy_rhs
        if d == 0:
            return (0.0, 0.0, 0.0)
        return (self.tangential / d, self.local / d, self.sphere / d)


def smoothing_functionals(traj: Trajectory, M: float = 1.0, upto: int | None = None) -> SmoothingReport:
    """The three nonlinear smoothing functionals over ``[0, t_upto]``.

    Suprema over R are maxima over the complete radial shells (lower bounds).
    """
    grid, gp, nl = traj.grid, traj.gp, traj.nl
    states = traj.states[: upto] if upto else traj.states
    w = simpson_weights(len(states), traj.stride)
    r = grid.radius
    tang = np.zeros(grid.shape)
    local = np.zeros(grid.shape)
    dens = np.zeros(grid.shape)
    sup_half = 0.0
    for wk, u in zip(w, states):
        G = nl.mu * nl.G(np.abs(u) ** 2) if nl.mu != 0 else 0.0
        tg = tangential_gradient(u, gp, grid)
        Du = covariant_gradient(grid, gp, u)
        tang += wk * (np.sum(np.abs(tg) ** 2, axis=0) + 2.0 * M * G) / r
        local += wk * (np.sum(np.abs(Du) ** 2, axis=0) + G)
        dens += wk * np.abs(u) ** 2
        sup_half = max(sup_half, spectral.half_derivative_norm2(grid, u))
    tangential = float(integrate(grid, tang))
    lp = radial_profile(grid, local)
    cum = np.cumsum(np.real(lp.integral))
    radii = (np.arange(cum.size) + 1) * lp.shell_width
    sel = lp.complete
    local_vals = cum[sel] / radii[sel]
    sp = radial_profile(grid, dens)
    centers = sp.centers
    sphere_vals = np.real(sp.surface_integral())[sel] / centers[sel] ** 2
    il, isph = int(np.argmax(local_vals)), int(np.argmax(sphere_vals))
    return SmoothingReport(tangential, float(local_vals[il]), float(sphere_vals[isph]),
                           sup_half, M, float(radii[sel][il]), float(centers[sel][isph]))


def strichartz_quotient(u0, gp: GaugePotential | None, ns: NormSpec, T: float,
                        n_times: int = 33, grid: Grid | None = None) -> tuple[float, bool]:
    """``‖U(t)u0‖_{L^q L^r([0,T])} / ‖u0‖_2`` and the admissibility flag."""
    grid = grid or gp.grid
    ts = np.linspace(0.0, T, n_times)
    states = [np.asarray(u0, dtype=complex)]
    for a, b in zip(ts[:-1], ts[1:]):
        states.append(linear_propagate(states[-1], b - a, gp, grid))
    vals = _space_norms(states, grid, ns.r)
    return _time_norm(vals, ts[1] - ts[0], ns.q) / l2_norm(grid, u0), ns.admissible


@dataclass
class CauchyTable:
    times: np.ndarray
    l2_increment: np.ndarray
    h1_increment: np.ndarray
    boundary_mass: np.ndarray
    valid_until: float  # last time before boundary mass exceeded the threshold
    monotone: bool

    def rows(self):
        return [{"t": t, "L2_increment": a, "H1_increment": b, "boundary_mass": c}
                for t, a, b, c in zip(self.times, self.l2_increment, self.h1_increment,
                                      self.boundary_mass)]


CAUCHY_COLUMNS = ("t", "L2_increment", "H1_increment", "boundary_mass")


def scattering_monitor(traj: Trajectory, threshold: float = 0.01) -> CauchyTable:
    """Pull each snapshot back with the linear flow and tabulate successive increments.

    Rows stop at the first snapshot whose boundary mass exceeds ``threshold``.
    """
    grid, gp = traj.grid, traj.gp
    times, l2, h1, bm = [], [], [], []
    prev = None
    for t, u in traj:
        frac = boundary_mass_fraction(grid, np.abs(u) ** 2)
        w = linear_propagate(u, -t, gp, grid)
        if prev is not None:
            d = w - prev
            g = spectral.spectral_gradient(grid, d)
            dl2 = l2_norm(grid, d)
            times.append(t)
            l2.append(dl2)
            h1.append(dl2 + math.sqrt(sum(l2_norm(grid, c) ** 2 for c in g)))
            bm.append(frac)
        if frac > threshold:
            break
        prev = w
    valid = [t for t, f in zip(times, bm) if f <= threshold]
    l2a = np.array(l2)
    mono = bool(np.all(np.diff(l2a) <= 1e-15 * max(1.0, l2a.max(initial=0.0)))) if l2a.size else True
    return CauchyTable(np.array(times), l2a, np.array(h1), np.array(bm),
                       valid[-1] if valid else 0.0, mono)
