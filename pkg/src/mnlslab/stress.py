"""Pseudo stress-energy tensors, balance-law residuals, mass and energy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .evolve import NonlinearitySpec, Trajectory, covariant_gradient
from .gauge import GaugePotential, curvature
from .grid import Grid
from .quadrature import integrate, l2_norm

RHO_FLOOR = 1e-12


@dataclass(frozen=True)
class StressTensor:
    """``T00 = |u|²/2``, ``Tj0 = Im(ū D_j u)``, ``Tjk = σ_jk - δ_jk Δρ + μ δ_jk G(|u|²)``."""

    T00: np.ndarray
    Tj0: np.ndarray
    Tjk: np.ndarray
    sigma: np.ndarray
    Du: np.ndarray
    grad_rho: np.ndarray  # Re(ū D_j u), equal to ∂_j ρ pointwise

    @property
    def rho(self):
        return self.T00

    @property
    def p(self):
        return self.Tj0

    @property
    def T0j(self):
        return self.Tj0

    def rho_floored(self, floor: float = RHO_FLOOR) -> np.ndarray:
        return np.maximum(self.T00, floor * float(self.T00.max()))

    def sigma_from_moments(self, floor: float = RHO_FLOOR) -> np.ndarray:
        """``(p_j p_k + ∂_jρ ∂_kρ)/ρ`` with the vacuum floor."""
        rf = self.rho_floored(floor)
        p, d = self.Tj0, self.grad_rho
        return (p[:, None] * p[None] + d[:, None] * d[None]) / rf


def stress_tensor(u, gp: GaugePotential | None, nl: NonlinearitySpec,
                  grid: Grid | None = None) -> StressTensor:
    grid = grid or gp.grid
    u = np.asarray(u, dtype=complex)
    Du = covariant_gradient(grid, gp, u)
    ubar_Du = np.conj(u)[None] * Du
    rho = 0.5 * np.abs(u) ** 2
    p = ubar_Du.imag
    sigma = 2.0 * np.real(Du[:, None] * np.conj(Du)[None])
    diag = -spectral.laplacian(grid, rho)
    if nl.mu != 0:
        diag = diag + nl.mu * nl.G(np.abs(u) ** 2)
    T = sigma.copy()
    for j in range(3):
        T[j, j] += diag
    return StressTensor(rho, p, T, sigma, Du, ubar_Du.real)


def mass(u, grid: Grid) -> float:
    return float(np.real(integrate(grid, np.abs(u) ** 2)))


def energy(u, gp: GaugePotential | None, nl: NonlinearitySpec, grid: Grid | None = None) -> float:
    """``∫ |∇_A u|² + A0|u|² + μ F_pot(|u|²)``, the conserved Hamiltonian."""
    grid = grid or gp.grid
    Du = covariant_gradient(grid, gp, u)
    dens = np.sum(np.abs(Du) ** 2, axis=0)
    r = np.abs(u) ** 2
    if gp is not None and np.any(gp.A0):
        dens = dens + gp.A0 * r
    if nl.mu != 0:
        dens = dens + nl.mu * nl.F_pot(r)
    return float(np.real(integrate(grid, dens)))


def _interior(traj: Trajectory, k: int):
    if not 0 < k < len(traj) - 1:
        raise IndexError(f"snapshot {k} has no centered time difference "
                         f"(valid 1..{len(traj) - 2})")


def _tensors(traj, ks):
    return [stress_tensor(traj.states[k], traj.gp, traj.nl, traj.grid) for k in ks]


def mass_charge_residual(traj: Trajectory, k: int):
    """``∂_t T00 + ∂_j Tj0`` at snapshot ``k``; returns (field, L2 norm)."""
    _interior(traj, k)
    grid = traj.grid
    before, now, after = _tensors(traj, (k - 1, k, k + 1))
    r = (after.T00 - before.T00) / (2.0 * traj.stride) + spectral.divergence(grid, now.Tj0)
    return r, l2_norm(grid, r)


def lorentz_source(T: StressTensor, gp: GaugePotential | None) -> np.ndarray:
    """``2 F_0j T00 + 2 F_kj Tk0`` as a vector field."""
    if gp is None or gp.is_free:
        return np.zeros_like(T.Tj0)
    cf = curvature(gp)
    return 2.0 * cf.F0 * T.T00[None] + 2.0 * np.einsum("kj...,k...->j...", cf.F, T.Tj0)


def momentum_balance_residual(traj: Trajectory, k: int):
    """``∂_t Tj0 + ∂_k Tjk - 2F_0j T00 - 2F_kj Tk0`` at snapshot ``k``."""
    _interior(traj, k)
    grid = traj.grid
    before, now, after = _tensors(traj, (k - 1, k, k + 1))
    r = (after.Tj0 - before.Tj0) / (2.0 * traj.stride)
    r = r + np.stack([spectral.divergence(grid, now.Tjk[j]) for j in range(3)])
    r = r - lorentz_source(now, traj.gp)
    norm = math.sqrt(sum(l2_norm(grid, c) ** 2 for c in r))
    return r, norm


def conservation_table(traj: Trajectory) -> list[dict]:
    """Rows with the keys of the per-run conservation CSV."""
    rows = []
    n = len(traj)
    for k, (t, u) in enumerate(traj):
        row = {
            "t": t,
            "mass": mass(u, traj.grid),
            "energy": energy(u, traj.gp, traj.nl, traj.grid),
            "mass_residual_L2": math.nan,
            "momentum_residual_L2": math.nan,
        }
        if 0 < k < n - 1:
            row["mass_residual_L2"] = mass_charge_residual(traj, k)[1]
            row["momentum_residual_L2"] = momentum_balance_residual(traj, k)[1]
        rows.append(row)
    return rows


CONSERVATION_COLUMNS = ("t", "mass", "energy", "mass_residual_L2", "momentum_residual_L2")
