"""Direct O(N^6) pairwise sums used as ground truth for the FFT fast paths.

Only meant for tiny grids (8^3 gives 512 x 512 node pairs).  The kernels are
re-derived here from their formulas rather than taken from ``kernels``; the
shared piece is the singular-cell constant.
"""

from __future__ import annotations

import numpy as np

from .evolve import NonlinearitySpec
from .gauge import GaugePotential
from .grid import Grid
from .kernels import riesz_center
from .stress import RHO_FLOOR, lorentz_source, stress_tensor
from . import spectral

MAX_NODES = 16**3


def _pairs(grid: Grid):
    if grid.n**3 > MAX_NODES:
        raise ValueError("pairwise oracles are limited to 16^3 grids")
    pts = grid.coords.reshape(3, -1)
    d = pts[:, :, None] - pts[:, None, :]  # d[:, a, b] = x_a - y_b
    r = np.sqrt(np.sum(d**2, axis=0))
    return d, r


def pair_kernels(grid: Grid, rule: str | None = None):
    """``(1/|x-y|, (x-y)/|x-y|, eta(x-y))`` as dense node-pair matrices."""
    d, r = _pairs(grid)
    diag = r == 0
    safe = np.where(diag, 1.0, r)
    c = riesz_center(grid.spacing, rule)
    inv = np.where(diag, c, 1.0 / safe)
    unit = np.where(diag[None], 0.0, d / safe)
    eta = np.empty((3, 3) + r.shape)
    for j in range(3):
        for k in range(3):
            off = ((j == k) / safe) - d[j] * d[k] / safe**3
            eta[j, k] = np.where(diag, (2.0 / 3.0) * c if j == k else 0.0, off)
    return inv, unit, eta


def _flat(f):
    return np.asarray(f).reshape(np.asarray(f).shape[: -3] + (-1,))


def direct_riesz(grid: Grid, f, rule=None):
    inv, _, _ = pair_kernels(grid, rule)
    return (inv @ _flat(f)).reshape(grid.shape) * grid.cell_volume


def direct_x(grid: Grid, f, rule=None):
    _, unit, _ = pair_kernels(grid, rule)
    return np.stack([(unit[j] @ _flat(f)).reshape(grid.shape) for j in range(3)]) * grid.cell_volume


def direct_eta_pairing(grid: Grid, F, g, rule=None) -> float:
    _, _, eta = pair_kernels(grid, rule)
    Ff, gf = _flat(F), _flat(g)
    total = 0.0
    for j in range(3):
        for k in range(3):
            total += Ff[j, k] @ eta[k, j] @ gf
    return float(np.real(total)) * grid.cell_volume**2


def direct_p_terms(u, gp: GaugePotential | None, nl: NonlinearitySpec, grid: Grid | None = None,
                   rule=None, floor: float = RHO_FLOOR) -> dict:
    """P1..P5, P3k and M from independent double sums over node pairs."""
    grid = grid or gp.grid
    T = stress_tensor(u, gp, nl, grid)
    inv, unit, eta = pair_kernels(grid, rule)
    h6 = grid.cell_volume**2
    rho = _flat(T.T00)
    rf = np.maximum(rho, floor * rho.max())
    p = _flat(T.Tj0)
    drho = _flat(T.grad_rho)

    # P1: 4 ΣΣ (∂ρ∂ρ/ρ)(x)_jk eta_kj(x-y) ρ(y)
    P1 = 0.0
    for j in range(3):
        for k in range(3):
            P1 += (drho[j] * drho[k] / rf) @ eta[k, j] @ rho
    P1 *= 4.0 * h6

    # P2: 2 ΣΣ J_j J_k eta_kj with the two-point momentum J(x, y).
    sq = np.sqrt(rf[None, :] / rf[:, None])  # sqrt(ρ(y)/ρ(x)), rows x, cols y
    J = sq[None] * p[:, :, None] - (1.0 / sq)[None] * p[:, None, :]
    P2 = 2.0 * h6 * float(np.einsum("jab,kab,kjab->", J, J, eta))

    P3 = 2.0 * grid.cell_volume * float(np.sum(np.abs(np.asarray(u)) ** 4))
    trace = eta[0, 0] + eta[1, 1] + eta[2, 2]
    lap = _flat(-spectral.laplacian(grid, T.T00))
    P3k = 4.0 * h6 * float(lap @ trace @ rho)
    P4 = 0.0
    if nl.mu != 0:
        P4 = 4.0 * h6 * float(_flat(nl.mu * nl.G(np.abs(np.asarray(u)) ** 2)) @ trace @ rho)
    P5 = 0.0
    if gp is not None and not gp.is_free:
        S = _flat(0.5 * lorentz_source(T, gp))  # F_0j T00 + F_kj Tk0
        P5 = 8.0 * h6 * float(sum(S[j] @ unit[j] @ rho for j in range(3)))
    M = 4.0 * h6 * float(sum(p[j] @ unit[j] @ rho for j in range(3)))
    return {"P1": float(P1), "P2": P2, "P3": P3, "P4": P4, "P5": P5, "P3_kernel": P3k, "M": M}
