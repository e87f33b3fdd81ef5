"""Free-space convolutions with the singular kernels 1/|x|, x/|x| and eta_jk.

Every convolution is a lattice sum ``h^3 Σ_y K(x - y) f(y)`` evaluated by FFT
on the doubled grid, so no periodic images enter.  Kernels carry no
dimensional constant: ``riesz_convolve`` is ``∫ f(y) / |x - y| dy``.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .grid import Grid
from .quadrature import integrate

#: h times the mean of 1/|x| over the cube [-h/2, h/2]^3.
CELL_AVERAGE_INV_R = 2.0 * (-math.pi / 4.0 + 1.5 * math.log(2.0 + math.sqrt(3.0)))
#: h times the singular-cell value that makes the lattice sum of 1/|x| exact
#: to O(h^4) for smooth densities (minus the regularized sum Σ' 1/|m| over Z^3).
LATTICE_INV_R = 2.837297479480619

SINGULAR_CELL_RULES = {"lattice": LATTICE_INV_R, "cell_average": CELL_AVERAGE_INV_R}
DEFAULT_SINGULAR_CELL = "lattice"

BOUNDARY_MASS_THRESHOLD = 0.01
_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


class BoundaryMassWarning(UserWarning):
    """Too much of a convolved density sits near the box edge."""


def boundary_mass_fraction(grid: Grid, f, cells: int = 2) -> float:
    a = np.abs(np.asarray(f))
    total = float(a.sum())
    if total == 0.0:
        return 0.0
    return float(a[grid.edge_mask(cells)].sum()) / total


def check_boundary_mass(grid: Grid, f) -> float:
    frac = boundary_mass_fraction(grid, f)
    if frac > BOUNDARY_MASS_THRESHOLD:
        warnings.warn(
            f"{100 * frac:.2f}% of ∫|f| lies within 2 cells of the box edge; "
            "free-space convolution is contaminated by truncation",
            BoundaryMassWarning,
            stacklevel=3,
        )
    return frac


def riesz_center(h: float, rule: str | None = None) -> float:
    """Kernel value assigned to the singular cell of 1/|x|."""
    rule = rule or DEFAULT_SINGULAR_CELL
    try:
        return SINGULAR_CELL_RULES[rule] / h
    except KeyError:
        raise ValueError(f"unknown singular-cell rule {rule!r}") from None


def kernel_values(disp: np.ndarray, h: float, rule: str | None = None) -> dict:
    """Discrete kernels at displacement vectors ``disp`` (shape (3, ...)).

    At zero displacement 1/|x| takes the value of ``rule``: ``"cell_average"``
    is the mean of 1/|x| over one cell, ``"lattice"`` the value that makes
    ``h^3 Σ f(mh)K(mh)`` match ``∫ f/|x|`` to fourth order, which is what
    keeps ``-Δ`` of the discrete kernel close to ``4π δ``.  The odd kernels
    x_j/|x| vanish there, and by cubic symmetry eta_jk takes (2/3) δ_jk times
    the 1/|x| value, preserving the trace identity ``Σ_j eta_jj = 2/|x|``.
    """
    r = np.sqrt((disp**2).sum(axis=0))
    center = r == 0
    rs = np.where(center, 1.0, r)
    c = riesz_center(h, rule)
    out = {"riesz": np.where(center, c, 1.0 / rs)}
    for j in range(3):
        out[("x", j)] = np.where(center, 0.0, disp[j] / rs)
    for j, k in _PAIRS:
        val = ((1.0 if j == k else 0.0) * rs**2 - disp[j] * disp[k]) / rs**3
        out[("eta", j, k)] = np.where(center, (2.0 / 3.0) * c if j == k else 0.0, val)
    return out


@lru_cache(maxsize=4)
def _spectra(n: int, half_length: float, rule: str) -> dict:
    grid = Grid(n, half_length)
    h = grid.spacing
    m = np.fft.fftfreq(2 * n, d=1.0 / (2 * n))
    disp = np.stack(np.meshgrid(m, m, m, indexing="ij")) * h
    vals = kernel_values(disp, h, rule)
    return {key: sfft.rfftn(v) for key, v in vals.items()}


def _conv_real(grid: Grid, f, keys, rule) -> list[np.ndarray]:
    n = grid.n
    spec = _spectra(n, grid.half_length, rule or DEFAULT_SINGULAR_CELL)
    F = sfft.rfftn(f, s=(2 * n,) * 3)
    out = []
    for key in keys:
        full = sfft.irfftn(F * spec[key], s=(2 * n,) * 3)
        out.append(full[:n, :n, :n] * grid.cell_volume)
    return out


def _conv(grid: Grid, f, keys, rule=None) -> list[np.ndarray]:
    f = np.asarray(f)
    if np.iscomplexobj(f):
        re = _conv_real(grid, f.real, keys, rule)
        im = _conv_real(grid, f.imag, keys, rule)
        return [a + 1j * b for a, b in zip(re, im)]
    return _conv_real(grid, f, keys, rule)


def riesz_convolve(grid: Grid, f, rule: str | None = None) -> np.ndarray:
    """``∫ f(y) / |x - y| dy`` on the grid."""
    check_boundary_mass(grid, f)
    return _conv(grid, f, ["riesz"], rule)[0]


def x_operator(grid: Grid, f, rule: str | None = None) -> np.ndarray:
    """``∫ (x - y)/|x - y| f(y) dy``, shape (3, n, n, n)."""
    check_boundary_mass(grid, f)
    return np.stack(_conv(grid, f, [("x", j) for j in range(3)], rule))


def eta_convolve(grid: Grid, g, rule: str | None = None) -> np.ndarray:
    """All components ``(eta_jk * g)``, shape (3, 3, n, n, n), symmetric in (j, k)."""
    check_boundary_mass(grid, g)
    parts = _conv(grid, g, [("eta", j, k) for j, k in _PAIRS], rule)
    out = np.empty((3, 3) + grid.shape, dtype=parts[0].dtype)
    for (j, k), p in zip(_PAIRS, parts):
        out[j, k] = p
        out[k, j] = p
    return out


def eta_apply(grid: Grid, v, rule: str | None = None) -> np.ndarray:
    """``Σ_k eta_jk * v_k`` for a real vector field ``v``."""
    for comp in v:
        check_boundary_mass(grid, comp)
    out = np.zeros((3,) + grid.shape)
    for k in range(3):
        col = _conv(grid, v[k], [("eta", min(j, k), max(j, k)) for j in range(3)], rule)
        for j in range(3):
            out[j] += col[j]
    return out


def eta_pairing(grid: Grid, F, g, rule: str | None = None) -> float:
    """``Σ_jk ∬ F_jk(x) eta_kj(x - y) g(y) dx dy`` for a symmetric tensor field F."""
    conv = eta_convolve(grid, g, rule)
    total = integrate(grid, np.einsum("jk...,kj...->...", F, conv))
    return float(np.real(total))
