"""Spectral derivatives and Fourier multipliers on a periodic Grid."""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .grid import Grid
from .quadrature import tree_sum

_AXES = (-3, -2, -1)


def fft(f):
    return sfft.fftn(f, axes=_AXES)


def ifft(F):
    return sfft.ifftn(F, axes=_AXES)


def _like(out, f):
    return out.real if np.isrealobj(f) else out


def spectral_gradient(grid: Grid, f) -> np.ndarray:
    """Exact gradient of the trigonometric interpolant; Nyquist mode dropped."""
    out = ifft(grid.derivative_symbols * fft(f)[None])
    return _like(out, f)


def partial(grid: Grid, f, axis: int) -> np.ndarray:
    return _like(ifft(grid.derivative_symbols[axis] * fft(f)), f)


def divergence(grid: Grid, v) -> np.ndarray:
    V = fft(v)
    out = ifft((grid.derivative_symbols * V).sum(axis=0))
    return _like(out, v)


def laplacian(grid: Grid, f) -> np.ndarray:
    """Composition of the two spectral first derivatives (``-Σ k_j^2``, Nyquist dropped)."""
    symbol = (grid.derivative_symbols**2).sum(axis=0).real
    return _like(ifft(symbol * fft(f)), f)


def fractional_gradient_power(grid: Grid, f, s: float) -> np.ndarray:
    """Apply the multiplier ``|k|^s``; the zero mode is removed unless ``s == 0``."""
    if s <= -3:
        raise ValueError(f"|k|^s is not locally integrable in 3D for s={s} <= -3")
    if s == 0:
        return np.array(f, copy=True)
    kmag = grid.k_magnitude
    with np.errstate(divide="ignore"):
        symbol = np.where(kmag > 0, kmag ** float(s), 0.0)
    return _like(ifft(symbol * fft(f)), f)


def dealias(grid: Grid, f) -> np.ndarray:
    return _like(ifft(grid.dealias_mask * fft(f)), f)


def half_derivative_norm2(grid: Grid, u) -> float:
    """``‖|∇|^{1/2} u‖_2^2`` evaluated on the Fourier side."""
    U = fft(u)
    return float(tree_sum(grid.k_magnitude * np.abs(U) ** 2) * grid.cell_volume / u.size)


def spectral_l2_norm2(grid: Grid, u) -> float:
    """Parseval form of ``‖u‖_2^2``."""
    U = fft(u)
    return float(tree_sum(np.abs(U) ** 2) * grid.cell_volume / u.size)
