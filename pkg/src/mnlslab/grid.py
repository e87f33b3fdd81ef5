"""Periodic sampling grid for the box [-L, L)^3 with a half-cell offset."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Cubic grid of ``n`` points per axis on ``[-L, L)^3``.

    Nodes sit at ``-L + (i + 1/2) h`` so that none coincides with the origin
    and the node set is symmetric under ``x -> -x``.
    """

    n: int
    half_length: float
    dim: int = 3

    def __post_init__(self):
        if self.dim != 3:
            raise ValueError("only dim=3 grids are supported")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.half_length > 0:
            raise ValueError("half_length must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def offset(self) -> float:
        """Node shift in units of the spacing."""
        return 0.5

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n,) * 3

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.half_length + (np.arange(self.n) + self.offset) * self.spacing

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``(3, n, n, n)``."""
        return np.stack(np.meshgrid(self.nodes, self.nodes, self.nodes, indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        x = self.coords
        return np.sqrt(x[0] ** 2 + x[1] ** 2 + x[2] ** 2)

    @cached_property
    def unit_radial(self) -> np.ndarray:
        return self.coords / self.radius

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Integer mode numbers along one axis in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    @cached_property
    def derivative_symbols(self) -> np.ndarray:
        """``i k_j`` with the Nyquist mode zeroed, broadcastable, shape (3, n, n, n)."""
        k = self.wavenumbers.copy()
        k[self.n // 2] = 0.0
        kx, ky, kz = np.meshgrid(k, k, k, indexing="ij", sparse=True)
        return 1j * np.stack(np.broadcast_arrays(kx, ky, kz))

    @cached_property
    def k_squared(self) -> np.ndarray:
        """``|k|^2`` on all modes (Nyquist included)."""
        k = self.wavenumbers
        kx, ky, kz = np.meshgrid(k, k, k, indexing="ij", sparse=True)
        return kx**2 + ky**2 + kz**2

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keep modes with ``|m_j| < n/3`` on every axis."""
        keep = np.abs(self.frequencies) < self.n / 3.0
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    def edge_mask(self, cells: int = 2) -> np.ndarray:
        """True on nodes within ``cells`` cells of the box boundary."""
        i = np.arange(self.n)
        near = (i < cells) | (i >= self.n - cells)
        return near[:, None, None] | near[None, :, None] | near[None, None, :]

    def zeros(self, dtype=complex) -> np.ndarray:
        return np.zeros(self.shape, dtype=dtype)
