"""Deterministic reductions, radial shells and dyadic annuli on a Grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import Grid


def tree_sum(values) -> complex | float:
    """Sum with a fixed pairwise tree (independent of threading or blocking)."""
    a = np.asarray(values).ravel()
    if a.size == 0:
        return a.dtype.type(0)
    m = 1 << (a.size - 1).bit_length()
    if m != a.size:
        a = np.concatenate([a, np.zeros(m - a.size, dtype=a.dtype)])
    while a.size > 1:
        a = a[0::2] + a[1::2]
    return a[0].item()


def integrate(grid: Grid, f) -> complex | float:
    return grid.cell_volume * tree_sum(f)


def weighted_integrate(grid: Grid, f, weight) -> complex | float:
    """``integrate(f * w)`` where ``weight`` is an array or a callable of the coordinates."""
    w = weight(*grid.coords) if callable(weight) else weight
    return integrate(grid, np.asarray(f) * w)


def inner(grid: Grid, f, g) -> float:
    """Real L^2 pairing ``Re ∫ conj(f) g``."""
    return float(np.real(integrate(grid, np.conj(f) * g)))


def l2_norm(grid: Grid, f) -> float:
    return math.sqrt(float(integrate(grid, np.abs(f) ** 2).real))


def lp_norm(grid: Grid, f, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(f)))
    return float(integrate(grid, np.abs(f) ** p).real) ** (1.0 / p)


def simpson_weights(n_points: int, step: float) -> np.ndarray:
    """Positive composite quadrature weights on a uniform node set.

    Simpson's rule when the number of intervals is even; otherwise Simpson
    on the leading intervals and the 3/8 rule on the last three.
    """
    if n_points < 1:
        raise ValueError("need at least one node")
    w = np.zeros(n_points)
    intervals = n_points - 1
    if intervals == 0:
        return w
    if intervals == 1:
        w[:] = step / 2.0
        return w
    tail = 3 if intervals % 2 else 0
    even_end = intervals - tail
    for i in range(0, even_end, 2):
        w[i] += step / 3.0
        w[i + 1] += 4.0 * step / 3.0
        w[i + 2] += step / 3.0
    if tail:
        i = even_end
        w[i : i + 4] += 3.0 * step / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return w


@dataclass(frozen=True)
class RadialProfile:
    """Per-shell statistics for shells ``k dr <= |x| < (k+1) dr``."""

    shell_width: float
    sup: np.ndarray
    integral: np.ndarray
    count: np.ndarray
    complete: np.ndarray  # shell lies inside the inscribed ball of the box

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.sup.size) + 0.5) * self.shell_width

    @property
    def mean(self) -> np.ndarray:
        vol = np.where(self.count > 0, self.count, 1)
        return np.where(self.count > 0, self.integral / vol, 0.0)

    def surface_integral(self) -> np.ndarray:
        """Approximate ``∫_{|x|=r} f dσ`` at the shell centers."""
        return self.integral / self.shell_width

    def mixed_norm(self, p: float) -> float:
        """``(∫_0^R sup_{|x|=r} |f|^p dr)^(1/p)`` over complete shells (trapezoid in r)."""
        s = self.sup[self.complete] ** p
        if s.size == 0:
            return 0.0
        r = self.centers[self.complete]
        total = s[0] * r[0]
        if s.size > 1:
            total += float(np.trapezoid(s, r))
        return float(total) ** (1.0 / p)


def radial_profile(grid: Grid, f, shell_cells: int = 2) -> RadialProfile:
    f = np.asarray(f)
    dr = shell_cells * grid.spacing
    idx = np.floor(grid.radius / dr).astype(np.int64).ravel()
    nshell = int(idx.max()) + 1
    vals = f.ravel()
    absvals = np.abs(vals)
    sup = np.zeros(nshell)
    np.maximum.at(sup, idx, absvals)
    if np.iscomplexobj(vals):
        integral = (np.bincount(idx, vals.real, nshell)
                    + 1j * np.bincount(idx, vals.imag, nshell)) * grid.cell_volume
    else:
        integral = np.bincount(idx, vals, nshell) * grid.cell_volume
    count = np.bincount(idx, minlength=nshell)
    complete = (np.arange(nshell) + 1) * dr <= grid.half_length
    return RadialProfile(dr, sup, integral, count, complete)


class AnnulusSup(NamedTuple):
    value: float
    empty: bool


def dyadic_range(grid: Grid) -> list[int]:
    """Indices j with ``2^j >= h`` and ``2^(j+1) <= L``."""
    j = math.ceil(math.log2(grid.spacing) - 1e-12)
    out = []
    while 2.0 ** (j + 1) <= grid.half_length * (1 + 1e-12):
        out.append(j)
        j += 1
    return out


def dyadic_annulus_sup(grid: Grid, f, j: int) -> AnnulusSup:
    """``sup |f|`` over nodes with ``2^j <= |x| <= 2^(j+1)``; flagged if out of range or empty."""
    lo, hi = 2.0**j, 2.0 ** (j + 1)
    if lo < grid.spacing * (1 - 1e-12) or hi > grid.half_length * (1 + 1e-12):
        return AnnulusSup(0.0, True)
    sel = (grid.radius >= lo) & (grid.radius <= hi)
    if not sel.any():
        return AnnulusSup(0.0, True)
    return AnnulusSup(float(np.max(np.abs(np.asarray(f)[sel]))), False)
