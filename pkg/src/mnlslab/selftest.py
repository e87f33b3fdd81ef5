"""Brute-force oracle suite run by ``mnlslab selftest``."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from . import spectral
from .evolve import NonlinearitySpec, PicardConfig, evolve, free_propagate, picard_iterate
from .gauge import KATO_THRESHOLD_3D, kato_norm, make_potential
from .grid import Grid
from .kernels import SINGULAR_CELL_RULES, BoundaryMassWarning, eta_pairing, riesz_convolve, x_operator
from .morawetz import B_functional, appendix_sign_demo, p_terms
from .oracles import direct_eta_pairing, direct_p_terms, direct_riesz, direct_x
from .quadrature import l2_norm


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}  {self.name:<34} value={self.value:.3e}  "
                f"tol={self.tolerance:.1e}  ({self.seconds:.1f}s)")


def smooth_random_state(grid: Grid, rng, amplitude: float = 0.5, width: float = 0.6):
    """Random band-limited field under a Gaussian envelope (nowhere near zero modes)."""
    z = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    z = spectral.ifft(np.exp(-0.5 * grid.k_squared * 0.25) * spectral.fft(z))
    z /= np.max(np.abs(z))
    env = np.exp(-grid.radius**2 / (2 * (width * grid.half_length) ** 2))
    return spectral.dealias(grid, amplitude * env * (1.0 + 0.5 * z))


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    s = float(np.max(np.abs(b)))
    return float(np.max(np.abs(a - b))) / s if s > 0 else float(np.max(np.abs(a)))


def check_kernel_oracles(seed: int = 7) -> list[tuple[str, float, float]]:
    grid = Grid(8, 2.0)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(grid.shape)
    F = rng.standard_normal((3, 3) + grid.shape)
    out = []
    for rule in SINGULAR_CELL_RULES:
        out.append((f"riesz_convolve 8^3 [{rule}]",
                    _rel(riesz_convolve(grid, f, rule), direct_riesz(grid, f, rule)), 1e-10))
        out.append((f"x_operator 8^3 [{rule}]",
                    _rel(x_operator(grid, f, rule), direct_x(grid, f, rule)), 1e-10))
        a, b = eta_pairing(grid, F, f, rule), direct_eta_pairing(grid, F, f, rule)
        out.append((f"eta_pairing 8^3 [{rule}]", abs(a - b) / abs(b), 1e-10))
    return out


def check_p_term_oracles(seed: int = 11) -> list[tuple[str, float, float]]:
    grid = Grid(8, 3.0)
    rng = np.random.default_rng(seed)
    gp = make_potential("smooth_decay", {"amplitude": 0.3, "core": 1.0}, grid)
    nl = NonlinearitySpec(1, 1.0)
    u = smooth_random_state(grid, rng)
    fast = p_terms(u, gp, nl, grid)
    slow = direct_p_terms(u, gp, nl, grid)
    worst = 0.0
    for key in ("P1", "P2", "P3", "P4", "P5", "P3_kernel", "M"):
        a = getattr(fast, key)
        worst = max(worst, abs(a - slow[key]) / max(abs(slow[key]), 1e-300))
    b = B_functional(u, gp, nl, grid)
    return [("P-terms vs pairwise sums 8^3", worst, 1e-10),
            ("B = P5/4", abs(b - fast.B) / abs(fast.B), 1e-10)]


def check_picard() -> list[tuple[str, float, float]]:
    grid = Grid(16, 4.0)
    nl = NonlinearitySpec(1, 1.0)
    u0 = 0.5 * np.exp(-grid.radius**2 / 2)
    pc = PicardConfig()
    out = []
    for family, params in (("zero", {}), ("smooth_decay", {"amplitude": 0.1, "core": 1.0})):
        gp = make_potential(family, params, grid)
        res = picard_iterate(u0, pc, gp, nl, grid)
        ref = evolve(u0, gp, nl, pc.T0, dt=pc.T0 / 64, stride=pc.T0, grid=grid)
        ratio = max(res.ratios[:4])
        out.append((f"Picard contraction [{family}]", ratio, 0.5))
        out.append((f"Picard limit vs rk4 [{family}]",
                    l2_norm(grid, res.limit - ref.states[-1]), 1e-5))
    return out


def gaussian_solution(grid: Grid, t: float, sigma: float = 1.0):
    """Closed-form ``u_t = iΔu`` solution from ``exp(-|x|²/(2σ²))``."""
    z = 1.0 + 2j * t / sigma**2
    return z ** (-1.5) * np.exp(-grid.radius**2 / (2 * sigma**2 * z))


def check_gaussians() -> list[tuple[str, float, float]]:
    grid = Grid(32, 8.0)
    u0 = gaussian_solution(grid, 0.0)
    u = free_propagate(grid, u0, 0.5)
    exact = gaussian_solution(grid, 0.5)
    err = l2_norm(grid, u - exact) / l2_norm(grid, exact)
    r = grid.radius
    dens = np.exp(-r**2 / 2) / (2 * math.pi) ** 1.5
    pot = riesz_convolve(grid, dens)
    ref = erf(r / math.sqrt(2)) / r
    inner = r < 3
    perr = float(np.max(np.abs(pot - ref)[inner]) / ref.max())
    return [("free Gaussian closed form", err, 1e-6),
            ("Riesz potential of a Gaussian", perr, 1e-3)]


def check_kato() -> list[tuple[str, float, float]]:
    grid = Grid(64, 4.0)
    R = 2.0
    k = kato_norm(grid, (grid.radius <= R).astype(float))
    return [("Kato ball vs 2πR²", abs(k / (2 * math.pi * R * R) - 1), 0.01),
            ("Kato threshold = π", abs(KATO_THRESHOLD_3D - math.pi), 1e-12)]


def check_sign_demo() -> list[tuple[str, float, float]]:
    grid = Grid(8, 4.0)
    gp = make_potential("uniform_B", {"B0": 1.0}, grid)
    d = appendix_sign_demo(gp, [1.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    # hand value: v = e1 × (0, 0, B0) = (0, -B0, 0), integrand ±|v|
    err = max(abs(d.value_plus - 1.0), abs(d.value_minus + 1.0),
              float(np.max(np.abs(d.y_plus - np.array([0.0, -1.0, 0.0])))))
    return [("sign demo triple product", err, 1e-10)]


CHECKS = (check_kernel_oracles, check_p_term_oracles, check_picard, check_gaussians,
          check_kato, check_sign_demo)


def run_selftest(echo=print) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            # the 8^3 oracle fields fill the box on purpose
            warnings.simplefilter("ignore", BoundaryMassWarning)
            items = check()
        dt = (time.perf_counter() - t0) / len(items)
        for name, value, tol in items:
            res = CheckResult(name, float(value), tol, bool(value <= tol), dt)
            results.append(res)
            if echo:
                echo(res.line())
    return results
