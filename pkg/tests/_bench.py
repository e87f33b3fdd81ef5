"""Benchmark problems shared by the acceptance tests (built once per session)."""

from functools import lru_cache

import numpy as np

from mnlslab import Grid, NonlinearitySpec, evolve, make_potential

COMPLIANT = {"amplitude": 0.1, "epsilon": 0.5, "core": 3.0}
CUBIC = NonlinearitySpec(1, 1.0)
LINEAR = NonlinearitySpec(0, 1.0)


def compliant_potential(grid):
    return make_potential("smooth_decay", COMPLIANT, grid)


def broad_data(grid):
    x1 = grid.coords[0]
    return 0.25 * np.exp(-grid.radius**2 / 8 + 0.2j * x1)


@lru_cache(maxsize=None)
def conservation_run():
    grid = Grid(32, 8.0)
    return evolve(broad_data(grid), compliant_potential(grid), CUBIC, 1.0,
                  stride=0.05, grid=grid)


@lru_cache(maxsize=None)
def balance_run():
    grid = Grid(32, 8.0)
    return evolve(broad_data(grid), compliant_potential(grid), CUBIC, 0.8,
                  dt=0.0125, stride=0.0125, grid=grid)


@lru_cache(maxsize=None)
def interaction_run():
    grid = Grid(64, 8.0)
    return evolve(broad_data(grid), compliant_potential(grid), CUBIC, 0.8,
                  dt=0.0125, stride=0.0125, grid=grid)


@lru_cache(maxsize=None)
def long_run(magnetic: bool):
    grid = Grid(64, 16.0)
    gp = compliant_potential(grid) if magnetic else make_potential("zero", {}, grid)
    u0 = np.exp(-grid.radius**2 / 2)
    return evolve(u0, gp, CUBIC, 3.0, stride=0.05, grid=grid)


@lru_cache(maxsize=None)
def virial_run(mu: int):
    grid = Grid(64, 16.0)
    u0 = np.exp(-grid.radius**2 / 2 + 0.3j * grid.coords[0])
    nl = CUBIC if mu else LINEAR
    return evolve(u0, make_potential("zero", {}, grid), nl, 1.5, stride=0.05, grid=grid)
