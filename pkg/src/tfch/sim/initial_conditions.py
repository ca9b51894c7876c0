"""Initial profiles for the benchmark experiments.

Noise is drawn from numpy's PCG64 generator seeded with the run seed, uniform
on ``[-1, 1]``, in row-major grid order.
"""
from __future__ import annotations

import warnings

import numpy as np

from ..spectral_field import Field, Grid


def _noise(grid: Grid, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-1.0, 1.0, grid.shape)


def _expect_domain(grid: Grid, lx: float, ly: float, name: str):
    if (grid.lx, grid.ly) != (lx, ly):
        warnings.warn(f"{name} initial condition is designed for [0,{lx:g}]x[0,{ly:g}], "
                      f"got [0,{grid.lx:g}]x[0,{grid.ly:g}]", stacklevel=3)


def ic_star(grid: Grid, epsilon: float, x0: float = 0.5, y0: float = 0.5) -> Field:
    """tanh profile of a circle of radius 0.25 with a four-fold cosine bump.

    The polar angle at the centre node is taken as 0.
    """
    x, y = grid.coords()
    dx, dy = x - x0, y - y0
    r = np.hypot(dx, dy)
    # atan2 differs from arctan(dy/dx) by a multiple of pi, which cos(4 theta) ignores
    theta = np.arctan2(dy, dx)
    arg = (r - 0.25 - (1.0 + np.cos(4.0 * theta)) / 16.0) / (np.sqrt(2.0) * epsilon)
    return Field(grid, np.tanh(arg))


def ic_uniform_random(grid: Grid, mean: float = 0.0, amplitude: float = 1e-3, seed: int = 0) -> Field:
    if amplitude < 0:
        raise ValueError(f"amplitude must be non-negative, got {amplitude}")
    if amplitude == 0:
        return Field.constant(grid, mean)
    return Field(grid, mean + amplitude * _noise(grid, seed))


def ic_wedge(grid: Grid, seed: int = 0, amplitude: float = 1e-3) -> Field:
    """``|x - 1| / 2`` plus noise: mixture ratio varying linearly across ``[0, 2]``."""
    _expect_domain(grid, 2.0, 1.0, "wedge")
    x, _ = grid.coords()
    return Field(grid, 0.5 * np.abs(x - 1.0) + amplitude * _noise(grid, seed))


def ic_thinfilm(grid: Grid, r0: float = 0.05, seed: int = 0, amplitude: float = 1e-3) -> Field:
    """Three wavy columns of mean 0, -0.1, -0.2 in a ``-1`` background."""
    _expect_domain(grid, 2.0, 1.0, "thin-film")
    x, y = grid.coords()
    lx = grid.lx
    wobble = 0.5 * r0 * np.sin(10.0 * np.pi * y)
    noise = amplitude * _noise(grid, seed)
    out = np.full(grid.shape, -1.0)
    # first matching branch wins, in the printed order
    bands = ((5.0 * lx / 6.0, 0.0), (3.0 * lx / 6.0, -0.1), (lx / 6.0, -0.2))
    taken = np.zeros(grid.shape, dtype=bool)
    for centre, level in bands:
        inside = (np.abs(x - centre + wobble) < r0) & ~taken
        out[inside] = level + noise[inside]
        taken |= inside
    return Field(grid, out)


def make_initial(cfg) -> Field:
    kind = cfg.initial
    g = cfg.grid
    ic = cfg.ic
    if kind == "star":
        return ic_star(g, cfg.physical.epsilon, ic["x0"], ic["y0"])
    if kind == "random":
        return ic_uniform_random(g, ic["mean"], ic["amplitude"], cfg.seed)
    if kind == "wedge":
        return ic_wedge(g, cfg.seed, ic["amplitude"])
    if kind == "thinfilm":
        return ic_thinfilm(g, ic["r0"], cfg.seed, ic["amplitude"])
    if kind == "constant":
        return Field.constant(g, ic["mean"])
    raise ValueError(f"unknown initial condition {kind!r}")
