"""Non-uniform time grids and the energy-driven step-size controller."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TimeMesh:
    """Strictly increasing grid ``0 = t_0 < t_1 < ... < t_n``.

    ``final_time`` is the target horizon. For meshes grown online it may lie
    beyond the last point.
    """

    times: np.ndarray
    final_time: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("times must be a non-empty 1-D sequence")
        if t[0] != 0.0:
            raise ValueError("times[0] must be 0")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @property
    def num_steps(self) -> int:
        return self.times.size - 1

    @property
    def steps(self) -> np.ndarray:
        """Step sizes ``tau_1..tau_n`` (index 0 holds ``tau_1``)."""
        return np.diff(self.times)

    def tau(self, n: int) -> float:
        """Step ``tau_n = t_n - t_{n-1}`` for ``1 <= n <= num_steps``."""
        if not 1 <= n <= self.num_steps:
            raise ValueError(f"step index {n} out of range 1..{self.num_steps}")
        return float(self.times[n] - self.times[n - 1])

    def __len__(self):
        return self.times.size


def uniform_mesh(T: float, N: int) -> TimeMesh:
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    t = np.arange(N + 1, dtype=np.float64) * (T / N)
    t[-1] = T
    return TimeMesh(t, float(T))


def graded_mesh(T: float, N: int, r: float) -> TimeMesh:
    """Power-law grading ``t_k = T (k/N)**r`` clustering points near ``t = 0``."""
    if r < 1:
        raise ValueError(f"grading exponent must be >= 1, got {r}")
    if r == 1:
        return uniform_mesh(T, N)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    t = T * (np.arange(N + 1, dtype=np.float64) / N) ** r
    t[-1] = T
    return TimeMesh(t, float(T))


def mesh_from_steps(steps, final_time: float | None = None) -> TimeMesh:
    steps = np.asarray(steps, dtype=np.float64)
    if np.any(steps <= 0):
        raise ValueError("all steps must be positive")
    t = np.concatenate(([0.0], np.cumsum(steps)))
    return TimeMesh(t, float(t[-1] if final_time is None else final_time))


def step_ratio(mesh: TimeMesh, n: int) -> float:
    """Local ratio ``rho_n = tau_n / tau_{n+1}``."""
    if not 1 <= n < mesh.num_steps:
        raise ValueError(f"step ratio index {n} needs steps {n} and {n + 1}; "
                         f"mesh has {mesh.num_steps}")
    return mesh.tau(n) / mesh.tau(n + 1)


def append_step(mesh: TimeMesh, dt: float) -> TimeMesh:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    t = np.append(mesh.times, mesh.times[-1] + dt)
    return TimeMesh(t, max(mesh.final_time, float(t[-1])))


@dataclass(frozen=True)
class AdaptiveParams:
    dt_min: float = 1e-4
    dt_max: float = 1e-1
    beta: float = 1e7
    warmup_steps: int = 100

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_max):
            raise ValueError(f"need 0 < dt_min <= dt_max, got {self.dt_min}, {self.dt_max}")
        if self.beta < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        if self.warmup_steps < 0:
            raise ValueError(f"warmup_steps must be non-negative, got {self.warmup_steps}")


def next_dt(E_n: float, E_prev: float, dt_n: float, n: int, params: AdaptiveParams) -> float:
    """Energy-slope controller: small steps while energy moves fast.

    Returns ``dt_min`` during the first ``warmup_steps`` steps, otherwise
    ``max(dt_min, dt_max / sqrt(1 + beta * |(E_n - E_prev)/dt_n|**2))``.
    """
    if not dt_n > 0:
        raise ValueError(f"dt_n must be positive, got {dt_n}")
    if n < params.warmup_steps:
        return params.dt_min
    slope = abs(E_n - E_prev) / dt_n
    # hypot-form keeps huge slopes finite: sqrt(1 + b s^2) = hypot(1, sqrt(b) s)
    denom = math.hypot(1.0, math.sqrt(params.beta) * slope)
    dt = params.dt_max / denom if math.isfinite(denom) else 0.0
    return min(params.dt_max, max(params.dt_min, dt))
