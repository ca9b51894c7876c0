"""Free energy, mass tracking, error norms and observed convergence orders."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral_field import Field, integral, l2_norm, parseval_sq, rfft


@dataclass(frozen=True)
class DiagnosticsRecord:
    n: int
    t: float
    dt: float
    energy: float
    mass: float
    mass_drift: float
    picard_iters: int

    CSV_HEADER = "n,t,dt,energy,mass,mass_drift,picard_iters"

    def csv_row(self) -> str:
        return (f"{self.n},{self.t!r},{self.dt!r},{self.energy!r},{self.mass!r},"
                f"{self.mass_drift!r},{self.picard_iters}")


def gradient_energy(f: Field) -> float:
    """``int |grad phi|^2`` via Parseval, using the same ``|k|^2`` symbol as the Laplacian."""
    g = f.grid
    c = rfft(f.values)
    return g.area * float(np.sum(g.half_weights * g.k2_half * np.abs(c) ** 2))


def bulk_energy(f: Field) -> float:
    return 0.25 * float(np.sum((f.values ** 2 - 1.0) ** 2)) * f.grid.cell_area


def free_energy(f: Field, epsilon: float) -> float:
    """``int eps^2/2 |grad phi|^2 + (phi^2 - 1)^2 / 4``."""
    return 0.5 * epsilon ** 2 * gradient_energy(f) + bulk_energy(f)


def l2_error(f: Field, ref: Field) -> float:
    if f.grid != ref.grid:
        raise ValueError("grid mismatch between field and reference")
    return l2_norm(f - ref)


def estimate_orders(errors, factor: float = 2.0) -> list[float]:
    """``log(e_{j-1}/e_j) / log(factor)`` for consecutive refinement levels."""
    e = np.asarray(errors, dtype=np.float64)
    if e.size < 2:
        raise ValueError("need at least two errors")
    if np.any(~(e > 0)):
        raise ValueError("errors must be positive")
    if not factor > 1:
        raise ValueError(f"refinement factor must exceed 1, got {factor}")
    return [math.log(e[j - 1] / e[j]) / math.log(factor) for j in range(1, e.size)]


def mass_drift(current, initial) -> float:
    """``|int phi^n - int phi^0|``; accepts fields, records or plain masses."""
    def _mass(x):
        if isinstance(x, Field):
            return integral(x)
        if isinstance(x, DiagnosticsRecord):
            return x.mass
        return float(x)
    return abs(_mass(current) - _mass(initial))


def record_for(state, energy_eps: float, mass0: float) -> DiagnosticsRecord:
    f = state.field
    m = integral(f)
    dt = state.tau(state.n) if state.n > 0 else 0.0
    return DiagnosticsRecord(state.n, state.time, dt, free_energy(f, energy_eps), m,
                             abs(m - mass0), state.last_iters)
