"""Discrete Caputo-derivative convolution weights (L1 and L1+) on arbitrary meshes.

Row ``n`` holds the weights multiplying the increments
``phi^k - phi^{k-1}``, ``k = 1..n``; ``coeffs[k-1]`` pairs with increment ``k``.
The L1 row approximates the Caputo derivative at ``t_n``; the L1+ row
approximates its average over ``(t_{n-1}, t_n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .time_mesh import TimeMesh


def omega(beta: float, t):
    """Riemann-Liouville weight ``t**(beta-1) / Gamma(beta)``."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0):
        raise ValueError("omega is defined for t >= 0")
    if beta <= 1 and np.any(t_arr == 0):
        if beta == 1:
            # t**0 is 1 away from zero; the limit is taken only for beta > 1
            raise ValueError("omega(1, 0) is ambiguous (0**0)")
        raise ValueError(f"omega_{beta} is singular at t = 0")
    out = t_arr ** (beta - 1.0) / math.gamma(beta)
    return float(out) if np.ndim(t) == 0 else out


@dataclass(frozen=True)
class KernelRow:
    alpha: float
    n: int
    coeffs: np.ndarray
    kind: str = "l1plus"
    times: np.ndarray | None = None

    @property
    def a0(self) -> float:
        """Weight on the newest increment (``a^n_0``)."""
        return float(self.coeffs[-1])


def _check(mesh: TimeMesh, n: int, alpha: float):
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if int(n) != n or not 1 <= n <= mesh.num_steps:
        raise ValueError(f"step index {n} out of range 1..{mesh.num_steps}")


def l1_row(mesh: TimeMesh, n: int, alpha: float) -> KernelRow:
    """L1 weights ``a^n_{n-k} = (1/tau_k) int_{t_{k-1}}^{t_k} omega_{1-alpha}(t_n - s) ds``."""
    _check(mesh, n, alpha)
    coeffs = _accel.impl.l1_coeffs(mesh.times, int(n), float(alpha), math.gamma(2.0 - alpha))
    return KernelRow(float(alpha), int(n), coeffs, "l1", mesh.times[: n + 1])


def l1plus_row(mesh: TimeMesh, n: int, alpha: float) -> KernelRow:
    """L1+ weights in closed form.

    ``abar^n_{n-k}`` is the double integral of ``omega_{1-alpha}(t-s)`` over
    ``t in (t_{n-1}, t_n)``, ``s in (t_{k-1}, min(t, t_k))`` scaled by
    ``1/(tau_k tau_n)``. Integrating twice gives a mixed second difference of
    ``omega_{3-alpha}`` for ``k < n`` and ``tau_n**-alpha / Gamma(3-alpha)``
    for ``k = n``.
    """
    _check(mesh, n, alpha)
    coeffs = _accel.impl.l1plus_coeffs(mesh.times, int(n), float(alpha), math.gamma(3.0 - alpha))
    return KernelRow(float(alpha), int(n), coeffs, "l1plus", mesh.times[: n + 1])


def l1_uniform_reference(tau: float, n: int, alpha: float) -> np.ndarray:
    """Textbook uniform-step L1 weights, ordered like :func:`l1_row`."""
    j = np.arange(n, 0, -1, dtype=np.float64)  # n-k+1 for k = 1..n
    g = math.gamma(2.0 - alpha)
    return ((j ** (1 - alpha)) - (j - 1) ** (1 - alpha)) / g / tau ** alpha


def apply_row(row: KernelRow, increments) -> float | np.ndarray:
    """``sum_k coeffs[k-1] * increments[k-1]``; increments may carry trailing field axes."""
    inc = np.asarray(increments, dtype=np.float64)
    if inc.shape[0] != row.n:
        raise ValueError(f"row has {row.n} weights, got {inc.shape[0]} increments")
    return np.tensordot(row.coeffs, inc, axes=1) if inc.ndim > 1 else float(row.coeffs @ inc)


def kernel_rows(mesh: TimeMesh, alpha: float, kind: str = "l1plus") -> list[KernelRow]:
    build = l1plus_row if kind == "l1plus" else l1_row
    return [build(mesh, n, alpha) for n in range(1, mesh.num_steps + 1)]


def psd_quadratic_form(rows, w) -> float:
    """``sum_k w_k sum_{j<=k} abar^k_{k-j} w_j`` for rows built on one mesh."""
    w = np.asarray(w, dtype=np.float64)
    if len(rows) != w.size:
        raise ValueError(f"{len(rows)} rows for {w.size} weights")
    ref = rows[-1].times if rows else None
    total = 0.0
    for k, row in enumerate(rows, start=1):
        if row.n != k:
            raise ValueError(f"row {k} was built for step {row.n}")
        if ref is not None and row.times is not None and not np.array_equal(row.times, ref[: k + 1]):
            raise ValueError("rows were built on different meshes")
        total += w[k - 1] * float(row.coeffs @ w[:k])
    return total
