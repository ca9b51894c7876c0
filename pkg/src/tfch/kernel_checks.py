"""Quadrature oracles for the convolution weights and the ``verify-kernels`` suite.

The oracles integrate the defining integrals numerically and never touch the
closed-form differences used in production. Distances to the singular point
are always built as exact float differences of mesh points plus a local
offset so that tiny steps late in a run keep full relative accuracy.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .fractional_kernels import kernel_rows, l1_row, l1_uniform_reference, l1plus_row, psd_quadratic_form
from .time_mesh import TimeMesh, mesh_from_steps, uniform_mesh

_Q = dict(epsabs=0.0, epsrel=1e-13, limit=200)


def _power_integral(upper: float, alpha: float) -> float:
    """``int_0^upper u**-alpha du`` with the algebraic-weight rule."""
    if upper <= 0.0:
        return 0.0
    return integrate.quad(lambda u: 1.0, 0.0, upper, weight="alg", wvar=(-alpha, 0.0), **_Q)[0]


def _segment_integral(near: float, far: float, width: float, alpha: float) -> float:
    """``int u**-alpha`` over ``u in (near, far)``, ``far - near == width``."""
    if near > 0.5 * far:
        return integrate.quad(lambda w: (near + w) ** (-alpha), 0.0, width, **_Q)[0]
    return _power_integral(far, alpha) - _power_integral(near, alpha)


def l1_quadrature(times, n: int, alpha: float) -> np.ndarray:
    t = np.asarray(times, dtype=np.float64)
    g = math.gamma(1.0 - alpha)
    out = np.empty(n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for k in range(1, n + 1):
            tk = t[k] - t[k - 1]
            out[k - 1] = _segment_integral(t[n] - t[k], t[n] - t[k - 1], tk, alpha) / (g * tk)
    return out


def l1plus_quadrature(times, n: int, alpha: float) -> np.ndarray:
    """Two-dimensional adaptive quadrature of the L1+ weight integrals."""
    t = np.asarray(times, dtype=np.float64)
    g = math.gamma(1.0 - alpha)
    tau_n = t[n] - t[n - 1]
    out = np.empty(n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for k in range(1, n):
            tk = t[k] - t[k - 1]
            d_far, d_near = t[n - 1] - t[k - 1], t[n - 1] - t[k]
            val = integrate.quad(lambda v: _segment_integral(d_near + v, d_far + v, tk, alpha),
                                 0.0, tau_n, **_Q)[0]
            out[k - 1] = val / (g * tk * tau_n)
        val = integrate.quad(lambda v: _power_integral(v, alpha), 0.0, tau_n, **_Q)[0]
        out[n - 1] = val / (g * tau_n * tau_n)
    return out


def random_mesh(rng: np.random.Generator, n: int, ratio_lo: float = 0.1, ratio_hi: float = 10.0) -> TimeMesh:
    """Mesh whose consecutive step ratios are log-uniform in ``[ratio_lo, ratio_hi]``."""
    ratios = np.exp(rng.uniform(math.log(ratio_lo), math.log(ratio_hi), n))
    steps = np.cumprod(ratios)
    steps = steps / steps.sum() * rng.uniform(0.01, 1.0)
    return mesh_from_steps(steps)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3e} (tol {self.tolerance:.1e})"


ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def check_closed_form(samples: int = 100, seed: int = 0, tol: float = 1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 31))
        alpha = float(rng.choice(ALPHAS))
        mesh = random_mesh(rng, n)
        c = l1plus_row(mesh, n, alpha).coeffs
        q = l1plus_quadrature(mesh.times, n, alpha)
        worst = max(worst, float(np.max(np.abs(c - q) / np.abs(q))))
    return CheckResult("L1+ closed form vs 2-D quadrature (max rel)", worst <= tol, worst, tol)


def check_uniform_l1(tol: float = 1e-13) -> CheckResult:
    worst = 0.0
    for alpha in ALPHAS:
        for tau, N in ((1.0, 40), (1e-3, 25), (0.37, 12)):
            mesh = uniform_mesh(tau * N, N)
            for n in range(1, N + 1):
                c = l1_row(mesh, n, alpha).coeffs
                ref = l1_uniform_reference(tau, n, alpha)
                worst = max(worst, float(np.max(np.abs(c - ref) / ref)))
    return CheckResult("uniform L1 vs textbook formula (max rel)", worst <= tol, worst, tol)


def check_l1_quadrature(samples: int = 40, seed: int = 1, tol: float = 1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 31))
        alpha = float(rng.choice(ALPHAS))
        mesh = random_mesh(rng, n)
        c = l1_row(mesh, n, alpha).coeffs
        q = l1_quadrature(mesh.times, n, alpha)
        worst = max(worst, float(np.max(np.abs(c - q) / q)))
    return CheckResult("L1 closed form vs quadrature (max rel)", worst <= tol, worst, tol)


def check_linear_exactness(samples: int = 50, seed: int = 2, tol: float = 1e-12) -> CheckResult:
    """phi(t) = t: L1 gives t_n^(1-a)/G(2-a); L1+ gives the interval mean of that."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        N = int(rng.integers(1, 31))
        alpha = float(rng.choice(ALPHAS))
        mesh = random_mesh(rng, N)
        t = mesh.times
        for n in range(1, N + 1):
            inc = np.diff(t[: n + 1])
            exact = t[n] ** (1 - alpha) / math.gamma(2 - alpha)
            got = float(l1_row(mesh, n, alpha).coeffs @ inc)
            worst = max(worst, abs(got - exact) / exact)
            # interval mean of t^(1-a)/G(2-a) over (t_{n-1}, t_n), by quadrature
            mean = integrate.quad(lambda s: s ** (1 - alpha), t[n - 1], t[n], **_Q)[0]
            exact_avg = mean / (math.gamma(2 - alpha) * (t[n] - t[n - 1]))
            got = float(l1plus_row(mesh, n, alpha).coeffs @ inc)
            worst = max(worst, abs(got - exact_avg) / exact_avg)
    return CheckResult("linear-function exactness L1 / L1+ (max rel)", worst <= tol, worst, tol)


def check_psd(samples: int = 250, seed: int = 3, tol: float = 1e-12) -> CheckResult:
    """Most negative ``Q(w) / (|w|^2 max coeff)`` seen over random meshes and sequences."""
    rng = np.random.default_rng(seed)
    worst = math.inf
    for i in range(samples):
        alpha = (0.1, 0.3, 0.5, 0.7, 0.9)[i % 5]
        n = int(rng.integers(1, 41))
        mesh = random_mesh(rng, n)
        rows = kernel_rows(mesh, alpha)
        w = rng.standard_normal(n)
        if i % 3 == 0:
            w = np.cumsum(w)  # smooth-ish sequences probe the small eigenvalues
        scale = float(w @ w) * max(float(r.coeffs.max()) for r in rows)
        worst = min(worst, psd_quadratic_form(rows, w) / scale)
    return CheckResult("L1+ quadratic form >= 0 (min normalised value)", worst >= -tol, worst, tol)


def check_positivity(samples: int = 100, seed: int = 4) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_pos = math.inf
    mono_ok = True
    for _ in range(samples):
        n = int(rng.integers(1, 31))
        alpha = float(rng.choice(ALPHAS))
        mesh = random_mesh(rng, n)
        plus = l1plus_row(mesh, n, alpha).coeffs
        l1 = l1_row(mesh, n, alpha).coeffs
        worst_pos = min(worst_pos, float(plus.min()), float(l1.min()))
        # newer increments weigh at least as much: a^n_{n-k-1} >= a^n_{n-k}
        mono_ok &= bool(np.all(np.diff(l1) >= -1e-15 * l1[1:]))
    return CheckResult("kernel positivity and L1 monotonicity (min coeff)",
                       worst_pos > 0 and mono_ok, worst_pos, 0.0)


def run_all(samples: int = 100, seed: int = 0) -> list[CheckResult]:
    return [
        check_closed_form(samples, seed),
        check_uniform_l1(),
        check_l1_quadrature(seed=seed + 1),
        check_linear_exactness(seed=seed + 2),
        check_psd(seed=seed + 3),
        check_positivity(seed=seed + 4),
    ]
