"""One step of the fully discrete L1+ convex-splitting scheme.

Given ``phi^{n-1}``, ``phi^{n-2}`` and the increment history, the new field
``phi^n`` solves

    abar^n_0 (phi^n - phi^{n-1}) + H = M Lap_h mu,
    mu = -(eps^2/2) Lap_h (phi^{n-1} + phi^n)
         + (phi^{n-1} + phi^n)((phi^n)^2 + (phi^{n-1})^2) / 4 - X,

where ``H`` is the L1+ memory sum over the older increments and ``X`` the
explicit extrapolant of the concave part. The nonlinear system is solved
by a stabilised fixed-point (Picard) iteration: the linear fourth-order part
is implicit per Fourier mode, the cubic term is lagged.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .fractional_kernels import KernelRow, l1plus_row
from .spectral_field import Field, Grid, irfft, laplacian, l2_norm, parseval_sq, rfft
from .time_mesh import TimeMesh

CLAMP = 1.5


class StepFailure(RuntimeError):
    """The nonlinear solve did not converge; retry with a smaller step."""


class NumericalBlowup(StepFailure):
    """Non-finite values appeared during a step."""


class RatioConstraintError(ValueError):
    """Ratio-corrected extrapolation requested with ``tau_{n-1}/tau_n < 0.5``."""


class Variant(str, enum.Enum):
    STANDARD = "standard"
    RATIO = "ratio"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower()
        aliases = {"standard": cls.STANDARD, "ratio": cls.RATIO, "ratio_corrected": cls.RATIO,
                   "ratiocorrected": cls.RATIO}
        if v not in aliases:
            raise ValueError(f"unknown variant {value!r} (expected 'standard' or 'ratio')")
        return aliases[v]


@dataclass(frozen=True)
class PhysicalParams:
    alpha: float
    mobility: float
    epsilon: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.mobility > 0:
            raise ValueError(f"mobility must be positive, got {self.mobility}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class NonlinearSolveConfig:
    """Fixed-point solver settings.

    ``stabilization`` is the constant ``S`` in the splitting
    ``N(v) = S v + (N(v) - S v)``; ``None`` picks half the largest pointwise
    slope of the cubic at the initial guess, which keeps the iteration
    contractive. ``S = 0`` is the unstabilised iteration.
    """

    tol: float = 1e-10
    max_iters: int = 500
    damping: float = 1.0
    stabilization: float | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if self.stabilization is not None and self.stabilization < 0:
            raise ValueError(f"stabilization must be non-negative, got {self.stabilization}")


@dataclass
class SolverState:
    grid: Grid
    params: PhysicalParams
    variant: Variant
    solve: NonlinearSolveConfig
    times: list[float]
    phi: np.ndarray
    phi_prev: np.ndarray
    _hist: np.ndarray = field(repr=False)
    n: int = 0
    last_iters: int = 0
    last_residual: float = 0.0

    @classmethod
    def initial(cls, phi0: Field, params: PhysicalParams, variant=Variant.STANDARD,
                solve: NonlinearSolveConfig | None = None, capacity: int = 64) -> "SolverState":
        if not phi0.is_finite():
            raise ValueError("initial field contains non-finite values")
        v = phi0.values.copy()
        return cls(phi0.grid, params, Variant.parse(variant), solve or NonlinearSolveConfig(),
                   [0.0], v, v.copy(), np.empty((capacity, v.size)))

    @property
    def mesh(self) -> TimeMesh:
        return TimeMesh(np.array(self.times), self.times[-1])

    @property
    def time(self) -> float:
        return self.times[-1]

    @property
    def field(self) -> Field:
        return Field(self.grid, self.phi.copy())

    @property
    def history(self) -> np.ndarray:
        """Increments ``phi^k - phi^{k-1}``, ``k = 1..n``, shape ``(n, nx, ny)``."""
        return self._hist[: self.n].reshape((self.n,) + self.grid.shape)

    def tau(self, k: int) -> float:
        return self.times[k] - self.times[k - 1]

    def mesh_with(self, tau_n: float) -> TimeMesh:
        return TimeMesh(np.array(self.times + [self.times[-1] + tau_n]), self.times[-1] + tau_n)

    def _push(self, phi_new: np.ndarray, tau_n: float):
        if self.n == self._hist.shape[0]:
            grown = np.empty((2 * self._hist.shape[0], self._hist.shape[1]))
            grown[: self.n] = self._hist[: self.n]
            self._hist = grown
        self._hist[self.n] = (phi_new - self.phi).ravel()
        self.phi_prev = self.phi
        self.phi = phi_new
        self.times.append(self.times[-1] + tau_n)
        self.n += 1


def _check_tau(tau_n):
    if not (tau_n > 0 and math.isfinite(tau_n)):
        raise ValueError(f"tau_n must be positive and finite, got {tau_n}")


def extrapolant(state: SolverState, tau_n: float | None = None) -> Field:
    """Explicit part of the concave term at the step producing ``phi^{state.n+1}``.

    Standard: ``3/2 phi^{n-1} - 1/2 phi^{n-2}``. Ratio-corrected:
    ``phi^{n-1} + (phi^{n-1} - phi^{n-2}) / (2 rho_{n-1})`` with
    ``rho_{n-1} = tau_{n-1}/tau_n >= 0.5``. At the first step
    ``phi^{-1} = phi^0`` and both reduce to ``phi^0``.
    """
    p1, p2 = state.phi, state.phi_prev
    if state.variant is Variant.STANDARD:
        return Field(state.grid, 1.5 * p1 - 0.5 * p2)
    if state.n == 0:
        return Field(state.grid, p1.copy())
    if tau_n is None:
        raise ValueError("ratio-corrected extrapolation needs the proposed step tau_n")
    _check_tau(tau_n)
    rho = state.tau(state.n) / tau_n
    if rho < 0.5:
        raise RatioConstraintError(
            f"step ratio rho = {rho:.6g} < 0.5 (tau_n = {tau_n:.6g} exceeds twice the previous step)")
    return Field(state.grid, p1 + (p1 - p2) / (2.0 * rho))


def chemical_potential(candidate: Field, state: SolverState, tau_n: float | None = None) -> Field:
    if candidate.grid != state.grid:
        raise ValueError("candidate grid does not match state grid")
    eps2 = state.params.epsilon ** 2
    p = state.phi
    v = candidate.values
    lap_sum = laplacian(Field(state.grid, p + v)).values
    cubic, _ = _accel.impl.cubic_terms(v, p)
    return Field(state.grid, -0.5 * eps2 * lap_sum + cubic - extrapolant(state, tau_n).values)


def history_term(state: SolverState, row: KernelRow) -> Field:
    """Known memory part ``sum_{k<n} abar^n_{n-k} (phi^k - phi^{k-1})``."""
    if row.n != state.n + 1:
        raise ValueError(f"row built for step {row.n}, state expects step {state.n + 1}")
    out = np.empty(state.phi.size)
    _accel.impl.history_sum(row.coeffs, state._hist, state.n, out)
    return Field(state.grid, out.reshape(state.grid.shape))


@dataclass
class StepSystem:
    """Per-step linear data for the fixed-point solve (Fourier half spectrum)."""

    state: SolverState
    tau_n: float
    row: KernelRow
    a0: float
    H: np.ndarray
    H_norm: float
    extrap: np.ndarray
    base_hat: np.ndarray
    lin: np.ndarray  # a0 + M eps^2/2 |k|^4
    mk2: np.ndarray  # M |k|^2
    stab: float = 0.0

    def residual_hat(self, v_hat: np.ndarray, cubic_hat: np.ndarray) -> np.ndarray:
        return self.lin * v_hat - self.base_hat + self.mk2 * cubic_hat

    def residual_norm(self, v_hat, cubic_hat) -> float:
        return math.sqrt(parseval_sq(self.residual_hat(v_hat, cubic_hat), self.state.grid))


def assemble(state: SolverState, tau_n: float, row: KernelRow | None = None) -> StepSystem:
    _check_tau(tau_n)
    g = state.grid
    prm = state.params
    if row is None:
        row = l1plus_row(state.mesh_with(tau_n), state.n + 1, prm.alpha)
    a0 = row.a0
    H = history_term(state, row).values
    X = extrapolant(state, tau_n).values
    k2 = g.k2_half
    mk2 = prm.mobility * k2
    half_e2 = 0.5 * prm.epsilon ** 2
    p_hat = rfft(state.phi)
    base_hat = a0 * p_hat - rfft(H) - mk2 * (half_e2 * k2 * p_hat - rfft(X))
    lin = a0 + mk2 * half_e2 * k2
    return StepSystem(state, tau_n, row, a0, H, l2_norm(Field(g, H)), X, base_hat, lin, mk2)


def picard_iterate(candidate: Field, system: StepSystem, cubic_hat: np.ndarray | None = None,
                   damping: float = 1.0) -> Field:
    """One fixed-point update.

    Solves, mode by mode,
    ``(a0 + M eps^2/2 |k|^4 + S M |k|^2) v = base - M |k|^2 (F[N(c)] - S c)``
    with the cubic ``N`` lagged at the candidate ``c``, then blends
    ``v <- damping * v + (1 - damping) * c``.
    """
    st = system.state
    c = candidate.values
    if cubic_hat is None:
        cubic_hat = rfft(_accel.impl.cubic_terms(c, st.phi)[0])
    c_hat = rfft(c) if system.stab else 0.0
    rhs = system.base_hat - system.mk2 * (cubic_hat - system.stab * c_hat)
    v = irfft(rhs / (system.lin + system.stab * system.mk2), st.grid)
    if damping != 1.0:
        v = damping * v + (1.0 - damping) * c
    return Field(st.grid, v)


def residual(state: SolverState, phi_n: Field, tau_n: float) -> Field:
    """Physical-space residual of the step equation, built from the operator definitions."""
    system = assemble(state, tau_n)
    mu = chemical_potential(phi_n, state, tau_n)
    lhs = system.a0 * (phi_n.values - state.phi) + system.H
    return Field(state.grid, lhs - state.params.mobility * laplacian(mu).values)


def solve_step(system: StepSystem, guess: np.ndarray | None = None) -> tuple[np.ndarray, int, float]:
    """Iterate to convergence; returns ``(phi_n, iterations, residual_norm)``."""
    st = system.state
    cfg = st.solve
    g = st.grid
    cubic = _accel.impl.cubic_terms
    v = np.clip(system.extrap if guess is None else guess, -CLAMP, CLAMP)
    Nv, dN = cubic(v, st.phi)
    if cfg.stabilization is None:
        system.stab = 0.5 * float(max(dN.max(), cubic(st.phi, st.phi)[1].max()))
    else:
        system.stab = cfg.stabilization
    Nv_hat = rfft(Nv)
    v_norm = l2_norm(Field(g, v))
    res = math.inf
    for it in range(1, cfg.max_iters + 1):
        w = picard_iterate(Field(g, v), system, Nv_hat, cfg.damping).values
        if not np.isfinite(w).all():
            raise NumericalBlowup(f"non-finite iterate at step {st.n + 1}, iteration {it}")
        inc = l2_norm(Field(g, w - v))
        w_hat = rfft(w)
        Nv_hat = rfft(cubic(w, st.phi)[0])
        res = system.residual_norm(w_hat, Nv_hat)
        w_norm = l2_norm(Field(g, w))
        if inc <= cfg.tol * max(1.0, v_norm) and res <= cfg.tol * (system.a0 * w_norm + system.H_norm):
            return w, it, res
        v, v_norm = w, w_norm
    raise StepFailure(f"fixed-point solve did not converge in {cfg.max_iters} iterations at step "
                      f"{st.n + 1} (tau = {system.tau_n:.3e}, residual {res:.3e})")


def step(state: SolverState, tau_n: float) -> SolverState:
    """Advance ``state`` in place by one step of size ``tau_n`` and return it.

    On failure the state is left untouched so the caller can retry.
    """
    system = assemble(state, tau_n)
    phi_new, iters, res = solve_step(system)
    state._push(phi_new, tau_n)
    state.last_iters = iters
    state.last_residual = res
    return state


def run_mesh(state: SolverState, mesh: TimeMesh, callback=None) -> SolverState:
    """Step through every interval of ``mesh`` (which must start at the state's time)."""
    steps = mesh.steps
    for k in range(state.n, steps.size):
        step(state, float(steps[k]))
        if callback is not None:
            callback(state)
    return state
