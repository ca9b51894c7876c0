"""Simulation and convergence-study drivers with file output."""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import _accel
from ..diagnostics import DiagnosticsRecord, estimate_orders, l2_error, record_for
from ..spectral_field import Field, integral
from ..stepper import SolverState, StepFailure, Variant, step
from ..time_mesh import graded_mesh, next_dt, uniform_mesh
from .config import RunConfig
from .initial_conditions import make_initial
from .snapshot import SnapshotMeta, write_snapshot

log = logging.getLogger(__name__)

ENERGY_LOG = "energy.csv"
DT_LOG = "dt.csv"
METADATA = "metadata.json"


@dataclass
class RunResult:
    status: int
    message: str
    state: SolverState
    records: list[DiagnosticsRecord] = field(default_factory=list)
    snapshots: list[tuple[float, float, Path | None]] = field(default_factory=list)
    out_dir: Path | None = None

    @property
    def ok(self) -> bool:
        return self.status == 0

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def dts(self) -> np.ndarray:
        return np.array([r.dt for r in self.records[1:]])


def _fit_to_horizon(dt: float, remaining: float, dt_min: float) -> float:
    """Shorten ``dt`` so the run ends exactly at ``T`` without a sub-``dt_min`` tail."""
    floor = dt_min * (1.0 - 1e-9)  # absorbs roundoff in the accumulated time
    if dt >= remaining:
        return remaining
    if remaining - dt < floor:
        half = 0.5 * remaining
        return half if half >= floor else remaining
    return dt


class _Writer:
    def __init__(self, out_dir: Path | None):
        self.out_dir = out_dir
        self._energy = self._dt = None
        if out_dir is not None:
            try:
                out_dir.mkdir(parents=True, exist_ok=True)
                self._energy = open(out_dir / ENERGY_LOG, "w", encoding="ascii")
                self._dt = open(out_dir / DT_LOG, "w", encoding="ascii")
            except OSError as exc:
                raise OSError(exc.errno, f"cannot create run outputs: {exc.strerror}",
                              exc.filename or str(out_dir)) from None
            self._energy.write(DiagnosticsRecord.CSV_HEADER + "\n")
            self._dt.write("n,t,dt\n")

    def record(self, rec: DiagnosticsRecord):
        if self._energy is not None:
            self._energy.write(rec.csv_row() + "\n")
            if rec.n > 0:
                self._dt.write(f"{rec.n},{rec.t!r},{rec.dt!r}\n")

    def close(self):
        for fh in (self._energy, self._dt):
            if fh is not None:
                fh.close()


def run_simulation(cfg: RunConfig, write: bool = True, progress=None) -> RunResult:
    """Run one simulation to ``cfg.T``; ``progress(record)`` is called after every step."""
    phi0 = make_initial(cfg)
    state = SolverState.initial(phi0, cfg.physical, cfg.variant, cfg.solve)
    mass0 = integral(phi0)
    eps = cfg.physical.epsilon
    out_dir = Path(cfg.out_dir) if write else None
    writer = _Writer(out_dir)
    result = RunResult(0, "ok", state, out_dir=out_dir)
    targets = list(cfg.snapshot_times)
    horizon_tol = 1e-12 * max(1.0, cfg.T)

    def accept():
        rec = record_for(state, eps, mass0)
        result.records.append(rec)
        writer.record(rec)
        while targets and targets[0] <= state.time + horizon_tol:
            target = targets.pop(0)
            path = None
            if out_dir is not None:
                path = out_dir / f"snap_{len(result.snapshots):03d}.tfch"
                write_snapshot(state.field, SnapshotMeta(state.time, cfg.physical.alpha, cfg.seed), path)
            result.snapshots.append((target, state.time, path))
        if progress is not None:
            progress(rec)

    try:
        accept()
        if cfg.mode == "fixed":
            mesh = (graded_mesh(cfg.T, cfg.N, cfg.grading) if cfg.mesh == "graded"
                    else uniform_mesh(cfg.T, cfg.N))
            for tau in mesh.steps:
                step(state, float(tau))
                accept()
        else:
            _run_adaptive(cfg, state, result, accept, horizon_tol)
    except StepFailure as exc:
        result.status, result.message = 1, str(exc)
        log.error("run stopped at t=%.6g: %s", state.time, exc)
    finally:
        writer.close()
        if out_dir is not None:
            _write_metadata(cfg, result, targets)
    return result


def _run_adaptive(cfg: RunConfig, state: SolverState, result: RunResult, accept, horizon_tol):
    prm = cfg.adaptive
    energies = [result.records[-1].energy]
    while state.time < cfg.T - horizon_tol:
        n = state.n
        if n == 0:
            dt = prm.dt_min
        else:
            dt = next_dt(energies[-1], energies[-2], state.tau(n), n, prm)
            if cfg.variant is Variant.RATIO:
                dt = min(dt, 2.0 * state.tau(n))
        dt = _fit_to_horizon(dt, cfg.T - state.time, prm.dt_min)
        while True:
            try:
                step(state, dt)
                break
            except StepFailure as exc:
                if dt <= prm.dt_min:
                    raise
                log.warning("step %d failed at dt=%.3e (%s); halving", n + 1, dt, exc)
                dt = max(0.5 * dt, prm.dt_min)
        accept()
        energies.append(result.records[-1].energy)


def _write_metadata(cfg: RunConfig, result: RunResult, unreached: list[float]):
    meta = {
        "status": result.status,
        "message": result.message,
        "seed": cfg.seed,
        "config": cfg.as_dict(),
        "backend": _accel.BACKEND,
        "steps": result.state.n,
        "final_time": result.state.time,
        "snapshots": [{"target": target, "time": t, "file": p.name if p else None}
                      for target, t, p in result.snapshots],
        "unreached_snapshot_times": unreached,
    }
    path = result.out_dir / METADATA
    try:
        path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write metadata: {exc.strerror}", str(path)) from None


# ---- convergence study ---------------------------------------------------

@dataclass
class StudyRow:
    level: int
    dt: float
    error: float
    order: float | None


def _final_field(cfg: RunConfig, N: int) -> np.ndarray:
    level_cfg = cfg.with_overrides(mode="fixed", mesh="uniform", N=N, snapshot_times=[cfg.T])
    res = run_simulation(level_cfg, write=False)
    if not res.ok:
        raise StepFailure(f"study level with N={N} failed: {res.message}")
    return res.state.phi.copy()


def run_convergence_study(cfg: RunConfig, levels: int, workers: int = 1,
                          write: bool = True) -> list[StudyRow]:
    """Halve the step ``levels`` times; level ``j`` is compared with level ``j+1``."""
    if levels < 3:
        raise ValueError(f"a study needs at least 3 levels, got {levels}")
    Ns = [cfg.N * 2 ** j for j in range(levels + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(_final_field, [cfg] * len(Ns), Ns))
    else:
        finals = [_final_field(cfg, N) for N in Ns]
    g = cfg.grid
    errors = [l2_error(Field(g, finals[j]), Field(g, finals[j + 1])) for j in range(levels)]
    orders = [None] + estimate_orders(errors, 2.0)
    rows = [StudyRow(j, cfg.T / Ns[j], errors[j], orders[j]) for j in range(levels)]
    if write:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "study.csv", "w", encoding="ascii") as fh:
            fh.write("level,dt,error,order\n")
            for r in rows:
                fh.write(f"{r.level},{r.dt!r},{r.error!r},{'' if r.order is None else repr(r.order)}\n")
        (out / METADATA).write_text(json.dumps(
            {"seed": cfg.seed, "config": cfg.as_dict(), "levels": levels, "backend": _accel.BACKEND,
             "reference": "next finer level"}, indent=2) + "\n", encoding="utf-8")
    return rows


def format_study(rows: list[StudyRow]) -> str:
    lines = [f"{'dt':>12} {'l2 error':>12} {'order':>7}"]
    for r in rows:
        order = "" if r.order is None or not math.isfinite(r.order) else f"{r.order:.2f}"
        lines.append(f"{r.dt:12.6g} {r.error:12.4e} {order:>7}")
    return "\n".join(lines)
