"""TFCH1 binary snapshots: one ASCII header line, then raw little-endian float64."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..spectral_field import Field, Grid

MAGIC = "TFCH1"
_MAX_HEADER = 512
_MAX_POINTS = 1 << 32


class SnapshotError(ValueError):
    pass


@dataclass(frozen=True)
class SnapshotMeta:
    t: float
    alpha: float
    seed: int


def write_snapshot(field: Field, meta: SnapshotMeta, path) -> Path:
    g = field.grid
    path = Path(path)
    header = f"{MAGIC} {g.nx} {g.ny} {g.lx!r} {g.ly!r} {float(meta.t)!r} {float(meta.alpha)!r} {int(meta.seed)}\n"
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    tmp = path.with_name(path.name + ".part")
    try:
        with open(tmp, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write snapshot: {exc.strerror}", str(path)) from None
    return path


def read_snapshot(path) -> tuple[Field, SnapshotMeta]:
    path = Path(path)
    data = path.read_bytes()
    nl = data.find(b"\n", 0, _MAX_HEADER)
    if nl < 0:
        raise SnapshotError(f"{path}: no header line found")
    try:
        parts = data[:nl].decode("ascii").split()
    except UnicodeDecodeError:
        raise SnapshotError(f"{path}: header is not ASCII") from None
    if not parts or not parts[0].startswith("TFCH"):
        raise SnapshotError(f"{path}: not a TFCH snapshot")
    if parts[0] != MAGIC:
        raise SnapshotError(f"{path}: unsupported snapshot version {parts[0]!r}")
    if len(parts) != 8:
        raise SnapshotError(f"{path}: malformed header, expected 8 fields, got {len(parts)}")
    try:
        nx, ny = int(parts[1]), int(parts[2])
        lx, ly, t, alpha = (float(p) for p in parts[3:7])
        seed = int(parts[7])
    except ValueError:
        raise SnapshotError(f"{path}: malformed header values") from None
    if nx <= 0 or ny <= 0 or nx * ny > _MAX_POINTS:
        raise SnapshotError(f"{path}: dimensions {nx}x{ny} out of range")
    payload = data[nl + 1:]
    expected = nx * ny * 8
    if len(payload) != expected:
        raise SnapshotError(f"{path}: payload length {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype="<f8").reshape(nx, ny).astype(np.float64)
    try:
        grid = Grid(nx, ny, lx, ly)
    except ValueError as exc:
        raise SnapshotError(f"{path}: {exc}") from None
    return Field(grid, values), SnapshotMeta(t, alpha, seed)
