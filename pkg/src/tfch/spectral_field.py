"""Periodic 2-D grid fields and Fourier pseudospectral operators.

Values are stored with shape ``(nx, ny)`` so that ``values[j, k]`` samples
the field at ``(x_j, y_k) = (j*hx, k*hy)``. Transforms use the ``forward``
normalisation, so the zero mode of a field equals its mean.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        for name in ("nx", "ny"):
            v = getattr(self, name)
            if int(v) != v or v <= 0 or v % 2:
                raise ValueError(f"{name} must be a positive even integer, got {v}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError(f"domain lengths must be positive, got {self.lx}, {self.ly}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @property
    def cell_area(self) -> float:
        return self.area / (self.nx * self.ny)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.nx) * self.hx
        y = np.arange(self.ny) * self.hy
        return np.meshgrid(x, y, indexing="ij")

    # wavenumber tables are cached on the instance (frozen dataclasses keep a __dict__)
    @cached_property
    def kx(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.nx, d=self.hx)

    @cached_property
    def ky(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.ny, d=self.hy)

    @cached_property
    def ky_half(self) -> np.ndarray:
        return 2 * np.pi * np.fft.rfftfreq(self.ny, d=self.hy)

    @cached_property
    def k2_half(self) -> np.ndarray:
        """``|kappa|^2`` on the real-FFT half spectrum, shape ``(nx, ny//2+1)``."""
        return self.kx[:, None] ** 2 + self.ky_half[None, :] ** 2

    @cached_property
    def k2_full(self) -> np.ndarray:
        return self.kx[:, None] ** 2 + self.ky[None, :] ** 2

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Multiplicity of each half-spectrum mode in the full spectrum (for Parseval)."""
        w = np.full(self.k2_half.shape, 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0  # ny even: last column is the Nyquist mode
        return w




@dataclass
class Field:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        self.values = v

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        x, y = grid.coords()
        return cls(grid, np.broadcast_to(fn(x, y), grid.shape).astype(np.float64))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(c)))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def _binary(self, other, op):
        if isinstance(other, Field):
            _same_grid(self, other)
            other = other.values
        return Field(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)


@dataclass
class SpectralField:
    """Full complex spectrum; ``coefficients[i, j]`` is mode ``(fftfreq(nx)[i], fftfreq(ny)[j])``."""

    grid: Grid
    coefficients: np.ndarray = field(repr=False)


def _same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError(f"grid mismatch: {f.grid} vs {g}")
    return g


# ---- array-level helpers (used by the stepper on raw ndarrays) -----------

def rfft(values: np.ndarray) -> np.ndarray:
    return sfft.rfft2(values, norm="forward")


def irfft(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return sfft.irfft2(coeffs, s=grid.shape, norm="forward")


def parseval_sq(coeffs_half: np.ndarray, grid: Grid) -> float:
    """``int |u|^2`` from half-spectrum coefficients of a real field."""
    return grid.area * float(np.sum(grid.half_weights * np.abs(coeffs_half) ** 2))


# ---- public operations ---------------------------------------------------

def to_spectral(f: Field) -> SpectralField:
    return SpectralField(f.grid, sfft.fft2(f.values, norm="forward"))


def from_spectral(F: SpectralField) -> Field:
    if F.coefficients.shape != F.grid.shape:
        raise ValueError("coefficient array does not match grid")
    return Field(F.grid, sfft.ifft2(F.coefficients, norm="forward").real)


def laplacian(f: Field) -> Field:
    g = f.grid
    return Field(g, irfft(-g.k2_half * rfft(f.values), g))


def gradient(f: Field) -> tuple[Field, Field]:
    """Spectral gradient; the Nyquist multipliers are zeroed."""
    g = f.grid
    c = rfft(f.values)
    kx = g.kx.copy()
    kx[g.nx // 2] = 0.0
    ky = g.ky_half.copy()
    ky[-1] = 0.0
    dx = irfft(1j * kx[:, None] * c, g)
    dy = irfft(1j * ky[None, :] * c, g)
    return Field(g, dx), Field(g, dy)


def integral(f: Field) -> float:
    return float(np.sum(f.values)) * f.grid.cell_area


def mean(f: Field) -> float:
    return float(np.mean(f.values))


def l2_inner(f: Field, g: Field) -> float:
    _same_grid(f, g)
    return float(np.vdot(f.values, g.values)) * f.grid.cell_area


def l2_norm(f: Field) -> float:
    return float(np.sqrt(l2_inner(f, f)))


def _require_zero_mean(f: Field, what: str):
    m = mean(f)
    rms = l2_norm(f) / np.sqrt(f.grid.area)
    if abs(m) > 1e-12 * max(rms, np.finfo(float).tiny):
        raise ValueError(f"{what} needs a zero-mean field, got mean {m:.3e}")


def neg_inv_laplacian(f: Field) -> Field:
    """Zero-mean solution of ``-Lap(phi) = f``; ``f`` must have zero mean."""
    _require_zero_mean(f, "neg_inv_laplacian")
    g = f.grid
    c = rfft(f.values)
    k2 = g.k2_half.copy()
    k2[0, 0] = 1.0
    c = c / k2
    c[0, 0] = 0.0
    return Field(g, irfft(c, g))


def hminus1_norm(f: Field) -> float:
    _require_zero_mean(f, "hminus1_norm")
    return float(np.sqrt(max(l2_inner(f, neg_inv_laplacian(f)), 0.0)))
