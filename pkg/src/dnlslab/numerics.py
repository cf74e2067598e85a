"""
Periodic grid, Fourier calculus, quadrature and norms.

The real line is replaced by the periodic box [-L, L) sampled at N
equispaced nodes. Derivatives are computed by multiplying Fourier modes
with (i k)^order and integrals use the rectangle rule, which is
spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatch, NotPowerOfTwo

SNAPSHOT_MAGIC = b"DNLS"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIQd")


@dataclass(frozen=True)
class GridSpec:
    half_length: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
            raise NotPowerOfTwo(f"N must be a power of two >= 16, got {n}")
        if not self.half_length > 0:
            raise ValueError(f"half length must be positive, got {self.half_length}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @property
    def period(self) -> float:
        return 2.0 * self.half_length

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_length + self.spacing * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers in FFT order (pi j / L)."""
        k = sfft.fftfreq(self.n_points, d=self.spacing) * 2.0 * np.pi
        k.flags.writeable = False
        return k

    @property
    def k_max(self) -> float:
        return np.pi * self.n_points / self.period

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True for modes kept by the 2/3 rule."""
        j = np.abs(sfft.fftfreq(self.n_points) * self.n_points)
        m = j < self.n_points / 3.0
        m.flags.writeable = False
        return m


@dataclass(frozen=True, eq=False)
class Field:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other, self.grid))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other, self.grid))

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _vals(f, grid: GridSpec | None = None) -> np.ndarray:
    if isinstance(f, Field):
        if grid is not None and f.grid != grid:
            raise GridMismatch(f"{f.grid} vs {grid}")
        return f.values
    return np.asarray(f)


def make_grid(half_length: float, n_points: int) -> GridSpec:
    return GridSpec(float(half_length), int(n_points))


def diff(values: np.ndarray, grid: GridSpec, order: int = 1) -> np.ndarray:
    """Spectral derivative of a raw array; real input gives real output."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    mult = (1j * grid.k) ** order
    if order == 1:
        # The Nyquist mode has no odd derivative on a symmetric spectrum.
        mult = mult.copy()
        mult[grid.n_points // 2] = 0.0
    out = sfft.ifft(mult * sfft.fft(values))
    if np.isrealobj(values):
        return out.real
    return out


def spectral_derivative(f: Field, order: int = 1) -> Field:
    return f.with_values(diff(f.values, f.grid, order))


def integrate(f) -> complex:
    if isinstance(f, Field):
        return complex(f.grid.spacing * np.sum(f.values))
    raise TypeError("integrate expects a Field; use quad() for raw arrays")


def quad(values: np.ndarray, grid: GridSpec):
    """Rectangle rule on raw arrays."""
    return grid.spacing * np.sum(values)


def norm(f: Field, kind: str = "L2") -> float:
    v = f.values
    kind = kind.upper()
    if kind == "L2":
        return float(np.sqrt(quad(np.abs(v) ** 2, f.grid)))
    if kind == "H1":
        vx = diff(v, f.grid, 1)
        return float(np.sqrt(quad(np.abs(v) ** 2 + np.abs(vx) ** 2, f.grid)))
    if kind == "LINF":
        return float(np.max(np.abs(v))) if v.size else 0.0
    raise ValueError(f"unknown norm kind {kind!r}")


def h1_norm(values: np.ndarray, grid: GridSpec) -> float:
    vx = diff(values, grid, 1)
    return float(np.sqrt(quad(np.abs(values) ** 2 + np.abs(vx) ** 2, grid)))


def l2_norm(values: np.ndarray, grid: GridSpec) -> float:
    return float(np.sqrt(quad(np.abs(values) ** 2, grid)))


def inner_re(f: Field, g: Field) -> float:
    """Re of the integral of f times conj(g)."""
    if f.grid != g.grid:
        raise GridMismatch(f"{f.grid} vs {g.grid}")
    return float(quad(np.real(f.values * np.conj(g.values)), f.grid))


def save_field(f: Field, path) -> None:
    """Write the binary snapshot: header then interleaved (re, im) doubles."""
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, f.grid.n_points, f.grid.half_length)
    body = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def load_field(path) -> Field:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, n, half = _HEADER.unpack_from(raw, 0)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    body = raw[_HEADER.size:]
    if len(body) != 16 * n:
        raise ValueError(f"snapshot body has {len(body)} bytes, expected {16 * n}")
    values = np.frombuffer(body, dtype="<c16").astype(complex)
    return Field(make_grid(half, n), values)
