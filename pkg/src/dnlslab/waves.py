"""
Traveling waves of the 3/4-gauge derivative NLS.

For c^2 < 4 omega the modulus profile is

    phi(x) = [ sqrt(omega) / (4 omega - c^2) * (cosh(sqrt(4 omega - c^2) x) - c / (2 sqrt(omega))) ]^(-1/2)

and the traveling wave is R(x) = phi(x - x0) exp(i (gamma + c (x - x0) / 2)).
On the periodic box we place the wave together with its two nearest
periodic images, so the grid function is smooth across the seam at +-L.
Without the images the tail value at the seam shows up as a derivative
jump that spectral differentiation amplifies by k_max^2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import RegimeUnsupported, StepBreaksRegime, TailTooFat
from .numerics import Field, GridSpec, diff

TWO_PI = 2.0 * math.pi
DEFAULT_TAIL_TOL = 1e-6
_IMAGES = (-1, 0, 1)


class Regime(enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL_POSITIVE = "critical-positive"
    NONE = "none"


@dataclass(frozen=True)
class WaveParams:
    omega: float
    c: float
    x0: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma) % TWO_PI)

    def shifted(self, **changes) -> "WaveParams":
        return replace(self, **changes)

    def as_tuple(self):
        return (self.omega, self.c, self.x0, self.gamma)


def classify_regime(omega: float, c: float) -> Regime:
    gap = 4.0 * omega - c * c
    if abs(gap) <= 1e-12 * max(1.0, c * c) and c > 0:
        return Regime.CRITICAL_POSITIVE
    if gap > 0:
        return Regime.SUBCRITICAL
    return Regime.NONE


def _require(omega, c, allowed=(Regime.SUBCRITICAL, Regime.CRITICAL_POSITIVE)) -> Regime:
    regime = classify_regime(omega, c)
    if regime not in allowed:
        raise RegimeUnsupported(f"(omega, c) = ({omega}, {c}) is {regime.value}")
    return regime


def decay_rate(omega: float, c: float) -> float:
    """Exponential decay rate of phi, sqrt(4 omega - c^2) / 2."""
    return 0.5 * math.sqrt(max(4.0 * omega - c * c, 0.0))


def phi_line(omega: float, c: float, x) -> np.ndarray:
    """phi evaluated at arbitrary points of the real line (no periodization)."""
    regime = _require(omega, c)
    x = np.asarray(x, dtype=float)
    if regime is Regime.CRITICAL_POSITIVE:
        return 2.0 * math.sqrt(c) / np.sqrt(c * c * x * x + 1.0)
    gap = 4.0 * omega - c * c
    s = math.sqrt(gap)
    ax = np.abs(s * x)
    b = c / (2.0 * math.sqrt(omega))
    pref = math.sqrt(omega) / gap
    # cosh overflows beyond ~710; use exp(-|s x|/2) asymptotics there.
    big = ax > 600.0
    out = np.empty_like(ax)
    small = ~big
    out[small] = (pref * (np.cosh(ax[small]) - b)) ** -0.5
    out[big] = np.sqrt(2.0 / pref) * np.exp(-0.5 * ax[big])
    return out


def _wrap_center(center: float, grid: GridSpec) -> float:
    """Representative of center modulo the period, inside [-L, L)."""
    p = grid.period
    return (center + grid.half_length) % p - grid.half_length


def phi_profile(omega: float, c: float, grid: GridSpec, center: float = 0.0) -> Field:
    """Periodized modulus profile on the grid, centered at ``center``."""
    _require(omega, c)
    xc = _wrap_center(center, grid)
    vals = sum(phi_line(omega, c, grid.x - xc + n * grid.period) for n in _IMAGES)
    return Field(grid, vals)


def tail_value(omega: float, c: float, grid: GridSpec) -> float:
    """phi at half a period from the center: the seam overlap of the images."""
    return float(phi_line(omega, c, np.array([grid.half_length]))[0])


def check_tail(omega, c, grid, tail_tol=DEFAULT_TAIL_TOL):
    if tail_tol is None:
        return
    tv = tail_value(omega, c, grid)
    if tv > tail_tol:
        raise TailTooFat(
            f"phi({grid.half_length}) = {tv:.3e} exceeds {tail_tol:.1e}; enlarge the box"
        )


def wave_values(p: WaveParams, grid: GridSpec, t: float = 0.0) -> np.ndarray:
    """Raw complex array of the exact traveling wave at time t."""
    _require(p.omega, p.c)
    center = p.x0 + p.c * t
    xc = _wrap_center(center, grid)
    # Unwrapping the center by a whole period leaves the image sum unchanged,
    # including the c/2 phase, so only xc enters below.
    out = np.zeros(grid.n_points, dtype=complex)
    for n in _IMAGES:
        y = grid.x - xc + n * grid.period
        out += phi_line(p.omega, p.c, y) * np.exp(1j * (0.5 * p.c * y))
    return out * np.exp(1j * (p.gamma + p.omega * t))


def wave_field(p: WaveParams, grid: GridSpec, t: float = 0.0, tail_tol=DEFAULT_TAIL_TOL) -> Field:
    """
    R(x) = phi(x - x0) exp(i (gamma + c (x - x0)/2)) at t = 0 and the exact
    solution exp(i omega t) R(x - c t) at later times.
    """
    _require(p.omega, p.c)
    check_tail(p.omega, p.c, grid, tail_tol)
    return Field(grid, wave_values(p, grid, t))


def fd_step(value: float, rel: float = 1e-5) -> float:
    return rel * max(1.0, abs(value))


def wave_param_grad(p: WaveParams, grid: GridSpec, step: float | None = None, rel: float = 1e-5):
    """
    (d_omega R, d_c R, d_x0 R, d_gamma R).

    The phase and translation derivatives are exact (iR and -R_x). The
    omega and c derivatives are central differences; ``step`` overrides the
    default relative step rel * max(1, |param|).
    """
    if classify_regime(p.omega, p.c) is not Regime.SUBCRITICAL:
        raise RegimeUnsupported("parameter gradient needs a subcritical wave")
    hw = step if step is not None else fd_step(p.omega, rel)
    hc = step if step is not None else fd_step(p.c, rel)
    if hw <= 0 or hc <= 0:
        raise ValueError("finite-difference step must be positive")
    for om, cc in ((p.omega - hw, p.c), (p.omega + hw, p.c), (p.omega, p.c - hc), (p.omega, p.c + hc)):
        if classify_regime(om, cc) is not Regime.SUBCRITICAL:
            raise StepBreaksRegime(f"stencil point ({om}, {cc}) is not subcritical")
    R = wave_values(p, grid)
    d_om = (wave_values(replace(p, omega=p.omega + hw), grid)
            - wave_values(replace(p, omega=p.omega - hw), grid)) / (2 * hw)
    d_c = (wave_values(replace(p, c=p.c + hc), grid)
           - wave_values(replace(p, c=p.c - hc), grid)) / (2 * hc)
    d_x0 = -diff(R, grid, 1)
    d_gamma = 1j * R
    return tuple(Field(grid, v) for v in (d_om, d_c, d_x0, d_gamma))


def elliptic_residual(omega: float, c: float, phi: np.ndarray, grid: GridSpec) -> np.ndarray:
    """(omega - c^2/4) phi - phi'' - 3/16 phi^5 + c/2 phi^3."""
    phi = np.real(phi)
    return (omega - 0.25 * c * c) * phi - diff(phi, grid, 2) - 3.0 / 16.0 * phi**5 + 0.5 * c * phi**3


def tw_residual(omega: float, c: float, R: np.ndarray, grid: GridSpec) -> np.ndarray:
    """omega R - R'' - 3/16 |R|^4 R + i c R' - i/2 |R|^2 R' + i/2 R^2 conj(R')."""
    Rx = diff(R, grid, 1)
    Rxx = diff(R, grid, 2)
    a = np.abs(R) ** 2
    return (omega * R - Rxx - 3.0 / 16.0 * a * a * R + 1j * c * Rx
            - 0.5j * a * Rx + 0.5j * R * R * np.conj(Rx))


def residuals(p: WaveParams, grid: GridSpec, tail_tol=DEFAULT_TAIL_TOL, scale: float = 1.0):
    """
    Sup norms of the stationary-equation residuals for the wave ``p``.
    ``scale`` multiplies the profile first (scale != 1 is not a solution).
    """
    if classify_regime(p.omega, p.c) is not Regime.SUBCRITICAL:
        raise RegimeUnsupported("residuals are defined for subcritical waves")
    check_tail(p.omega, p.c, grid, tail_tol)
    phi = scale * phi_profile(p.omega, p.c, grid, center=p.x0).values.real
    R = scale * wave_values(p, grid)
    r_ell = float(np.max(np.abs(elliptic_residual(p.omega, p.c, phi, grid))))
    r_tw = float(np.max(np.abs(tw_residual(p.omega, p.c, R, grid))))
    return r_ell, r_tw


def tail_constant(omega: float, c: float, grid: GridSpec, r0: float = 5.0) -> float:
    """Smallest K with phi(x) <= K exp(-rate |x|) at every node with |x| >= r0."""
    x = grid.x
    mask = np.abs(x) >= r0
    vals = phi_line(omega, c, x[mask])
    return float(np.max(vals * np.exp(decay_rate(omega, c) * np.abs(x[mask]))))
