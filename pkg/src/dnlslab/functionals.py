"""Mass, momentum, energy, the action and Nehari functionals, and d''(omega, c)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RegimeUnsupported, StepBreaksRegime
from .numerics import Field, GridSpec, _vals, diff, quad
from .waves import Regime, WaveParams, classify_regime, wave_values


@dataclass(frozen=True)
class ConservedTriple:
    mass: float
    momentum: float
    energy: float

    def as_tuple(self):
        return (self.mass, self.momentum, self.energy)


def momentum_density(u: np.ndarray, ux: np.ndarray) -> np.ndarray:
    """-1/2 Im(conj(u) u_x) + 1/8 |u|^4, the integrand of P."""
    return -0.5 * np.imag(np.conj(u) * ux) + 0.125 * np.abs(u) ** 4


def conserved_values(u: np.ndarray, grid: GridSpec, ux: np.ndarray | None = None) -> ConservedTriple:
    if ux is None:
        ux = diff(u, grid, 1)
    a = np.abs(u) ** 2
    mass = 0.5 * quad(a, grid)
    momentum = quad(momentum_density(u, ux), grid)
    energy = 0.5 * quad(np.abs(ux) ** 2, grid) - quad(a**3, grid) / 32.0
    return ConservedTriple(float(mass), float(momentum), float(energy))


def conserved(u: Field) -> ConservedTriple:
    return conserved_values(u.values, u.grid)


def action_J(omega: float, c: float, u: Field) -> float:
    m, p, e = conserved(u).as_tuple()
    return e + omega * m + c * p


def nehari_K(omega: float, c: float, u: Field) -> float:
    v = u.values
    vx = diff(v, u.grid, 1)
    a = np.abs(v) ** 2
    integrand = (np.abs(vx) ** 2 - 3.0 / 16.0 * a**3 + omega * a
                 - c * np.imag(np.conj(v) * vx) + 0.5 * c * a * a)
    return float(quad(integrand, u.grid))


def soliton_MP(omega: float, c: float, grid: GridSpec):
    if classify_regime(omega, c) is not Regime.SUBCRITICAL:
        raise RegimeUnsupported(f"({omega}, {c}) is not subcritical")
    t = conserved_values(wave_values(WaveParams(omega, c), grid), grid)
    return t.mass, t.momentum


@dataclass(frozen=True)
class HessianD2:
    matrix: np.ndarray

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @property
    def symmetry_defect(self) -> float:
        return float(abs(self.matrix[0, 1] - self.matrix[1, 0]))


def d_second(omega: float, c: float, grid: GridSpec, step: float | None = None,
             rel: float = 1e-4) -> HessianD2:
    """
    d'' = [[dM/domega, dM/dc], [dP/domega, dP/dc]] on the soliton family by
    central differences of the quadrature values of M and P.
    """
    hw = step if step is not None else rel * max(1.0, abs(omega))
    hc = step if step is not None else rel * max(1.0, abs(c))
    pts = ((omega - hw, c), (omega + hw, c), (omega, c - hc), (omega, c + hc))
    for om, cc in pts:
        if classify_regime(om, cc) is not Regime.SUBCRITICAL:
            raise StepBreaksRegime(f"stencil point ({om}, {cc}) is not subcritical")
    mp = [np.array(soliton_MP(om, cc, grid)) for om, cc in pts]
    d_om = (mp[1] - mp[0]) / (2 * hw)
    d_c = (mp[3] - mp[2]) / (2 * hc)
    return HessianD2(np.column_stack([d_om, d_c]))


AUDIT_COLUMNS = ("omega", "c", "M", "P", "E", "J", "K", "d11", "d12", "d21", "d22", "det")


def audit_row(omega: float, c: float, grid: GridSpec) -> dict:
    """One row of the functionals audit table."""
    R = Field(grid, wave_values(WaveParams(omega, c), grid))
    m, p, e = conserved(R).as_tuple()
    h = d_second(omega, c, grid)
    return {
        "omega": omega, "c": c, "M": m, "P": p, "E": e,
        "J": e + omega * m + c * p, "K": nehari_K(omega, c, R),
        "d11": h.matrix[0, 0], "d12": h.matrix[0, 1],
        "d21": h.matrix[1, 0], "d22": h.matrix[1, 1], "det": h.det,
    }


def mass_of(u, grid: GridSpec | None = None) -> float:
    if isinstance(u, Field):
        grid = u.grid
    return float(0.5 * quad(np.abs(_vals(u)) ** 2, grid))
