import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dnlslab.errors import RegimeUnsupported, StepBreaksRegime
from dnlslab.functionals import (action_J, audit_row, conserved, d_second, mass_of,
                                 momentum_density, nehari_K, soliton_MP)
from dnlslab.lab import DEFAULT_AUDIT_POINTS, audit_grid
from dnlslab.numerics import Field, GridSpec
from dnlslab.waves import WaveParams, wave_values

from oracles import d2_det, soliton_mass, soliton_momentum


def test_omega1_c0_values(grid20):
    R = Field(grid20, wave_values(WaveParams(1.0, 0.0), grid20))
    m, p, e = conserved(R).as_tuple()
    assert m == pytest.approx(math.pi, abs=1e-12)
    assert p == pytest.approx(2.0, abs=1e-12)
    assert e == pytest.approx(0.0, abs=1e-12)
    assert action_J(1.0, 0.0, R) == pytest.approx(math.pi, abs=1e-12)
    assert nehari_K(1.0, 0.0, R) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("omega,c", DEFAULT_AUDIT_POINTS)
def test_mass_momentum_closed_forms(omega, c):
    m, p = soliton_MP(omega, c, audit_grid(omega, c))
    assert m == pytest.approx(soliton_mass(omega, c), abs=1e-9)
    assert p == pytest.approx(soliton_momentum(omega, c), abs=1e-9)


@pytest.mark.parametrize("omega,c", [(1.0, 1.0), (2.0, -1.0), (0.5, 0.3)])
def test_nehari_vanishes_on_waves(omega, c):
    g = audit_grid(omega, c)
    R = Field(g, wave_values(WaveParams(omega, c, 0.7, 1.1), g))
    assert abs(nehari_K(omega, c, R)) < 1e-9


def test_functionals_invariant_under_symmetries(grid20):
    p = WaveParams(1.0, 1.0)
    a = conserved(Field(grid20, wave_values(p, grid20))).as_tuple()
    b = conserved(Field(grid20, wave_values(WaveParams(1.0, 1.0, 3.0, 2.0), grid20))).as_tuple()
    assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("omega,c", [(1.0, 0.0), (1.0, 1.0), (2.0, 1.5), (0.5, -0.7)])
def test_d_second_det_oracle(omega, c):
    h = d_second(omega, c, audit_grid(omega, c))
    assert h.det == pytest.approx(d2_det(omega, c), rel=1e-6)
    assert h.symmetry_defect < 1e-4


def test_d_second_regime_errors(grid20):
    with pytest.raises(StepBreaksRegime):
        d_second(1.0, 2.0 - 1e-6, grid20)
    with pytest.raises(RegimeUnsupported):
        soliton_MP(1.0, 2.5, grid20)


def test_audit_row_and_mass_helper(grid20):
    row = audit_row(1.0, 0.0, grid20)
    assert row["det"] == pytest.approx(-1.0, rel=1e-6)
    u = np.exp(-grid20.x**2)
    assert mass_of(Field(grid20, u)) == pytest.approx(0.5 * math.sqrt(math.pi / 2))


def test_momentum_density_of_plane_phase():
    u = np.array([2.0 * np.exp(0.5j)])
    ux = 1j * 3.0 * u
    # -1/2 Im(conj(u) i 3 u) + |u|^4/8 = -6 + 2
    assert momentum_density(u, ux)[0] == pytest.approx(-4.0)
