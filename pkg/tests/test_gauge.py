import numpy as np
import pytest
from numpy.testing import assert_allclose

from dnlslab.errors import LeftTailNotDecayed
from dnlslab.functionals import conserved
from dnlslab.gauge import GAUGE_A, gauge_forward, gauge_inverse
from dnlslab.numerics import Field, GridSpec


@pytest.fixture
def bump():
    g = GridSpec(20.0, 512)
    x = g.x
    return Field(g, (1.0 + 0.5j * x) * np.exp(-(x - 1.0) ** 2) + 0.3 * np.exp(-(x + 2) ** 2))


def test_default_exponent():
    assert GAUGE_A == 0.75


def test_zero_exponent_is_identity(bump):
    assert np.array_equal(gauge_forward(bump, 0.0).values, bump.values)


def test_modulus_mass_and_round_trip(bump):
    u = gauge_forward(bump)
    assert np.max(np.abs(np.abs(u.values) - np.abs(bump.values))) <= 1e-15
    assert abs(conserved(u).mass - conserved(bump).mass) <= 1e-12
    assert np.max(np.abs(gauge_inverse(u).values - bump.values)) <= 1e-12


def test_composition(bump):
    a, b = 0.4, -1.1
    lhs = gauge_forward(gauge_forward(bump, b), a).values
    assert np.max(np.abs(lhs - gauge_forward(bump, a + b).values)) <= 1e-12


def test_real_positive_phase_is_cumulative_mass():
    g = GridSpec(15.0, 256)
    u = Field(g, np.exp(-g.x**2 / 2))
    a = 1.7
    cum = g.spacing * np.cumsum(np.exp(-g.x**2))
    v = gauge_inverse(u, a)
    assert_allclose(np.angle(v.values * np.exp(1j * a * cum)), 0.0, atol=1e-14)


def test_zero_field():
    g = GridSpec(10.0, 64)
    z = Field(g, np.zeros(64))
    assert np.array_equal(gauge_forward(z).values, z.values)


def test_left_tail_must_decay():
    g = GridSpec(5.0, 128)
    with pytest.raises(LeftTailNotDecayed):
        gauge_forward(Field(g, np.exp(-g.x**2 / 20)))
