import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dnlslab.errors import GridMismatch, NotPowerOfTwo
from dnlslab.numerics import (Field, GridSpec, diff, h1_norm, inner_re, integrate, l2_norm,
                              load_field, norm, save_field)


def test_grid_validation():
    with pytest.raises(NotPowerOfTwo):
        GridSpec(10.0, 1000)
    with pytest.raises(NotPowerOfTwo):
        GridSpec(10.0, 8)
    with pytest.raises(ValueError):
        GridSpec(-1.0, 64)


def test_grid_geometry():
    g = GridSpec(10.0, 64)
    assert g.spacing == pytest.approx(20.0 / 64)
    assert g.x[0] == -10.0
    assert g.x[-1] == pytest.approx(10.0 - g.spacing)
    assert g.k_max == pytest.approx(math.pi * 64 / 20.0)
    assert g.dealias_mask.sum() == 2 * (64 // 3) + 1 - (1 if 64 % 3 == 0 else 0)


def test_derivative_of_gaussian_spectral_accuracy(grid20):
    x = grid20.x
    f = np.exp(-x**2)
    assert_allclose(diff(f, grid20, 1), -2 * x * f, atol=1e-12)
    assert_allclose(diff(f, grid20, 2), (4 * x**2 - 2) * f, atol=1e-11)
    assert np.isrealobj(diff(f, grid20, 1))


def test_derivative_of_trig_mode():
    g = GridSpec(math.pi, 64)
    f = np.exp(3j * g.x)
    assert_allclose(diff(f, g, 1), 3j * f, atol=1e-12)


def test_integrals_and_norms(grid20):
    x = grid20.x
    f = Field(grid20, np.exp(-x**2) * (1 + 0j))
    assert integrate(f).real == pytest.approx(math.sqrt(math.pi), abs=1e-13)
    assert l2_norm(f.values, grid20) ** 2 == pytest.approx(math.sqrt(math.pi / 2), abs=1e-13)
    # |f'|^2 integrates to sqrt(pi/2)
    assert h1_norm(f.values, grid20) ** 2 == pytest.approx(2 * math.sqrt(math.pi / 2), abs=1e-12)
    assert norm(f, "LINF") == pytest.approx(1.0)
    assert norm(f, "H1") == pytest.approx(h1_norm(f.values, grid20))


def test_field_is_immutable_and_checked(grid20):
    f = Field(grid20, np.zeros(grid20.n_points))
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(ValueError):
        Field(grid20, np.full(grid20.n_points, np.nan))
    with pytest.raises(GridMismatch):
        inner_re(f, Field(GridSpec(10.0, 1024), np.zeros(1024)))


def test_snapshot_round_trip_is_bitwise(tmp_path, grid20):
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(grid20.n_points) + 1j * rng.standard_normal(grid20.n_points)
    f = Field(grid20, vals)
    save_field(f, tmp_path / "f.dnls")
    g = load_field(tmp_path / "f.dnls")
    assert g.grid == f.grid
    assert np.array_equal(g.values, f.values)
