import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dnlslab.errors import RegimeUnsupported, StepBreaksRegime, TailTooFat
from dnlslab.numerics import GridSpec
from dnlslab.waves import (Regime, WaveParams, check_tail, classify_regime, decay_rate,
                           phi_line, phi_profile, residuals, tail_constant, wave_field,
                           wave_param_grad, wave_values)


def test_regimes():
    assert classify_regime(1.0, 0.0) is Regime.SUBCRITICAL
    assert classify_regime(1.0, 2.0) is Regime.CRITICAL_POSITIVE
    assert classify_regime(1.0, -2.0) is Regime.NONE
    assert classify_regime(1.0, 2.5) is Regime.NONE
    with pytest.raises(RegimeUnsupported):
        phi_line(1.0, 2.5, [0.0])


def test_profile_at_omega1_c0_is_sech_power():
    x = np.linspace(-10, 10, 201)
    assert_allclose(phi_line(1.0, 0.0, x), 2.0 / np.sqrt(np.cosh(2 * x)), rtol=1e-14)
    assert phi_line(1.0, 0.0, [0.0])[0] == pytest.approx(2.0, abs=1e-15)


def test_critical_branch_is_algebraic():
    x = np.array([0.0, 1.0, 3.0])
    assert_allclose(phi_line(1.0, 2.0, x), 2 * math.sqrt(2) / np.sqrt(4 * x**2 + 1), rtol=1e-15)


def test_asymptotic_branch_is_continuous():
    omega, c = 1.0, 0.5
    s = math.sqrt(4 * omega - c * c)
    x = np.array([599.9 / s, 600.1 / s])
    v = phi_line(omega, c, x)
    assert v[1] / v[0] == pytest.approx(math.exp(-0.1), rel=1e-6)


def test_gamma_is_reduced_mod_two_pi():
    assert WaveParams(1.0, 0.0, 0.0, 2 * math.pi + 0.5).gamma == pytest.approx(0.5)


@pytest.mark.parametrize("omega,c", [(1.0, 0.0), (1.0, 1.0), (2.0, 1.5), (2.0, -1.0)])
def test_stationary_residuals(omega, c, grid20):
    r_ell, r_tw = residuals(WaveParams(omega, c, 1.3, 0.4), grid20)
    assert r_ell < 1e-8 and r_tw < 1e-8


def test_scaled_profile_is_not_a_solution(grid20):
    r_ell, r_tw = residuals(WaveParams(1.0, 0.0), grid20, scale=1.01)
    assert r_ell > 1e-3 and r_tw > 1e-3


def test_tail_check():
    small = GridSpec(5.0, 256)
    with pytest.raises(TailTooFat):
        check_tail(1.0, 0.0, small)
    check_tail(1.0, 0.0, small, tail_tol=None)
    with pytest.raises(TailTooFat):
        wave_field(WaveParams(1.0, 0.0), small)


def test_periodization_keeps_center_anywhere(grid20):
    p = WaveParams(1.0, 0.5, 0.0, 0.0)
    a = wave_values(p, grid20, t=0.0)
    # one full period later the wave sits at the same place
    b = wave_values(WaveParams(1.0, 0.5, grid20.period, 0.0), grid20)
    assert_allclose(a, b, atol=1e-13)
    prof = phi_profile(1.0, 0.5, grid20, center=19.0).values.real
    assert np.argmax(prof) == np.argmin(np.abs(grid20.x - 19.0))


def test_exact_solution_time_dependence(grid20):
    p = WaveParams(1.0, 1.0, -2.0, 0.3)
    u = wave_values(p, grid20, t=1.5)
    ref = wave_values(WaveParams(1.0, 1.0, -0.5, 0.3 + 1.5), grid20)
    assert_allclose(u, ref, atol=1e-14)


def test_param_grad_exact_directions(grid20):
    p = WaveParams(1.0, 1.0, 0.0, 0.0)
    d_om, d_c, d_x, d_g = wave_param_grad(p, grid20)
    R = wave_values(p, grid20)
    assert_allclose(d_g.values, 1j * R)
    # translation derivative against a central difference in x0
    h = 1e-5
    fd = (wave_values(WaveParams(1.0, 1.0, h), grid20)
          - wave_values(WaveParams(1.0, 1.0, -h), grid20)) / (2 * h)
    assert_allclose(d_x.values, fd, atol=1e-8)
    with pytest.raises(StepBreaksRegime):
        wave_param_grad(WaveParams(1.0, 2.0 - 1e-7), grid20)


def test_decay_rate_and_tail_constant(grid20):
    assert decay_rate(1.0, 0.0) == 1.0
    K = tail_constant(1.0, 0.0, grid20)
    # 2 / sqrt(cosh 2x) <= 2 sqrt(2) exp(-|x|)
    assert K == pytest.approx(2 * math.sqrt(2), rel=1e-6)
