import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dnlslab.errors import NonFinite
from dnlslab.evolve import (EvolveConfig, IFRK4, evolve, nonlinear_part, rhs, step_ifrk4,
                            suggest_dt)
from dnlslab.fftback import FFTPlan
from dnlslab.numerics import Field, GridSpec, diff, h1_norm
from dnlslab.waves import WaveParams, tw_residual, wave_values


def test_config_validation_and_steps():
    with pytest.raises(ValueError):
        EvolveConfig(0.0, 1.0)
    with pytest.raises(ValueError):
        EvolveConfig(0.1, -1.0)
    with pytest.raises(ValueError):
        EvolveConfig(0.1, 1.0, observer_stride=0)
    cfg = EvolveConfig(0.3, 1.0)
    assert cfg.n_steps == 4
    assert cfg.step_size == pytest.approx(0.25)
    assert EvolveConfig(0.1, 1.0).n_steps == 10


def test_suggest_dt_formula():
    g = GridSpec(30.0, 2048)
    km = g.k_max
    assert suggest_dt(g, 2.0) == pytest.approx(min(0.5 / km**2, 0.1 / (km * 4.0)))
    assert suggest_dt(g, 0.0) == pytest.approx(0.5 / km**2)


def test_rhs_of_wave_is_translation_plus_rotation(grid20):
    p = WaveParams(1.0, 1.0, 0.0, 0.2)
    R = Field(grid20, wave_values(p, grid20))
    expected = 1j * p.omega * R.values - p.c * diff(R.values, grid20, 1)
    assert_allclose(rhs(R, dealias=False).values, expected, atol=1e-9)


def test_nonlinear_part_formula(grid20):
    x = grid20.x
    u = (1 + 0.3j * x) * np.exp(-x**2)
    ux = diff(u, grid20, 1)
    a = np.abs(u) ** 2
    ref = -0.5 * a * ux + 0.5 * u * u * np.conj(ux) + 3j / 16 * a * a * u
    assert_allclose(nonlinear_part(Field(grid20, u), dealias=False).values, ref, atol=1e-12)


def test_linear_step_is_exact():
    g = GridSpec(math.pi, 64)
    u = Field(g, np.exp(2j * g.x))
    out = step_ifrk4(u, 0.1, nonlinear=False)
    assert_allclose(out.values, np.exp(-0.4j) * u.values, atol=1e-14)


def test_fft_backends_agree():
    rng = np.random.default_rng(3)
    v = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    a, b = FFTPlan(256, use_fftw=False), FFTPlan(256)
    assert_allclose(a.fft(v), b.fft(v), atol=1e-12)
    assert_allclose(a.ifft(v), b.ifft(v), atol=1e-14)


def test_short_wave_run_conserves_and_tracks():
    g = GridSpec(20.0, 1024)
    p = WaveParams(1.0, 1.0, -3.0, 0.0)
    u0 = Field(g, wave_values(p, g))
    dt = suggest_dt(g, float(np.max(np.abs(u0.values))))
    traj = evolve(u0, EvolveConfig(dt, 1.0, observer_stride=50))
    err = h1_norm(traj.final - wave_values(p, g, 1.0), g)
    assert err < 1e-6
    for k in "MPE":
        col = traj.column(k)
        assert np.max(np.abs(col - col[0])) < 1e-10
    cfg = EvolveConfig(dt, 1.0, observer_stride=50)
    assert len(traj.records) == 1 + cfg.n_steps // 50


def test_observers_and_records():
    g = GridSpec(20.0, 256)
    u0 = Field(g, wave_values(WaveParams(1.0, 0.0), g))
    seen = []

    def obs(t, u, grid):
        seen.append(t)
        return {"peak": float(np.max(np.abs(u)))}

    traj = evolve(u0, EvolveConfig(0.01, 0.1, observer_stride=2), observers=(obs,),
                  keep_snapshots=False)
    assert traj.columns()[:5] == ["t", "M", "P", "E", "peak"]
    assert len(seen) == 6 and not traj.snapshots
    assert_allclose(traj.column("peak"), 2.0, atol=1e-4)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_detected():
    g = GridSpec(10.0, 64)
    u0 = Field(g, 40.0 * np.exp(-g.x**2) + 0j)
    with pytest.raises(NonFinite) as info:
        evolve(u0, EvolveConfig(0.05, 5.0, observer_stride=1000), keep_snapshots=False)
    assert info.value.t > 0


def test_stepper_is_deterministic(grid20):
    u = wave_values(WaveParams(1.0, 0.5), grid20)
    s = IFRK4(grid20, 1e-3)
    assert np.array_equal(s.step(u), s.step(u))
