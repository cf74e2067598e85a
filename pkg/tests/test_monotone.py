import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dnlslab.acceptance import quartic_trials
from dnlslab.evolve import EvolveConfig, evolve
from dnlslab.functionals import conserved
from dnlslab.modulation import PairParams, track
from dnlslab.monotone import (MonotoneLineSpec, almost_monotone_series, cutoff_audit,
                              cutoff_d2h, cutoff_dh, cutoff_h, fit_constant, line_weights,
                              local_mass_bound, local_mass_window, localized_functionals,
                              partition, quartic_inequality_audit)
from dnlslab.numerics import Field, GridSpec, diff
from dnlslab.waves import WaveParams, wave_values

PAIR = PairParams(WaveParams(1.0, 1.0, -10.0, 0.0), WaveParams(3.0, 3.0, 8.0, 1.0))


def test_cutoff_shape():
    x = np.linspace(-2, 2, 4001)
    h = cutoff_h(x)
    assert_allclose(h[x <= -1], 0.0)
    assert_allclose(h[x >= 1], 1.0)
    assert cutoff_h(np.array([0.0]))[0] == pytest.approx(0.5)
    assert np.all(np.diff(h) >= 0)
    # h(-x) = 1 - h(x)
    assert_allclose(cutoff_h(-x), 1 - h, atol=1e-13)


def test_cutoff_derivatives_closed_form():
    x = np.linspace(-0.99, 0.99, 199)
    eps = 1e-6
    assert_allclose(cutoff_dh(x), (cutoff_h(x + eps) - cutoff_h(x - eps)) / (2 * eps), atol=1e-8)
    assert_allclose(cutoff_d2h(x), (cutoff_dh(x + eps) - cutoff_dh(x - eps)) / (2 * eps), atol=1e-7)
    assert cutoff_dh(np.array([0.0]))[0] == pytest.approx(35 / 32)


def test_cutoff_audit_finite():
    ca, cb = cutoff_audit()
    assert math.isfinite(ca) and math.isfinite(cb)
    assert 0 < ca < 10 and 0 < cb < 10


def test_partition():
    g = GridSpec(32.0, 512)
    gw, hw = partition(g, -15.0, 15.0, 30.0)
    assert_allclose(gw + hw, 1.0)
    assert_allclose(gw[g.x <= -15 + 30 / 8], 1.0)
    assert_allclose(gw[g.x >= 15 - 30 / 8], 0.0)
    with pytest.raises(ValueError):
        partition(g, -2.0, 2.0, 30.0)


def test_line_spec_and_weights():
    spec = MonotoneLineSpec.from_pair(PAIR, 18.0)
    assert spec.xbar0 == -1.0 and spec.sigma == 2.0
    assert spec.a == pytest.approx(18.0**2 / 64)
    assert spec.with_variant(PAIR, "+0").sigma == 2.5
    g = GridSpec(30.0, 512)
    gw, hw = line_weights(1.0, spec, g)
    assert_allclose(gw.values + hw.values, 1.0)
    center = spec.center(1.0)
    assert hw.values.real[np.argmin(np.abs(g.x - center))] == pytest.approx(0.5, abs=0.05)
    with pytest.raises(ValueError):
        MonotoneLineSpec(0.0, 1.0, 0.0)


def test_functional_identities_on_pair():
    g = GridSpec(30.0, 1024)
    u = Field(g, wave_values(PAIR.p1, g) + wave_values(PAIR.p2, g))
    spec = MonotoneLineSpec.from_pair(PAIR, 18.0)
    vals = localized_functionals(0.0, u, PAIR, spec)
    m, p, e = conserved(u).as_tuple()
    w1, c1 = PAIR.p1.omega, PAIR.p1.c
    assert vals["Q"] == pytest.approx(vals["F"] - w1 * m - c1 * p, abs=1e-12)
    assert vals["E_loc"] == pytest.approx(e + vals["F"], abs=1e-12)
    # well separated waves: Q picks up (omega2 - omega1) M2 + (c2 - c1) P2 of the right wave
    m2, p2 = 2 * math.acos(-3 / (2 * math.sqrt(3))), math.sqrt(3)
    assert vals["Q"] == pytest.approx(2.0 * m2 + 2.0 * p2, abs=1e-6)


def test_local_mass_window():
    g = GridSpec(20.0, 512)
    spec = MonotoneLineSpec(0.0, 0.0, 1.0)
    u = Field(g, np.ones(512) + 0j)
    assert local_mass_window(0.0, u, spec) == pytest.approx(2.0, abs=2 * g.spacing)


def test_quartic_inequalities_random():
    reports = quartic_trials(20, seed=5)
    assert all(r.passed for r in reports)


def test_quartic_inequality_is_not_vacuous():
    g = GridSpec(20.0, 512)
    w = Field(g, np.exp(-g.x**2) + 0j)
    h = Field(g, np.ones(512))
    rep = quartic_inequality_audit(w, h, hx=np.zeros(512))
    assert rep.passed
    assert rep.lhs_quartic / rep.rhs_quartic > 0.5


def test_fit_constant():
    assert fit_constant([0.0, -1.0, 2.0], [1.0, 1.0, 4.0]) == 0.5
    assert fit_constant([-1.0], [1.0]) == 0.0


def test_series_on_exact_pair_is_flat():
    g = GridSpec(30.0, 2048)
    pair = PairParams(WaveParams(1.0, 1.0, -13.0, 0.0), WaveParams(3.0, 3.0, 11.0, 1.0))
    u0 = Field(g, wave_values(pair.p1, g) + wave_values(pair.p2, g))
    traj = evolve(u0, EvolveConfig(5e-5, 0.4, observer_stride=2000))
    tr = track(traj, pair)
    series = almost_monotone_series(tr, traj, pair, 24.0)
    for v in series["increments"].values():
        assert np.max(np.abs(v)) < 1e-7
    assert series["exchange_defect"] < 1e-9
    K, ok, margin = local_mass_bound(series["rows"], series["eps_sq"], 0.027, 24.0)
    assert ok and K >= 0
