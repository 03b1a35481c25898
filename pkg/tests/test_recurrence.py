"""Coefficient recurrences: residuals, linearity, exceptional pinning."""

from __future__ import annotations

import numpy as np
import pytest

from mixedqrm.model import ModelParams, build_frame, pole_energy
from mixedqrm.recurrence import (
    MAX_N,
    CoefficientSeries,
    PoleProximityError,
    RecurrenceContext,
    default_series_length,
    e_from_f,
    propagate,
    propagate_exceptional,
    propagate_one_photon,
    residuals,
)


def _ctx(delta=0.5, g1=0.1, g2=0.2, E=0.37, N=60):
    p = ModelParams(delta, g1, g2)
    return RecurrenceContext(p, build_frame(p), E, N)


def test_residuals_vanish():
    ctx = _ctx()
    for fam in ("A", "B"):
        for seed in ("F0", "F1"):
            series = propagate(ctx, fam, seed)
            res = residuals(series, ctx)
            scale = np.max(np.abs(series.f)) + np.max(np.abs(series.e))
            assert np.max(np.abs(res)) < 1e-10 * scale


def test_seed_linearity():
    ctx = _ctx(E=-0.11)
    s0 = propagate(ctx, "A", "F0")
    s1 = propagate(ctx, "A", "F1")
    mix = propagate(ctx, "A", (0.3, -1.7))
    assert np.allclose(mix.f, 0.3 * s0.f - 1.7 * s1.f, rtol=1e-12, atol=1e-300)
    assert np.allclose(mix.e, 0.3 * s0.e - 1.7 * s1.e, rtol=1e-12, atol=1e-300)


def test_e_slaved_to_f():
    ctx = _ctx()
    series = propagate(ctx, "B", "F0")
    for n in (0, 3, 10):
        assert series.e[n] == pytest.approx(
            e_from_f(n, float(series.f[n]), ctx, "B"), rel=1e-14
        )


def test_pole_proximity_raises():
    p = ModelParams(0.5, 0.1, 0.2)
    E = pole_energy("A", 2, p) + 1e-12
    ctx = RecurrenceContext(p, build_frame(p), E, 40)
    with pytest.raises(PoleProximityError):
        propagate(ctx, "A", "F0")


def test_one_photon_branch_residuals():
    p = ModelParams(0.8, 0.45, 0.0)
    ctx = RecurrenceContext(p, build_frame(p), 0.21, 80)
    for fam in ("A", "B"):
        series = propagate_one_photon(ctx, fam)
        f, e = series.f, series.e
        # re-evaluate the three-term recurrence independently
        from mixedqrm.recurrence import _family_constants

        t1, _, h = _family_constants(ctx.frame, fam)
        for n in range(1, ctx.N):
            res = (
                -0.5 * p.delta * e[n]
                + (ctx.omega(n) + h) * f[n]
                + t1 * (f[n - 1] + (n + 1) * f[n + 1])
            )
            assert abs(res) < 1e-10 * (abs(f[n]) + abs(f[n + 1]) + 1e-30)


def test_five_term_requires_g2():
    p = ModelParams(0.5, 0.1, 0.0)
    ctx = RecurrenceContext(p, build_frame(p), 0.3, 40)
    with pytest.raises(ValueError):
        propagate(ctx, "A", "F0")


def test_exceptional_pins_fm():
    p = ModelParams(0.5, 0.1, 0.3)
    m = 3
    E = pole_energy("A", m, p)
    ctx = RecurrenceContext(p, build_frame(p), E, 50)
    for seed in ("F0", "F1", "EM"):
        series = propagate_exceptional(ctx, "A", m, seed)
        assert series.f[m] == 0.0
        if seed == "EM":
            assert series.e[m] != 0.0 or series.log_scale != 0.0
        else:
            assert series.forced_fm is not None


def test_exceptional_low_m_seed_rules():
    p = ModelParams(0.5, 0.1, 0.3)
    E = pole_energy("B", 0, p)
    ctx = RecurrenceContext(p, build_frame(p), E, 40)
    with pytest.raises(ValueError):
        propagate_exceptional(ctx, "B", 0, "F0")
    series = propagate_exceptional(ctx, "B", 0, "F1")
    assert series.f[0] == 0.0
    assert series.forced_fm is None


def test_exceptional_requires_pole_energy():
    p = ModelParams(0.5, 0.1, 0.3)
    ctx = RecurrenceContext(p, build_frame(p), 0.123, 40)
    with pytest.raises(ValueError):
        propagate_exceptional(ctx, "A", 2, "F0")


def test_log_scale_keeps_series_finite():
    # strongly displaced regime grows coefficients by hundreds of decades
    p = ModelParams(1.0, 0.95, 0.05)
    ctx = RecurrenceContext(p, build_frame(p), -1.5, 700)
    series = propagate(ctx, "A", "F0")
    assert isinstance(series, CoefficientSeries)
    assert np.all(np.isfinite(series.f))
    assert np.all(np.isfinite(series.e))


def test_default_series_length_grows_near_collapse():
    weak = default_series_length(build_frame(ModelParams(0.5, 0.1, 0.05)))
    strong = default_series_length(build_frame(ModelParams(0.5, 0.1, 0.49)))
    assert weak == 60
    assert strong > weak
    assert strong <= MAX_N
