"""Frame constants, pole ladders and parameter validation."""

from __future__ import annotations

import math

import numpy as np
import pytest

from mixedqrm.model import (
    G2_CAP_DEFAULT,
    BogoliubovFrame,
    ModelParams,
    ParameterError,
    build_frame,
    collapse_limits,
    pole_energy,
    pole_gap,
)


def test_frame_bogoliubov_identity():
    # u^2 - v^2 = 1 defines a Bogoliubov transformation
    for g2 in (0.0, 0.1, 0.3, 0.45, 0.49):
        frame = build_frame(ModelParams(0.5, 0.2, g2))
        assert frame.u ** 2 - frame.v ** 2 == pytest.approx(1.0, abs=1e-12)
        assert frame.uv == pytest.approx(frame.u * frame.v, abs=1e-14)


def test_frame_uv_equals_g2_over_beta():
    p = ModelParams(1.0, 0.3, 0.2)
    frame = build_frame(p)
    assert frame.uv == pytest.approx(p.g2 / frame.beta, abs=1e-14)


def test_frame_squeeze_parameter():
    frame = build_frame(ModelParams(1.0, 0.0, 0.3))
    assert math.cosh(frame.r) == pytest.approx(frame.u, abs=1e-12)
    assert math.sinh(frame.r) == pytest.approx(frame.v, abs=1e-12)
    assert math.tanh(frame.r) == pytest.approx(frame.v / frame.u, abs=1e-12)


def test_frame_displacements_reduce_at_g2_zero():
    p = ModelParams(0.7, 0.4, 0.0)
    frame = build_frame(p)
    assert frame.beta == 1.0
    assert frame.v == 0.0
    assert frame.w == pytest.approx(p.g1, abs=1e-14)
    assert frame.w_prime == pytest.approx(-p.g1, abs=1e-14)


def test_pole_ladder_spacing_is_beta():
    p = ModelParams(0.5, 0.1, 0.2)
    for fam in ("A", "B"):
        diffs = np.diff([pole_energy(fam, n, p) for n in range(8)])
        assert np.allclose(diffs, p.beta, atol=1e-13)


def test_pole_gap_identity():
    # pole_A(n) - pole_B(n) is n-independent and equals 4 g2 g1^2 / beta^2
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = ModelParams(rng.uniform(0.2, 2.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.45))
        gap = pole_gap(p)
        for n in range(11):
            diff = pole_energy("A", n, p) - pole_energy("B", n, p)
            assert diff == pytest.approx(gap, abs=1e-12)


def test_collapse_limits():
    value, b_diverges = collapse_limits(0.1)
    assert value == pytest.approx(-(1.0 + 0.01) / 2.0, abs=1e-14)
    assert b_diverges
    # A-pole n = 0 approaches the limit as g2 -> 1/2 (gap ~ beta / 2)
    p = ModelParams(0.5, 0.1, 0.49999)
    assert pole_energy("A", 0, p) == pytest.approx(value, abs=4e-3)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        ModelParams(-0.1, 0.1, 0.1)
    with pytest.raises(ParameterError):
        ModelParams(0.5, -0.2, 0.1)
    with pytest.raises(ParameterError):
        ModelParams(0.5, 0.1, 0.5)
    with pytest.raises(ParameterError):
        ModelParams(0.5, 0.1, -0.01)


def test_g2_cap():
    with pytest.raises(ParameterError):
        build_frame(ModelParams(0.5, 0.1, 0.499995))
    with pytest.warns(RuntimeWarning):
        frame = build_frame(ModelParams(0.5, 0.1, 0.499995), g2_cap=0.4999999)
    assert isinstance(frame, BogoliubovFrame)


def test_family_validation():
    p = ModelParams(0.5, 0.1, 0.1)
    with pytest.raises(ValueError):
        pole_energy("C", 0, p)
    with pytest.raises(ValueError):
        pole_energy("A", -1, p)
    assert pole_energy("a", 2, p) == pole_energy("A", 2, p)


def test_cap_default_admits_states_near_collapse():
    assert G2_CAP_DEFAULT < 0.5
    build_frame(ModelParams(0.5, 0.1, G2_CAP_DEFAULT))
