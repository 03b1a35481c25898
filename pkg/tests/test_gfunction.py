"""Determinant evaluation and root finding for the regular spectrum."""

from __future__ import annotations

import numpy as np
import pytest

from mixedqrm.gfunction import (
    GEvaluator,
    find_lowest_roots,
    find_roots,
    g_matrix,
    g_value,
    lower_bound,
    poles_in_window,
    scan,
    spectrum_sweep,
)
from mixedqrm.model import ModelParams, pole_energy
from mixedqrm.refdiag import oracle_spectrum


def test_matrix_shape_and_scale():
    gm = g_matrix(0.3, ModelParams(0.5, 0.1, 0.2))
    assert gm.entries.shape == (4, 4)
    assert np.all(np.isfinite(gm.entries))
    assert np.isfinite(gm.scale_log)


def test_determinant_sign_flip_at_root():
    p = ModelParams(0.5, 0.1, 0.2)
    system = oracle_spectrum(p, 2)
    e0 = float(system.energies[0])
    ev = GEvaluator(p)
    assert ev.normalized_det(e0 - 1e-3) * ev.normalized_det(e0 + 1e-3) < 0.0


def test_value_and_matrix_consistent():
    p = ModelParams(0.5, 0.1, 0.2)
    gm = g_matrix(0.31, p, N=80)
    assert g_value(0.31, p, N=80) == pytest.approx(float(np.linalg.det(gm.entries)))


def test_roots_match_oracle():
    p = ModelParams(0.5, 0.1, 0.2)
    system = oracle_spectrum(p, 10)
    spec = find_roots(p, float(system.energies[0]) - 0.2, float(system.energies[0]) + 2.5)
    assert spec.roots
    for root in spec.roots:
        assert float(np.min(np.abs(system.energies - root.E))) < 1e-8


def test_roots_exclude_pole_lines():
    p = ModelParams(0.5, 0.1, 0.2)
    spec = find_roots(p, -1.0, 2.0)
    for root in spec.roots:
        for fam in ("A", "B"):
            for n in range(5):
                assert abs(root.E - pole_energy(fam, n, p)) > 1e-7


def test_delta_zero_branch():
    p = ModelParams(0.0, 0.3, 0.2)
    spec = find_roots(p, -1.0, 2.0)
    ladder = sorted(
        [pole_energy(f, n, p) for f in "AB" for n in range(5)]
    )
    expected = [e for e in ladder if -1.0 <= e <= 2.0]
    assert np.allclose(spec.energies, expected, atol=1e-12)


def test_fully_decoupled_branch():
    p = ModelParams(0.8, 0.0, 0.0)
    spec = find_roots(p, -0.5, 2.0)
    assert np.allclose(spec.energies, [-0.4, 0.4, 0.6, 1.4, 1.6], atol=1e-12)


def test_one_photon_branch_matches_oracle():
    p = ModelParams(0.8, 0.45, 0.0)
    system = oracle_spectrum(p, 8)
    spec = find_roots(p, float(system.energies[0]) - 0.2, float(system.energies[0]) + 3.0)
    for root in spec.roots:
        assert float(np.min(np.abs(system.energies - root.E))) < 1e-8
    for e_ref in system.energies:
        if spec.energies[0] <= e_ref <= spec.energies[-1]:
            assert float(np.min(np.abs(spec.energies - e_ref))) < 1e-8


def test_pure_two_photon_matches_oracle():
    p = ModelParams(0.6, 0.0, 0.25)
    system = oracle_spectrum(p, 8)
    spec = find_roots(p, float(system.energies[0]) - 0.2, float(system.energies[0]) + 2.0)
    assert spec.roots
    for root in spec.roots:
        assert float(np.min(np.abs(system.energies - root.E))) < 1e-8


def test_scan_avoids_poles():
    p = ModelParams(0.5, 0.1, 0.2)
    result = scan(p, -0.5, 1.5, resolution=0.01)
    assert result.E.size > 50
    assert np.all(np.isfinite(result.log10_magnitude))
    for pole in result.poles_A + result.poles_B:
        assert float(np.min(np.abs(result.E - pole))) > 1e-8


def test_poles_in_window():
    p = ModelParams(0.5, 0.1, 0.2)
    poles_a, poles_b = poles_in_window(p, -1.0, 2.0)
    for pole in poles_a:
        assert -1.0 <= pole <= 2.0
    assert poles_a and poles_b


def test_lower_bound_below_ground_state():
    p = ModelParams(0.5, 0.1, 0.2)
    system = oracle_spectrum(p, 1)
    assert lower_bound(p) <= float(system.energies[0])


def test_find_lowest_roots_count_and_order():
    p = ModelParams(0.5, 0.1, 0.2)
    spec = find_lowest_roots(p, 5)
    assert len(spec.roots) == 5
    assert np.all(np.diff(spec.energies) > 0.0)


def test_sweep_collects_errors_not_raises():
    p = ModelParams(0.5, 0.1, 0.0)
    result = spectrum_sweep(p, [0.1, 0.3], 3)
    assert not result.errors
    levels = {g2 for g2, _, _ in result.rows}
    assert levels == {0.1, 0.3}
    assert result.pole_rows


def test_window_validation():
    p = ModelParams(0.5, 0.1, 0.2)
    with pytest.raises(ValueError):
        find_roots(p, 2.0, 1.0)
    with pytest.raises(ValueError):
        scan(p, 1.0, 1.0)


def test_analytic_branch_guards():
    with pytest.raises(ValueError):
        GEvaluator(ModelParams(0.0, 0.1, 0.1))
    with pytest.raises(ValueError):
        GEvaluator(ModelParams(0.5, 0.0, 0.0))


def test_noise_floor_reported():
    ev = GEvaluator(ModelParams(0.5, 0.1, 0.2))
    det, floor = ev.det_and_noise(0.31)
    assert floor > 0.0
    assert abs(det) > floor  # benign regime: determinant is informative
