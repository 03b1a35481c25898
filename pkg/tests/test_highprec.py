"""Guard-digit evaluator: agreement with the float path and noise recovery."""

from __future__ import annotations

import numpy as np
import pytest

from mixedqrm.gfunction import GEvaluator, _bisect
from mixedqrm.highprec import MPEvaluator
from mixedqrm.model import ModelParams
from mixedqrm.refdiag import oracle_spectrum


def test_matches_float_path_in_benign_regime():
    p = ModelParams(0.5, 0.1, 0.2)
    ev = GEvaluator(p)
    mp_ev = MPEvaluator(p, ev.N)
    for E in (-0.2, 0.31, 0.9):
        det, floor = ev.det_and_noise(E)
        assert abs(det) > 100.0 * floor
        assert mp_ev.normalized_det(E) == pytest.approx(det, rel=1e-8)


def test_recovers_root_in_cancellation_regime():
    # strong one-photon coupling: float64 determinant is noise near the
    # ground state, guard digits must still locate it to oracle accuracy
    p = ModelParams(1.041, 0.964, 0.070)
    system = oracle_spectrum(p, 2)
    e0 = float(system.energies[0])
    ev = GEvaluator(p, N=700)
    det, floor = ev.det_and_noise(e0 + 0.03)
    assert abs(det) < 100.0 * floor  # float64 genuinely swamped here
    mp_ev = MPEvaluator(p, 700)
    sign = lambda x: np.sign(mp_ev.normalized_det(x))
    root = _bisect(sign, e0 - 0.05, e0 + 0.05, sign(e0 - 0.05), sign(e0 + 0.05))
    assert abs(root - e0) < 1e-8


def test_rejects_degenerate_branches():
    with pytest.raises(ValueError):
        MPEvaluator(ModelParams(0.5, 0.3, 0.0), 60)
    with pytest.raises(ValueError):
        MPEvaluator(ModelParams(0.0, 0.3, 0.1), 60)
