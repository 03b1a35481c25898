"""One-photon reference spectrum against the diagonalization oracle."""

from __future__ import annotations

import numpy as np
import pytest

from mixedqrm.model import ModelParams
from mixedqrm.onephoton import g_plus_minus, spectrum
from mixedqrm.refdiag import oracle_spectrum


def test_spectrum_matches_oracle():
    delta, g = 0.8, 0.45
    system = oracle_spectrum(ModelParams(delta, g, 0.0), 10)
    levels = spectrum(delta, g, float(system.energies[0]) - 0.1, float(system.energies[-1]) + 0.05)
    for e_ref in system.energies:
        assert float(np.min(np.abs(levels - e_ref))) < 1e-8


def test_decoupled_limit():
    levels = spectrum(0.6, 0.0, -0.5, 2.5)
    assert np.allclose(levels, [-0.3, 0.3, 0.7, 1.3, 1.7, 2.3], atol=1e-12)


def test_g_function_sign_change_at_root():
    delta, g = 0.8, 0.45
    system = oracle_spectrum(ModelParams(delta, g, 0.0), 3)
    e0 = float(system.energies[0])
    lo = g_plus_minus(e0 - 1e-4, delta, g)
    hi = g_plus_minus(e0 + 1e-4, delta, g)
    assert lo[0] * hi[0] < 0.0 or lo[1] * hi[1] < 0.0


def test_requires_positive_coupling():
    with pytest.raises(ValueError):
        g_plus_minus(0.1, 0.5, 0.0)
