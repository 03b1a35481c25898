"""Observables, Wigner function, and fidelity dynamics."""

from __future__ import annotations

import math

import numpy as np
import pytest

from mixedqrm.model import ModelParams
from mixedqrm.observables import (
    evolve,
    fidelity_series,
    magnetization,
    photon_number,
    reduced_field_density,
    wigner,
)
from mixedqrm.refdiag import build_hamiltonian, ground_state


def _basis_state(dim, spin, n):
    psi = np.zeros(2 * dim)
    psi[spin * dim + n] = 1.0
    return psi


def test_magnetization_basis_states():
    assert magnetization(_basis_state(30, 0, 0)) == pytest.approx(1.0)
    assert magnetization(_basis_state(30, 1, 3)) == pytest.approx(-1.0)


def test_photon_number_basis_states():
    assert photon_number(_basis_state(30, 0, 5)) == pytest.approx(5.0)
    mixed = (_basis_state(30, 0, 0) + _basis_state(30, 1, 2)) / math.sqrt(2.0)
    assert photon_number(mixed) == pytest.approx(1.0)


def test_normalization_guard():
    with pytest.raises(ValueError):
        magnetization(2.0 * _basis_state(30, 0, 0))


def test_vacuum_wigner_gaussian():
    dim = 40
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    axis = np.linspace(-2.0, 2.0, 21)
    grid = wigner(rho, axis, axis)
    re, im = np.meshgrid(axis, axis)
    expected = (2.0 / math.pi) * np.exp(-2.0 * (re ** 2 + im ** 2))
    assert np.max(np.abs(grid.values - expected)) < 1e-8


def test_wigner_normalization():
    _, state = ground_state(ModelParams(1.0, 0.8, 0.1), fock_dim=200)
    rho = reduced_field_density(state.astype(complex))
    axis = np.linspace(-4.5, 4.5, 61)
    grid = wigner(rho[:120, :120] / np.trace(rho[:120, :120]).real, axis, axis)
    assert grid.riemann_norm() == pytest.approx(1.0, abs=1e-2)


def test_reduced_density_properties():
    _, state = ground_state(ModelParams(1.0, 0.5, 0.1), fock_dim=200)
    rho = reduced_field_density(state.astype(complex))
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.matrix_rank(rho, tol=1e-10) <= 2


def test_evolution_preserves_norm_and_energy():
    p = ModelParams(1.0, 0.6, 0.1)
    h = build_hamiltonian(p, 100)
    psi0 = np.zeros(200, dtype=complex)
    psi0[0] = 1.0
    t_list = np.array([0.0, 0.7, 3.1])
    states = evolve(h, psi0, t_list)
    assert np.allclose(np.linalg.norm(states, axis=1), 1.0, atol=1e-10)
    e = [float(np.vdot(s, h.entries @ s).real) for s in states]
    assert np.allclose(e, e[0], atol=1e-10)
    assert np.allclose(states[0], psi0, atol=1e-10)


def test_fidelity_series_starts_at_one():
    t, f_eff, f_1p = fidelity_series(ModelParams(1.0, 1.0, 0.05), np.array([0.0, 0.5]), fock_dim=150)
    assert f_eff[0] == pytest.approx(1.0, abs=1e-10)
    assert f_1p[0] == pytest.approx(1.0, abs=1e-10)
    assert np.all(f_eff <= 1.0 + 1e-10)
