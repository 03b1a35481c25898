"""Effective biased one-photon model for the weak-g2 regime.

Recombining the two frame-diagonal blocks splits the mixed Hamiltonian
into a one-photon model with suppressed photon frequency beta, enhanced
coupling g1/sqrt(beta), a positive bias 4 g2 g1^2/(1 - 4 g2^2) and a
scalar shift -(1-beta)/2.  The shift is always included so absolute
energies are comparable with the full model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams
from .refdiag import DenseHamiltonian, default_fock_dim, eigen_solve


@dataclass(frozen=True)
class EffectiveParams:
    epsilon_eff: float
    omega_eff: float
    g1_eff: float
    shift: float
    g1c_eff: float  # superradiant critical coupling sqrt(delta * omega_eff)/2


def effective_params(params: ModelParams) -> EffectiveParams:
    beta = params.beta
    return EffectiveParams(
        epsilon_eff=4.0 * params.g2 * params.g1 ** 2 / (1.0 - 4.0 * params.g2 ** 2),
        omega_eff=beta,
        g1_eff=params.g1 / math.sqrt(beta),
        shift=-(1.0 - beta) / 2.0,
        g1c_eff=math.sqrt(params.delta * beta) / 2.0,
    )


def _effective_matrix(params: ModelParams, dim: int) -> np.ndarray:
    eff = effective_params(params)
    n = np.arange(dim)
    a = np.zeros((dim, dim))
    a[n[:-1], n[1:]] = np.sqrt(n[1:])
    adag = a.T
    number = eff.omega_eff * np.diag(n.astype(float))
    coupling = eff.g1_eff * (adag + a)
    bias = 0.5 * (params.epsilon + eff.epsilon_eff)
    h = np.zeros((2 * dim, 2 * dim))
    h[:dim, :dim] = number + coupling + bias * np.eye(dim)
    h[dim:, dim:] = number - coupling - bias * np.eye(dim)
    off = -0.5 * params.delta * np.eye(dim)
    h[:dim, dim:] = off
    h[dim:, :dim] = off
    h += eff.shift * np.eye(2 * dim)
    return h


def build_effective_hamiltonian(params: ModelParams, fock_dim: int) -> DenseHamiltonian:
    """Biased one-photon Hamiltonian approximating the mixed model."""
    if fock_dim < 20:
        raise ValueError(f"fock_dim must be >= 20, got {fock_dim}")

    def rebuild(new_dim: int) -> DenseHamiltonian:
        return build_effective_hamiltonian(params, new_dim)

    return DenseHamiltonian(fock_dim, _effective_matrix(params, fock_dim), rebuild)


def compare_spectra(
    params: ModelParams,
    eps_grid: np.ndarray | list[float],
    k: int,
    fock_dim: int | None = None,
) -> dict:
    """Transmission-spectrum comparison: dE_n = E_n - E_0 vs external bias.

    Returns rows (eps, model_tag, n, dE_n) for both the full mixed model
    and its effective one-photon counterpart, plus the bias symmetry
    point eps = -eps_eff of the latter.
    """
    from .refdiag import build_hamiltonian

    dim = fock_dim if fock_dim is not None else default_fock_dim(params)
    rows: list[tuple[float, str, int, float]] = []
    for eps in eps_grid:
        p = ModelParams(params.delta, params.g1, params.g2, float(eps))
        for tag, builder in (("full", build_hamiltonian), ("effective", build_effective_hamiltonian)):
            system = eigen_solve(builder(p, dim), k + 1)
            for n in range(1, k + 1):
                rows.append((float(eps), tag, n, float(system.energies[n] - system.energies[0])))
    return {
        "rows": rows,
        "symmetry_point": -effective_params(params).epsilon_eff,
    }
