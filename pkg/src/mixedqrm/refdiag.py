"""Truncated Fock-space diagonalization: the independent oracle.

Dense symmetric diagonalization of the full (optionally biased)
Hamiltonian in the bare spin (x) Fock basis.  Every retained level is
certified by re-solving at a larger truncation; near the collapse point
the required truncation grows steeply and unconverged answers are
refused rather than returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import ModelParams

LEVEL_CONVERGENCE_TOL = 1e-8
CHECK_STEP = 50
MAX_FOCK_DIM = 4800


class ConvergenceFailure(RuntimeError):
    """Requested levels not converged at the admissible truncations."""


@dataclass(frozen=True)
class DenseHamiltonian:
    fock_dim: int
    entries: np.ndarray  # 2M x 2M, spin (index 0 = spin-up) tensor Fock
    rebuild: Callable[[int], "DenseHamiltonian"]


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray  # ascending, length k
    states: np.ndarray  # orthonormal columns, 2M x k
    fock_dim: int


def _mixed_matrix(params: ModelParams, dim: int) -> np.ndarray:
    n = np.arange(dim)
    a = np.zeros((dim, dim))
    a[n[:-1], n[1:]] = np.sqrt(n[1:])
    adag = a.T
    coupling = params.g1 * (adag + a) + params.g2 * (adag @ adag + a @ a)
    number = np.diag(n.astype(float))
    h = np.zeros((2 * dim, 2 * dim))
    h[:dim, :dim] = number + coupling + 0.5 * params.epsilon * np.eye(dim)
    h[dim:, dim:] = number - coupling - 0.5 * params.epsilon * np.eye(dim)
    off = -0.5 * params.delta * np.eye(dim)
    h[:dim, dim:] = off
    h[dim:, :dim] = off
    return h


def build_hamiltonian(params: ModelParams, fock_dim: int) -> DenseHamiltonian:
    """Matrix form of the mixed model (plus bias) at the given Fock truncation."""
    if fock_dim < 20:
        raise ValueError(f"fock_dim must be >= 20, got {fock_dim}")

    def rebuild(new_dim: int) -> DenseHamiltonian:
        return build_hamiltonian(params, new_dim)

    return DenseHamiltonian(fock_dim, _mixed_matrix(params, fock_dim), rebuild)


def default_fock_dim(params: ModelParams) -> int:
    if params.g2 <= 0.3:
        return 200
    if params.g2 <= 0.45:
        return 600
    return 600  # starting point; eigen_solve callers double adaptively


def eigen_solve(h: DenseHamiltonian, k: int, check: bool = True) -> EigenSystem:
    """Lowest k eigenpairs, certified by re-solving at fock_dim + CHECK_STEP."""
    if k > h.fock_dim // 2:
        raise ValueError(f"k = {k} exceeds the converged-level budget fock_dim/2")
    energies, states = np.linalg.eigh(h.entries)
    if check:
        bigger = h.rebuild(h.fock_dim + CHECK_STEP)
        energies_big = np.linalg.eigvalsh(bigger.entries)
        drift = float(np.max(np.abs(energies[:k] - energies_big[:k])))
        if drift > LEVEL_CONVERGENCE_TOL:
            raise ConvergenceFailure(
                f"levels 0..{k - 1} drift {drift:.3e} under fock_dim "
                f"{h.fock_dim} -> {h.fock_dim + CHECK_STEP}"
            )
    return EigenSystem(energies[:k].copy(), states[:, :k].copy(), h.fock_dim)


def oracle_spectrum(
    params: ModelParams, k: int, fock_dim: int | None = None
) -> EigenSystem:
    """Converged lowest-k spectrum, doubling the truncation as needed."""
    dim = fock_dim if fock_dim is not None else default_fock_dim(params)
    last: ConvergenceFailure | None = None
    while dim <= MAX_FOCK_DIM:
        try:
            return eigen_solve(build_hamiltonian(params, dim), k)
        except ConvergenceFailure as exc:
            last = exc
            dim *= 2
    raise ConvergenceFailure(
        f"no convergence up to fock_dim {MAX_FOCK_DIM} (g2 = {params.g2}): {last}"
    )


def ground_state(
    params: ModelParams, fock_dim: int | None = None
) -> tuple[float, np.ndarray]:
    """Convergence-certified lowest eigenpair (energy, 2M state vector)."""
    system = oracle_spectrum(params, 1, fock_dim)
    return float(system.energies[0]), system.states[:, 0].copy()
