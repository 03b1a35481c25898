"""Exact spectrum of the mixed one- and two-photon quantum Rabi model.

The qubit-cavity Hamiltonian (units of the cavity frequency)

    H = -(Delta/2) sigma_x + a^dag a
        + sigma_z (g1 (a^dag + a) + g2 (a^dag^2 + a^2))

is solved exactly by expanding the eigenstates in two Bogoliubov frames
(a squeezed-displaced frame per spin block) and locating the zeros of a
4x4 transcendental determinant.  A truncated Fock-space diagonalization
serves as the independent cross-check throughout, and an effective
biased one-photon model covers the weak-g2 regime.
"""

__version__ = "0.1.0"

from .model import (
    ModelParams,
    BogoliubovFrame,
    build_frame,
    pole_energy,
    pole_gap,
    collapse_limits,
)
from .gfunction import g_value, g_matrix, scan, find_roots, find_lowest_roots, spectrum_sweep
from .refdiag import build_hamiltonian, eigen_solve, ground_state, oracle_spectrum
from .effective import effective_params, build_effective_hamiltonian, compare_spectra
from .exceptional import ExceptionalProblem, exc_g_value, find_exceptional_roots

__all__ = [
    "ModelParams",
    "BogoliubovFrame",
    "build_frame",
    "pole_energy",
    "pole_gap",
    "collapse_limits",
    "g_value",
    "g_matrix",
    "scan",
    "find_roots",
    "find_lowest_roots",
    "spectrum_sweep",
    "build_hamiltonian",
    "eigen_solve",
    "ground_state",
    "oracle_spectrum",
    "effective_params",
    "build_effective_hamiltonian",
    "compare_spectra",
    "ExceptionalProblem",
    "exc_g_value",
    "find_exceptional_roots",
]
