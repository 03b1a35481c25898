"""Ground-state observables, phase-space distributions, and dynamics.

States live in the bare spin (x) Fock basis of the diagonalization
module (index 0 = spin-up block).  The Wigner function uses the
displaced-parity form W = (2/pi) Tr[rho D(alpha) Pi D(alpha)^dag],
evaluated through one eigendecomposition of the displacement generator
so a full phase-space grid costs a handful of dense products.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import ModelParams
from .refdiag import DenseHamiltonian, build_hamiltonian, default_fock_dim, ground_state
from .effective import build_effective_hamiltonian

NORM_TOL = 1e-10


@dataclass(frozen=True)
class WignerGrid:
    alpha_re: np.ndarray
    alpha_im: np.ndarray
    values: np.ndarray  # shape (len(alpha_im), len(alpha_re))

    def riemann_norm(self) -> float:
        da = (self.alpha_re[1] - self.alpha_re[0]) * (self.alpha_im[1] - self.alpha_im[0])
        return float(np.sum(self.values) * da)


def _split(state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if state.size % 2:
        raise ValueError("state length must be even (spin tensor Fock)")
    dim = state.size // 2
    return state[:dim], state[dim:]


def _check_normalized(state: np.ndarray) -> None:
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state not normalized: |psi| = {norm}")


def magnetization(state: np.ndarray) -> float:
    """<sigma_z> of a normalized spin-Fock state."""
    _check_normalized(state)
    up, dn = _split(state)
    return float(np.vdot(up, up).real - np.vdot(dn, dn).real)


def photon_number(state: np.ndarray) -> float:
    """<a^dag a>; warns when the top Fock level carries weight (leakage)."""
    _check_normalized(state)
    up, dn = _split(state)
    occ = np.abs(up) ** 2 + np.abs(dn) ** 2
    if occ[-1] > 1e-8:
        warnings.warn(
            f"top-Fock occupation {occ[-1]:.2e}; photon number may be truncated",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(np.arange(occ.size) @ occ)


def reduced_field_density(state: np.ndarray) -> np.ndarray:
    """Partial trace over the spin: rank-<=2 Hermitian field density matrix."""
    _check_normalized(state)
    up, dn = _split(state)
    return np.outer(up, up.conj()) + np.outer(dn, dn.conj())


def wigner(
    density: np.ndarray,
    alpha_re: np.ndarray | None = None,
    alpha_im: np.ndarray | None = None,
) -> WignerGrid:
    """Displaced-parity Wigner function of a field density matrix."""
    if alpha_re is None:
        alpha_re = np.linspace(-4.0, 4.0, 81)
    if alpha_im is None:
        alpha_im = np.linspace(-4.0, 4.0, 81)
    dim = density.shape[0]
    if density.shape != (dim, dim):
        raise ValueError("density must be square")
    rmax2 = float(np.max(alpha_re) ** 2 + np.max(alpha_im) ** 2)
    if rmax2 > 0.5 * dim:
        warnings.warn(
            f"|alpha|^2 up to {rmax2:.1f} approaches the truncation {dim}",
            RuntimeWarning,
            stacklevel=2,
        )
    evals, evecs = np.linalg.eigh(density)
    keep = evals > 1e-12 * max(1.0, float(evals[-1]))
    evals, evecs = evals[keep], evecs[:, keep]

    # D(s) = V diag(exp(-i s mu)) V^dag from the Hermitian form of a^dag - a
    ns = np.sqrt(np.arange(1, dim))
    k_herm = np.zeros((dim, dim), dtype=complex)
    k_herm[np.arange(dim - 1), np.arange(1, dim)] = -1j * ns
    k_herm[np.arange(1, dim), np.arange(dim - 1)] = 1j * ns
    mu, vmat = np.linalg.eigh(k_herm)

    re_grid, im_grid = np.meshgrid(alpha_re, alpha_im)
    alphas = (re_grid + 1j * im_grid).ravel()
    s = np.abs(alphas)
    theta = np.angle(alphas)
    parity = (-1.0) ** np.arange(dim)
    phases = np.exp(-1j * np.outer(np.arange(dim), theta))  # R(theta)^dag columns
    w_flat = np.zeros(alphas.size)
    for lam, phi in zip(evals, evecs.T):
        rotated = phases * phi[:, None]
        y = vmat.conj().T @ rotated
        y *= np.exp(1j * np.outer(mu, s))  # apply D(s)^dag in the eigenbasis
        chi = vmat @ y
        w_flat += lam * (parity @ (np.abs(chi) ** 2))
    values = (2.0 / math.pi) * w_flat.reshape(im_grid.shape)
    return WignerGrid(np.asarray(alpha_re), np.asarray(alpha_im), values)


def evolve(h: DenseHamiltonian, psi0: np.ndarray, t_list: np.ndarray) -> np.ndarray:
    """|psi(t)> for each t via the full eigendecomposition of h."""
    _check_normalized(psi0)
    energies, states = np.linalg.eigh(h.entries)
    coeffs = states.conj().T @ psi0
    phases = np.exp(-1j * np.outer(np.asarray(t_list), energies))
    return (phases * coeffs) @ states.T


def _initial_up_vacuum(dim: int) -> np.ndarray:
    psi0 = np.zeros(2 * dim, dtype=complex)
    psi0[0] = 1.0  # |up>|0>
    return psi0


def fidelity_series(
    params: ModelParams,
    t_list: np.ndarray | None = None,
    fock_dim: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(t, F_eff, F_1P): overlap of the full evolution from |up>|0> with the
    effective-model and plain one-photon evolutions."""
    if t_list is None:
        t_list = np.arange(0.0, 20.0 + 1e-12, 0.02)
    t_list = np.asarray(t_list, dtype=float)
    dim = fock_dim if fock_dim is not None else default_fock_dim(params)
    psi0 = _initial_up_vacuum(dim)
    unbiased = ModelParams(params.delta, params.g1, 0.0, 0.0)
    full = evolve(build_hamiltonian(params, dim), psi0, t_list)
    eff = evolve(build_effective_hamiltonian(params, dim), psi0, t_list)
    one_p = evolve(build_hamiltonian(unbiased, dim), psi0, t_list)
    f_eff = np.abs(np.einsum("ti,ti->t", eff.conj(), full))
    f_1p = np.abs(np.einsum("ti,ti->t", one_p.conj(), full))
    return t_list, f_eff, f_1p


def sweep_order_parameters(
    delta: float,
    g2_list: list[float] | np.ndarray,
    ratio_grid: list[float] | np.ndarray,
    fock_dim: int | None = None,
) -> list[tuple[float, float, float, float]]:
    """Rows (ratio, g2, M, N_ph) of the ground state along scaled-coupling grids.

    ratio = g1_eff / g1c_eff; the bare coupling follows from
    g1 = ratio * g1c_eff * sqrt(beta).
    """
    rows: list[tuple[float, float, float, float]] = []
    for g2 in g2_list:
        beta = math.sqrt(1.0 - 4.0 * float(g2) ** 2)
        g1c_eff = math.sqrt(delta * beta) / 2.0
        for ratio in ratio_grid:
            g1 = float(ratio) * g1c_eff * math.sqrt(beta)
            params = ModelParams(delta, g1, float(g2))
            _, state = ground_state(params, fock_dim)
            rows.append(
                (float(ratio), float(g2), magnetization(state), photon_number(state))
            )
    return rows
