"""Truncated Fock-space operators and the frame overlap tables.

The transcendental determinant only ever needs <0|n> and <1|n> for the
squeezed-displaced basis states of each frame.  The production tables
carry the factorial weight sqrt(n!) folded in and are generated by a
closed three-term recursion with per-index log scaling, so they stay
accurate (and representable) arbitrarily deep into the tail.  A dense
matrix-exponential construction of the bare rows is kept alongside as
an independent cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.sparse import diags
from scipy.sparse.linalg import expm_multiply

from .model import BogoliubovFrame, _check_family

# Entries of the dense cross-check table must be stable at this level
# under enlarging the Fock truncation.
TABLE_CONVERGENCE_TOL = 1e-10

# Scaled table entries are renormalized into this band.
_SCALE_HI = 1e8
_SCALE_LO = 1e-8


class TruncationError(RuntimeError):
    """A truncated construction failed its vary-M convergence check."""


@dataclass(frozen=True)
class TruncatedOperator:
    dim: int
    entries: np.ndarray


@dataclass(frozen=True)
class OverlapTable:
    """Factorial-weighted overlap rows of one frame basis.

    Entry (m, n) represents sqrt(n!) <m|n>_fam as rows[m, n] * exp(logs[n]),
    for m in {0, 1} and n = 0..n_max.  The shared per-n exponent keeps the
    stored values O(1) no matter how deep the table goes.
    """

    family: str
    n_max: int
    rows: np.ndarray  # shape (2, n_max + 1), scaled values
    logs: np.ndarray  # shape (n_max + 1,), log of the per-n scale factor


@dataclass(frozen=True)
class DenseOverlapTable:
    """Bare rows <0|n> and <1|n> from truncated matrix exponentials."""

    family: str
    n_max: int
    rows: np.ndarray  # shape (2, n_max + 1)
    fock_dim: int


def ladder_matrices(dim: int) -> tuple[TruncatedOperator, TruncatedOperator]:
    """Annihilation and creation matrices on a dim-dimensional Fock space."""
    if dim < 2:
        raise ValueError(f"Fock dimension must be >= 2, got {dim}")
    a = np.zeros((dim, dim))
    ns = np.arange(1, dim)
    a[ns - 1, ns] = np.sqrt(ns)
    return TruncatedOperator(dim, a), TruncatedOperator(dim, a.T.copy())


def squeeze_matrix(r: float, dim: int) -> TruncatedOperator:
    """S(r) = exp((r/2)(a^2 - a^dag^2)) on the truncated space."""
    _warn_if_tight(dim, 20.0 * math.exp(2.0 * abs(r)), "squeeze")
    a, adag = ladder_matrices(dim)
    gen = 0.5 * r * (a.entries @ a.entries - adag.entries @ adag.entries)
    return TruncatedOperator(dim, expm(gen))


def displacement_matrix(w: float, dim: int) -> TruncatedOperator:
    """D(w) = exp(w (a^dag - a)) on the truncated space (real w)."""
    _warn_if_tight(dim, 20.0 * (w * w + 1.0), "displacement")
    a, adag = ladder_matrices(dim)
    return TruncatedOperator(dim, expm(w * (adag.entries - a.entries)))


def _warn_if_tight(dim: int, needed: float, kind: str) -> None:
    if dim < needed:
        warnings.warn(
            f"{kind} matrix at dim {dim} has little truncation headroom "
            f"(want >= {needed:.0f}); the retained block may not be unitary",
            RuntimeWarning,
            stacklevel=3,
        )


def truncation_defect(op: TruncatedOperator, margin: int) -> float:
    """Max deviation of U^T U from identity on the leading (dim - margin) block."""
    k = op.dim - margin
    gram = op.entries.T @ op.entries
    return float(np.max(np.abs(gram[:k, :k] - np.eye(k))))


def _frame_alpha_zeta(frame: BogoliubovFrame, family: str) -> tuple[float, float]:
    """Displacement and squeeze of the state whose Fock coefficients are row 0.

    Row m of the family-A table is <m|S(r) D(-w)|n>, i.e. the n-th Fock
    coefficient of D(w) S(-r)|m>; family B is <m|S(-r) D(-w')|n>.
    """
    if family == "A":
        return frame.w, -frame.r
    return frame.w_prime, frame.r


def overlap_table(frame: BogoliubovFrame, family: str, n_max: int) -> OverlapTable:
    """Scaled factorial-weighted rows sqrt(n!) <m|n>_fam, m in {0, 1}.

    Row 0 follows the three-term recursion of displaced-squeezed-vacuum
    Fock coefficients (obtained by transforming the annihilator through
    the displacement and squeeze); row 1 is a closed combination of
    row-0 neighbours.  Both recursions propagate the factorial-weighted
    quantity u_n = sqrt(n!) c_n, whose generic and wanted solutions grow
    at the same rate, so the forward pass is stable.
    """
    fam = _check_family(family)
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    alpha, zeta = _frame_alpha_zeta(frame, fam)
    ch, sh, th = math.cosh(zeta), math.sinh(zeta), math.tanh(zeta)
    drive = alpha * (ch + sh)
    # u0: scaled row-0 values; logs: shared per-n exponents
    u0 = np.empty(n_max + 2)
    logs = np.zeros(n_max + 2)
    u0[0] = math.exp(-0.5 * alpha * alpha * (1.0 + th)) / math.sqrt(ch)
    u0[1] = drive * u0[0] / ch
    for n in range(1, n_max + 1):
        prev = u0[n - 1] * math.exp(logs[n - 1] - logs[n])
        raw = (drive * u0[n] - sh * n * prev) / ch
        mag = abs(raw)
        if mag > _SCALE_HI or (0.0 < mag < _SCALE_LO):
            shift = math.log(mag)
            u0[n + 1] = math.copysign(1.0, raw)
            logs[n + 1] = logs[n] + shift
        else:
            u0[n + 1] = raw
            logs[n + 1] = logs[n]
    # u1_n = ch (n u0_{n-1} - alpha u0_n) + sh (u0_{n+1} - alpha u0_n),
    # assembled at the row-0 scale of index n
    u1 = np.empty(n_max + 1)
    for n in range(n_max + 1):
        prev = u0[n - 1] * math.exp(logs[n - 1] - logs[n]) if n >= 1 else 0.0
        nxt = u0[n + 1] * math.exp(logs[n + 1] - logs[n])
        u1[n] = ch * (n * prev - alpha * u0[n]) + sh * (nxt - alpha * u0[n])
    rows = np.vstack([u0[: n_max + 1], u1])
    return OverlapTable(family=fam, n_max=n_max, rows=rows, logs=logs[: n_max + 1])


def table_values(table: OverlapTable, weighted: bool = True) -> np.ndarray:
    """Plain float rows of the table (overflow possible for deep tables).

    With weighted=False the sqrt(n!) factor is divided back out, giving
    the bare overlaps <m|n> for direct comparison with the dense tables.
    """
    from scipy.special import gammaln

    logs = table.logs.copy()
    if not weighted:
        logs = logs - 0.5 * gammaln(np.arange(table.n_max + 1) + 1.0)
    return table.rows * np.exp(logs)[None, :]


def _table_rows_dense(frame: BogoliubovFrame, family: str, n_max: int, dim: int) -> np.ndarray:
    """First two bare rows via sparse matrix exponentials on thin blocks."""
    ns = np.arange(1, dim)
    sq = np.sqrt(ns)
    a = diags([sq], [1])
    adag = diags([sq], [-1])
    if family == "A":
        r, w = frame.r, frame.w
    else:
        r, w = -frame.r, frame.w_prime
    # rows m of S: (S^T e_m) = S(-r) e_m since the generator is antisymmetric
    left = np.zeros((dim, 2))
    left[0, 0] = 1.0
    left[1, 1] = 1.0
    if r != 0.0:
        gen_s = 0.5 * (-r) * (a @ a - adag @ adag)
        left = expm_multiply(gen_s.tocsr(), left)
    right = np.zeros((dim, n_max + 1))
    right[np.arange(n_max + 1), np.arange(n_max + 1)] = 1.0
    if w != 0.0:
        gen_d = (-w) * (adag - a)
        right = expm_multiply(gen_d.tocsr(), right)
    return left.T @ right


def default_fock_dim(frame: BogoliubovFrame, n_max: int) -> int:
    """Truncation with headroom for squeezing-spread Fock support."""
    return max(200, 8 * n_max, math.ceil(20.0 * math.exp(2.0 * frame.r)))


def overlap_table_dense(
    frame: BogoliubovFrame,
    family: str,
    n_max: int,
    fock_dim: int | None = None,
    check: bool = True,
) -> DenseOverlapTable:
    """Bare overlap rows <m|n>_fam by truncated matrix exponentials.

    Independent of the recursion construction; with check=True the table
    is rebuilt at fock_dim + 50 and must agree entrywise to
    TABLE_CONVERGENCE_TOL, otherwise TruncationError.
    """
    fam = _check_family(family)
    if fock_dim is None:
        fock_dim = default_fock_dim(frame, n_max)
    if not n_max < fock_dim / 4:
        raise ValueError(f"need n_max < fock_dim/4, got n_max={n_max}, fock_dim={fock_dim}")
    rows = _table_rows_dense(frame, fam, n_max, fock_dim)
    if check:
        rows_big = _table_rows_dense(frame, fam, n_max, fock_dim + 50)
        err = float(np.max(np.abs(rows - rows_big)))
        if err > TABLE_CONVERGENCE_TOL:
            raise TruncationError(
                f"overlap table ({fam}, n_max={n_max}) not converged at "
                f"fock_dim={fock_dim}: vary-M drift {err:.3e}"
            )
    return DenseOverlapTable(family=fam, n_max=n_max, rows=rows, fock_dim=fock_dim)
