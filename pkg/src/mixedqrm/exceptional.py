"""Exceptional eigenvalues: spectrum points lying on a pole line.

On the m-th pole line of a family the coefficient f_m must vanish and
e_m becomes a free variable, so the four projected equations (plus, for
m >= 2, the recurrence row that previously produced f_m) form a 5x5
(or 4x4) homogeneous system in g2 alone - the energy is pinned to the
pole formula.  Zeros of that determinant along g2, cross-checked
against the diagonalization oracle, are the exceptional solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, _check_family, build_frame, pole_energy
from .fock import overlap_table
from .gfunction import _merge_column, _weighted_sums
from .recurrence import (
    POLE_GUARD,
    RecurrenceContext,
    default_series_length,
    propagate,
    propagate_exceptional,
)
from .refdiag import oracle_spectrum

ORACLE_MATCH_TOL = 1e-6
G2_REFINE_TOL = 1e-10
DEFAULT_G2_GRID = np.linspace(0.005, 0.495, 500)


class PoleCollisionError(RuntimeError):
    """The fixed pole energy sits on a pole of the other family."""


@dataclass(frozen=True)
class ExceptionalProblem:
    family: str
    m: int
    delta: float
    g1: float

    def __post_init__(self) -> None:
        _check_family(self.family)
        if self.m < 0:
            raise ValueError(f"pole index must be >= 0, got {self.m}")

    def params(self, g2: float) -> ModelParams:
        return ModelParams(self.delta, self.g1, g2)


@dataclass(frozen=True)
class ExceptionalRoot:
    g2_star: float
    energy: float
    family: str
    m: int
    residual: float
    oracle_gap: float | None = None
    verified: bool = False


def _assemble(problem: ExceptionalProblem, g2: float, N: int | None) -> tuple[np.ndarray, RecurrenceContext]:
    params = problem.params(g2)
    frame = build_frame(params)
    if N is None:
        N = max(default_series_length(frame), 2 * problem.m + 20)
    fam, m = problem.family, problem.m
    energy = pole_energy(fam, m, params)
    other = "B" if fam == "A" else "A"
    base = pole_energy(other, 0, params)
    nearest = round((energy - base) / frame.beta)
    if nearest >= 0 and abs(energy - (base + frame.beta * nearest)) < POLE_GUARD:
        raise PoleCollisionError(
            f"{fam}-pole m={m} coincides with an {other}-pole at g2={g2}"
        )
    ctx = RecurrenceContext(params, frame, energy, N)
    table_exc = overlap_table(frame, fam, N)
    table_reg = overlap_table(frame, other, N)

    def _extra_part(value: float) -> tuple[np.ndarray, np.ndarray]:
        if value == 0.0:
            return np.array([0.0]), np.array([-math.inf])
        return np.array([math.copysign(1.0, value)]), np.array([math.log(abs(value))])

    def exc_col(series) -> np.ndarray:
        # sums combined in the log domain (per-column positive scale
        # factors never change determinant zeros or signs)
        vf, lf, _ = _weighted_sums(series.f, table_exc)
        ve, le, _ = _weighted_sums(series.e, table_exc)
        if fam == "B":  # B-frame sums enter the identities with the roles swapped
            parts = [(-ve, le), (-vf, lf)]
        else:
            parts = [(vf, lf), (ve, le)]
        parts.append(_extra_part(series.forced_fm if series.forced_fm is not None else 0.0))
        col, _ = _merge_column(parts, series.log_scale)
        return col

    def reg_col(series) -> np.ndarray:
        vf, lf, _ = _weighted_sums(series.f, table_reg)
        ve, le, _ = _weighted_sums(series.e, table_reg)
        if fam == "A":  # regular side is the B frame
            parts = [(-ve, le), (-vf, lf)]
        else:
            parts = [(vf, lf), (ve, le)]
        parts.append(_extra_part(0.0))
        col, _ = _merge_column(parts, series.log_scale)
        return col

    cols = []
    if m >= 2:
        cols.append(exc_col(propagate_exceptional(ctx, fam, m, "F0")))
        cols.append(exc_col(propagate_exceptional(ctx, fam, m, "F1")))
    else:
        surviving = "F1" if m == 0 else "F0"
        cols.append(exc_col(propagate_exceptional(ctx, fam, m, surviving)))
    cols.append(reg_col(propagate(ctx, other, "F0")))
    cols.append(reg_col(propagate(ctx, other, "F1")))
    cols.append(exc_col(propagate_exceptional(ctx, fam, m, "EM")))
    matrix = np.column_stack(cols)
    if m < 2:
        matrix = matrix[:4, :]  # no recurrence row was displaced
    return matrix, ctx


def exc_matrix(problem: ExceptionalProblem, g2: float, N: int | None = None) -> np.ndarray:
    """The exceptional system matrix: 5x5 for m >= 2, 4x4 for m in {0, 1}."""
    matrix, _ = _assemble(problem, g2, N)
    return matrix


def exc_g_value(problem: ExceptionalProblem, g2: float, N: int | None = None) -> float:
    """Column-normalized determinant of the exceptional system (sign meaningful)."""
    matrix = exc_matrix(problem, g2, N)
    norms = np.linalg.norm(matrix, axis=0)
    norms[norms == 0.0] = 1.0
    return float(np.linalg.det(matrix / norms))


def find_exceptional_roots(
    problem: ExceptionalProblem,
    g2_grid: np.ndarray | None = None,
    N: int | None = None,
    verify: bool = True,
    oracle_levels: int = 24,
) -> list[ExceptionalRoot]:
    """Refined zeros of the exceptional determinant along g2.

    With verify=True each root is checked against the diagonalization
    oracle; roots without an oracle eigenvalue within ORACLE_MATCH_TOL of
    the pinned pole energy are returned flagged as unverified, never
    silently dropped.
    """
    if g2_grid is None:
        g2_grid = DEFAULT_G2_GRID
    g2_grid = np.asarray(g2_grid, dtype=float)
    vals = np.empty(g2_grid.size)
    for i, g2 in enumerate(g2_grid):
        try:
            vals[i] = exc_g_value(problem, float(g2), N)
        except PoleCollisionError:
            vals[i] = np.nan  # isolated collision point; no bracket across it
    signs = np.sign(vals)
    roots: list[ExceptionalRoot] = []
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0.0):
        a, b = float(g2_grid[i]), float(g2_grid[i + 1])
        sa = signs[i]
        while b - a > G2_REFINE_TOL:
            mid = 0.5 * (a + b)
            try:
                sm = np.sign(exc_g_value(problem, mid, N))
            except PoleCollisionError:
                # nudge off the isolated collision point and retry once
                mid += 0.05 * (b - a)
                try:
                    sm = np.sign(exc_g_value(problem, mid, N))
                except PoleCollisionError:
                    break
            if sm == 0.0:
                a = b = mid
            elif sm == sa:
                a = mid
            else:
                b = mid
        g2_star = 0.5 * (a + b)
        params = problem.params(g2_star)
        energy = pole_energy(problem.family, problem.m, params)
        try:
            residual = abs(exc_g_value(problem, g2_star, N))
        except PoleCollisionError:
            # the bracket converged onto a ladder coincidence, where the
            # regular-family columns diverge; the sign flip there is not
            # a determinant zero
            continue
        gap = None
        verified = False
        if verify:
            levels = max(oracle_levels, problem.m * 3 + 8)
            system = oracle_spectrum(params, levels)
            gap = float(np.min(np.abs(system.energies - energy)))
            verified = gap < ORACLE_MATCH_TOL
        roots.append(
            ExceptionalRoot(
                g2_star=g2_star,
                energy=energy,
                family=problem.family,
                m=problem.m,
                residual=residual,
                oracle_gap=gap,
                verified=verified,
            )
        )
    return roots


def smallest_singular_ratio(problem: ExceptionalProblem, g2: float, N: int | None = None) -> float:
    """sigma_min / sigma_max of the column-normalized exceptional matrix."""
    matrix = exc_matrix(problem, g2, N)
    norms = np.linalg.norm(matrix, axis=0)
    norms[norms == 0.0] = 1.0
    sv = np.linalg.svd(matrix / norms, compute_uv=False)
    return float(sv[-1] / sv[0])
