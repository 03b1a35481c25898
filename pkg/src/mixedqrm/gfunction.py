"""The 4x4 transcendental determinant and the regular spectrum.

Projecting the equality of the two frame expansions onto the bare Fock
states |0> and |1> gives four homogeneous linear equations in the seeds
(f0, f1, f0', f1'); eigenvalues are the energies where the 4x4
coefficient determinant vanishes.  Root searches run strictly inside
the open intervals between the merged pole ladders of both families,
where the determinant is continuous.

Degenerate couplings take dedicated branches: at g2 = 0 the recurrence
drops to three terms and a 2x2 determinant (the one-photon limit), at
delta = 0 the spectrum is the two pole ladders themselves, and at
g1 = g2 = 0 it is n +- delta/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, build_frame, pole_energy, pole_gap
from .fock import OverlapTable, overlap_table
from .recurrence import (
    DEFAULT_N,
    MAX_N,
    N_CERTIFY_STEP,
    POLE_GUARD,
    CoefficientSeries,
    RecurrenceContext,
    default_series_length,
    propagate,
    propagate_one_photon,
)

BISECTION_TOL = 1e-10
ROOT_DRIFT_TOL = 1e-8
# A sign-change bracket is accepted only if the determinant clears its
# estimated roundoff floor by this factor at an endpoint.
NOISE_FACTOR = 100.0
# Acceptance threshold on the relative smallest singular value of the
# overdetermined 4x2 system in the one-photon branch (spurious filter).
ONE_PHOTON_SV_TOL = 1e-5
# A projected sum counts as tail-converged when its last terms sit this
# far (natural log) below the dominant term of its column; 18 decades is
# already below double-precision resolution of the sum.
TAIL_LOG_MARGIN = 18.0 * math.log(10.0)


class UnstableRootError(RuntimeError):
    """A bracketed root failed the series-length certification."""


@dataclass(frozen=True)
class GMatrix:
    entries: np.ndarray  # 4x4, or 2x2 in the one-photon branch
    E: float
    N: int
    scale_log: float


@dataclass(frozen=True)
class Root:
    E: float
    bracket: tuple[float, float]
    residual: float
    N_used: int


@dataclass(frozen=True)
class Spectrum:
    roots: list[Root]
    poles_A: list[float]
    poles_B: list[float]

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.E for r in self.roots])


@dataclass(frozen=True)
class SpectralScan:
    E: np.ndarray
    sign: np.ndarray
    log10_magnitude: np.ndarray
    poles_A: list[float]
    poles_B: list[float]


def _weighted_sums(vec: np.ndarray, table: OverlapTable) -> tuple[np.ndarray, np.ndarray, float]:
    """Projected sums sum_n vec_n sqrt(n!) <m|n> for m = 0, 1.

    Terms are combined in the log domain (the table carries per-n log
    scales), returning per-row values and log offsets so arbitrarily
    deep series never overflow.  The third return is the log of the
    largest term in the last few indices, the tail-convergence proxy.
    """
    vals = np.empty(2)
    logs = np.empty(2)
    tail = -math.inf
    for m in (0, 1):
        a = vec * table.rows[m]
        nz = a != 0.0
        if not np.any(nz):
            vals[m] = 0.0
            logs[m] = -math.inf
            continue
        la = np.full(a.shape, -math.inf)
        la[nz] = np.log(np.abs(a[nz])) + table.logs[nz]
        peak = float(la.max())
        vals[m] = float(np.sum(np.sign(a) * np.exp(la - peak)))
        logs[m] = peak
        tail = max(tail, float(la[-5:].max()))
    return vals, logs, tail


def _merge_column(parts: list[tuple[np.ndarray, np.ndarray]], log_scale: float) -> tuple[np.ndarray, float]:
    """Stack projected-sum pairs into one column at a common log scale."""
    vals = np.concatenate([p[0] for p in parts])
    logs = np.concatenate([p[1] for p in parts])
    top = float(logs.max())
    if top == -math.inf:
        return vals, log_scale
    return vals * np.exp(logs - top), top + log_scale


class GEvaluator:
    """Caches the frame and overlap tables for one parameter set."""

    def __init__(self, params: ModelParams, N: int | None = None) -> None:
        if params.delta == 0.0:
            raise ValueError("delta = 0 is the analytic pole-ladder branch; no G-function")
        self.params = params
        self.frame = build_frame(params)
        self.N = N if N is not None else default_series_length(self.frame)
        self.one_photon = self.frame.uv == 0.0
        if self.one_photon and params.g1 == 0.0:
            raise ValueError("g1 = g2 = 0 has the analytic spectrum n +- delta/2")
        self.table_A: OverlapTable = overlap_table(self.frame, "A", self.N)
        self.table_B: OverlapTable = overlap_table(self.frame, "B", self.N)
        self._tail_defect = -math.inf

    def _track_tail(self, tail: float, logs: np.ndarray) -> None:
        peak = float(np.max(logs))
        if peak > -math.inf and tail > -math.inf:
            self._tail_defect = max(self._tail_defect, tail - peak + TAIL_LOG_MARGIN)

    def _column_A(self, series: CoefficientSeries) -> tuple[np.ndarray, float]:
        vf, lf, tf = _weighted_sums(series.f, self.table_A)
        ve, le, te = _weighted_sums(series.e, self.table_A)
        self._track_tail(max(tf, te), np.concatenate([lf, le]))
        return _merge_column([(vf, lf), (ve, le)], series.log_scale)

    def _column_B(self, series: CoefficientSeries) -> tuple[np.ndarray, float]:
        vf, lf, tf = _weighted_sums(series.f, self.table_B)
        ve, le, te = _weighted_sums(series.e, self.table_B)
        self._track_tail(max(tf, te), np.concatenate([lf, le]))
        col, log = _merge_column([(ve, le), (vf, lf)], series.log_scale)
        return -col, log

    def matrix(self, E: float) -> GMatrix:
        """Rows G^(0,0), G^(0,1), G^(1,0), G^(1,1); columns f0, f1, f0', f1'.

        Each column carries its own log scale factor; their sum is
        reported in scale_log.  Determinant zeros are invariant under
        per-column scaling.
        """
        ctx = RecurrenceContext(self.params, self.frame, E, self.N)
        if self.one_photon:
            return self._matrix_one_photon(ctx)
        cols = [
            self._column_A(propagate(ctx, "A", "F0")),
            self._column_A(propagate(ctx, "A", "F1")),
            self._column_B(propagate(ctx, "B", "F0")),
            self._column_B(propagate(ctx, "B", "F1")),
        ]
        scale = sum(c[1] for c in cols)
        return GMatrix(np.column_stack([c[0] for c in cols]), E, self.N, scale)

    def tail_defect(self, E: float) -> float:
        """Positive when the series tail is not yet negligible at this E."""
        self._tail_defect = -math.inf
        self.matrix(E)
        defect = self._tail_defect
        self._tail_defect = -math.inf
        return defect

    def _one_photon_full(self, ctx: RecurrenceContext) -> np.ndarray:
        """All four projected equations (4x2) in the seeds (f0, f0')."""
        cols = [
            self._column_A(propagate_one_photon(ctx, "A")),
            self._column_B(propagate_one_photon(ctx, "B")),
        ]
        return np.column_stack([c[0] for c in cols])

    def _matrix_one_photon(self, ctx: RecurrenceContext) -> GMatrix:
        full = self._one_photon_full(ctx)
        # rows G^(0,0) and G^(1,0) suffice for a square system; the
        # dropped rows are re-checked by the spurious filter
        return GMatrix(full[[0, 2], :], ctx.E, self.N, 0.0)

    def value(self, E: float) -> float:
        return float(np.linalg.det(self.matrix(E).entries))

    def normalized_det(self, E: float) -> float:
        """Determinant of the column-normalized matrix: same zeros, O(1) scale."""
        return self.det_and_noise(E)[0]

    def det_and_noise(self, E: float) -> tuple[float, float]:
        """Column-normalized determinant and an estimate of its noise floor.

        Matrix entries are stored relative to the peak term of their
        column, so a small column norm means the projected sums all
        cancelled far below their terms; the roundoff of such a sum is
        eps per term at peak scale, and its share of the normalized
        determinant is amplified by 1/||column||.  Sign changes with
        |det| at or below this floor carry no information.
        """
        m = self.matrix(E).entries
        norms = np.linalg.norm(m, axis=0)
        norms[norms == 0.0] = 1.0
        det = float(np.linalg.det(m / norms))
        eps = float(np.finfo(float).eps)
        noise = m.shape[0] * eps * (self.N + 1) / float(np.min(norms))
        return det, noise

    def signed_log(self, E: float) -> tuple[float, float]:
        """(sign, log10 |det|) including the accumulated column scales."""
        gm = self.matrix(E)
        sign, logabs = np.linalg.slogdet(gm.entries)
        return float(sign), float((logabs + gm.scale_log) / math.log(10.0))

    def is_spurious(self, E: float) -> bool:
        """One-photon branch: reject 2x2 roots the dropped rows contradict."""
        if not self.one_photon:
            return False
        ctx = RecurrenceContext(self.params, self.frame, E, self.N)
        full = self._one_photon_full(ctx)
        norms = np.linalg.norm(full, axis=0)
        norms[norms == 0.0] = 1.0
        sv = np.linalg.svd(full / norms, compute_uv=False)
        return sv[-1] > ONE_PHOTON_SV_TOL * sv[0]


def g_matrix(E: float, params: ModelParams, N: int | None = None) -> GMatrix:
    return GEvaluator(params, N).matrix(E)


def g_value(E: float, params: ModelParams, N: int | None = None) -> float:
    return GEvaluator(params, N).value(E)


# ---------------------------------------------------------------------------
# Poles, scan, roots


def poles_in_window(
    params: ModelParams, E_lo: float, E_hi: float, pad: int = 0
) -> tuple[list[float], list[float]]:
    beta = params.beta
    out: list[list[float]] = []
    for fam in ("A", "B"):
        base = pole_energy(fam, 0, params)
        n_hi = max(0, math.ceil((E_hi - base) / beta)) + pad
        ladder = [pole_energy(fam, n, params) for n in range(n_hi + 1)]
        out.append([p for p in ladder if E_lo <= p <= E_hi or pad > 0])
    return out[0], out[1]


def default_resolution(params: ModelParams) -> float:
    gap = pole_gap(params)
    return min(0.01, gap / 8.0) if gap > 0.0 else 0.01


def scan(
    params: ModelParams,
    E_lo: float,
    E_hi: float,
    resolution: float | None = None,
    N: int | None = None,
) -> SpectralScan:
    """Grid of signed log-magnitude determinant values over an energy window."""
    if not E_lo < E_hi:
        raise ValueError(f"need E_lo < E_hi, got {E_lo}, {E_hi}")
    if resolution is None:
        resolution = default_resolution(params)
    ev = GEvaluator(params, N)
    poles_a, poles_b = poles_in_window(params, E_lo, E_hi)
    all_poles = np.array(sorted(poles_a + poles_b))
    grid = np.arange(E_lo, E_hi + resolution / 2.0, resolution)
    if all_poles.size:
        near = np.min(np.abs(grid[:, None] - all_poles[None, :]), axis=1)
        grid = grid[near > 2.0 * POLE_GUARD]
    signs = np.empty(grid.size)
    logs = np.empty(grid.size)
    for i, e_val in enumerate(grid):
        signs[i], logs[i] = ev.signed_log(float(e_val))
    return SpectralScan(grid, signs, logs, poles_a, poles_b)


def _merged_poles(params: ModelParams, E_lo: float, E_hi: float) -> list[float]:
    poles_a, poles_b = poles_in_window(params, E_lo - 1.0, E_hi + 1.0, pad=1)
    merged: list[float] = []
    for p in sorted(poles_a + poles_b):
        if not merged or p - merged[-1] > 2.0 * POLE_GUARD:
            merged.append(p)
    return merged


def _interval_grid(lo: float, hi: float, resolution: float) -> np.ndarray:
    """Sample points inside an inter-pole interval, clustered at the walls.

    The determinant diverges at both walls, so wall-adjacent roots are
    hunted with geometrically spaced points down to just above the pole
    guard.
    """
    width = hi - lo
    offset = max(5.0 * POLE_GUARD, 1e-12 * max(abs(lo), abs(hi)))
    if width <= 2.0 * offset:
        return np.array([])
    npts = int(min(400, max(40, math.ceil(width / resolution))))
    core = np.linspace(lo + offset, hi - offset, npts)
    tails = width * np.array([1e-6, 1e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2])
    tails = tails[tails > offset]
    pts = np.concatenate([core, lo + tails, hi - tails])
    return np.unique(pts)


def _probe_energies(params: ModelParams, E_lo: float, E_hi: float, k: int = 3) -> list[float]:
    """A few inter-pole midpoints spread over the window (pole-safe)."""
    merged = _merged_poles(params, E_lo, E_hi)
    bounds = sorted({E_lo, E_hi, *[p for p in merged if E_lo < p < E_hi]})
    mids = [0.5 * (lo + hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi - lo > 4.0 * POLE_GUARD]
    if not mids:
        return [0.5 * (E_lo + E_hi)]
    step = max(1, len(mids) // k)
    return mids[::step][:k]


def _tail_adapted_evaluator(
    params: ModelParams, E_lo: float, E_hi: float, N: int | None
) -> GEvaluator:
    """Evaluator with N grown until the projected sums are tail-converged.

    Strong displacement pushes the dominant series terms to high n, well
    beyond what the squeeze-based default length anticipates; the tail
    diagnostic catches that and the length is grown geometrically up to
    the hard cap.
    """
    ev = GEvaluator(params, N)
    if N is not None:
        return ev
    probes = _probe_energies(params, E_lo, E_hi)
    defect = max(ev.tail_defect(E) for E in probes)
    stalls = 0
    n_next = ev.N
    while defect > 0.0 and n_next < MAX_N:
        n_next = min(MAX_N, math.ceil(1.6 * n_next))
        grown = GEvaluator(params, n_next)
        grown_defect = max(grown.tail_defect(E) for E in probes)
        if grown_defect < defect:
            ev, defect, stalls = grown, grown_defect, 0
            continue
        # the tail tracks the running peak no matter how long the
        # series: a dominant spurious solution of the truncated
        # recurrence is growing faster than the wanted one decays, and
        # longer series only deepen the column cancellation; stop and
        # let the noise-floor check route this window to guard digits
        stalls += 1
        if stalls >= 2:
            break
    return ev


def _bisect(sign_of, a: float, b: float, sa: float, sb: float) -> float:
    while b - a > BISECTION_TOL:
        mid = 0.5 * (a + b)
        sm = sign_of(mid)
        if sm == 0.0:
            return mid
        if sm == sa:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def find_roots(
    params: ModelParams,
    E_lo: float,
    E_hi: float,
    N: int | None = None,
    certify: bool = True,
) -> Spectrum:
    """All regular eigenvalues in the window, bisected and N-certified.

    Eigenvalues lying on pole lines are out of scope here (exceptional
    machinery); the search runs in the open inter-pole intervals only.
    """
    if not E_lo < E_hi:
        raise ValueError(f"need E_lo < E_hi, got {E_lo}, {E_hi}")
    poles_a, poles_b = poles_in_window(params, E_lo, E_hi)

    if params.delta == 0.0:
        roots = [
            Root(p, (p, p), 0.0, 0)
            for p in sorted(poles_a + poles_b)
            if E_lo <= p <= E_hi
        ]
        return Spectrum(roots, poles_a, poles_b)
    if params.g1 == 0.0 and params.g2 == 0.0:
        roots = []
        for n in range(0, math.ceil(E_hi + params.delta) + 1):
            for e_val in (n - params.delta / 2.0, n + params.delta / 2.0):
                if E_lo <= e_val <= E_hi:
                    roots.append(Root(e_val, (e_val, e_val), 0.0, 0))
        roots.sort(key=lambda r: r.E)
        return Spectrum(roots, poles_a, poles_b)

    adaptive = N is None
    ev = _tail_adapted_evaluator(params, E_lo, E_hi, N)
    N = ev.N
    ev_hi = GEvaluator(params, N + N_CERTIFY_STEP) if certify else None
    mp_ev = mp_hi = None
    resolution = default_resolution(params)
    merged = _merged_poles(params, E_lo, E_hi)
    bounds = sorted({E_lo, E_hi, *[p for p in merged if E_lo < p < E_hi]})

    roots: list[Root] = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        grid = _interval_grid(lo, hi, resolution)
        grid = grid[(grid >= E_lo) & (grid <= E_hi)]
        if grid.size < 2:
            continue
        pairs = [ev.det_and_noise(float(x)) for x in grid]
        vals = np.array([d for d, _ in pairs])
        floors = np.array([n for _, n in pairs])

        if np.any(np.abs(vals) < NOISE_FACTOR * floors) and not ev.one_photon:
            # the double-precision determinant is cancellation noise
            # somewhere in this interval; redo the whole interval with
            # guard digits (coarser grid, since each evaluation is slow)
            from .highprec import MPEvaluator

            if mp_ev is None:
                # guard digits remove the float-resolution pressure on
                # the series length: a modest margin over the truncation
                # requirement suffices, and shorter series keep the
                # column cancellation (hence the working precision)
                # shallow
                n_mp = max(100, default_series_length(ev.frame)) if adaptive else N
                mp_ev = MPEvaluator(params, n_mp)
                mp_hi = MPEvaluator(params, n_mp + N_CERTIFY_STEP) if certify else None
            grid = _interval_grid(lo, hi, max(resolution, (hi - lo) / 140.0))
            grid = grid[(grid >= E_lo) & (grid <= E_hi)]
            if grid.size < 2:
                continue
            signs = np.array([np.sign(mp_ev.normalized_det(float(x))) for x in grid])
            for i in np.flatnonzero(signs[:-1] * signs[1:] < 0.0):
                a, b = float(grid[i]), float(grid[i + 1])
                root = _bisect(
                    lambda x: np.sign(mp_ev.normalized_det(x)), a, b, signs[i], signs[i + 1]
                )
                n_used = mp_ev.N
                residual = abs(mp_ev.normalized_det(root))
                if mp_hi is not None:
                    # a sign change of the longer series inside
                    # root +- drift tolerance certifies the root with
                    # two evaluations instead of a second bisection
                    da = mp_hi.normalized_det(root - ROOT_DRIFT_TOL)
                    db = mp_hi.normalized_det(root + ROOT_DRIFT_TOL)
                    if np.sign(da) * np.sign(db) >= 0.0:
                        sa2 = np.sign(mp_hi.normalized_det(a))
                        sb2 = np.sign(mp_hi.normalized_det(b))
                        if sa2 * sb2 >= 0.0:
                            continue  # truncation artifact of the shorter series
                        root2 = _bisect(
                            lambda x: np.sign(mp_hi.normalized_det(x)), a, b, sa2, sb2
                        )
                        if abs(root2 - root) > ROOT_DRIFT_TOL:
                            raise UnstableRootError(
                                f"root near E={root} drifted {abs(root2 - root):.2e} "
                                f"under N -> N+{N_CERTIFY_STEP}"
                            )
                        root = root2
                    residual = min(abs(da), abs(db))
                    n_used = mp_hi.N
                roots.append(Root(root, (a, b), residual, n_used))
            continue

        signs = np.sign(vals)
        for i in np.flatnonzero(signs[:-1] * signs[1:] < 0.0):
            a, b = float(grid[i]), float(grid[i + 1])
            if max(abs(vals[i]), abs(vals[i + 1])) < NOISE_FACTOR * max(
                floors[i], floors[i + 1]
            ):
                continue  # cancellation noise, not a determinant zero
            root = _bisect(
                lambda x: np.sign(ev.normalized_det(x)), a, b, signs[i], signs[i + 1]
            )
            n_used = N
            if ev_hi is not None:
                sa2 = np.sign(ev_hi.normalized_det(a))
                sb2 = np.sign(ev_hi.normalized_det(b))
                if sa2 * sb2 >= 0.0:
                    # the longer series disagrees about a zero here;
                    # rescan the bracket at the higher N, and if no sign
                    # change survives the bracket was a truncation
                    # artifact and is dropped
                    sub = np.linspace(a, b, 33)
                    ssub = np.array(
                        [np.sign(ev_hi.normalized_det(float(x))) for x in sub]
                    )
                    hits = np.flatnonzero(ssub[:-1] * ssub[1:] < 0.0)
                    if hits.size == 0:
                        continue
                    j = int(hits[0])
                    a, b = float(sub[j]), float(sub[j + 1])
                    sa2, sb2 = ssub[j], ssub[j + 1]
                root2 = _bisect(
                    lambda x: np.sign(ev_hi.normalized_det(x)), a, b, sa2, sb2
                )
                if abs(root2 - root) > ROOT_DRIFT_TOL:
                    raise UnstableRootError(
                        f"root near E={root} drifted {abs(root2 - root):.2e} "
                        f"under N -> N+{N_CERTIFY_STEP}"
                    )
                root, n_used = root2, N + N_CERTIFY_STEP
                if ev_hi.is_spurious(root):
                    continue
                residual = abs(ev_hi.normalized_det(root))
            else:
                if ev.is_spurious(root):
                    continue
                residual = abs(ev.normalized_det(root))
            roots.append(Root(root, (a, b), residual, n_used))
    roots.sort(key=lambda r: r.E)
    return Spectrum(roots, poles_a, poles_b)


def lower_bound(params: ModelParams) -> float:
    """Rigorous lower bound on the spectrum: min block energy minus delta/2."""
    return pole_energy("B", 0, params) - params.delta / 2.0


def find_lowest_roots(params: ModelParams, k: int, N: int | None = None) -> Spectrum:
    """The k lowest regular eigenvalues (window grown until k are found)."""
    e_lo = lower_bound(params) - 0.1
    e_hi = e_lo + (k + 1) * params.beta + params.delta + 0.5
    for _ in range(8):
        spec = find_roots(params, e_lo, e_hi, N=N)
        if len(spec.roots) >= k:
            return Spectrum(spec.roots[:k], spec.poles_A, spec.poles_B)
        e_hi += 2.0 * params.beta + 0.5
    raise RuntimeError(f"could not locate {k} roots above {e_lo}")


@dataclass(frozen=True)
class SweepResult:
    rows: list[tuple[float, int, float]]  # (g2, level_index, E)
    pole_rows: list[tuple[float, str, int, float]]  # (g2, family, n, E)
    errors: dict[float, str]


def spectrum_sweep(
    params: ModelParams,
    g2_grid: list[float] | np.ndarray,
    k_levels: int,
    N: int | None = None,
    n_poles: int = 6,
) -> SweepResult:
    """Lowest-k levels and pole curves along a g2 grid (errors recorded, not raised)."""
    rows: list[tuple[float, int, float]] = []
    pole_rows: list[tuple[float, str, int, float]] = []
    errors: dict[float, str] = {}
    for g2 in g2_grid:
        p = ModelParams(params.delta, params.g1, float(g2), params.epsilon)
        for fam in ("A", "B"):
            for n in range(n_poles):
                pole_rows.append((float(g2), fam, n, pole_energy(fam, n, p)))
        try:
            spec = find_lowest_roots(p, k_levels, N=N)
        except Exception as exc:  # per-point failures must not kill the sweep
            errors[float(g2)] = f"{type(exc).__name__}: {exc}"
            continue
        for idx, root in enumerate(spec.roots):
            rows.append((float(g2), idx, root.E))
    return SweepResult(rows, pole_rows, errors)
