"""Coefficient series of the two frame expansions at a trial energy.

Projecting the Schroedinger equation onto the frame number states gives,
per family, a five-term linear recurrence for the f coefficients with
the e coefficients slaved to them through the pole denominators.  The
whole series is linear in the two seeds (f0, f1), which is what makes
the 4x4 determinant construction work.  The exceptional variant pins
f_m = 0 on a pole line and promotes e_m to a free seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import BogoliubovFrame, ModelParams, _check_family, pole_energy

# Below this energy distance from a pole the determinant is dominated by
# the pole itself; such points belong to the exceptional machinery.
POLE_GUARD = 1e-8

# Joint-rescale threshold for the propagated arrays.
RESCALE_THRESHOLD = 1e150

DEFAULT_N = 60
MAX_N = 2000
# Re-running a root search at N + this must not move any root.
N_CERTIFY_STEP = 20


def default_series_length(frame: "BogoliubovFrame") -> int:
    """Series length with the squeeze-dependent tail decay accounted for.

    Successive overlap factors decay like tanh(r)^(n/2), so the number
    of terms needed for a fixed tail grows like 1/|log tanh(r)|; 60
    suffices for weak squeezing but not approaching the collapse point.
    Strong displacement slows convergence further; that regime is
    handled by the tail diagnostics of the evaluators, which grow N
    beyond this starting value when needed.
    """
    t = math.tanh(frame.r)
    if t <= 0.0:
        return DEFAULT_N
    needed = math.ceil(24.0 / -math.log10(t))
    return min(MAX_N, max(DEFAULT_N, needed))


class PoleProximityError(ArithmeticError):
    """Trial energy too close to a recurrence pole with a nonzero f_n."""


class SeriesOverflowError(OverflowError):
    """Coefficients exceeded the rescale threshold twice in one step."""


@dataclass(frozen=True)
class RecurrenceContext:
    """Immutable inputs of one series propagation."""

    params: ModelParams
    frame: BogoliubovFrame
    E: float
    N: int

    @property
    def omega_slope(self) -> float:
        # coefficient of n in Omega(n, E) = (u^2 + v^2 + 4 g2 u v) n - E
        return (1.0 + 4.0 * self.params.g2 ** 2) / self.frame.beta

    def omega(self, n: int) -> float:
        return self.omega_slope * n - self.E


@dataclass
class CoefficientSeries:
    family: str
    seed_id: str
    f: np.ndarray
    e: np.ndarray
    log_scale: float = 0.0
    # Would-be recurrence value of the pinned coefficient in the
    # exceptional variant (m >= 2); None otherwise.
    forced_fm: float | None = None


def _family_constants(frame: BogoliubovFrame, family: str) -> tuple[float, float, float]:
    """(t1, t2, h): the n+-1 coefficient, the n+-2 coefficient, the constant."""
    if family == "A":
        return -2.0 * (frame.u - frame.v) ** 2 * frame.w, -2.0 * frame.uv, frame.h_A
    return -2.0 * (frame.u + frame.v) ** 2 * frame.w_prime, 2.0 * frame.uv, frame.h_B


def e_from_f(n: int, f_n: float, ctx: RecurrenceContext, family: str) -> float:
    """e_n = (Delta/2) f_n / (E_n^pole - E)."""
    fam = _check_family(family)
    d = pole_energy(fam, n, ctx.params) - ctx.E
    if abs(d) < POLE_GUARD:
        if f_n == 0.0:
            return 0.0
        raise PoleProximityError(
            f"E = {ctx.E} within pole guard of {fam}-pole n = {n} with f_n != 0"
        )
    return 0.5 * ctx.params.delta * f_n / d


def _seed_values(seed: str | tuple[float, float]) -> tuple[float, float, str]:
    if isinstance(seed, str):
        sid = seed.upper()
        if sid == "F0":
            return 1.0, 0.0, "F0"
        if sid == "F1":
            return 0.0, 1.0, "F1"
        raise ValueError(f"unknown seed {seed!r}")
    f0, f1 = seed
    return float(f0), float(f1), f"({f0},{f1})"


def propagate(
    ctx: RecurrenceContext, family: str, seed: str | tuple[float, float]
) -> CoefficientSeries:
    """Run the five-term recurrence forward from a linear seed.

    Boundary convention f_{-1} = f_{-2} = 0.  Requires g2 > 0 (the
    recurrence degenerates to three terms at g2 = 0; see
    propagate_one_photon).
    """
    fam = _check_family(family)
    if ctx.frame.uv == 0.0:
        raise ValueError("five-term recurrence undefined at g2 = 0; use propagate_one_photon")
    f0, f1, sid = _seed_values(seed)
    series = CoefficientSeries(fam, sid, np.zeros(ctx.N + 1), np.zeros(ctx.N + 1))
    series.f[0], series.f[1] = f0, f1
    t1, t2, h = _family_constants(ctx.frame, fam)
    half_delta = 0.5 * ctx.params.delta
    f, e = series.f, series.e
    for n in range(ctx.N + 1):
        e[n] = e_from_f(n, f[n], ctx, fam)
        if n > ctx.N - 2:
            continue
        num = (
            -half_delta * e[n]
            + (ctx.omega(n) + h) * f[n]
            + t1 * ((f[n - 1] if n >= 1 else 0.0) + (n + 1) * f[n + 1])
            + t2 * (f[n - 2] if n >= 2 else 0.0)
        )
        f[n + 2] = -num / (t2 * (n + 1) * (n + 2))
        _rescale_if_needed(series, n + 2)
    return series


def propagate_one_photon(
    ctx: RecurrenceContext, family: str, f0: float = 1.0
) -> CoefficientSeries:
    """Three-term degenerate branch at g2 = 0 (single seed f0; f1 follows)."""
    fam = _check_family(family)
    t1, _, h = _family_constants(ctx.frame, fam)
    if t1 == 0.0:
        raise ValueError("fully decoupled limit g1 = g2 = 0 has an analytic spectrum")
    series = CoefficientSeries(fam, "F0", np.zeros(ctx.N + 1), np.zeros(ctx.N + 1))
    series.f[0] = f0
    half_delta = 0.5 * ctx.params.delta
    f, e = series.f, series.e
    for n in range(ctx.N + 1):
        e[n] = e_from_f(n, f[n], ctx, fam)
        if n > ctx.N - 1:
            continue
        num = (
            -half_delta * e[n]
            + (ctx.omega(n) + h) * f[n]
            + t1 * (f[n - 1] if n >= 1 else 0.0)
        )
        f[n + 1] = -num / (t1 * (n + 1))
        _rescale_if_needed(series, n + 1)
    return series


def propagate_exceptional(
    ctx: RecurrenceContext, family: str, m: int, seed: str
) -> CoefficientSeries:
    """Series with f_m pinned to zero at E = pole(family, m).

    seed "EM" sets e_m = 1 with zero f seeds; f seeds propagate as usual
    with f_m overridden.  For m >= 2 the recurrence value that f_m would
    have taken is recorded in forced_fm (one value per seed; their
    linear combination is the extra determinant row).
    """
    fam = _check_family(family)
    if m < 0:
        raise ValueError(f"pole index must be >= 0, got {m}")
    target = pole_energy(fam, m, ctx.params)
    if abs(ctx.E - target) > 1e-11 * max(1.0, abs(target)):
        raise ValueError(
            f"exceptional series requires E on the pole line: E={ctx.E}, pole={target}"
        )
    sid = seed.upper()
    if sid == "EM":
        f0 = f1 = 0.0
        em = 1.0
    else:
        f0, f1, sid = _seed_values(sid)
        em = 0.0
        if m < 2 and (f0 if m == 0 else f1) != 0.0:
            raise ValueError(f"seed F{m} is pinned to zero for m = {m}")
    series = CoefficientSeries(fam, sid, np.zeros(ctx.N + 1), np.zeros(ctx.N + 1))
    series.f[0], series.f[1] = f0, f1
    series.e[m] = em
    t1, t2, h = _family_constants(ctx.frame, fam)
    half_delta = 0.5 * ctx.params.delta
    f, e = series.f, series.e
    for n in range(ctx.N + 1):
        if n != m:
            e[n] = e_from_f(n, f[n], ctx, fam)
        if n > ctx.N - 2:
            continue
        num = (
            -half_delta * e[n]
            + (ctx.omega(n) + h) * f[n]
            + t1 * ((f[n - 1] if n >= 1 else 0.0) + (n + 1) * f[n + 1])
            + t2 * (f[n - 2] if n >= 2 else 0.0)
        )
        value = -num / (t2 * (n + 1) * (n + 2))
        if n + 2 == m:
            series.forced_fm = value
            f[m] = 0.0
        else:
            f[n + 2] = value
        _rescale_if_needed(series, n + 2)
    return series


def _rescale_if_needed(series: CoefficientSeries, upto: int) -> None:
    peak = max(abs(series.f[upto]), abs(series.e[max(upto - 2, 0)]))
    if peak <= RESCALE_THRESHOLD:
        return
    factor = peak
    series.f /= factor
    series.e /= factor
    if series.forced_fm is not None:
        series.forced_fm /= factor
    series.log_scale += float(np.log(factor))
    if max(abs(series.f[upto]), abs(series.e[max(upto - 2, 0)])) > RESCALE_THRESHOLD:
        raise SeriesOverflowError("coefficient overflow persisted after joint rescale")


def residuals(series: CoefficientSeries, ctx: RecurrenceContext) -> np.ndarray:
    """Per-n residual of the projected equations (should be ~0 up to roundoff).

    Independent re-evaluation of the recurrence used by the property
    tests: plugs the propagated arrays back into the n-projected
    equation for every interior n.
    """
    t1, t2, h = _family_constants(ctx.frame, series.family)
    half_delta = 0.5 * ctx.params.delta
    f, e = series.f, series.e
    out = np.zeros(ctx.N - 1)
    for n in range(ctx.N - 1):
        out[n] = (
            -half_delta * e[n]
            + (ctx.omega(n) + h) * f[n]
            + t1 * ((f[n - 1] if n >= 1 else 0.0) + (n + 1) * f[n + 1])
            + t2 * ((f[n - 2] if n >= 2 else 0.0) + (n + 1) * (n + 2) * f[n + 2])
        )
    return out
