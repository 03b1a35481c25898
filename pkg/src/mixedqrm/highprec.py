"""Arbitrary-precision determinant evaluation for cancellation-heavy regimes.

With strong one-photon coupling the projected overlap sums pass through
partial sums many orders of magnitude above their final value, and the
double-precision determinant bottoms out at a roundoff floor well above
its true size.  The zeros themselves remain perfectly well conditioned
in the physical parameters, so re-running the same recurrences in
software floats with enough guard digits recovers them.  This module
mirrors the frame constants, overlap-row recursions and coefficient
recurrence with mpmath; it is deliberately minimal (no scaling, no
dataclasses) because mpf numbers carry their own exponent range.
"""

from __future__ import annotations

import math

import mpmath as mp

from .model import ModelParams

# Starting precision; comfortably above the ~20 decades of cancellation
# seen at strong one-photon coupling.  When the columns agree to all
# carried digits (the cancellation runs deeper, which happens as g2 -> 0
# where both seeded solutions collapse onto one dominant direction), the
# evaluator escalates its working precision geometrically up to DPS_MAX.
DPS = 40
DPS_MAX = 1400


class MPEvaluator:
    """Determinant of the projected 4x4 system in mpmath arithmetic.

    Matches GEvaluator.matrix zero-for-zero (columns are scaled
    positively), but carries DPS significant digits throughout.  Only
    the generic g2 > 0 five-term branch is supported; the one-photon
    branch never needs guard digits at admissible couplings.
    """

    def __init__(self, params: ModelParams, N: int, dps: int = DPS) -> None:
        if params.g2 <= 0.0:
            raise ValueError("high-precision path covers the g2 > 0 branch only")
        if params.delta == 0.0:
            raise ValueError("delta = 0 is the analytic pole-ladder branch")
        self.params = params
        self.N = N
        self.dps = dps
        self._deeper: MPEvaluator | None = None
        with mp.workdps(dps):
            delta, g1, g2 = mp.mpf(params.delta), mp.mpf(params.g1), mp.mpf(params.g2)
            beta = mp.sqrt(1 - 4 * g2 * g2)
            u = mp.sqrt((1 + beta) / (2 * beta))
            v = mp.sqrt((1 - beta) / (2 * beta))
            s = u * u + v * v
            w = s / (u + v) * g1
            wp = s / (v - u) * g1
            r = mp.acosh(u)
            uv = u * v
            h_a = v * v + (u - v) ** 2 * w * w * (1 - 2 * g2) + 2 * g1 * (u - v) * w + 2 * g2 * uv
            h_b = v * v + (u + v) ** 2 * wp * wp * (1 + 2 * g2) - 2 * g1 * (u + v) * wp + 2 * g2 * uv
            self._delta, self._beta = delta, beta
            self._slope = (1 + 4 * g2 * g2) / beta
            self._pole_base = {
                "A": -(1 - beta) / 2 - g1 * g1 / (1 + 2 * g2),
                "B": -(1 - beta) / 2 - g1 * g1 / (1 - 2 * g2),
            }
            self._coeffs = {
                "A": (-2 * (u - v) ** 2 * w, -2 * uv, h_a),
                "B": (-2 * (u + v) ** 2 * wp, 2 * uv, h_b),
            }
            self._tables = {
                "A": self._build_table(w, -r),
                "B": self._build_table(wp, r),
            }

    def _build_table(self, alpha: mp.mpf, zeta: mp.mpf) -> tuple[list, list]:
        """Factorial-weighted overlap rows u0, u1 by the closed recursion."""
        n_max = self.N
        ch, sh, th = mp.cosh(zeta), mp.sinh(zeta), mp.tanh(zeta)
        drive = alpha * (ch + sh)
        u0 = [mp.mpf(0)] * (n_max + 2)
        u0[0] = mp.exp(-alpha * alpha * (1 + th) / 2) / mp.sqrt(ch)
        u0[1] = drive * u0[0] / ch
        for n in range(1, n_max + 1):
            u0[n + 1] = (drive * u0[n] - sh * n * u0[n - 1]) / ch
        u1 = [
            ch * ((n * u0[n - 1] if n >= 1 else 0) - alpha * u0[n])
            + sh * (u0[n + 1] - alpha * u0[n])
            for n in range(n_max + 1)
        ]
        return u0[: n_max + 1], u1

    def _series(self, family: str, E: mp.mpf, f0: int, f1: int) -> tuple[list, list]:
        t1, t2, h = self._coeffs[family]
        base, slope, half_delta = self._pole_base[family], self._slope, self._delta / 2
        f = [mp.mpf(0)] * (self.N + 1)
        e = [mp.mpf(0)] * (self.N + 1)
        f[0], f[1] = mp.mpf(f0), mp.mpf(f1)
        for n in range(self.N + 1):
            e[n] = half_delta * f[n] / (base + self._beta * n - E)
            if n > self.N - 2:
                continue
            num = (
                -half_delta * e[n]
                + (slope * n - E + h) * f[n]
                + t1 * ((f[n - 1] if n >= 1 else 0) + (n + 1) * f[n + 1])
                + t2 * (f[n - 2] if n >= 2 else 0)
            )
            f[n + 2] = -num / (t2 * (n + 1) * (n + 2))
        return f, e

    def _column(self, family: str, E: mp.mpf, f0: int, f1: int) -> list:
        f, e = self._series(family, E, f0, f1)
        u0, u1 = self._tables[family]
        sf0 = mp.fsum(fv * tv for fv, tv in zip(f, u0))
        sf1 = mp.fsum(fv * tv for fv, tv in zip(f, u1))
        se0 = mp.fsum(ev * tv for ev, tv in zip(e, u0))
        se1 = mp.fsum(ev * tv for ev, tv in zip(e, u1))
        if family == "A":
            return [sf0, sf1, se0, se1]
        return [-se0, -se1, -sf0, -sf1]

    def normalized_det(self, E: float) -> float:
        """Column-normalized determinant as a sign-faithful float.

        The float mirrors the determinant's sign and zeros exactly; its
        magnitude is clamped into the double exponent range, since the
        true value can sit hundreds of decades below one when the four
        columns are nearly dependent.  If the determinant falls at or
        below the roundoff floor of the working precision, the whole
        evaluation is redone with more digits (cached per depth).
        """
        with mp.workdps(self.dps):
            Em = mp.mpf(E)
            cols = [
                self._column("A", Em, 1, 0),
                self._column("A", Em, 0, 1),
                self._column("B", Em, 1, 0),
                self._column("B", Em, 0, 1),
            ]
            for col in cols:
                norm = mp.sqrt(mp.fsum(x * x for x in col))
                if norm > 0:
                    for i in range(4):
                        col[i] /= norm
            try:
                det = mp.det(mp.matrix(cols).T)
            except (ZeroDivisionError, TypeError):
                # LU pivoting found no nonzero pivot: columns identical
                # to all carried digits
                det = mp.mpf(0)
            if det == 0 or abs(det) < mp.mpf(10) ** (25 - self.dps):
                if self.dps >= DPS_MAX:
                    return 0.0
                if self._deeper is None:
                    self._deeper = MPEvaluator(
                        self.params, self.N, min(DPS_MAX, 2 * self.dps + 40)
                    )
                return self._deeper.normalized_det(E)
            mag = abs(det)
            if 1e-280 < mag < 1e280:
                return float(det)
            log_mag = max(-600.0, min(600.0, float(mp.log(mag))))
            return float(mp.sign(det)) * math.exp(log_mag)
