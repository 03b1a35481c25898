"""Independent one-photon quantum Rabi reference spectrum.

Classic parity-resolved transcendental function for the unbiased
one-photon model: in the displaced frame the coefficients obey a
three-term recurrence, and for each parity the spectral function

    G_+-(E) = sum_n (f_n -+ e_n) g^n,   e_n = (Delta/2) f_n / (n - g^2 - E)

vanishes exactly at the eigenvalues.  Used purely as a cross-check for
the g2 = 0 reduction of the mixed-model machinery; deliberately shares
no code with it.
"""

from __future__ import annotations

import numpy as np

DEFAULT_TERMS = 120


def g_plus_minus(E: float, delta: float, g: float, n_terms: int = DEFAULT_TERMS) -> tuple[float, float]:
    """(G_+, G_-) at trial energy E for couplings (delta, g), g > 0."""
    if g <= 0.0:
        raise ValueError("one-photon G-function needs g > 0")
    f = np.zeros(n_terms + 1)
    e = np.zeros(n_terms + 1)
    f[0] = 1.0
    h = 3.0 * g * g
    for n in range(n_terms + 1):
        e[n] = 0.5 * delta * f[n] / (n - g * g - E)
        if n == n_terms:
            break
        num = (
            -0.5 * delta * e[n]
            + (n - E + h) * f[n]
            - 2.0 * g * (f[n - 1] if n >= 1 else 0.0)
        )
        f[n + 1] = num / (2.0 * g * (n + 1))
    powers = g ** np.arange(n_terms + 1)
    return float((f - e) @ powers), float((f + e) @ powers)


def spectrum(
    delta: float,
    g: float,
    E_lo: float,
    E_hi: float,
    n_terms: int = DEFAULT_TERMS,
    resolution: float = 2e-3,
    tol: float = 1e-12,
) -> np.ndarray:
    """All eigenvalues of both parities in the window, by bracketed bisection.

    Poles sit at E = n - g^2; each open interval between consecutive
    poles is scanned separately for both parity functions.
    """
    if g == 0.0:
        levels = []
        n = 0
        while n - delta / 2.0 <= E_hi:
            for e_val in (n - delta / 2.0, n + delta / 2.0):
                if E_lo <= e_val <= E_hi:
                    levels.append(e_val)
            n += 1
        return np.array(sorted(levels))
    poles = [n - g * g for n in range(max(0, int(np.floor(E_lo + g * g))), int(np.ceil(E_hi + g * g)) + 2)]
    bounds = sorted({E_lo, E_hi, *[p for p in poles if E_lo < p < E_hi]})
    roots: list[float] = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        width = hi - lo
        off = max(1e-9, 1e-7 * width)
        grid = np.linspace(lo + off, hi - off, max(30, int(width / resolution)))
        for branch in (0, 1):
            vals = np.array([g_plus_minus(x, delta, g, n_terms)[branch] for x in grid])
            signs = np.sign(vals)
            for i in np.flatnonzero(signs[:-1] * signs[1:] < 0.0):
                a, b = grid[i], grid[i + 1]
                sa = signs[i]
                while b - a > tol:
                    mid = 0.5 * (a + b)
                    sm = np.sign(g_plus_minus(mid, delta, g, n_terms)[branch])
                    if sm == 0.0:
                        a = b = mid
                    elif sm == sa:
                        a = mid
                    else:
                        b = mid
                roots.append(0.5 * (a + b))
    return np.array(sorted(roots))
