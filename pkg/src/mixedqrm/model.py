"""Model parameters and closed-form Bogoliubov-frame quantities.

Everything here is elementary algebra on the couplings: the squeezing /
displacement constants of the two Bogoliubov frames, the two pole
ladders of the coefficient recurrences, and the collapse limits reached
as the two-photon coupling approaches 1/2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

# Frames closer to the collapse point than this are rejected unless the
# caller raises the cap explicitly; u, v and w' all diverge at g2 = 1/2.
G2_CAP_DEFAULT = 0.49999


class ParameterError(ValueError):
    """Physical parameters outside the admissible domain."""


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs, in units of the cavity frequency (omega = 1).

    delta   : qubit tunneling amplitude (>= 0; 0 only reaches the
              analytic decoupled branch)
    g1      : one-photon coupling (>= 0)
    g2      : two-photon coupling (in [0, 0.5))
    epsilon : additional sigma_z/2 bias (any sign, default 0)
    """

    delta: float
    g1: float
    g2: float
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if not self.delta >= 0.0:
            raise ParameterError(f"delta must be >= 0, got {self.delta}")
        if not self.g1 >= 0.0:
            raise ParameterError(f"g1 must be >= 0, got {self.g1}")
        if not 0.0 <= self.g2 < 0.5:
            raise ParameterError(f"g2 must lie in [0, 0.5), got {self.g2}")

    @property
    def beta(self) -> float:
        return math.sqrt(1.0 - 4.0 * self.g2 * self.g2)


@dataclass(frozen=True)
class BogoliubovFrame:
    """Derived transformation constants shared by all downstream modules.

    The A frame (squeeze by r, displace by w) diagonalizes the spin-up
    block; the B frame (squeeze by -r, displace by w') the spin-down
    block.  h_A / h_B are the constant terms of the cross-frame
    Hamiltonian blocks entering the coefficient recurrences.
    """

    beta: float
    u: float
    v: float
    w: float
    w_prime: float
    r: float
    h_A: float
    h_B: float
    uv: float


def build_frame(params: ModelParams, g2_cap: float = G2_CAP_DEFAULT) -> BogoliubovFrame:
    """Construct the Bogoliubov frame for the given couplings.

    Rejects g2 > g2_cap; passing a larger cap is allowed but emits a
    conditioning warning since the frame constants diverge at g2 = 1/2.
    """
    if params.g2 > g2_cap:
        raise ParameterError(
            f"g2 = {params.g2} exceeds the cap {g2_cap}; the frame is "
            "ill-conditioned approaching the collapse point g2 = 0.5"
        )
    if params.g2 > G2_CAP_DEFAULT:
        warnings.warn(
            f"g2 = {params.g2} is very close to the collapse point; "
            "frame constants are poorly conditioned",
            RuntimeWarning,
            stacklevel=2,
        )
    beta = params.beta
    u = math.sqrt((1.0 + beta) / (2.0 * beta))
    v = math.sqrt((1.0 - beta) / (2.0 * beta))
    s = (u * u + v * v)  # = 1/beta
    w = s / (u + v) * params.g1
    w_prime = s / (v - u) * params.g1
    r = math.acosh(u)
    uv = u * v
    g1, g2 = params.g1, params.g2
    h_a = v * v + (u - v) ** 2 * w * w * (1.0 - 2.0 * g2) + 2.0 * g1 * (u - v) * w + 2.0 * g2 * uv
    h_b = (
        v * v
        + (u + v) ** 2 * w_prime * w_prime * (1.0 + 2.0 * g2)
        - 2.0 * g1 * (u + v) * w_prime
        + 2.0 * g2 * uv
    )
    return BogoliubovFrame(
        beta=beta, u=u, v=v, w=w, w_prime=w_prime, r=r, h_A=h_a, h_B=h_b, uv=uv
    )


def _check_family(family: str) -> str:
    fam = family.upper()
    if fam not in ("A", "B"):
        raise ValueError(f"family must be 'A' or 'B', got {family!r}")
    return fam


def pole_energy(family: str, n: int, params: ModelParams) -> float:
    """Energy of the n-th pole of the given recurrence family.

    E_n = beta*n - (1-beta)/2 - g1^2/(1 +- 2 g2), with + for family A.
    """
    fam = _check_family(family)
    if n < 0:
        raise ValueError(f"pole index must be >= 0, got {n}")
    beta = params.beta
    denom = 1.0 + 2.0 * params.g2 if fam == "A" else 1.0 - 2.0 * params.g2
    return beta * n - (1.0 - beta) / 2.0 - params.g1 ** 2 / denom


def pole_gap(params: ModelParams) -> float:
    """n-independent offset between the B and A pole ladders: 4 g2 g1^2 / beta^2."""
    beta2 = 1.0 - 4.0 * params.g2 * params.g2
    return params.g1 ** 2 * 4.0 * params.g2 / beta2


def collapse_limits(g1: float) -> tuple[float, bool]:
    """Limits of the two pole families as g2 -> 1/2.

    The A ladder condenses onto the finite value -(1 + g1^2)/2; the B
    ladder (and with it every true level) diverges to -infinity, which
    the second element flags.
    """
    return -(1.0 + g1 * g1) / 2.0, True
