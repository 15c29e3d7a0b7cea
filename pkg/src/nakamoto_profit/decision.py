"""Inverse queries on the closed-form model.

Profitability is the strict inequality ``Gamma_A > Gamma_H``: at equality the
attack is counted as non-profitable.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError, SearchBoundError, UnsatisfiableError
from .model import (
    AttackParams,
    expected_duration,
    expected_revenue,
    honest_revenue_ratio,
    revenue_ratio,
    success_probability,
)
from .specfun import binomial


def min_profitable_value_exact(q, z, A):
    """Smallest double-spend value (in ``b``) at which ``Gamma_A`` reaches ``Gamma_H``.

    The revenue is affine in ``v`` with slope ``P_A(z)``, so the break-even
    value is ``(q E[T_A]/tau0 - E[R_A(v=0)]/b) / P_A(z)``, clamped at 0.
    """
    params = AttackParams(q, z, A, v=0.0)
    p_success = success_probability(params)
    if not p_success > 0.0:
        raise UnsatisfiableError(f"success probability is zero at q={q}, z={z}, A={A}")
    v = (honest_revenue_ratio(q) * expected_duration(params) - expected_revenue(params)) / p_success
    return max(0.0, v)


def min_profitable_value_asymptotic(q, z):
    """Small-``q`` approximation ``q**-z / (2 C(2z-1, z))`` of the break-even value."""
    if not (0.0 < q < 0.5):
        raise DomainError(f"invariant violated: q in (0, 1/2), got q={q!r}")
    if z != int(z) or z < 1:
        raise DomainError(f"invariant violated: integer z >= 1, got z={z!r}")
    return q ** (-z) / (2.0 * binomial(2 * z - 1, z))


def default_a_max(z):
    return 10 * z + 100


class BestValue(NamedTuple):
    v: float
    A: int


def _scan_with_widening(fn, z, a_max, better):
    # Exhaustive scan of fn over A in [z, a_max]; one doubling pass if the
    # optimum sits on the cap.
    if a_max < z:
        raise DomainError(f"search cap A_max={a_max} is below z={z}")
    best_a, best = z, fn(z)
    lo = z + 1
    for widened in (False, True):
        for A in range(lo, a_max + 1):
            val = fn(A)
            if better(val, best):
                best_a, best = A, val
        if best_a < a_max:
            return best_a, best
        if widened:
            raise SearchBoundError(f"optimum still at the search cap A_max={a_max} after widening")
        lo, a_max = a_max + 1, 2 * a_max


def min_profitable_value_over_A(q, z, a_max=None):
    """Break-even value minimised over the give-up threshold ``A``."""
    a_max = default_a_max(z) if a_max is None else a_max
    A, v = _scan_with_widening(
        lambda A: min_profitable_value_exact(q, z, A), z, a_max, lambda a, b: a < b
    )
    return BestValue(v, A)


@dataclass(frozen=True)
class AttackerQuery:
    q: float
    z: int
    v: float
    A_max: int = None

    def __post_init__(self):
        AttackParams(self.q, self.z, self.z, v=self.v)
        if self.A_max is None:
            object.__setattr__(self, "A_max", default_a_max(self.z))
        elif self.A_max < self.z:
            raise DomainError(f"invariant violated: A_max >= z, got A_max={self.A_max}")


@dataclass(frozen=True)
class MerchantQuery:
    q: float
    v: float
    z_max: int = 100

    def __post_init__(self):
        AttackParams(self.q, 1, 1, v=self.v)
        if self.z_max != int(self.z_max) or self.z_max < 1:
            raise DomainError(f"invariant violated: integer z_max >= 1, got {self.z_max!r}")


class OptimalThreshold(NamedTuple):
    A0: int
    gamma_at_A0: float


class SafeConfirmations(NamedTuple):
    z: int
    found: bool
    A0: int
    gamma_at_A0: float


def optimal_threshold(query):
    """Give-up threshold maximising the revenue ratio (ties go to the smaller ``A``)."""
    A0, gamma = _scan_with_widening(
        lambda A: revenue_ratio(AttackParams(query.q, query.z, A, v=query.v)),
        query.z,
        query.A_max,
        lambda a, b: a > b,
    )
    return OptimalThreshold(A0, gamma)


def min_safe_confirmations(query):
    """Fewest confirmations making the best ``A`` non-profitable.

    If no ``z <= z_max`` works, returns ``z = z_max + 1`` with ``found=False``.
    """
    honest = honest_revenue_ratio(query.q)
    best = None
    for z in range(1, query.z_max + 1):
        best = optimal_threshold(AttackerQuery(query.q, z, query.v))
        if best.gamma_at_A0 <= honest:
            return SafeConfirmations(z, True, best.A0, best.gamma_at_A0)
    return SafeConfirmations(query.z_max + 1, False, best.A0, best.gamma_at_A0)
