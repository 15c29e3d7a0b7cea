"""Biased simple random walk with absorbing barriers, and negative binomial sums.

The walk moves ``+1`` with probability ``p`` and ``-1`` with probability
``q = 1 - p < 1/2``.  Started at ``m``, it is absorbed at ``0`` ("ruin") or at
``M``.  Throughout, ``lam = q / p`` is the odds ratio and powers ``lam**n``
are evaluated as ``exp(n * log(lam))`` so that large barriers underflow
gracefully to zero.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError
from .specfun import binomial, log_beta, reg_inc_beta


def _check_q(q):
    if not (0.0 < q < 0.5):
        raise DomainError(f"q must lie in (0, 1/2), got q={q!r}")


def log_lambda(q):
    """``ln(q/p)`` with ``p = 1 - q``; accurate as ``q -> 1/2``."""
    p = 1.0 - q
    return math.log1p(-(1.0 - 2.0 * q) / p)


def lam_pow(q, n):
    """``(q/p)**n`` via the exponential of ``n ln(q/p)``."""
    return math.exp(n * log_lambda(q))


def one_minus_lam_pow(q, n):
    """``1 - (q/p)**n`` without cancellation near ``q = 1/2``."""
    return -math.expm1(n * log_lambda(q))


@dataclass(frozen=True)
class WalkSpec:
    """Walk started at ``start`` with absorbing barriers at 0 and ``upper``."""

    q: float
    start: int
    upper: int

    def __post_init__(self):
        _check_q(self.q)
        if self.start != int(self.start) or self.upper != int(self.upper):
            raise DomainError("walk barriers must be integers")
        if not (0 <= self.start <= self.upper) or self.upper < 1:
            raise DomainError(
                f"walk requires 0 <= start <= upper and upper >= 1, got "
                f"start={self.start}, upper={self.upper}"
            )

    @property
    def p(self):
        return 1.0 - self.q


@dataclass(frozen=True)
class NegBinParams:
    """Number of failures (prob. ``q``) before the ``z``-th success (prob. ``p``)."""

    p: float
    z: int
    m: int = 1

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"negative binomial requires 0 < p < 1, got {self.p!r}")
        if self.z < 1 or self.m < 1:
            raise DomainError(f"negative binomial requires z, m >= 1, got z={self.z}, m={self.m}")

    @property
    def q(self):
        return 1.0 - self.p


class NegBinSums(NamedTuple):
    S0: float
    S1: float
    T0: float
    T1: float


def ruin_probability(w):
    """Probability that the walk hits 0 before ``w.upper``.

    ``(lam**m - lam**M) / (1 - lam**M)``.
    """
    m, M = w.start, w.upper
    if m == 0:
        return 1.0
    if m == M:
        return 0.0
    # lam^m (1 - lam^(M-m)) / (1 - lam^M), both factors cancellation-free
    return lam_pow(w.q, m) * one_minus_lam_pow(w.q, M - m) / one_minus_lam_pow(w.q, M)


def expected_absorption_time(x_gap, y_gap, q):
    """Expected number of steps before the walk, started at 0, reaches ``+X`` or ``-Y``.

    ``+1`` steps have probability ``p``.  With unit-mean exponential times per
    step this is also the expected time in units of the inter-event mean.
    """
    _check_q(q)
    if x_gap < 1 or y_gap < 1:
        raise DomainError(f"absorption gaps must be >= 1, got X={x_gap}, Y={y_gap}")
    p = 1.0 - q
    n = x_gap + y_gap
    ratio = one_minus_lam_pow(q, y_gap) / one_minus_lam_pow(q, n)
    return n / (p - q) * (ratio - y_gap / n)


def expected_left_steps_given_ruin(w):
    """Expected number of ``-1`` steps before absorption, conditioned on ruin at 0."""
    m, M = w.start, w.upper
    if not (1 <= m < M):
        raise DomainError(f"conditioning on ruin requires 1 <= start < upper, got {m}, {M}")
    q, p = w.q, w.p
    lm = lam_pow(q, m)
    lM = lam_pow(q, M)
    num = m * lm - (2 * M - m) * lM + (2 * M - m) * lM * lm - m * lM * lM
    one_minus_lam = (p - q) / p
    den = 2.0 * p * one_minus_lam * (lm * one_minus_lam_pow(q, M - m)) * one_minus_lam_pow(q, M)
    return m / 2.0 + num / den


def negbin_log_pmf(nb, j):
    if j < 0:
        raise DomainError(f"negative binomial support is j >= 0, got {j}")
    return (
        nb.z * math.log(nb.p)
        + j * math.log1p(-nb.p)
        + math.log(binomial(nb.z + j - 1, j))
    )


def negbin_pmf(nb, j):
    """``P[X = j] = p^z q^j C(z+j-1, j)``."""
    return math.exp(negbin_log_pmf(nb, j))


def _log_ratio_term(p, q, z, m):
    # ln[p^(z-1) q^m / B(z, m)]
    return (z - 1) * math.log(p) + m * math.log(q) - log_beta(z, m)


def negbin_partial_sums(nb):
    """Closed forms of the truncated negative binomial sums.

    Returns ``(S0, S1, T0, T1)`` where, with ``X`` the ``(z, p)`` negative
    binomial variable and ``lam = q/p``::

        S0 = sum_{j<m} P[X=j]                 = I_p(z, m)
        S1 = sum_{j<m} P[X=j] j               = (qz/p) I_p(z,m) - p^(z-1) q^m / B(z,m)
        T0 = sum_{j<z} P[X=j] lam^(z-j)       = I_q(z, z)
        T1 = sum_{j<z} P[X=j] j lam^(z-j)     = (pz/q) I_q(z,z) - q^(z-1) p^z / B(z,z)

    ``T0`` and ``T1`` are only defined for ``m == z`` and are ``nan`` otherwise.
    """
    p, q, z, m = nb.p, nb.q, nb.z, nb.m
    ip = reg_inc_beta(p, z, m, xc=q)
    s0 = ip
    s1 = q * z / p * ip - math.exp(_log_ratio_term(p, q, z, m))
    if m != z:
        return NegBinSums(s0, s1, math.nan, math.nan)
    iq = reg_inc_beta(q, z, z, xc=p)
    t0 = iq
    t1 = p * z / q * iq - math.exp(_log_ratio_term(q, p, z, z))
    return NegBinSums(s0, s1, t0, t1)
