"""Closed-form economics of the (A,1)-Nakamoto double spend.

An attack cycle pre-mines one block, pays the merchant, waits for ``z``
honest confirmations, then races until the secret fork is one block longer
(success) or the lag exceeds ``A`` (give up).  Revenue is measured in
coinbase units ``b`` and durations in mean inter-block times ``tau0``.

Every quantity is evaluated twice: once in the compact incomplete-Beta form
in ``I_{4pq}(z, 1/2)`` and ``I_{(p-q)^2}(1/2, z)``, and once in the
intermediate form in ``I_q(z, z)``, ``I_p(z, z)`` and the truncated negative
binomial moments.  A disagreement raises
:class:`~nakamoto_profit.errors.ComputationalIntegrityError`.
"""

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import NamedTuple

from .config import TOL
from .errors import ComputationalIntegrityError, DomainError
from .specfun import binomial, log_beta, reg_inc_beta
from .walks import NegBinParams, lam_pow, negbin_partial_sums, one_minus_lam_pow

BITCOIN_COINBASE = 12.5
BITCOIN_TAU0 = 600.0


@dataclass(frozen=True)
class AttackParams:
    """One attack configuration.

    ``v`` is in units of ``b``; ``b`` and ``tau0`` only scale displayed values.
    """

    q: float
    z: int
    A: int
    v: float = 1.0
    b: float = BITCOIN_COINBASE
    tau0: float = BITCOIN_TAU0

    def __post_init__(self):
        if not (0.0 < self.q < 0.5):
            raise DomainError(f"invariant violated: q in (0, 1/2), got q={self.q!r}")
        if self.z != int(self.z) or self.z < 1:
            raise DomainError(f"invariant violated: integer z >= 1, got z={self.z!r}")
        if self.A != int(self.A) or self.A < self.z:
            raise DomainError(f"invariant violated: integer A >= z, got A={self.A!r}, z={self.z!r}")
        if not self.v >= 0.0:
            raise DomainError(f"invariant violated: v >= 0, got v={self.v!r}")
        if not self.b > 0.0:
            raise DomainError(f"invariant violated: b > 0, got b={self.b!r}")
        if not self.tau0 > 0.0:
            raise DomainError(f"invariant violated: tau0 > 0, got tau0={self.tau0!r}")
        object.__setattr__(self, "z", int(self.z))
        object.__setattr__(self, "A", int(self.A))

    @property
    def p(self):
        return 1.0 - self.q

    @property
    def lam(self):
        return self.q / self.p

    @property
    def s(self):
        return 4.0 * self.p * self.q

    def bracket(self, n):
        """``[n] = (1 - lam**n) / (1 - lam)``."""
        return one_minus_lam_pow(self.q, n) / ((self.p - self.q) / self.p)

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return AttackParams(**d)


@dataclass(frozen=True)
class ClosedFormReport:
    p_success: float
    e_revenue_b: float
    e_duration_tau0: float
    gamma_attack: float
    gamma_honest: float
    profitable: bool


class _Kernel(NamedTuple):
    # A-independent ingredients for fixed (q, z).
    i4: float      # I_{4pq}(z, 1/2)
    i4c: float     # I_{(p-q)^2}(1/2, z)
    iq: float      # I_q(z, z)
    ip: float      # I_p(z, z)
    ratio: float   # p^(z-1) q^z / B(z, z)
    s1: float      # sum_{j<z} P[X=j] j
    t1: float      # sum_{j<z} P[X=j] j lam^(z-j)


@lru_cache(maxsize=4096)
def _kernel(q, z):
    p = 1.0 - q
    s = 4.0 * p * q
    sc = (1.0 - 2.0 * q) ** 2
    sums = negbin_partial_sums(NegBinParams(p, z, z))
    return _Kernel(
        i4=reg_inc_beta(s, z, 0.5, xc=sc),
        i4c=reg_inc_beta(sc, 0.5, z, xc=s),
        iq=sums.T0,
        ip=sums.S0,
        ratio=math.exp((z - 1) * math.log(p) + z * math.log(q) - log_beta(z, z)),
        s1=sums.S1,
        t1=sums.T1,
    )


def _check(name, a, b, terms):
    scale = max([1.0, abs(a), abs(b)] + [abs(t) for t in terms])
    if not abs(a - b) <= TOL.integrity * scale:
        raise ComputationalIntegrityError(
            f"{name}: evaluation paths disagree ({a!r} vs {b!r}, scale {scale:.3g})"
        )


def success_probability_inf(q, z):
    """Success probability without a give-up threshold, ``I_{4pq}(z, 1/2)``."""
    if not (0.0 < q < 0.5):
        raise DomainError(f"invariant violated: q in (0, 1/2), got q={q!r}")
    if z != int(z) or z < 1:
        raise DomainError(f"invariant violated: integer z >= 1, got z={z!r}")
    return _kernel(q, int(z)).i4


def _success_paths(params):
    k = _kernel(params.q, params.z)
    lA = lam_pow(params.q, params.A + 1)
    dA = one_minus_lam_pow(params.q, params.A + 1)
    if k.i4 < 0.5:
        compact = (k.i4 - lA) / dA
    else:
        compact = 1.0 - k.i4c / dA
    # mixture form: 1 - I_p(z,z)/(1-lam^(A+1)) + I_q(z,z)/(1-lam^(A+1))
    mixture = 1.0 - (k.ip - k.iq) / dA
    return compact, mixture, (k.ip / dA, k.iq / dA)


def success_probability(params):
    """Probability that one attack cycle ends with a successful double spend."""
    compact, mixture, terms = _success_paths(params)
    _check("success probability", compact, mixture, terms)
    return compact


def _duration_paths(params):
    q, p, z, A = params.q, params.p, params.z, params.A
    k = _kernel(q, z)
    dA = one_minus_lam_pow(q, A + 1)
    pq = p - q
    t_a = z / (2.0 * p) * k.i4
    t_b = (A + 1) * k.i4c / (pq * dA)
    t_c = -k.ratio / pq
    compact = t_a + t_b + t_c + 1.0 / q
    u_a = (A + 1) / (pq * dA)
    u_b = (z / p - 2.0 * (A + 1) / (pq * dA)) * k.iq
    remaining = u_a + t_c + u_b
    return compact, 1.0 / q + remaining, (t_a, t_b, t_c, u_a, u_b)


def expected_duration(params):
    """Expected cycle duration in units of ``tau0``."""
    compact, prop, terms = _duration_paths(params)
    _check("expected duration", compact, prop, terms)
    return compact


def _revenue_paths(params):
    q, p, z, A, v = params.q, params.p, params.z, params.A, params.v
    k = _kernel(q, z)
    lam = params.lam
    one_m_lam = (p - q) / p
    lA = lam_pow(q, A + 1)
    dA = one_minus_lam_pow(q, A + 1)
    p_compact, p_mixture, _ = _success_paths(params)

    r_a = q * z / (2.0 * p) * k.i4
    r_b = -(A + 1) * lA / (p * one_m_lam * dA * dA) * k.i4c
    r_c = (2.0 - lam + lA * lam) / (one_m_lam * dA) * k.ratio
    compact = r_a + r_b + r_c + p_compact * (v + 1.0)

    den = p * one_m_lam * dA * dA
    w_a = q * z / p
    w_b = -lA * (A + 1 - q * dA * z) / den * k.ip
    w_c = ((A + 1) * lA + p * dA * z) / den * k.iq
    w_d = -(p - q + q * lA) / (p * one_m_lam * dA) * k.s1
    w_e = -lam / (one_m_lam * dA) * k.t1
    prop = w_a + w_b + w_c + w_d + w_e + p_mixture * (v + 1.0)
    return compact, prop, (r_a, r_b, r_c, w_a, w_b, w_c, w_d, w_e)


def expected_revenue(params):
    """Expected revenue per cycle in units of ``b`` (affine in ``v``, slope = success probability)."""
    compact, prop, terms = _revenue_paths(params)
    _check("expected revenue", compact, prop, terms)
    return compact


def honest_revenue_ratio(q):
    """Revenue ratio of honest mining, ``q`` in units of ``b / tau0``."""
    if not (0.0 < q < 0.5):
        raise DomainError(f"invariant violated: q in (0, 1/2), got q={q!r}")
    return q


def revenue_ratio(params):
    """Expected revenue over expected duration, in units of ``b / tau0``."""
    return expected_revenue(params) / expected_duration(params)


def report(params):
    p_success = success_probability(params)
    rev = expected_revenue(params)
    dur = expected_duration(params)
    gamma = rev / dur
    honest = honest_revenue_ratio(params.q)
    return ClosedFormReport(
        p_success=p_success,
        e_revenue_b=rev,
        e_duration_tau0=dur,
        gamma_attack=gamma,
        gamma_honest=honest,
        profitable=gamma > honest,
    )


def dual_path_values(params):
    """Both evaluation paths of P, E[R]/b and E[T]/tau0, unguarded.

    Returned as ``{name: (compact, alternative)}``; used by diagnostics and tests.
    """
    out = {}
    for name, fn in (
        ("p_success", _success_paths),
        ("e_revenue_b", _revenue_paths),
        ("e_duration_tau0", _duration_paths),
    ):
        a, b, _ = fn(params)
        out[name] = (a, b)
    return out


def expected_revenue_inf(params):
    """Limit of the expected revenue as ``A -> infinity``."""
    q, p, z = params.q, params.p, params.z
    k = _kernel(q, z)
    lam = params.lam
    return (
        q * z / (2.0 * p) * k.i4
        + (2.0 - lam) / (1.0 - lam) * k.ratio
        + k.i4 * (params.v + 1.0)
    )


class AsymptoticEstimate(NamedTuple):
    estimate: float
    exact: float
    rel_gap: float


def _est(estimate, exact):
    return AsymptoticEstimate(estimate, exact, abs(estimate - exact) / abs(exact))


def small_q_coefficient(z, v):
    """Leading coefficient ``2 C(2z-1, z)(v+1) + 2/B(z,z)`` of revenue and ratio as ``q -> 0``."""
    return 2.0 * binomial(2 * z - 1, z) * (v + 1.0) + 2.0 / math.exp(log_beta(z, z))


def asymptotics(params):
    """Asymptotic approximations next to exact values.

    Keys: ``p_inf_large_z`` (``s^z / sqrt(pi (1-s) z)``), ``p_inf_small_q``,
    ``revenue_small_q``, ``duration_small_q``, ``gamma_small_q``,
    ``duration_large_A`` and ``revenue_large_A``.  Each value is an
    :class:`AsymptoticEstimate`; the estimates are only meaningful in their
    respective regimes.
    """
    q, p, z, A = params.q, params.p, params.z, params.A
    s = params.s
    k = _kernel(q, z)
    r = report(params)
    coef = small_q_coefficient(z, params.v)
    return {
        "p_inf_large_z": _est(s ** z / math.sqrt(math.pi * (1.0 - s) * z), k.i4),
        "p_inf_small_q": _est(2.0 * binomial(2 * z - 1, z) * q ** z, k.i4),
        "revenue_small_q": _est(coef * q ** z, r.e_revenue_b),
        "duration_small_q": _est(1.0 / q, r.e_duration_tau0),
        "gamma_small_q": _est(coef * q ** (z + 1), r.gamma_attack),
        "duration_large_A": _est(k.i4c / (p - q) * A, r.e_duration_tau0),
        "revenue_large_A": _est(expected_revenue_inf(params), r.e_revenue_b),
    }
