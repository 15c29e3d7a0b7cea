"""Gamma/Beta special functions in double precision.

The regularized incomplete Beta function ``I_x(a, b)`` is the workhorse of
every closed form in :mod:`nakamoto_profit.model`.  It is evaluated with the
modified Lentz algorithm on the classical continued fraction, switching to the
complementary tail when ``x > (a + 1) / (a + b + 2)`` so that both tails keep
full accuracy.
"""

import math
from dataclasses import dataclass

from .config import TOL
from .errors import DomainError

_TINY = 1e-300
_EXACT_BINOMIAL_MAX_N = 60


def log_gamma(a):
    """Natural log of the Gamma function for ``a > 0``.

    Backed by the C library ``lgamma`` (``math.lgamma``), which is accurate to a
    few ulps on the positive axis.
    """
    if not a > 0:
        raise DomainError(f"log_gamma requires a > 0, got {a!r}")
    return math.lgamma(a)


def log_beta(a, b):
    if not (a > 0 and b > 0):
        raise DomainError(f"log_beta requires a, b > 0, got ({a!r}, {b!r})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta(a, b):
    """Complete Beta function ``B(a, b) = Γ(a)Γ(b)/Γ(a+b)``."""
    return math.exp(log_beta(a, b))


def binomial(n, k):
    """Binomial coefficient as a float.

    Exact (integer arithmetic, then one rounding) for ``n <= 60``; log-space
    for larger ``n``.
    """
    if n < 0 or k < 0 or k != int(k) or n != int(n):
        raise DomainError(f"binomial requires nonnegative integers, got ({n!r}, {k!r})")
    n, k = int(n), int(k)
    if k > n:
        raise DomainError(f"binomial requires k <= n, got ({n}, {k})")
    if n <= _EXACT_BINOMIAL_MAX_N:
        return float(math.comb(n, k))
    return math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))


@dataclass(frozen=True)
class RegBetaArgs:
    """Validated arguments of ``I_x(a, b)``.

    ``xc`` optionally carries ``1 - x`` computed by the caller without
    cancellation; it is used whenever the complementary tail is evaluated.
    """

    x: float
    a: float
    b: float
    xc: float = None

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0):
            raise DomainError(f"incomplete beta requires 0 <= x <= 1, got x={self.x!r}")
        if not (self.a > 0 and self.b > 0):
            raise DomainError(
                f"incomplete beta requires a, b > 0, got a={self.a!r}, b={self.b!r}"
            )
        if self.xc is None:
            object.__setattr__(self, "xc", 1.0 - self.x)
        elif not (0.0 <= self.xc <= 1.0) or abs(self.x + self.xc - 1.0) > 1e-12:
            raise DomainError(f"complement {self.xc!r} inconsistent with x={self.x!r}")


def _betacf(x, a, b):
    # Modified Lentz evaluation of the continued fraction for I_x(a,b).
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, TOL.cf_max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= TOL.cf_eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
# Asymptotic series of the Stirling remainder ln Γ(n) - [(n-1/2)ln n - n + ln√(2π)]:
# Bernoulli coefficients B_2k / (2k(2k-1)).
_STIRLING_SERIES = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)


def _stirling_remainder(n):
    if n < 10.0:
        return math.lgamma(n) - ((n - 0.5) * math.log(n) - n + _HALF_LOG_2PI)
    inv2 = 1.0 / (n * n)
    acc = 0.0
    for coef in reversed(_STIRLING_SERIES):
        acc = acc * inv2 + coef
    return acc / n


def _log_ratio(x, x0):
    # ln(x/x0); log1p only where the ratio is near 1.
    r = x / x0
    if 0.5 < r < 2.0:
        return math.log1p((x - x0) / x0)
    return math.log(r)


def _log_power_terms(x, xc, a, b):
    # ln[x^a (1-x)^b / B(a,b)] written around the mode x0 = a/(a+b), so that
    # large a, b do not cancel catastrophically through lgamma.
    s = a + b
    x0 = a / s
    y0 = b / s
    la = a * _log_ratio(x, x0)
    lb = b * _log_ratio(xc, y0)
    corr = _stirling_remainder(s) - _stirling_remainder(a) - _stirling_remainder(b)
    return la + lb + corr + 0.5 * math.log(a * b / s) - _HALF_LOG_2PI


def _front(x, xc, a, b):
    # x^a (1-x)^b / (a B(a,b))
    return math.exp(_log_power_terms(x, xc, a, b)) / a


def reg_inc_beta(x, a, b, xc=None):
    """Regularized incomplete Beta function ``I_x(a, b)``.

    Parameters
    ----------
    x : float
        Upper integration limit in ``[0, 1]``.
    a, b : float
        Positive shape parameters.
    xc : float, optional
        ``1 - x`` if the caller can compute it more accurately than the
        subtraction (e.g. ``(1 - 2q)**2`` as the complement of ``4pq``).
    """
    args = RegBetaArgs(x, a, b, xc)
    x, xc = args.x, args.xc
    if x == 0.0:
        return 0.0
    if xc == 0.0:
        return 1.0
    if x < (a + 1.0) / (a + b + 2.0):
        val = _front(x, xc, a, b) * _betacf(x, a, b)
    else:
        val = 1.0 - _front(xc, x, b, a) * _betacf(xc, b, a)
    return min(1.0, max(0.0, val))


def reg_inc_beta_args(args):
    """Evaluate ``I_x(a, b)`` from a :class:`RegBetaArgs` record."""
    return reg_inc_beta(args.x, args.a, args.b, args.xc)
