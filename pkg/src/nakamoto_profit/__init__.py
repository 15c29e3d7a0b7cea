"""Profitability of the (A,1)-Nakamoto double spend: closed forms, simulation, decisions."""

from .errors import (
    ComputationalIntegrityError,
    DomainError,
    NakamotoProfitError,
    SearchBoundError,
    UnsatisfiableError,
)
from .model import (
    AttackParams,
    ClosedFormReport,
    asymptotics,
    expected_duration,
    expected_revenue,
    honest_revenue_ratio,
    report,
    revenue_ratio,
    success_probability,
    success_probability_inf,
)

__version__ = "0.1.0"
