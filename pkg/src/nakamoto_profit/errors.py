"""Exception hierarchy shared by the library and the command line."""


class NakamotoProfitError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class DomainError(NakamotoProfitError, ValueError):
    """An argument lies outside the domain of the requested quantity."""

    exit_code = 3


class SearchBoundError(NakamotoProfitError):
    """An integer search hit its cap even after widening."""

    exit_code = 4


class ComputationalIntegrityError(NakamotoProfitError, ArithmeticError):
    """Two algebraically equal evaluation paths disagree."""

    exit_code = 5


class UnsatisfiableError(NakamotoProfitError):
    """An inverse query has no solution (e.g. zero success probability)."""

    exit_code = 3
