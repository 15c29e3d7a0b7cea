"""Numerical tolerances used across the package and its test-suite."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-12       # special-function identities
    walk_oracle: float = 1e-10    # closed forms vs linear-system oracles
    dual_path: float = 1e-10      # theorem vs proposition forms (tests)
    integrity: float = 1e-8       # runtime dual-path guard in ``model``
    mc_sigma: float = 3.0         # Monte Carlo agreement, in standard errors
    cf_eps: float = 1e-16         # continued-fraction convergence
    cf_max_iter: int = 20000


TOL = Tolerances()
