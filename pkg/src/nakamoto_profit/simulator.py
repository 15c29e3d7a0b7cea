"""Monte Carlo simulation of (A,1)-Nakamoto attack cycles.

Each cycle draws from its own random stream, derived from the root seed and
the cycle index alone (SplitMix64 keyed by ``(seed, cycle)``).  A batch is
therefore reproducible bit for bit whatever the chunking or the number of
worker processes.  Times are in units of ``tau0``.

Per cycle, the draw order is:

1. one uniform for the pre-mine wait (exponential, rate ``q``);
2. per block event of the confirmation phase and of the race phase, one
   uniform for the inter-event time (exponential, rate 1) followed by one
   uniform deciding the miner (attacker iff ``u < q``).
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import AttackParams

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TO_UNIT = 2.0 ** -53
CHUNK_SIZE = 1 << 16


def _mix64(x):
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def _mix64_array(x):
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    return x ^ (x >> np.uint64(31))


def _check_seed(seed):
    if seed != int(seed) or not (0 <= int(seed) <= _MASK64):
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return int(seed)


class CycleStream:
    """Uniform stream of one cycle: SplitMix64 started from ``mix(seed + (cycle+1) * gamma)``."""

    def __init__(self, seed, cycle):
        seed = _check_seed(seed)
        self.state = _mix64((seed + _GAMMA * (cycle + 1)) & _MASK64)

    def uniform(self):
        self.state = (self.state + _GAMMA) & _MASK64
        return (_mix64(self.state) >> 11) * _TO_UNIT


@dataclass(frozen=True)
class CycleOutcome:
    success: bool
    revenue_b: float
    duration_tau0: float
    premine_time_tau0: float
    phase2_time_tau0: float
    phase3_time_tau0: float
    phase2_attacker_blocks: int
    phase3_steps: int
    phase3_left_steps: int


def _exp(u):
    # numpy's log1p, not math.log1p: keeps run_cycle bit-identical to simulate_cycles
    return float(-np.log1p(-np.float64(u)))


def run_cycle(params, stream):
    """Simulate one attack cycle.

    ``stream`` is anything with a ``uniform()`` method returning floats in
    ``[0, 1)``, consumed in the order documented in the module docstring.
    """
    q, z, A, v = params.q, params.z, params.A, params.v
    premine = float(np.float64(_exp(stream.uniform())) / q)

    t2 = 0.0
    honest = 0
    j = 0
    while honest < z:
        t2 += _exp(stream.uniform())
        if stream.uniform() < q:
            j += 1
        else:
            honest += 1

    t3 = 0.0
    steps = 0
    lefts = 0
    if j >= z:
        success = True
    else:
        lag = z - j  # lag + 1; 0 means the fork is one block longer
        while 0 < lag < A + 1:
            t3 += _exp(stream.uniform())
            steps += 1
            if stream.uniform() < q:
                lag -= 1
                lefts += 1
            else:
                lag += 1
        success = lag == 0

    revenue = (1.0 + j + lefts + v) if success else 0.0
    return CycleOutcome(
        success=success,
        revenue_b=revenue,
        duration_tau0=premine + t2 + t3,
        premine_time_tau0=premine,
        phase2_time_tau0=t2,
        phase3_time_tau0=t3,
        phase2_attacker_blocks=j,
        phase3_steps=steps,
        phase3_left_steps=lefts,
    )


@dataclass
class CycleArrays:
    """Column-wise outcomes of consecutive cycles ``start, start+1, ...``."""

    start: int
    success: np.ndarray
    revenue_b: np.ndarray
    duration_tau0: np.ndarray
    premine_time_tau0: np.ndarray
    phase2_time_tau0: np.ndarray
    phase3_time_tau0: np.ndarray
    phase2_attacker_blocks: np.ndarray
    phase3_steps: np.ndarray
    phase3_left_steps: np.ndarray

    def __len__(self):
        return len(self.success)

    def outcome(self, i):
        return CycleOutcome(
            success=bool(self.success[i]),
            revenue_b=float(self.revenue_b[i]),
            duration_tau0=float(self.duration_tau0[i]),
            premine_time_tau0=float(self.premine_time_tau0[i]),
            phase2_time_tau0=float(self.phase2_time_tau0[i]),
            phase3_time_tau0=float(self.phase3_time_tau0[i]),
            phase2_attacker_blocks=int(self.phase2_attacker_blocks[i]),
            phase3_steps=int(self.phase3_steps[i]),
            phase3_left_steps=int(self.phase3_left_steps[i]),
        )

    @classmethod
    def concat(cls, parts):
        parts = sorted(parts, key=lambda c: c.start)
        names = [f for f in cls.__dataclass_fields__ if f != "start"]
        return cls(parts[0].start, *(np.concatenate([getattr(c, f) for c in parts]) for f in names))


class _VectorStreams:
    def __init__(self, seed, start, n):
        idx = np.arange(start, start + n, dtype=np.uint64)
        with np.errstate(over="ignore"):
            self.state = _mix64_array(np.uint64(seed) + np.uint64(_GAMMA) * (idx + np.uint64(1)))

    def uniform(self, rows):
        with np.errstate(over="ignore"):
            s = self.state[rows] + np.uint64(_GAMMA)
            self.state[rows] = s
            return (_mix64_array(s) >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def simulate_cycles(params, n, seed, start=0):
    """Vectorised equivalent of ``run_cycle(params, CycleStream(seed, i))`` for
    ``i`` in ``range(start, start + n)``."""
    seed = _check_seed(seed)
    q, z, A, v = params.q, params.z, params.A, params.v
    rs = _VectorStreams(seed, start, n)
    every = np.arange(n)

    premine = -np.log1p(-rs.uniform(every)) / q

    t2 = np.zeros(n)
    honest = np.zeros(n, dtype=np.int64)
    j = np.zeros(n, dtype=np.int64)
    rows = every
    while rows.size:
        t2[rows] += -np.log1p(-rs.uniform(rows))
        att = rs.uniform(rows) < q
        j[rows[att]] += 1
        honest[rows[~att]] += 1
        rows = rows[honest[rows] < z]

    lag = np.where(j >= z, 0, z - j)
    t3 = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    lefts = np.zeros(n, dtype=np.int64)
    rows = every[lag > 0]
    while rows.size:
        t3[rows] += -np.log1p(-rs.uniform(rows))
        steps[rows] += 1
        att = rs.uniform(rows) < q
        left_rows = rows[att]
        lag[left_rows] -= 1
        lefts[left_rows] += 1
        lag[rows[~att]] += 1
        r = lag[rows]
        rows = rows[(r > 0) & (r < A + 1)]

    success = lag == 0
    revenue = np.where(success, 1.0 + j + lefts + v, 0.0)
    return CycleArrays(
        start=start,
        success=success,
        revenue_b=revenue,
        duration_tau0=premine + t2 + t3,
        premine_time_tau0=premine,
        phase2_time_tau0=t2,
        phase3_time_tau0=t3,
        phase2_attacker_blocks=j,
        phase3_steps=steps,
        phase3_left_steps=lefts,
    )


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std_error: float  # nan when n_cycles == 1
    n_cycles: int

    @classmethod
    def from_samples(cls, x):
        n = len(x)
        values = x.tolist()
        # fsum is correctly rounded, hence independent of summation order
        mean = math.fsum(values) / n
        if n < 2:
            return cls(mean, math.nan, n)
        var = math.fsum((y - mean) ** 2 for y in values) / (n - 1)
        return cls(mean, math.sqrt(var / n), n)

    def z_score(self, exact):
        if not self.std_error > 0:
            return math.nan
        return (self.mean - exact) / self.std_error


@dataclass(frozen=True)
class SimConfig:
    params: AttackParams
    n_cycles: int
    seed: int
    stream_mode: str = "per-cycle-derived"

    def __post_init__(self):
        if self.n_cycles != int(self.n_cycles) or self.n_cycles < 1:
            raise DomainError(f"n_cycles must be a positive integer, got {self.n_cycles!r}")
        _check_seed(self.seed)
        if self.stream_mode != "per-cycle-derived":
            raise DomainError(f"unsupported stream mode {self.stream_mode!r}")


@dataclass(frozen=True)
class BatchResult:
    p_success: MonteCarloEstimate
    revenue_b: MonteCarloEstimate
    duration_tau0: MonteCarloEstimate
    gamma_estimate: float
    n_cycles: int
    cycles: CycleArrays = field(default=None, repr=False)


def _chunk(args):
    params, n, seed, start = args
    return simulate_cycles(params, n, seed, start)


def run_batch(config, workers=1, keep_cycles=False):
    """Simulate ``config.n_cycles`` cycles and aggregate the estimates.

    Chunks of :data:`CHUNK_SIZE` cycles are farmed out to ``workers``
    processes when ``workers > 1``; the result does not depend on it.
    """
    n = config.n_cycles
    jobs = [
        (config.params, min(CHUNK_SIZE, n - s), config.seed, s)
        for s in range(0, n, CHUNK_SIZE)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk, jobs))
    else:
        parts = [_chunk(job) for job in jobs]
    cyc = CycleArrays.concat(parts)

    p_est = MonteCarloEstimate.from_samples(cyc.success.astype(np.float64))
    r_est = MonteCarloEstimate.from_samples(cyc.revenue_b)
    t_est = MonteCarloEstimate.from_samples(cyc.duration_tau0)
    return BatchResult(
        p_success=p_est,
        revenue_b=r_est,
        duration_tau0=t_est,
        gamma_estimate=r_est.mean / t_est.mean,
        n_cycles=n,
        cycles=cyc if keep_cycles else None,
    )
