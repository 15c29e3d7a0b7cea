import math

import numpy as np
import pytest
from scipy import stats

from nakamoto_profit import model
from nakamoto_profit.errors import DomainError
from nakamoto_profit.model import AttackParams
from nakamoto_profit.simulator import (
    CHUNK_SIZE,
    CycleArrays,
    CycleStream,
    MonteCarloEstimate,
    SimConfig,
    run_batch,
    run_cycle,
    simulate_cycles,
)
from nakamoto_profit.walks import (
    NegBinParams,
    WalkSpec,
    expected_left_steps_given_ruin,
    negbin_pmf,
    ruin_probability,
)

SEED = 20261016


class ListStream:
    def __init__(self, values):
        self.values = list(values)

    def uniform(self):
        return self.values.pop(0)


def _exp(u):
    return -math.log1p(-u)


def test_stub_success_in_confirmation_phase():
    params = AttackParams(0.3, 1, 1, v=4.0)
    # premine, then (time, attacker), (time, honest)
    out = run_cycle(params, ListStream([0.5, 0.2, 0.1, 0.6, 0.9]))
    assert out.success
    assert out.phase2_attacker_blocks == 1
    assert out.phase3_steps == 0
    assert out.revenue_b == 1 + 1 + 4.0
    premine = _exp(0.5) / 0.3
    assert out.premine_time_tau0 == pytest.approx(premine, rel=1e-15)
    assert out.duration_tau0 == pytest.approx(premine + _exp(0.2) + _exp(0.6), rel=1e-15)


def test_stub_shortest_race_success():
    params = AttackParams(0.3, 1, 3, v=2.0)
    # premine, honest confirmation, then one attacker block
    out = run_cycle(params, ListStream([0.1, 0.4, 0.99, 0.7, 0.01]))
    assert out.success
    assert out.phase2_attacker_blocks == 0
    assert (out.phase3_steps, out.phase3_left_steps) == (1, 1)
    assert out.revenue_b == 1 + 0 + 1 + 2.0
    assert out.phase3_time_tau0 == pytest.approx(_exp(0.7), rel=1e-15)


def test_stub_give_up():
    params = AttackParams(0.3, 1, 1, v=2.0)
    # confirmation by honest, then honest again: lag hits A + 1 = 2
    out = run_cycle(params, ListStream([0.1, 0.4, 0.99, 0.7, 0.99]))
    assert not out.success
    assert out.revenue_b == 0.0
    assert out.duration_tau0 > 0


def test_scalar_and_vector_paths_are_bit_identical():
    params = AttackParams(0.3, 3, 6, v=10)
    cyc = simulate_cycles(params, 2000, SEED, start=123)
    for i in range(2000):
        assert run_cycle(params, CycleStream(SEED, 123 + i)) == cyc.outcome(i)


def test_chunking_does_not_change_cycles():
    params = AttackParams(0.2, 2, 4, v=1)
    whole = simulate_cycles(params, 1000, SEED)
    parts = CycleArrays.concat(
        [simulate_cycles(params, 300, SEED, 700), simulate_cycles(params, 700, SEED, 0)]
    )
    for name in ("success", "revenue_b", "duration_tau0", "phase3_left_steps"):
        assert np.array_equal(getattr(whole, name), getattr(parts, name))


def test_batch_deterministic_across_workers():
    cfg = SimConfig(AttackParams(0.2, 2, 4, v=1), 2 * CHUNK_SIZE + 17, SEED)
    a = run_batch(cfg, workers=1)
    b = run_batch(cfg, workers=2)
    c = run_batch(cfg)
    assert a == b == c


def test_single_cycle_batch():
    params = AttackParams(0.1, 2, 3, v=1)
    res = run_batch(SimConfig(params, 1, 7))
    one = run_cycle(params, CycleStream(7, 0))
    assert res.p_success.mean == float(one.success)
    assert res.revenue_b.mean == one.revenue_b
    assert res.duration_tau0.mean == one.duration_tau0
    assert math.isnan(res.revenue_b.std_error)
    assert res.n_cycles == 1


def test_config_validation():
    params = AttackParams(0.1, 2, 3)
    for bad in [dict(n_cycles=0, seed=1), dict(n_cycles=5, seed=-1), dict(n_cycles=5, seed=2**64)]:
        with pytest.raises(DomainError):
            SimConfig(params, **bad)


def test_estimate_std_error():
    est = MonteCarloEstimate.from_samples(np.array([1.0, 2.0, 3.0, 4.0]))
    assert est.mean == 2.5
    assert est.std_error == pytest.approx(math.sqrt(np.var([1, 2, 3, 4], ddof=1) / 4))


@pytest.fixture(scope="module")
def big_run():
    params = AttackParams(0.3, 3, 6, v=10)
    return params, run_batch(SimConfig(params, 10**6, SEED), keep_cycles=True)


@pytest.mark.slow
def test_accounting_identity_every_cycle(big_run):
    params, res = big_run
    c = res.cycles
    assert np.all(c.revenue_b[~c.success] == 0.0)
    assert np.array_equal(
        c.revenue_b[c.success],
        (1.0 + c.phase2_attacker_blocks + c.phase3_left_steps + params.v)[c.success],
    )
    assert np.allclose(
        c.duration_tau0, c.premine_time_tau0 + c.phase2_time_tau0 + c.phase3_time_tau0, rtol=1e-15, atol=0
    )
    assert np.all(c.premine_time_tau0 >= 0) and np.all(c.phase2_time_tau0 > 0) and np.all(c.phase3_time_tau0 >= 0)
    assert np.all(c.phase3_steps[c.phase2_attacker_blocks >= params.z] == 0)


@pytest.mark.slow
def test_confirmation_phase_marginals(big_run):
    params, res = big_run
    c = res.cycles
    n = len(c)
    j = c.phase2_attacker_blocks
    nb = NegBinParams(params.p, params.z)
    kmax = 10
    probs = [negbin_pmf(nb, k) for k in range(kmax)]
    probs.append(1.0 - sum(probs))
    observed = [np.sum(j == k) for k in range(kmax)] + [np.sum(j >= kmax)]
    _, pvalue = stats.chisquare(observed, np.array(probs) * n)
    assert pvalue > 0.01
    s = MonteCarloEstimate.from_samples(c.phase2_time_tau0)
    assert abs(s.z_score(params.z / params.p)) < 3


@pytest.mark.slow
def test_race_phase_marginals(big_run):
    params, res = big_run
    c = res.cycles
    start = params.z - c.phase2_attacker_blocks
    for m in range(1, params.z + 1):
        sel = start == m
        w = WalkSpec(params.q, m, params.A + 1)
        win = MonteCarloEstimate.from_samples(c.success[sel].astype(float))
        assert abs(win.z_score(ruin_probability(w))) < 3
        lefts = MonteCarloEstimate.from_samples(c.phase3_left_steps[sel & c.success].astype(float))
        assert abs(lefts.z_score(expected_left_steps_given_ruin(w))) < 3
