import math
from dataclasses import replace

import pytest

from nakamoto_profit import model
from nakamoto_profit.config import TOL
from nakamoto_profit.errors import ComputationalIntegrityError, DomainError
from nakamoto_profit.model import (
    AttackParams,
    asymptotics,
    dual_path_values,
    expected_duration,
    expected_revenue,
    expected_revenue_inf,
    honest_revenue_ratio,
    report,
    revenue_ratio,
    success_probability,
    success_probability_inf,
)
from nakamoto_profit.specfun import reg_inc_beta
from oracles import (
    expected_duration_mixture,
    expected_revenue_mixture,
    success_probability_mixture,
)

GRID = [
    (round(0.05 * i, 2), z, A)
    for i in range(1, 10)
    for z in range(1, 7)
    for A in range(z, z + 9)
]


@pytest.mark.parametrize(
    "kw",
    [dict(q=0.0, z=1, A=1), dict(q=0.5, z=1, A=1), dict(q=0.2, z=0, A=1),
     dict(q=0.2, z=3, A=2), dict(q=0.2, z=1, A=1, v=-1), dict(q=0.2, z=1, A=1, b=0),
     dict(q=0.2, z=1, A=1, tau0=-600)],
)
def test_attack_params_invariants(kw):
    with pytest.raises(DomainError, match="invariant violated"):
        AttackParams(**kw)


def test_derived_quantities():
    p = AttackParams(0.2, 2, 4)
    assert p.p == pytest.approx(0.8)
    assert p.lam == pytest.approx(0.25)
    assert p.s == pytest.approx(0.64)
    assert p.bracket(3) == pytest.approx(1 + 0.25 + 0.0625, rel=1e-14)


# -- success probability -----------------------------------------------------

def test_success_probability_vanishes_as_q_to_0():
    assert success_probability(AttackParams(1e-9, 2, 3)) < 1e-16


def test_success_probability_matches_mixture_oracle():
    # frozen from the negative-binomial mixture of linear-system ruin probabilities
    assert success_probability_mixture(0.1, 2, 3) == pytest.approx(0.055856097560975634, rel=1e-13)
    assert success_probability(AttackParams(0.1, 2, 3)) == pytest.approx(0.055856097560975634, rel=1e-12)


def test_success_probability_inf():
    assert success_probability_inf(0.1, 2) == pytest.approx(reg_inc_beta(0.36, 2, 0.5), rel=1e-15)
    # mixture oracle with A = 10^4
    assert success_probability_mixture(0.1, 2, 10**4) == pytest.approx(0.05600000000000003, rel=1e-13)
    assert success_probability_inf(0.1, 2) == pytest.approx(0.056, rel=1e-12)
    for q in (0.01, 0.2, 0.45):
        assert success_probability_inf(q, 1) == pytest.approx(2 * q, rel=1e-12)
    for z in (1, 2, 5):
        ratio = success_probability_inf(1e-6, z) / (2 * math.comb(2 * z - 1, z) * 1e-6 ** z)
        assert ratio == pytest.approx(1.0, rel=1e-3)
    with pytest.raises(DomainError):
        success_probability_inf(0.5, 2)


def test_success_probability_increases_to_limit():
    q, z = 0.3, 3
    vals = [success_probability(AttackParams(q, z, A)) for A in range(z, z + 40)]
    limit = success_probability_inf(q, z)
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert all(v < limit for v in vals)
    assert 0 < vals[0] < 1


# -- expected duration -------------------------------------------------------

def test_duration_small_q():
    assert expected_duration(AttackParams(0.01, 1, 2)) == pytest.approx(100.0, rel=0.05)


def test_duration_matches_recomposition_oracle():
    assert expected_duration_mixture(0.1, 2, 3) == pytest.approx(14.715441734417345, rel=1e-13)
    assert expected_duration(AttackParams(0.1, 2, 3)) == pytest.approx(14.715441734417345, rel=1e-12)


def test_duration_linear_growth_in_A():
    q, z, A = 0.2, 3, 10**5
    p = 1 - q
    slope = reg_inc_beta((p - q) ** 2, 0.5, z) / (p - q)
    assert expected_duration(AttackParams(q, z, A)) / A == pytest.approx(slope, rel=0.01)


def test_duration_at_least_premine_and_confirmations():
    for q, z, A in GRID[::7]:
        p = AttackParams(q, z, A)
        assert expected_duration(p) >= 1 / q + z / p.p


# -- expected revenue --------------------------------------------------------

@pytest.mark.parametrize("q, z, A", GRID[::11])
def test_revenue_affine_in_v(q, z, A):
    r1 = expected_revenue(AttackParams(q, z, A, v=1.0))
    r0 = expected_revenue(AttackParams(q, z, A, v=0.0))
    assert r1 - r0 == pytest.approx(success_probability(AttackParams(q, z, A)), rel=1e-12)


def test_revenue_matches_recomposition_oracle():
    assert expected_revenue_mixture(0.1, 2, 3, 1.0) == pytest.approx(0.23198331680877793, rel=1e-13)
    assert expected_revenue(AttackParams(0.1, 2, 3, v=1.0)) == pytest.approx(0.23198331680877793, rel=1e-12)


def test_revenue_limit_in_A():
    p = AttackParams(0.1, 2, 10**4, v=1.0)
    assert abs(expected_revenue(p) - expected_revenue_inf(p)) <= 1e-8


# -- revenue ratio -----------------------------------------------------------

def test_ratio_limit_at_half():
    g = revenue_ratio(AttackParams(0.5 - 1e-6, 2, 10, v=1.0))
    assert abs(g - 139 / 286) <= 1e-4


def test_ratio_below_honest_for_A10():
    for i in range(1, 50):
        q = i / 100
        assert revenue_ratio(AttackParams(q, 2, 10, v=1.0)) < honest_revenue_ratio(q)


def test_ratio_small_q_coefficient():
    q = 1e-4
    g = revenue_ratio(AttackParams(q, 1, 2, v=0.0))
    assert g / q ** 2 == pytest.approx(4.0, rel=0.01)


def test_ratio_vanishes_as_A_grows():
    q = 0.1
    vals = [revenue_ratio(AttackParams(q, 2, A, v=1.0)) for A in (10**2, 10**3, 10**4)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-2 * honest_revenue_ratio(q)


def test_report_fields():
    r = report(AttackParams(0.1, 2, 3, v=1.0))
    assert r.gamma_attack == r.e_revenue_b / r.e_duration_tau0
    assert r.gamma_honest == 0.1
    assert r.profitable is False
    assert 0 <= r.p_success <= 1


def test_report_profitable_near_v0():
    # small A keeps the cycle short enough for v = 50 to beat honest mining
    q = 0.0099999
    assert report(AttackParams(q, 1, 1, v=50)).profitable
    assert report(AttackParams(q, 1, 3, v=50)).profitable
    assert not report(AttackParams(q, 1, 50, v=50)).profitable


# -- consistency properties --------------------------------------------------

def test_dual_paths_agree_on_grid():
    worst = 0.0
    for q, z, A in GRID:
        for name, (a, b) in dual_path_values(AttackParams(q, z, A, v=1.0)).items():
            worst = max(worst, abs(a - b))
    assert worst <= TOL.dual_path


def test_recomposition_on_grid():
    for q, z, A in GRID:
        p = AttackParams(q, z, A, v=1.0)
        assert abs(success_probability(p) - success_probability_mixture(q, z, A)) <= TOL.dual_path
        assert abs(expected_duration(p) - expected_duration_mixture(q, z, A)) <= TOL.dual_path
        assert abs(expected_revenue(p) - expected_revenue_mixture(q, z, A, 1.0)) <= TOL.dual_path


def test_success_probability_monotonicity():
    for c in range(0, 5):
        for q in (0.05, 0.25, 0.45):
            vals = [success_probability(AttackParams(q, z, z + c)) for z in range(1, 12)]
            assert all(a >= b for a, b in zip(vals, vals[1:]))
    for z in (1, 3, 6):
        vals = [success_probability(AttackParams(q / 100, z, z + 2)) for q in range(1, 50)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_integrity_guard_fires(monkeypatch):
    good = model._kernel(0.2, 3)
    model._kernel.cache_clear()
    monkeypatch.setattr(model, "_kernel", lambda q, z: good._replace(iq=good.iq * 1.01))
    with pytest.raises(ComputationalIntegrityError):
        expected_duration(AttackParams(0.2, 3, 5))


# -- asymptotics ---------------------------------------------------------------

def test_asymptotic_tail_of_p_inf():
    a = asymptotics(AttackParams(0.3, 50, 50))["p_inf_large_z"]
    assert a.exact == pytest.approx(reg_inc_beta(0.84, 50, 0.5), rel=1e-12)
    assert a.rel_gap < 0.05


def test_asymptotic_duration_small_q():
    assert asymptotics(AttackParams(1e-4, 2, 3))["duration_small_q"].rel_gap < 0.01


def test_asymptotic_gamma_small_q():
    a = asymptotics(AttackParams(1e-3, 1, 2, v=50))["gamma_small_q"]
    assert a.exact == revenue_ratio(AttackParams(1e-3, 1, 2, v=50))
    assert a.rel_gap < 0.02


def test_asymptotic_gap_shrinks_with_q():
    gaps = [asymptotics(AttackParams(q, 2, 4, v=3))["revenue_small_q"].rel_gap for q in (1e-2, 1e-3, 1e-4)]
    assert gaps[0] > gaps[1] > gaps[2]
