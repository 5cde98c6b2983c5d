from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fsoarq.arq import cumulative_probs
from fsoarq.channels import DEFAULT_GAMMA_GAMMA, DEFAULT_RICIAN, Rayleigh
from fsoarq.exceptions import ConfigError, DomainError
from fsoarq.power import (
    EnergyBudget,
    PhiEvaluator,
    TabulatedPhi,
    optimal_schedule,
    schedule_outage,
    suboptimal_schedule,
    uniform_schedule,
)


def budget_used(phi, totals):
    cap = cumulative_probs([phi(p) for p in totals])
    return sum(p * c for p, c in zip(totals, cap[:-1]))


def power_law(d, scale=1.0):
    return lambda p: min(1.0, (scale / p) ** d) if p > 0 else 1.0


def test_budget_must_be_positive():
    with pytest.raises(DomainError):
        EnergyBudget(0.0)


def test_single_round_gets_whole_budget():
    phi = power_law(1.5)
    for sched in (
        uniform_schedule(EnergyBudget(3.0), 1, phi),
        suboptimal_schedule(EnergyBudget(3.0), 1, phi),
        optimal_schedule(EnergyBudget(3.0), 1, phi),
    ):
        assert sched.totals == [pytest.approx(3.0)]


def test_suboptimal_with_constant_half():
    sched = suboptimal_schedule(EnergyBudget(2.0), 2, lambda p: 0.5)
    assert sched.totals == [pytest.approx(1.0), pytest.approx(2.0)]


def test_uniform_extremes():
    assert uniform_schedule(EnergyBudget(6.0), 3, lambda p: 0.0).totals == [6.0] * 3
    assert uniform_schedule(EnergyBudget(6.0), 3, lambda p: 1.0).totals == [2.0] * 3


def test_suboptimal_truncates_when_a_round_always_decodes():
    sched = suboptimal_schedule(EnergyBudget(2.0), 3, lambda p: 0.0)
    assert sched.truncated and sched.totals == [pytest.approx(2.0 / 3.0)]


@given(st.floats(0.5, 80.0), st.integers(1, 4), st.floats(0.3, 3.0))
def test_suboptimal_invariants(total, m, d):
    phi = power_law(d, scale=2.0)
    sched = suboptimal_schedule(EnergyBudget(total), m, phi)
    totals = sched.totals
    assert budget_used(phi, totals) == pytest.approx(total, rel=1e-6)
    cap = cumulative_probs([phi(p) for p in totals])
    for p, c in zip(totals, cap[:-1]):
        assert p * c == pytest.approx(totals[0], rel=1e-6)
    assert all(b >= a * (1 - 1e-12) for a, b in zip(totals[:-1], totals[1:]))


@given(st.floats(0.5, 80.0), st.integers(1, 4), st.floats(0.3, 3.0))
def test_uniform_meets_budget(total, m, d):
    phi = power_law(d, scale=2.0)
    sched = uniform_schedule(EnergyBudget(total), m, phi)
    assert len(set(sched.totals)) == 1
    assert budget_used(phi, sched.totals) == pytest.approx(total, rel=1e-9)


@given(st.floats(1.0, 60.0), st.sampled_from([2, 3]), st.floats(0.5, 2.5))
def test_optimal_is_feasible_and_no_worse_than_heuristics(total, m, d):
    phi = power_law(d, scale=2.0)
    budget = EnergyBudget(total)
    opt = optimal_schedule(budget, m, phi, grid_resolution=50)
    if not opt.truncated:
        assert budget_used(phi, opt.totals) == pytest.approx(total, rel=1e-6)
    o = schedule_outage(phi, opt.totals)
    assert o <= schedule_outage(phi, suboptimal_schedule(budget, m, phi).totals) * (1 + 1e-12)
    assert o <= schedule_outage(phi, uniform_schedule(budget, m, phi).totals) * (1 + 1e-12)


def test_optimal_does_not_get_worse_with_more_budget():
    phi = PhiEvaluator(DEFAULT_GAMMA_GAMMA, Rayleigh(), 2.0, 32)
    prev = 1.0
    for total in (2.0, 4.0, 8.0, 16.0):
        out = schedule_outage(phi, optimal_schedule(EnergyBudget(total), 2, phi).totals)
        assert out <= prev * (1 + 1e-9)
        prev = out


def test_optimal_guards():
    phi = power_law(1.0)
    with pytest.raises(DomainError):
        optimal_schedule(EnergyBudget(1.0), 4, phi)
    with pytest.raises(DomainError):
        optimal_schedule(EnergyBudget(1.0), 2, phi, grid_resolution=10)


def test_clt_budget_schedule_post_conditions():
    phi = PhiEvaluator(DEFAULT_GAMMA_GAMMA, DEFAULT_RICIAN, 2.0, 64)
    sched = suboptimal_schedule(EnergyBudget(12.0), 3, phi)
    assert budget_used(phi, sched.totals) == pytest.approx(12.0, rel=1e-9)
    assert sched.rounds[0] == (pytest.approx(2.0), pytest.approx(2.0))


def test_evaluator_contract():
    ev = PhiEvaluator(DEFAULT_GAMMA_GAMMA, Rayleigh(), 2.0, 1, engine="minkowski")
    vals = ev.check_monotone([0.5, 2.0, 8.0, 32.0])
    assert vals[0] > vals[-1]
    with pytest.raises(ConfigError):
        PhiEvaluator(DEFAULT_GAMMA_GAMMA, Rayleigh(), 2.0, 1, engine="montecarlo")
    with pytest.raises(ConfigError):
        PhiEvaluator(DEFAULT_GAMMA_GAMMA, Rayleigh(), 2.0, 1, split=1.5)
    rf_only = PhiEvaluator(DEFAULT_GAMMA_GAMMA, Rayleigh(), 2.0, 1, split=1.0)
    assert rf_only(4.0) == pytest.approx(-math.expm1(-math.expm1(2.0) / 4.0))


def test_tabulated_surrogate_tracks_exact():
    ev = PhiEvaluator(DEFAULT_GAMMA_GAMMA, Rayleigh(), 2.0, 32, engine="clt_exactq")
    tab = TabulatedPhi(ev, 0.1, 1e3, 200)
    for p in (0.5, 3.0, 9.0, 40.0):
        assert tab(p) == pytest.approx(ev(p), rel=1e-2)
    assert tab(0.01) == tab(0.1)
    assert tab(1e5) <= tab(1e3)


def test_surrogate_search_reports_exact_outage():
    ev = PhiEvaluator(DEFAULT_GAMMA_GAMMA, Rayleigh(), 2.0, 32, engine="clt_exactq")
    budget = EnergyBudget(10.0)
    sched = optimal_schedule(budget, 2, ev, search_phi=ev.tabulate(0.01, 1e5))
    assert budget_used(ev, sched.totals) == pytest.approx(10.0, rel=1e-6)
    assert schedule_outage(ev, sched.totals) <= schedule_outage(ev, suboptimal_schedule(budget, 2, ev).totals)
