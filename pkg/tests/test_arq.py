from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fsoarq.arq import (
    ArqConfig,
    PowerSchedule,
    cumulative_probs,
    evaluate_arq,
    expected_energy,
    outage,
    throughput,
    throughput_equal_phi,
)
from fsoarq.exceptions import DomainError

probs = st.floats(0.0, 1.0)


def test_cumulative_examples():
    assert cumulative_probs([0.5, 0.5]) == [1.0, 0.5, 0.25]
    assert cumulative_probs([0.0, 0.7]) == [1.0, 0.0, 0.0]
    assert cumulative_probs([1, 1, 1]) == [1.0, 1.0, 1.0, 1.0]
    with pytest.raises(DomainError):
        cumulative_probs([0.5, 1.2])


def test_throughput_examples():
    assert throughput(1.0, [1.0, 0.0]) == 1.0
    assert throughput(2.0, [1.0, 0.5, 0.25]) == pytest.approx(1.0)


def test_outage_examples():
    assert outage([1.0, 0.5, 0.25]) == 0.25
    assert outage(cumulative_probs([0.0, 0.0])) == 0.0
    assert outage(cumulative_probs([0.3])) == 0.3
    with pytest.raises(DomainError):
        outage([])


def test_energy_examples():
    assert expected_energy(PowerSchedule.from_totals([2.0]), [1.0, 0.4]) == 2.0
    assert expected_energy(PowerSchedule.from_totals([1.0, 2.0]), [1.0, 0.5, 0.1]) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        expected_energy(PowerSchedule.from_totals([1.0, 2.0]), [1.0, 0.5])


def test_config_and_schedule_validation():
    with pytest.raises(DomainError):
        ArqConfig(0, 1.0)
    with pytest.raises(DomainError):
        ArqConfig(1, 0.0)
    with pytest.raises(DomainError):
        PowerSchedule(((0.0, 0.0),))
    s = PowerSchedule.uniform(1.0, 2.0, 3)
    assert len(s) == 3 and s.totals == [3.0, 3.0, 3.0]


@given(st.lists(probs, min_size=1, max_size=6), st.floats(0.01, 10.0))
def test_bookkeeping_invariants(phi, rate):
    cap = cumulative_probs(phi)
    assert cap[0] == 1.0
    assert all(b <= a for a, b in zip(cap[:-1], cap[1:]))
    eta = throughput(rate, cap)
    assert 0.0 <= eta <= rate * (1 + 1e-12)
    assert 0.0 <= outage(cap) <= 1.0


@given(probs, st.integers(1, 8), st.floats(0.01, 10.0))
def test_equal_phi_throughput_identity(p, m, rate):
    cap = cumulative_probs([p] * m)
    assert throughput(rate, cap) == pytest.approx(throughput_equal_phi(rate, p), rel=1e-12, abs=1e-15)


@given(st.floats(0.001, 0.999))
def test_retransmission_lowers_outage(p):
    assert outage(cumulative_probs([p, p])) < outage(cumulative_probs([p]))


def test_energy_with_certain_first_round_is_first_power():
    sched = PowerSchedule.from_totals([4.0, 4.0, 4.0])
    assert evaluate_arq([0.0, 0.0, 0.0], 1.0, sched, "clt").expected_energy == 4.0


def test_evaluate_arq_assembles_result():
    sched = PowerSchedule.from_totals([1.0, 2.0])
    res = evaluate_arq([0.5, 0.5], 2.0, sched, "clt")
    assert res.capital_phi == [1.0, 0.5, 0.25]
    assert res.outage == 0.25 and res.throughput == pytest.approx(1.0)
    assert res.expected_energy == pytest.approx(2.0)
    assert res.ci_halfwidth is None
