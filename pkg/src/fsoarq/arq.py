"""Basic-ARQ bookkeeping: cumulative failure, throughput, outage and energy."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import DomainError

__all__ = [
    "ArqConfig",
    "PowerSchedule",
    "ArqResult",
    "cumulative_probs",
    "throughput",
    "throughput_equal_phi",
    "outage",
    "expected_energy",
    "evaluate_arq",
]


@dataclass(frozen=True)
class ArqConfig:
    """At most ``max_rounds`` transmissions of a rate-``rate`` codeword."""

    max_rounds: int
    rate: float

    def __post_init__(self):
        if int(self.max_rounds) < 1:
            raise DomainError("max_rounds must be >= 1")
        if not self.rate > 0:
            raise DomainError("rate must be positive")


@dataclass(frozen=True)
class PowerSchedule:
    """Per-round ``(p_rf, p_fso)`` pairs.

    ``constraint`` records what the powers satisfy (``"peak"`` or
    ``"expected_energy"``); ``truncated`` is set when a round decodes with
    certainty so that later rounds are never used.
    """

    rounds: tuple
    constraint: str = "peak"
    truncated: bool = False

    def __post_init__(self):
        rounds = tuple((float(r), float(f)) for r, f in self.rounds)
        object.__setattr__(self, "rounds", rounds)
        for p_rf, p_fso in rounds:
            if p_rf < 0 or p_fso < 0 or not (p_rf + p_fso > 0):
                raise DomainError(f"invalid round powers ({p_rf}, {p_fso})")

    @classmethod
    def from_totals(cls, totals, split=0.5, constraint="expected_energy", truncated=False):
        """Split each round's total power as ``(split * P, (1 - split) * P)``."""
        return cls(tuple((split * p, (1.0 - split) * p) for p in totals), constraint, truncated)

    @classmethod
    def uniform(cls, p_rf, p_fso, m):
        return cls(((p_rf, p_fso),) * int(m), "peak")

    @property
    def totals(self):
        return [r + f for r, f in self.rounds]

    def __len__(self):
        return len(self.rounds)


@dataclass
class ArqResult:
    phi: list
    capital_phi: list
    throughput: float
    outage: float
    expected_energy: float
    engine: str
    ci_halfwidth: Optional[float] = None
    intervals: dict = field(default_factory=dict)


def cumulative_probs(phi: Sequence[float]) -> list:
    """``[1, phi_1, phi_1 phi_2, ...]``."""
    out = [1.0]
    for p in phi:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"failure probability {p} outside [0, 1]")
        out.append(out[-1] * p)
    return out


def throughput(rate: float, capital_phi: Sequence[float]) -> float:
    """Long-run decoded nats per channel use, ``R (1 - Phi_M) / sum_{m<M} Phi_m``."""
    cap = list(capital_phi)
    if len(cap) < 2:
        raise DomainError("capital_phi needs at least Phi_0 and Phi_1")
    return float(rate) * (1.0 - cap[-1]) / float(np.sum(cap[:-1]))


def throughput_equal_phi(rate: float, phi_1: float) -> float:
    """``R (1 - phi_1)``: the value of :func:`throughput` when every round has the same phi."""
    return float(rate) * (1.0 - float(phi_1))


def outage(capital_phi: Sequence[float]) -> float:
    if len(capital_phi) == 0:
        raise DomainError("outage of an empty sequence")
    return float(capital_phi[-1])


def expected_energy(schedule: PowerSchedule, capital_phi: Sequence[float]) -> float:
    """Normalized expected energy ``sum_m P_m Phi_{m-1}``."""
    totals = schedule.totals
    if len(capital_phi) != len(totals) + 1:
        raise DomainError(
            f"schedule has {len(totals)} rounds but capital_phi has {len(capital_phi)} entries"
        )
    return float(sum(p * c for p, c in zip(totals, capital_phi[:-1])))


def evaluate_arq(phi, rate, schedule: PowerSchedule, engine: str, ci_halfwidth=None) -> ArqResult:
    cap = cumulative_probs(phi)
    return ArqResult(
        phi=[float(p) for p in phi],
        capital_phi=cap,
        throughput=throughput(rate, cap),
        outage=outage(cap),
        expected_energy=expected_energy(schedule, cap),
        engine=engine,
        ci_halfwidth=ci_halfwidth,
    )
