"""Temporal power allocation across ARQ rounds under an expected-energy budget."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar
from scipy.special import expit, logit

from .arq import PowerSchedule, cumulative_probs
from .bound import BoundConfig, phi_upper_bound
from .channels import GammaGammaParams, RfChannelModel
from .clt import RoundParams, phi_clt
from .exceptions import ConfigError, DomainError

__all__ = [
    "EnergyBudget",
    "PhiEvaluator",
    "TabulatedPhi",
    "uniform_schedule",
    "suboptimal_schedule",
    "optimal_schedule",
    "schedule_outage",
]

ANALYTIC_ENGINES = ("clt", "clt_exactq", "minkowski")


@dataclass(frozen=True)
class EnergyBudget:
    """Normalized expected energy per codeword."""

    total: float

    def __post_init__(self):
        if not self.total > 0:
            raise DomainError("energy budget must be positive")


@dataclass
class PhiEvaluator:
    """Round failure probability as a function of the total round power ``P``.

    The power is split as ``P_RF = split * P`` and ``P_FSO = (1 - split) * P``;
    ``split=1`` and ``split=0`` give the RF-only and FSO-only links.
    """

    params: GammaGammaParams
    rf: RfChannelModel
    rate: float
    n_fso: int
    engine: str = "clt"
    split: float = 0.5
    bound: BoundConfig = field(default_factory=BoundConfig)
    simplified_slope: bool = False
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.engine not in ANALYTIC_ENGINES:
            raise ConfigError(f"power allocation needs an analytic engine, got {self.engine!r}")
        if not 0.0 <= self.split <= 1.0:
            raise ConfigError("split must lie in [0, 1]")

    def round_params(self, total_power):
        p = float(total_power)
        return RoundParams(self.rate, self.split * p, (1.0 - self.split) * p, self.n_fso)

    def __call__(self, total_power) -> float:
        key = float(total_power)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        rp = self.round_params(key)
        if self.engine == "minkowski" and rp.p_fso > 0:
            val = phi_upper_bound(self.params, self.rf, rp, self.bound)
        else:
            val = phi_clt(self.params, self.rf, rp, self.engine == "clt_exactq", self.simplified_slope)
        self._cache[key] = val
        return val

    def schedule(self, totals, truncated=False):
        return PowerSchedule.from_totals(totals, self.split, "expected_energy", truncated)

    def check_monotone(self, powers, slack=1e-9):
        """Raise if phi is outside [0, 1] or increases along ``powers``."""
        vals = [self(p) for p in sorted(powers)]
        if any(not 0.0 <= v <= 1.0 for v in vals):
            raise DomainError("phi evaluator returned a value outside [0, 1]")
        if any(b > a + slack for a, b in zip(vals[:-1], vals[1:])):
            raise DomainError("phi evaluator is not non-increasing in power")
        return vals

    def tabulate(self, p_lo, p_hi, num=200):
        return TabulatedPhi(self, p_lo, p_hi, num)


class TabulatedPhi:
    """Monotone (PCHIP) interpolant of ``log phi`` in ``log P``.

    Used only to steer the exhaustive search. Below the table it holds the
    first value; above it the last log-log segment is extended.
    """

    def __init__(self, exact, p_lo, p_hi, num=200):
        self.exact = exact
        self.p_lo, self.p_hi = float(p_lo), float(p_hi)
        grid = np.geomspace(self.p_lo, self.p_hi, int(num))
        vals = np.array([max(exact(p), 1e-300) for p in grid])
        logs, logv = np.log(grid), np.log(vals)
        self._interp = PchipInterpolator(logs, logv)
        self._first = float(vals[0])
        self._log_hi = float(logs[-1])
        self._tail_value = float(logv[-1])
        self._tail_slope = min(0.0, float((logv[-1] - logv[-2]) / (logs[-1] - logs[-2])))

    def __call__(self, total_power):
        p = float(total_power)
        if p <= self.p_lo:
            return self._first
        if p >= self.p_hi:
            return float(min(1.0, math.exp(self._tail_value + self._tail_slope * (math.log(p) - self._log_hi))))
        return float(min(1.0, math.exp(self._interp(math.log(p)))))


def _as_schedule(phi, totals, truncated=False):
    if isinstance(phi, PhiEvaluator):
        return phi.schedule(totals, truncated)
    return PowerSchedule.from_totals(totals, 0.5, "expected_energy", truncated)


def schedule_outage(phi: Callable[[float], float], totals) -> float:
    """Outage ``prod_m phi(P_m)`` of a per-round total-power vector."""
    return float(np.prod([phi(p) for p in totals]))


def _budget_used(phi, totals):
    cap = cumulative_probs([phi(p) for p in totals])
    return float(sum(p * c for p, c in zip(totals, cap[:-1])))


def uniform_schedule(budget: EnergyBudget, m: int, phi) -> PowerSchedule:
    """Equal per-round powers that spend exactly the expected-energy budget."""
    m = int(m)
    if m < 1:
        raise DomainError("m must be >= 1")
    target = budget.total

    def excess(p):
        return _budget_used(phi, [p] * m) - target

    lo, hi = target / m, target
    if excess(lo) >= 0:
        return _as_schedule(phi, [lo] * m)
    if excess(hi) <= 0:
        return _as_schedule(phi, [hi] * m)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-13 * target:
            break
    return _as_schedule(phi, [0.5 * (lo + hi)] * m)


def suboptimal_schedule(budget: EnergyBudget, m: int, phi) -> PowerSchedule:
    """Equal expected energy per round: ``P_n Phi_(n-1) = P_1 = budget / M``.

    Implemented as the forward recursion ``P_n = P_1 / Phi_(n-1)``. If some
    round decodes with certainty the later rounds are never used and the
    schedule is returned truncated.
    """
    m = int(m)
    if m < 1:
        raise DomainError("m must be >= 1")
    p1 = budget.total / m
    totals = []
    cap = 1.0
    for _ in range(m):
        if cap == 0.0:
            return _as_schedule(phi, totals, truncated=True)
        p = p1 / cap
        totals.append(p)
        cap *= phi(p)
    return _as_schedule(phi, totals)


def _totals_from_fractions(phi, budget, fractions):
    """Map spend fractions of the remaining budget to per-round powers.

    Round ``k < M`` takes ``f_k`` of what is left, scaled by ``1 / Phi_(k-1)``;
    the last round takes the rest, so the budget holds exactly.
    """
    left = budget
    cap = 1.0
    totals = []
    for f in fractions:
        p = f * left / cap
        if not math.isfinite(p):
            return totals, True
        totals.append(p)
        left -= p * cap
        cap *= phi(p)
        if cap == 0.0:
            return totals, True
    last = left / cap
    if not math.isfinite(last):
        return totals, True
    totals.append(last)
    return totals, False


def _log_outage(phi, totals):
    vals = [phi(p) for p in totals]
    if min(vals) <= 0.0:
        return -math.inf
    return float(sum(math.log(v) for v in vals))


def _fractions_of(phi, budget, totals):
    fracs, left, cap = [], budget, 1.0
    for p in totals[:-1]:
        fracs.append(min(max(p * cap / left, 1e-12), 1.0 - 1e-12))
        left -= p * cap
        cap *= phi(p)
    return tuple(fracs)


def optimal_schedule(budget: EnergyBudget, m: int, phi, grid_resolution: int = 60, search_phi=None) -> PowerSchedule:
    """Outage-minimizing schedule by exhaustive grid search plus local refinement.

    The free variables are the fractions of the remaining budget spent in
    rounds ``1..M-1`` on a logit-spaced grid (fine near both ends); the
    last round takes whatever keeps the expected energy exactly on budget.
    The best grid point is polished by one bounded scalar search per
    coordinate. The uniform and equal-energy schedules are also scored, so
    the result is never worse than either.

    ``search_phi`` (e.g. a :class:`TabulatedPhi`) may stand in for ``phi``
    during the grid scan; every reported candidate is scored with ``phi``.
    """
    m = int(m)
    if m not in (1, 2, 3):
        raise DomainError("exhaustive search supports m in {1, 2, 3}")
    if int(grid_resolution) < 50:
        raise DomainError("grid_resolution must be >= 50")
    total = budget.total
    if m == 1:
        return _as_schedule(phi, [total])
    scan_phi = search_phi or phi

    def score(fracs, fn):
        totals, trunc = _totals_from_fractions(fn, total, fracs)
        value = -math.inf if trunc else _log_outage(fn, totals)
        return value, tuple(totals), trunc, tuple(fracs)

    grid = expit(np.linspace(-9.0, 9.0, int(grid_resolution)))
    if m == 2:
        scanned = [score((f1,), scan_phi) for f1 in grid]
    else:
        scanned = [score((f1, f2), scan_phi) for f1 in grid for f2 in grid]
    ranked = sorted(scanned, key=lambda c: (c[0], c[1]))

    candidates = [score(c[3], phi) for c in ranked[:3]]
    for seed in (uniform_schedule(budget, m, phi), suboptimal_schedule(budget, m, phi)):
        if not seed.truncated:
            candidates.append(score(_fractions_of(phi, total, seed.totals), phi))

    best = min(candidates, key=lambda c: (c[0], c[1]))
    if best[0] > -math.inf:
        fracs = list(best[3])
        step = 18.0 / (int(grid_resolution) - 1)
        for k in range(m - 1):
            center = float(logit(fracs[k]))

            def objective(z, k=k):
                trial = list(fracs)
                trial[k] = float(expit(z))
                cand = score(tuple(trial), phi)
                candidates.append(cand)
                return cand[0] if cand[0] > -math.inf else -1e308

            minimize_scalar(
                objective, bounds=(center - step, center + step), method="bounded",
                options={"xatol": 1e-6},
            )
            best = min(candidates, key=lambda c: (c[0], c[1]))
            fracs = list(best[3])

    return _as_schedule(phi, list(best[1]), truncated=best[2])
