"""Monte Carlo ground truth for per-round failure and full ARQ episodes.

Randomness is drawn per batch from a stream keyed by
``(root_seed, batch, round, link)``, so results are bit-identical whatever
the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .arq import ArqConfig, ArqResult, PowerSchedule, cumulative_probs
from .channels import GammaGammaParams, RfChannelModel, RngStream, sample_gamma_gamma, sample_rf_gain
from .clt import RoundParams
from .exceptions import ConfigError

__all__ = ["McConfig", "McEstimate", "simulate_phi", "simulate_phi_rates", "simulate_arq"]

_LINK_RF = 0
_LINK_FSO = 1


@dataclass(frozen=True)
class McConfig:
    trials: int = 100_000
    root_seed: int = 0
    batch_count: int = 32
    n_jobs: int = 1

    def __post_init__(self):
        if int(self.trials) < 10_000:
            raise ConfigError("Monte Carlo needs at least 10^4 trials")
        if int(self.batch_count) < 2 or int(self.trials) % int(self.batch_count):
            raise ConfigError("batch_count must be >= 2 and divide trials")

    @property
    def batch_size(self):
        return int(self.trials) // int(self.batch_count)


@dataclass(frozen=True)
class McEstimate:
    """Batch-means estimate; ``ci_halfwidth`` is three standard errors."""

    mean: float
    ci_halfwidth: float
    trials: int

    @property
    def se(self):
        return self.ci_halfwidth / 3.0

    def contains(self, value, slack=0.0):
        return abs(value - self.mean) <= self.ci_halfwidth + slack


def _stream(cfg, batch, round_index, link):
    return RngStream(cfg.root_seed, (batch * 4096 + round_index) * 4 + link)


def _estimate(batch_values, trials) -> McEstimate:
    values = np.asarray(batch_values, dtype=np.float64)
    se = float(values.std(ddof=1)) / math.sqrt(values.size)
    return McEstimate(float(values.mean()), 3.0 * se, int(trials))


def _map_batches(func, cfg):
    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            return list(pool.map(func, range(cfg.batch_count)))
    return [func(k) for k in range(cfg.batch_count)]


def _round_mutual_info(params, rf, p_rf, p_fso, n_fso, cfg, batch, round_index):
    """Per-trial ``log(1 + P_RF g) + mean_i log(1 + P_FSO G_i)`` for one batch."""
    size = cfg.batch_size
    g_rf = sample_rf_gain(rf, _stream(cfg, batch, round_index, _LINK_RF), size)
    g_fso = sample_gamma_gamma(params, _stream(cfg, batch, round_index, _LINK_FSO), (size, int(n_fso)))
    return np.log1p(p_rf * g_rf) + np.log1p(p_fso * g_fso).mean(axis=1)


def simulate_phi_rates(params: GammaGammaParams, rf: RfChannelModel, rates, p_rf, p_fso, n_fso, cfg: McConfig):
    """Failure probability estimates for several rates from the same channel draws."""
    rates = np.atleast_1d(np.asarray(rates, dtype=np.float64))

    def run(batch):
        info = _round_mutual_info(params, rf, p_rf, p_fso, n_fso, cfg, batch, 0)
        return (info[:, None] < rates[None, :]).mean(axis=0)

    per_batch = np.array(_map_batches(run, cfg))
    return [_estimate(per_batch[:, k], cfg.trials) for k in range(rates.size)]


def simulate_phi(params: GammaGammaParams, rf: RfChannelModel, round: RoundParams, cfg: McConfig) -> McEstimate:
    """Empirical ``Pr(log(1 + P_RF G_RF) + mean_i log(1 + P_FSO G_i) < R)``."""
    return simulate_phi_rates(params, rf, [round.rate], round.p_rf, round.p_fso, round.n_fso, cfg)[0]


def simulate_arq(
    params: GammaGammaParams,
    rf: RfChannelModel,
    arq: ArqConfig,
    schedule: PowerSchedule,
    n_fso: int,
    cfg: McConfig,
) -> ArqResult:
    """Simulate basic-ARQ episodes with fresh channel draws in every round.

    Throughput is the renewal-reward ratio of decoded nats to channel uses
    (in codeword lengths); energy is the mean of ``sum P_m`` over the rounds
    actually used.
    """
    m_max = int(arq.max_rounds)
    if len(schedule) != m_max:
        raise ConfigError(f"schedule has {len(schedule)} rounds, expected {m_max}")
    totals = np.array(schedule.totals)

    def run(batch):
        failed = np.ones(cfg.batch_size, dtype=bool)
        rounds_used = np.zeros(cfg.batch_size)
        energy = np.zeros(cfg.batch_size)
        alive_after = []
        for m, (p_rf, p_fso) in enumerate(schedule.rounds):
            info = _round_mutual_info(params, rf, p_rf, p_fso, n_fso, cfg, batch, m)
            rounds_used += failed
            energy += failed * totals[m]
            failed = failed & (info < arq.rate)
            alive_after.append(failed.mean())
        decoded = float(np.sum(~failed))
        return (
            np.array(alive_after),
            arq.rate * decoded / float(rounds_used.sum()),
            float(energy.mean()),
        )

    results = _map_batches(run, cfg)
    cap_batches = np.array([r[0] for r in results])
    thr_batches = np.array([r[1] for r in results])
    energy_batches = np.array([r[2] for r in results])

    cap_est = [_estimate(cap_batches[:, k], cfg.trials) for k in range(m_max)]
    capital_phi = [1.0] + [e.mean for e in cap_est]
    phi = [
        (capital_phi[k + 1] / capital_phi[k]) if capital_phi[k] > 0 else 0.0
        for k in range(m_max)
    ]
    # cumulative_probs(phi) reproduces capital_phi up to rounding
    assert np.allclose(cumulative_probs(phi), capital_phi, atol=1e-12)
    out = cap_est[-1]
    thr = _estimate(thr_batches, cfg.trials)
    energy = _estimate(energy_batches, cfg.trials)
    return ArqResult(
        phi=phi,
        capital_phi=capital_phi,
        throughput=thr.mean,
        outage=out.mean,
        expected_energy=energy.mean,
        engine="montecarlo",
        ci_halfwidth=out.ci_halfwidth,
        intervals={
            "outage": out.ci_halfwidth,
            "throughput": thr.ci_halfwidth,
            "expected_energy": energy.ci_halfwidth,
            "capital_phi": [0.0] + [e.ci_halfwidth for e in cap_est],
        },
    )
