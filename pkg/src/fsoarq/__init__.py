"""Outage, throughput and energy analysis of ARQ over hybrid RF/FSO links."""
from .arq import ArqConfig, ArqResult, PowerSchedule, cumulative_probs, expected_energy, outage, throughput
from .channels import (
    DEFAULT_GAMMA_GAMMA,
    DEFAULT_RICIAN,
    GammaGammaParams,
    Rayleigh,
    Rician,
    RicianParams,
    RngStream,
)
from .clt import RoundParams, fso_log_moments, phi_clt
from .estimators import FailureProbabilityModel
from .exceptions import ConfigError, DomainError, FsoArqError, NumericalError, UnsupportedConfigurationError
from .montecarlo import McConfig, McEstimate, simulate_arq, simulate_phi
from .power import EnergyBudget, PhiEvaluator, optimal_schedule, suboptimal_schedule, uniform_schedule

__version__ = "0.1.0"
