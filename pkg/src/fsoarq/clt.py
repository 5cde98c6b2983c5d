"""Large-N regime: Gaussian approximation of the averaged FSO log-gain.

When the RF block spans many FSO realizations, the per-round FSO mutual
information is approximately normal with mean ``mu`` and variance
``sigma2 / N``; the failure probability then reduces to a one-dimensional
integral over the RF gain, which is linearized into a closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .channels import (
    GammaGammaParams,
    Rayleigh,
    RfChannelModel,
    RicianParams,
    gamma_gamma_pdf,
    rf_gain_cdf,
    rician_amplitude_cdf,
    rician_amplitude_pdf,
)
from .exceptions import DomainError, NumericalError
from .specfun import gaussian_q

__all__ = [
    "LogMoments",
    "LinearizedQ",
    "RoundParams",
    "fso_log_moments",
    "linearize_q",
    "phi_clt",
    "phi_rayleigh_clt",
    "phi_rayleigh_clt_exactq",
    "phi_rician_clt",
    "phi_rician_clt_exactq",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class LogMoments:
    """Mean and variance (nats) of ``log(1 + p_fso G)`` for one FSO gain."""

    mu: float
    sigma2: float
    p_fso: float

    @property
    def rho2(self):
        return self.sigma2 + self.mu ** 2

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class LinearizedQ:
    """Piecewise-linear stand-in for the Gaussian tail around its midpoint.

    ``V(x) = 1`` below ``lo``, ``1/2 - beta (x - alpha)`` on ``[lo, hi]`` and
    ``0`` above ``hi``; ``beta`` is the positive slope magnitude.
    """

    alpha: float
    beta: float

    @property
    def lo(self):
        return self.alpha - 0.5 / self.beta

    @property
    def hi(self):
        return self.alpha + 0.5 / self.beta

    def __call__(self, x):
        return np.clip(0.5 - self.beta * (np.asarray(x, dtype=np.float64) - self.alpha), 0.0, 1.0)


@dataclass(frozen=True)
class RoundParams:
    """One ARQ round: rate R (npcu), per-link powers and FSO realizations per RF block."""

    rate: float
    p_rf: float
    p_fso: float
    n_fso: int = 1

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"rate must be positive, got {self.rate}")
        if self.p_rf < 0 or self.p_fso < 0 or not (self.p_rf + self.p_fso > 0):
            raise DomainError(f"powers must be non-negative with a positive total, got {self.p_rf}, {self.p_fso}")
        if int(self.n_fso) < 1:
            raise DomainError(f"n_fso must be >= 1, got {self.n_fso}")

    @property
    def gain_threshold(self):
        """RF gain below which the RF link alone cannot carry the rate."""
        return math.expm1(self.rate) / self.p_rf


@lru_cache(maxsize=32)
def _log_gain_rule(a, b, step=0.05):
    """Nodes and weights for E[h(G)] as a trapezoidal rule in t = log G."""
    t_lo = math.log(1e-17) / min(a, b) - 2.0
    t_hi = 2.0 * math.log(60.0 / math.sqrt(a * b)) + 2.0
    t = np.arange(t_lo, t_hi + step, step)
    x = np.exp(t)
    w = step * gamma_gamma_pdf(GammaGammaParams(a, b), x) * x
    mass = float(np.sum(w))
    mean = float(w @ x)
    if abs(mass - 1.0) > 1e-10 or abs(mean - 1.0) > 1e-9:
        raise NumericalError(
            "log-gain quadrature rule lost accuracy",
            {"a": a, "b": b, "mass": mass, "mean": mean},
        )
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def fso_log_moments(params: GammaGammaParams, p_fso) -> LogMoments:
    """Mean and variance of ``log(1 + p_fso G)`` under the Gamma-Gamma density.

    The integrals are one-dimensional; they are evaluated with a
    trapezoidal rule in ``log G`` whose error decays geometrically in the
    step, so the rule is accurate far below 1e-8.
    """
    p_fso = float(p_fso)
    if p_fso < 0:
        raise DomainError("fso_log_moments: p_fso must be non-negative")
    if p_fso == 0:
        return LogMoments(0.0, 0.0, 0.0)
    x, w = _log_gain_rule(float(params.a), float(params.b))
    logs = np.log1p(p_fso * x)
    mu = float(w @ logs)
    sigma2 = float(w @ (logs - mu) ** 2)
    return LogMoments(mu=mu, sigma2=max(sigma2, 0.0), p_fso=p_fso)


def linearize_q(moments: LogMoments, round: RoundParams) -> LinearizedQ:
    """First-order expansion of the Gaussian tail in the RF gain ``x``.

    Expands ``Q(sqrt(N) (log(1 + P_RF x) + mu - R) / sigma)`` at the gain
    where its argument vanishes.
    """
    if not round.p_rf > 0:
        raise DomainError("linearize_q: needs p_rf > 0")
    if not moments.sigma2 > 0:
        raise DomainError("linearize_q: degenerate sigma2 = 0, use the step-function limit")
    alpha = math.expm1(round.rate - moments.mu) / round.p_rf
    beta = math.sqrt(round.n_fso) * round.p_rf * math.exp(moments.mu - round.rate) / (moments.sigma * _SQRT_2PI)
    return LinearizedQ(alpha=alpha, beta=beta)


def _q_argument(moments, round, gain):
    return math.sqrt(round.n_fso) * (np.log1p(round.p_rf * gain) + moments.mu - round.rate) / moments.sigma


def _degenerate(params, rf, round, moments):
    """Closed forms when one link carries no randomness or no power."""
    if round.p_rf == 0:
        return float(gaussian_q(math.sqrt(round.n_fso) * (moments.mu - round.rate) / moments.sigma))
    # sigma2 == 0: the FSO term is the constant mu
    threshold = math.expm1(round.rate - moments.mu) / round.p_rf
    if threshold <= 0:
        return 0.0
    return float(rf_gain_cdf(rf, threshold))


def _is_degenerate(round, moments):
    return round.p_rf == 0 or not moments.sigma2 > 0


def _clip01(v):
    return float(min(1.0, max(0.0, v)))


def phi_rayleigh_clt(params: GammaGammaParams, round: RoundParams) -> float:
    """Closed-form failure probability for a Rayleigh RF link (linearized tail)."""
    moments = fso_log_moments(params, round.p_fso)
    if _is_degenerate(round, moments):
        return _degenerate(params, Rayleigh(), round, moments)
    lin = linearize_q(moments, round)
    r = round.gain_threshold
    alpha, beta = lin.alpha, lin.beta
    c1 = min(max(0.0, lin.lo), r)
    c2 = min(max(lin.hi, c1), r)

    def edge(c):
        return math.exp(-c) * (beta * c + beta - beta * alpha - 0.5)

    phi = -math.expm1(-c1) + edge(c2) - edge(c1)
    return _clip01(phi)


def _quad(func, lo, hi, points, what):
    pts = sorted({p for p in points if lo < p < hi})
    edges = [lo, *pts, hi]
    total = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        val, err, info = integrate.quad(func, left, right, epsabs=1e-10, epsrel=1e-9, limit=200, full_output=True)[:3]
        if err > 1e-7:
            raise NumericalError(f"{what}: quadrature did not converge", {"interval": (left, right), "error": err})
        total += val
    return total


def phi_rayleigh_clt_exactq(params: GammaGammaParams, round: RoundParams) -> float:
    """Rayleigh failure probability with the exact Gaussian tail, by quadrature."""
    moments = fso_log_moments(params, round.p_fso)
    if _is_degenerate(round, moments):
        return _degenerate(params, Rayleigh(), round, moments)
    lin = linearize_q(moments, round)
    r = round.gain_threshold

    def integrand(x):
        return math.exp(-x) * float(gaussian_q(_q_argument(moments, round, x)))

    # the exponential density is below 1e-18 past 42, which also keeps quad
    # from skipping the mass near zero when the threshold is huge
    hi = min(r, 42.0)
    return _clip01(_quad(integrand, 0.0, hi, (lin.lo, lin.alpha, lin.hi, 1.0, 4.0, 12.0), "phi_rayleigh_clt_exactq"))


def _rician_slope(moments, round, amp_alpha, simplified_slope):
    if simplified_slope:
        return math.sqrt(2.0 * round.n_fso * round.p_rf * math.exp(moments.mu - round.rate) / math.pi)
    return (
        math.sqrt(2.0 * round.n_fso / math.pi)
        * round.p_rf
        * amp_alpha
        * math.exp(moments.mu - round.rate)
        / moments.sigma
    )


def _riemann_linear_segment(cdf, c1, c2, alpha, beta):
    """int_{c1}^{c2} dF(u) (1/2 - beta (u - alpha)), with int F du ~ midpoint rule."""
    f1, f2 = float(cdf(c1)), float(cdf(c2))
    fm = float(cdf(0.5 * (c1 + c2)))
    return (0.5 + beta * alpha) * (f2 - f1) - beta * (c2 * f2 - c1 * f1 - (c2 - c1) * fm)


def phi_rician_clt(
    params: GammaGammaParams,
    rician: RicianParams,
    round: RoundParams,
    simplified_slope: bool = False,
) -> float:
    """Closed-form failure probability for a Rician RF link.

    The tail is linearized in the RF amplitude ``u`` at
    ``u0 = sqrt((e^(R - mu) - 1) / P_RF)`` and integrated against the
    Rician CDF with a midpoint rule for ``int F du``. By default the slope is
    the exact derivative at ``u0``; ``simplified_slope=True`` uses
    ``sqrt(2 N P_RF e^(mu - R) / pi)`` instead.

    If ``mu >= R`` there is no real expansion point in amplitude, so the
    same construction is done in the gain domain around ``alpha < 0``.
    """
    moments = fso_log_moments(params, round.p_fso)
    if _is_degenerate(round, moments):
        return _degenerate(params, rician, round, moments)
    r = round.gain_threshold
    gain_alpha = math.expm1(round.rate - moments.mu) / round.p_rf

    if gain_alpha > 0:
        u0 = math.sqrt(gain_alpha)
        beta = _rician_slope(moments, round, u0, simplified_slope)
        upper = math.sqrt(r)
        cdf = lambda u: rician_amplitude_cdf(rician, u)  # noqa: E731
    else:
        lin = linearize_q(moments, round)
        u0, beta, upper = lin.alpha, lin.beta, r
        cdf = lambda g: rf_gain_cdf(rician, g)  # noqa: E731

    c1 = min(max(0.0, u0 - 0.5 / beta), upper)
    c2 = min(max(u0 + 0.5 / beta, c1), upper)
    phi = float(cdf(c1)) + _riemann_linear_segment(cdf, c1, c2, u0, beta)
    return _clip01(phi)


def phi_rician_clt_exactq(params: GammaGammaParams, rician: RicianParams, round: RoundParams) -> float:
    """Rician failure probability with the exact Gaussian tail (amplitude-domain quadrature)."""
    moments = fso_log_moments(params, round.p_fso)
    if _is_degenerate(round, moments):
        return _degenerate(params, rician, round, moments)
    upper = min(math.sqrt(round.gain_threshold), rician.nu + 10.0 * rician.omega)
    gain_alpha = math.expm1(round.rate - moments.mu) / round.p_rf
    kinks = [k * rician.omega for k in (0.5, 1.0, 2.0, 4.0)]
    if gain_alpha > 0:
        u0 = math.sqrt(gain_alpha)
        beta = _rician_slope(moments, round, u0, False)
        kinks += [u0 - 0.5 / beta, u0, u0 + 0.5 / beta]

    def integrand(u):
        return float(rician_amplitude_pdf(rician, u)) * float(gaussian_q(_q_argument(moments, round, u * u)))

    return _clip01(_quad(integrand, 0.0, upper, kinks, "phi_rician_clt_exactq"))


def phi_clt(params: GammaGammaParams, rf: RfChannelModel, round: RoundParams, exact_q=False, simplified_slope=False):
    """Dispatch to the Rayleigh or Rician CLT engine."""
    if isinstance(rf, Rayleigh):
        return phi_rayleigh_clt_exactq(params, round) if exact_q else phi_rayleigh_clt(params, round)
    if isinstance(rf, RicianParams):
        if exact_q:
            return phi_rician_clt_exactq(params, rf, round)
        return phi_rician_clt(params, rf, round, simplified_slope=simplified_slope)
    raise TypeError(f"unknown RF channel model {rf!r}")
