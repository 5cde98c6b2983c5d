"""Small-N regime: Minkowski upper bound on the per-round failure probability.

``(1 + (prod x_i)^(1/N))^N <= prod (1 + x_i)`` turns the CDF of the
averaged FSO log-gain into the CDF of a product of Gamma-Gamma gains,
which is then integrated over the RF gain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channels import GammaGammaParams, Rayleigh, RfChannelModel, RicianParams, rician_amplitude_pdf
from .clt import RoundParams
from .exceptions import DomainError, NumericalError, UnsupportedConfigurationError
from .specfun import MellinContour, product_gg_cdf

__all__ = ["BoundConfig", "y_cdf_upper_bound", "phi_upper_bound", "adaptive_gk"]

# Gauss-Kronrod 7/15 abscissae on [-1, 1] (non-negative half) and weights
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes
_GAUSS = np.zeros(15)
_GAUSS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])[:7]
_GAUSS[7] = _WG[-1]


def adaptive_gk(func, lo, hi, abs_tol=1e-6, rel_tol=1e-8, max_intervals=2000, breakpoints=()):
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of a vectorized ``func``.

    All pending intervals are evaluated in one call to ``func`` and the
    bisection schedule depends only on the integrand values, so the result
    is independent of any evaluation order.
    """
    edges = [lo, *sorted(p for p in breakpoints if lo < p < hi), hi]
    intervals = list(zip(edges[:-1], edges[1:]))
    done_val = 0.0
    done_err = 0.0
    while True:
        arr = np.array(intervals)
        mid = 0.5 * (arr[:, 0] + arr[:, 1])
        half = 0.5 * (arr[:, 1] - arr[:, 0])
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        fx = np.asarray(func(x.ravel()), dtype=np.float64).reshape(x.shape)
        kron = half * (fx @ _KRONROD)
        gauss = half * (fx @ _GAUSS)
        err = np.abs(kron - gauss)
        total = done_val + float(kron.sum())
        tol = max(abs_tol, rel_tol * abs(total))
        if done_err + float(err.sum()) <= tol:
            return total, done_err + float(err.sum())
        # accept intervals whose share of the budget is already met
        share = tol * half / (0.5 * (hi - lo))
        accept = err <= share
        done_val += float(kron[accept].sum())
        done_err += float(err[accept].sum())
        intervals = [
            piece
            for (a, b), keep in zip(intervals, accept)
            if not keep
            for piece in ((a, 0.5 * (a + b)), (0.5 * (a + b), b))
        ]
        if len(intervals) > max_intervals:
            raise NumericalError(
                "adaptive_gk: interval budget exhausted",
                {"lo": lo, "hi": hi, "estimate": total, "error": done_err + float(err.sum())},
            )


@dataclass(frozen=True)
class BoundConfig:
    contour: Optional[MellinContour] = None
    outer_quadrature_tolerance: float = 1e-6
    max_n: int = 5

    def __post_init__(self):
        if int(self.max_n) < 1:
            raise DomainError("max_n must be >= 1")
        if not self.outer_quadrature_tolerance > 0:
            raise DomainError("outer_quadrature_tolerance must be positive")


def y_cdf_upper_bound(params: GammaGammaParams, p_fso, n, x, cfg: BoundConfig = BoundConfig()):
    """Upper bound on ``Pr(mean_i log(1 + P_FSO G_i) <= x)`` via the gain product CDF."""
    if not p_fso > 0:
        raise DomainError("y_cdf_upper_bound: p_fso must be positive")
    xa = np.asarray(x, dtype=np.float64)
    pos = xa > 0
    with np.errstate(over="ignore"):
        arg = np.where(pos, (np.expm1(np.where(pos, xa, 0.0)) / p_fso) ** int(n), 0.0)
    out = np.where(pos, product_gg_cdf(int(n), params, arg, cfg.contour), 0.0)
    return out[()] if np.ndim(x) == 0 else out


def phi_upper_bound(
    params: GammaGammaParams,
    rf: RfChannelModel,
    round: RoundParams,
    cfg: BoundConfig = BoundConfig(),
) -> float:
    """Upper bound on the per-round failure probability, integrated over the RF gain.

    Rician links are integrated in the amplitude ``u = sqrt(g)``, which
    removes the ``1/sqrt(g)`` factor of the gain density.
    """
    n = int(round.n_fso)
    if n > cfg.max_n:
        raise UnsupportedConfigurationError(
            f"Minkowski bound refused for N={n} > max_n={cfg.max_n}; use the CLT engine"
        )
    if round.p_fso == 0:
        raise DomainError("phi_upper_bound needs p_fso > 0 (the RF-only case is exact in the CLT engine)")
    if round.p_rf == 0:
        return float(np.clip(y_cdf_upper_bound(params, round.p_fso, n, round.rate, cfg), 0.0, 1.0))

    rate, p_rf = round.rate, round.p_rf
    r = round.gain_threshold

    def fso_bound(gain):
        return y_cdf_upper_bound(params, round.p_fso, n, rate - np.log1p(p_rf * gain), cfg)

    # beyond ``hi`` the RF density carries less than 1e-18 of mass, so a huge
    # threshold (tiny power) cannot push every node into the empty tail
    tol = cfg.outer_quadrature_tolerance
    if isinstance(rf, Rayleigh):
        hi = min(r, 42.0)
        val, _ = adaptive_gk(
            lambda g: np.exp(-g) * fso_bound(g), 0.0, hi, abs_tol=tol, breakpoints=(1.0, 4.0, 12.0)
        )
    elif isinstance(rf, RicianParams):
        hi = min(math.sqrt(r), rf.nu + 10.0 * rf.omega)
        val, _ = adaptive_gk(
            lambda u: rician_amplitude_pdf(rf, u) * fso_bound(u * u), 0.0, hi, abs_tol=tol,
            breakpoints=tuple(k * rf.omega for k in (0.5, 1.0, 2.0, 4.0)),
        )
    else:
        raise TypeError(f"unknown RF channel model {rf!r}")
    return float(min(1.0, max(0.0, val)))
