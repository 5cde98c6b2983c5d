"""Special functions used by the channel models and the analytic engines.

Everything here is a pure function of its arguments and accepts numpy
arrays (broadcasting like a ufunc) unless stated otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .exceptions import ConfigError, DomainError, NumericalError

__all__ = [
    "MellinContour",
    "default_contour",
    "ln_gamma",
    "bessel_k",
    "bessel_ke",
    "bessel_i0",
    "bessel_i0e",
    "gaussian_q",
    "marcum_q1",
    "marcum_q1_complement",
    "product_gg_cdf",
]

_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)

# Stirling coefficients B_2k / (2k (2k - 1)), k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_STIRLING_SHIFT = 15.0


def _scalar_or_array(out, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return out[()] if isinstance(out, np.ndarray) else out
    return out


def ln_gamma(x):
    """Logarithm of the Gamma function.

    Real input must be positive and returns the real ``ln Gamma(x)``.
    Complex input must have a positive real part; the imaginary part of
    the result is only defined modulo ``2*pi`` (callers exponentiate it).

    Uses the Stirling series after shifting the argument to ``Re z >= 15``.
    """
    z = np.asarray(x)
    is_complex = np.iscomplexobj(z)
    if is_complex:
        z = z.astype(np.complex128)
        if np.any(~(z.real > 0)):
            raise DomainError("ln_gamma: complex argument needs Re(z) > 0")
    else:
        z = z.astype(np.float64)
        if np.any(~(z > 0)):
            raise DomainError("ln_gamma: argument must be positive")

    shift = np.zeros_like(z)
    w = z.copy()
    for _ in range(int(_STIRLING_SHIFT)):
        mask = w.real < _STIRLING_SHIFT
        if not np.any(mask):
            break
        shift = shift + np.where(mask, np.log(np.where(mask, w, 1.0)), 0.0)
        w = np.where(mask, w + 1.0, w)

    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for coef in reversed(_STIRLING):
        series = series * inv2 + coef
    series = series * inv
    out = (w - 0.5) * np.log(w) - w + _HALF_LN_2PI + series - shift
    return _scalar_or_array(out, x)


def _k_asymptotic_scaled(order, x):
    """``exp(x) K_order(x)`` from the large-argument expansion (x >= 30)."""
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    for k in range(1, 80):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = np.abs(term)
        # stop once the series starts to diverge (asymptotic) or is converged
        active = (mag < prev) & (mag > 1e-17 * np.abs(total))
        if not np.any(active):
            break
        total = np.where(active, total + term, total)
        prev = np.where(active, mag, 0.0)
    return np.sqrt(np.pi / (2.0 * x)) * total


def _k_trapezoid_scaled(order, x, step=0.1):
    """``exp(x) K_order(x)`` by the trapezoidal rule on the cosh integral.

    The integrand ``exp(-x (cosh t - 1)) cosh(order t)`` is even and entire,
    so the rule on [0, inf) converges geometrically in ``1/step``.
    """
    nu = abs(order)
    x_min = float(np.min(x))
    t_max = 1.0
    for _ in range(30):
        t_new = math.acosh(1.0 + (nu * t_max + 40.0) / x_min)
        if abs(t_new - t_max) < 1e-3:
            t_max = t_new
            break
        t_max = t_new
    t = np.arange(0.0, t_max + step, step)
    weights = np.full(t.shape, step)
    weights[0] = 0.5 * step
    xs = x[..., None]
    # cosh(nu t) e^{-x (cosh t - 1)} evaluated in log form to avoid overflow
    log_cosh = nu * t + np.log1p(np.exp(-2.0 * nu * t)) - math.log(2.0)
    log_f = log_cosh - xs * (np.cosh(t) - 1.0)
    return np.exp(log_f) @ weights


def bessel_ke(order, x):
    """Exponentially scaled modified Bessel function ``exp(x) K_order(x)``."""
    order = float(order)
    xa = np.asarray(x, dtype=np.float64)
    if np.any(~(xa > 0)):
        raise DomainError("bessel_k: x must be positive")
    flat = np.atleast_1d(xa).ravel()
    out = np.empty_like(flat)
    large = flat >= 30.0
    if np.any(large):
        out[large] = _k_asymptotic_scaled(order, flat[large])
    if np.any(~large):
        out[~large] = _k_trapezoid_scaled(order, flat[~large])
    out = out.reshape(np.shape(xa))
    return _scalar_or_array(out, x)


def bessel_k(order, x):
    """Modified Bessel function of the second kind for real order, ``K_order(x)``.

    Underflows to 0 for x beyond roughly 745.
    """
    scaled = bessel_ke(order, x)
    with np.errstate(under="ignore"):
        out = np.exp(-np.asarray(x, dtype=np.float64)) * scaled
    return _scalar_or_array(out, x)


def _i0_series(x):
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 200):
        term = term * q / (k * k)
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return total


def _i0e_asymptotic(x):
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 40):
        term = term * (2 * k - 1) ** 2 / (k * 8.0 * x)
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return total / np.sqrt(2.0 * np.pi * x)


def bessel_i0e(x):
    """Exponentially scaled ``exp(-|x|) I_0(x)``."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    flat = np.atleast_1d(ax).ravel()
    out = np.empty_like(flat)
    small = flat <= 30.0
    if np.any(small):
        out[small] = _i0_series(flat[small]) * np.exp(-flat[small])
    if np.any(~small):
        out[~small] = _i0e_asymptotic(flat[~small])
    return _scalar_or_array(out.reshape(np.shape(ax)), x)


def bessel_i0(x):
    """Modified Bessel function of the first kind of order zero."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    with np.errstate(over="ignore"):
        out = np.exp(ax) * bessel_i0e(ax)
    return _scalar_or_array(out, x)


def gaussian_q(x):
    """Standard normal tail probability ``Q(x) = 1 - Phi(x)``."""
    out = 0.5 * _sp.erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))
    return _scalar_or_array(out, x)


def _poisson_weights(lam, tol=1e-13):
    """Poisson(lam) weights up to the index where the tail bound drops below tol."""
    if lam == 0.0:
        return np.array([1.0])
    log_lam = math.log(lam)
    weights = []
    k = 0
    while True:
        w = math.exp(-lam + k * log_lam - math.lgamma(k + 1.0))
        weights.append(w)
        k += 1
        if k + 1 > lam:
            w_next = math.exp(-lam + k * log_lam - math.lgamma(k + 1.0))
            bound = w_next / (1.0 - lam / (k + 1.0))
            if bound < tol:
                break
        if k > 100000:
            raise NumericalError("marcum_q1: Poisson series did not terminate", {"lam": lam})
    return np.array(weights)


def _marcum_series(a, b, complement):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if np.any(a < 0) or np.any(b < 0) or np.any(np.isnan(a)) or np.any(np.isnan(b)):
        raise DomainError("marcum_q1: arguments must be non-negative")
    aa, bb = np.broadcast_arrays(a, b)
    out = np.empty(aa.shape)
    for lam_half_sq in np.unique(aa):
        lam = 0.5 * float(lam_half_sq) ** 2
        sel = aa == lam_half_sq
        y = 0.5 * bb[sel] ** 2
        w = _poisson_weights(lam)
        orders = np.arange(1, w.size + 1, dtype=np.float64)
        tail = _sp.gammainc if complement else _sp.gammaincc
        terms = tail(orders[:, None], y[None, :])
        out[sel] = np.clip(w @ terms, 0.0, 1.0)
    return out


def marcum_q1(a, b):
    """First-order Marcum Q function ``Q_1(a, b)``.

    Summed as a Poisson(a^2/2) mixture of chi-square tails; the series is
    cut once the remaining Poisson mass is bounded below 1e-13.
    """
    out = _marcum_series(a, b, complement=False)
    return _scalar_or_array(out, a, b)


def marcum_q1_complement(a, b):
    """``1 - Q_1(a, b)`` without cancellation for small ``b``."""
    out = _marcum_series(a, b, complement=True)
    return _scalar_or_array(out, a, b)


@dataclass(frozen=True)
class MellinContour:
    """Vertical line ``Re s = real_part`` truncated to ``|Im s| <= half_height``."""

    real_part: float
    half_height: float = 60.0
    node_count: int = 4096

    def validate(self, a, b):
        pole_bound = max(1.0 - a, 1.0 - b)
        if not self.real_part > pole_bound + 1e-9:
            raise ConfigError(
                f"contour real part {self.real_part} must exceed {pole_bound} "
                "(right of the Gamma poles)"
            )
        if abs(self.real_part - 1.0) < 1e-9:
            raise ConfigError("contour must not pass through the pole at s = 1")
        if not self.half_height > 0:
            raise ConfigError("contour half_height must be positive")
        if int(self.node_count) < 64:
            raise ConfigError("contour node_count must be at least 64")


def default_contour(a, b):
    return MellinContour(real_part=max(1.0 - a, 1.0 - b) + 1.0)


@lru_cache(maxsize=64)
def _mellin_log_transform(n, a, b, c, half_height, nodes):
    """Log of the n-fold product Mellin transform on the contour nodes (t >= 0)."""
    t = np.linspace(0.0, half_height, nodes + 1)
    s = c + 1j * t
    log_one = (
        ln_gamma(a + s - 1.0)
        + ln_gamma(b + s - 1.0)
        - math.lgamma(a)
        - math.lgamma(b)
        - (s - 1.0) * math.log(a * b)
    )
    log_m = n * log_one - np.log(1.0 - s)
    log_m.setflags(write=False)
    return t, log_m


def _mellin_cdf_term(n, a, b, c, half_height, nodes, log_x):
    """Trapezoidal value of ``(1/2 pi i) int M(s)^n x^(1-s)/(1-s) ds`` on Re s = c."""
    t, log_m = _mellin_log_transform(n, a, b, c, half_height, nodes)
    h = half_height / nodes
    w = np.full(t.shape, h)
    w[0] = 0.5 * h
    w[-1] = 0.5 * h
    s = c + 1j * t
    integrand = np.exp(log_m[None, :] + (1.0 - s)[None, :] * log_x[:, None])
    return (integrand.real @ w) / math.pi


def _mellin_cdf(n, a, b, c, half_height, nodes, log_x):
    term = _mellin_cdf_term(n, a, b, c, half_height, nodes, log_x)
    return term if c < 1.0 else 1.0 + term


def product_gg_cdf(n, params, x, contour=None, tol=1e-6, max_doublings=6):
    """CDF of the product of ``n`` independent Gamma-Gamma gains.

    Inverts the Mellin transform ``M(s)^n`` with
    ``M(s) = Gamma(a+s-1) Gamma(b+s-1) / (Gamma(a) Gamma(b) (ab)^(s-1))``
    by a trapezoidal rule along a vertical line. Points with ``x > 1`` are
    evaluated on the line mirrored about ``Re s = 1`` so the integrand
    decays in ``x`` on both sides. The node count is doubled until two
    successive values agree to ``tol``.
    """
    n = int(n)
    if n < 1:
        raise DomainError("product_gg_cdf: n must be >= 1")
    a, b = float(params.a), float(params.b)
    contour = contour or default_contour(a, b)
    contour.validate(a, b)
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise DomainError("product_gg_cdf: x must be non-negative")

    flat = np.atleast_1d(xa).ravel()
    out = np.zeros_like(flat)
    out[np.isinf(flat)] = 1.0
    finite = (flat > 0) & np.isfinite(flat)

    c = float(contour.real_part)
    pole_bound = max(1.0 - a, 1.0 - b)
    mirrored = 2.0 - c
    left = c if c < 1.0 else (mirrored if mirrored > pole_bound + 1e-9 else None)
    right = c if c > 1.0 else mirrored

    groups = []
    if left is None:
        groups.append((right, finite))
    else:
        groups.append((left, finite & (flat <= 1.0)))
        groups.append((right, finite & (flat > 1.0)))

    for line, sel in groups:
        if not np.any(sel):
            continue
        log_x = np.log(flat[sel])
        nodes = int(contour.node_count)
        prev = _mellin_cdf(n, a, b, line, float(contour.half_height), nodes, log_x)
        for _ in range(max_doublings):
            nodes *= 2
            cur = _mellin_cdf(n, a, b, line, float(contour.half_height), nodes, log_x)
            diff = float(np.max(np.abs(cur - prev)))
            prev = cur
            if diff <= tol:
                break
        else:
            raise NumericalError(
                "product_gg_cdf: contour refinement did not converge",
                {"n": n, "a": a, "b": b, "last_change": diff, "nodes": nodes},
            )
        out[sel] = prev

    out = np.clip(out, 0.0, 1.0).reshape(np.shape(xa))
    return _scalar_or_array(out, x)
