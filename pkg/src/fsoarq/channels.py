"""FSO and RF channel models: densities, CDFs and samplers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .exceptions import DomainError
from .specfun import bessel_i0e, bessel_ke, ln_gamma, marcum_q1_complement

__all__ = [
    "GammaGammaParams",
    "RicianParams",
    "Rician",
    "Rayleigh",
    "RfChannelModel",
    "RngStream",
    "DEFAULT_GAMMA_GAMMA",
    "DEFAULT_RICIAN",
    "gamma_gamma_pdf",
    "gamma_gamma_logpdf",
    "sample_gamma_gamma",
    "rf_gain_pdf",
    "rf_gain_cdf",
    "rician_amplitude_pdf",
    "rician_amplitude_cdf",
    "sample_rf_gain",
]


@dataclass(frozen=True)
class GammaGammaParams:
    """Shape parameters of the unit-mean Gamma-Gamma turbulence gain."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Gamma-Gamma shapes must be positive, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class RicianParams:
    """Rician amplitude parameters: line-of-sight ``nu`` and scatter ``omega``.

    The amplitude density is the standard one,
    ``x / omega^2 * exp(-(x^2 + nu^2) / (2 omega^2)) * I0(x nu / omega^2)``,
    so the gain has mean ``nu^2 + 2 omega^2``.
    """

    nu: float
    omega: float

    def __post_init__(self):
        if not (self.nu >= 0 and self.omega > 0):
            raise DomainError(f"Rician needs nu >= 0 and omega > 0, got nu={self.nu}, omega={self.omega}")


Rician = RicianParams


@dataclass(frozen=True)
class Rayleigh:
    """Rayleigh RF link: unit-mean exponential power gain."""


RfChannelModel = Union[Rayleigh, RicianParams]

# Rytov variance 1 turbulence and the unit-mean Rician link used by the bundled scenarios
DEFAULT_GAMMA_GAMMA = GammaGammaParams(a=4.3939, b=2.5636)
DEFAULT_RICIAN = RicianParams(nu=0.0995, omega=0.7036)


@dataclass
class RngStream:
    """Reproducible random stream keyed by ``(root_seed, stream_id)``.

    Backed by numpy's counter-based Philox generator; two streams with the
    same key produce identical sequences, distinct keys are independent.
    """

    root_seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(default=None, init=False, repr=False, compare=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(
                entropy=int(self.root_seed) & 0xFFFFFFFFFFFFFFFF,
                spawn_key=(int(self.stream_id) & 0xFFFFFFFFFFFFFFFF,),
            )
            self._gen = np.random.Generator(np.random.Philox(seq))
        return self._gen


def _check_rf(model):
    if not isinstance(model, (Rayleigh, RicianParams)):
        raise TypeError(f"unknown RF channel model {model!r}")


def gamma_gamma_logpdf(params: GammaGammaParams, x):
    xa = np.asarray(x, dtype=np.float64)
    if np.any(~(xa > 0)):
        raise DomainError("gamma_gamma_pdf: x must be positive")
    a, b = params.a, params.b
    half = 0.5 * (a + b)
    z = 2.0 * np.sqrt(a * b * xa)
    out = (
        math.log(2.0)
        + half * math.log(a * b)
        - float(ln_gamma(a))
        - float(ln_gamma(b))
        + (half - 1.0) * np.log(xa)
        + np.log(bessel_ke(a - b, z))
        - z
    )
    return out[()] if np.ndim(x) == 0 else out


def gamma_gamma_pdf(params: GammaGammaParams, x):
    """Gamma-Gamma density
    ``2 (ab)^((a+b)/2) / (Gamma(a) Gamma(b)) x^((a+b)/2 - 1) K_(a-b)(2 sqrt(a b x))``.
    """
    with np.errstate(under="ignore"):
        return np.exp(gamma_gamma_logpdf(params, x))


def sample_gamma_gamma(params: GammaGammaParams, rng: RngStream, size=None):
    """Draw Gamma-Gamma gains as the product of two unit-mean Gamma variates."""
    gen = rng.generator
    x = gen.standard_gamma(params.a, size) / params.a
    y = gen.standard_gamma(params.b, size) / params.b
    return x * y


def rician_amplitude_pdf(params: RicianParams, x):
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 0):
        raise DomainError("rician_amplitude_pdf: x must be non-negative")
    w2 = params.omega ** 2
    arg = xa * params.nu / w2
    # exp(-(x^2+nu^2)/2w^2) I0(x nu/w^2) = exp(-(x-nu)^2/2w^2) i0e(x nu/w^2)
    out = xa / w2 * np.exp(-((xa - params.nu) ** 2) / (2.0 * w2)) * bessel_i0e(arg)
    return out[()] if np.ndim(x) == 0 else out


def rician_amplitude_cdf(params: RicianParams, x):
    """Rician amplitude CDF ``1 - Q_1(nu/omega, x/omega)``."""
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 0):
        raise DomainError("rician_amplitude_cdf: x must be non-negative")
    out = marcum_q1_complement(params.nu / params.omega, np.where(np.isinf(xa), 1e150, xa) / params.omega)
    out = np.where(np.isinf(xa), 1.0, out)
    return out[()] if np.ndim(x) == 0 else out


def rf_gain_pdf(model: RfChannelModel, x):
    """Density of the RF power gain."""
    _check_rf(model)
    xa = np.asarray(x, dtype=np.float64)
    if np.any(~(xa > 0)):
        raise DomainError("rf_gain_pdf: x must be positive")
    if isinstance(model, Rayleigh):
        out = np.exp(-xa)
    else:
        root = np.sqrt(xa)
        out = rician_amplitude_pdf(model, root) / (2.0 * root)
    return out[()] if np.ndim(x) == 0 else out


def rf_gain_cdf(model: RfChannelModel, x):
    _check_rf(model)
    xa = np.maximum(np.asarray(x, dtype=np.float64), 0.0)
    if isinstance(model, Rayleigh):
        out = -np.expm1(-xa)
    else:
        out = rician_amplitude_cdf(model, np.sqrt(xa))
    return out[()] if np.ndim(x) == 0 else out


def sample_rf_gain(model: RfChannelModel, rng: RngStream, size=None):
    """Draw RF power gains; Rician uses ``|nu + omega (Z1 + i Z2)|^2``."""
    _check_rf(model)
    gen = rng.generator
    if isinstance(model, Rayleigh):
        return gen.standard_exponential(size)
    z1 = gen.standard_normal(size)
    z2 = gen.standard_normal(size)
    return (model.nu + model.omega * z1) ** 2 + (model.omega * z2) ** 2
