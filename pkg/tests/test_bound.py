from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from fsoarq.bound import BoundConfig, adaptive_gk, phi_upper_bound, y_cdf_upper_bound
from fsoarq.channels import DEFAULT_GAMMA_GAMMA, DEFAULT_RICIAN, Rayleigh, gamma_gamma_pdf, rician_amplitude_pdf
from fsoarq.clt import RoundParams, phi_clt
from fsoarq.exceptions import DomainError, NumericalError, UnsupportedConfigurationError

GG = DEFAULT_GAMMA_GAMMA


@pytest.mark.parametrize(
    "func,lo,hi,ref",
    [
        (np.exp, 0.0, 1.0, math.e - 1.0),
        (lambda x: 1.0 / (1.0 + x * x), 0.0, 50.0, math.atan(50.0)),
        (np.sqrt, 0.0, 4.0, 16.0 / 3.0),
        (lambda x: np.abs(x - 0.3), 0.0, 1.0, 0.29),
    ],
)
def test_adaptive_gk_known_integrals(func, lo, hi, ref):
    val, err = adaptive_gk(func, lo, hi, abs_tol=1e-10, rel_tol=0.0)
    assert val == pytest.approx(ref, abs=1e-9)
    assert err <= 1e-10


def test_adaptive_gk_breakpoints_and_budget():
    val, _ = adaptive_gk(lambda x: (x > 0.3).astype(float), 0.0, 1.0, breakpoints=(0.3,))
    assert val == pytest.approx(0.7, abs=1e-12)
    with pytest.raises(NumericalError):
        adaptive_gk(lambda x: np.sin(1.0 / x), 1e-9, 1.0, abs_tol=1e-14, max_intervals=20)


def _fso_only_n1(p, rate):
    """Pr(log(1 + p G) < rate) by quadrature of the Gamma-Gamma density."""
    x = math.expm1(rate) / p
    return integrate.quad(lambda t: float(gamma_gamma_pdf(GG, max(t, 1e-300))), 0, x, epsabs=1e-13, limit=200)[0]


def test_y_cdf_is_exact_for_single_realization():
    for p, rate in ((2.0, 1.0), (10.0, 2.0), (20.0, 3.0)):
        assert y_cdf_upper_bound(GG, p, 1, rate) == pytest.approx(_fso_only_n1(p, rate), abs=1e-6)
    assert y_cdf_upper_bound(GG, 5.0, 2, 0.0) == 0.0


def _phi_exact_n1(rf, rate, p_rf, p_fso):
    """Exact single-realization failure probability by nested quadrature."""
    r = math.expm1(rate) / p_rf

    def inner(g):
        return _fso_only_n1(p_fso, rate - math.log1p(p_rf * g)) if g < r else 0.0

    if isinstance(rf, Rayleigh):
        return integrate.quad(lambda g: math.exp(-g) * inner(g), 0, r, limit=200, epsabs=1e-11)[0]
    return integrate.quad(lambda u: float(rician_amplitude_pdf(rf, u)) * inner(u * u), 0, math.sqrt(r), limit=200, epsabs=1e-11)[0]


@pytest.mark.parametrize("rf", [Rayleigh(), DEFAULT_RICIAN])
@pytest.mark.parametrize("rate,p", [(1.0, 2.0), (2.0, 5.0), (3.0, 20.0)])
def test_bound_is_tight_for_single_realization(rf, rate, p):
    got = phi_upper_bound(GG, rf, RoundParams(rate, p, p, 1))
    assert got == pytest.approx(_phi_exact_n1(rf, rate, p, p), abs=2e-6)


def test_bound_grows_looser_with_n_but_stays_a_probability():
    vals = [phi_upper_bound(GG, Rayleigh(), RoundParams(2.0, 5.0, 5.0, n)) for n in (1, 2, 3)]
    assert all(0.0 <= v <= 1.0 for v in vals)


def test_bound_dominates_clt_at_moderate_n():
    rp = RoundParams(2.0, 10.0, 10.0, 3)
    assert phi_upper_bound(GG, Rayleigh(), rp) >= phi_clt(GG, Rayleigh(), rp, exact_q=True) - 0.02


def test_bound_guards():
    with pytest.raises(UnsupportedConfigurationError):
        phi_upper_bound(GG, Rayleigh(), RoundParams(2.0, 1.0, 1.0, 6))
    phi_upper_bound(GG, Rayleigh(), RoundParams(2.0, 1.0, 1.0, 6), BoundConfig(max_n=6))
    with pytest.raises(DomainError):
        phi_upper_bound(GG, Rayleigh(), RoundParams(2.0, 1.0, 0.0, 1))
    with pytest.raises(DomainError):
        BoundConfig(max_n=0)
    with pytest.raises(DomainError):
        y_cdf_upper_bound(GG, 0.0, 1, 1.0)


def test_fso_only_bound_uses_product_cdf():
    rp = RoundParams(2.0, 0.0, 10.0, 1)
    assert phi_upper_bound(GG, Rayleigh(), rp) == pytest.approx(_fso_only_n1(10.0, 2.0), abs=1e-6)


def test_tiny_power_gives_certain_failure():
    for rf in (Rayleigh(), DEFAULT_RICIAN):
        assert phi_upper_bound(GG, rf, RoundParams(2.0, 1e-5, 1e-5, 1)) == pytest.approx(1.0, abs=1e-9)
