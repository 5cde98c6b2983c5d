from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from fsoarq.channels import DEFAULT_GAMMA_GAMMA, GammaGammaParams, gamma_gamma_pdf
from fsoarq.exceptions import ConfigError, DomainError
from fsoarq.specfun import (
    MellinContour,
    bessel_i0,
    bessel_i0e,
    bessel_k,
    bessel_ke,
    default_contour,
    gaussian_q,
    ln_gamma,
    marcum_q1,
    marcum_q1_complement,
    product_gg_cdf,
)


@pytest.mark.parametrize("x", [1e-6, 0.3, 1.0, 2.5636, 4.3939, 17.2, 150.0, 1e4])
def test_ln_gamma_real_matches_mpmath(x):
    assert ln_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("z", [0.5 + 3j, 2.1 - 40j, 3.4 + 60j, 10 + 0.1j])
def test_ln_gamma_complex_matches_mpmath_mod_2pi(z):
    got = np.exp(ln_gamma(z))
    ref = complex(mpmath.gamma(z))
    assert abs(got - ref) <= 1e-11 * abs(ref)


def test_ln_gamma_rejects_non_positive():
    with pytest.raises(DomainError):
        ln_gamma(0.0)
    with pytest.raises(DomainError):
        ln_gamma(-1.5 + 1j)


@pytest.mark.parametrize("order", [0.0, 0.5, 1.8303, 3.3])
@pytest.mark.parametrize("x", [1e-3, 0.2, 1.0, 7.5, 29.9, 30.1, 200.0])
def test_bessel_k_matches_mpmath(order, x):
    ref = float(mpmath.besselk(order, x))
    assert bessel_k(order, x) == pytest.approx(ref, rel=1e-10)
    assert bessel_ke(order, x) == pytest.approx(ref * math.exp(x), rel=1e-10)


def test_bessel_k_rejects_non_positive_argument():
    with pytest.raises(DomainError):
        bessel_k(1.0, 0.0)


@given(st.floats(0.0, 40.0), st.floats(1e-3, 60.0))
def test_bessel_k_even_in_order(order, x):
    assert bessel_ke(order, x) == pytest.approx(bessel_ke(-order, x), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.4, 5.0, 29.0, 31.0, 700.0])
def test_bessel_i0_matches_mpmath(x):
    ref = float(mpmath.besseli(0, x))
    assert bessel_i0e(x) == pytest.approx(ref * math.exp(-x), rel=1e-12)
    if x < 700:
        assert bessel_i0(x) == pytest.approx(ref, rel=1e-12)


def test_gaussian_q_values():
    assert gaussian_q(0.0) == 0.5
    assert 0.0 < gaussian_q(37.0) < 1e-290
    assert gaussian_q(-3.0) == pytest.approx(stats.norm.cdf(3.0), rel=1e-14)


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (0.1414, 0.5), (2.0, 2.0), (5.0, 1.0), (3.0, 9.0)])
def test_marcum_matches_bessel_series(a, b):
    a_, b_ = mpmath.mpf(a), mpmath.mpf(b)
    series = mpmath.nsum(lambda k: (a_ / b_) ** k * mpmath.besseli(k, a_ * b_), [0, mpmath.inf])
    ref = float(mpmath.exp(-(a_ * a_ + b_ * b_) / 2) * series)
    assert marcum_q1(a, b) == pytest.approx(ref, rel=1e-10, abs=1e-13)
    if a > 0:
        assert marcum_q1(a, b) == pytest.approx(stats.ncx2.sf(b * b, 2, a * a), rel=1e-8, abs=1e-13)


@given(st.floats(0.0, 8.0), st.floats(0.0, 12.0))
def test_marcum_complement_sums_to_one(a, b):
    assert marcum_q1(a, b) + marcum_q1_complement(a, b) == pytest.approx(1.0, abs=1e-12)


def _gg_cdf_quad(params, x):
    val, _ = integrate.quad(lambda t: float(gamma_gamma_pdf(params, t)), 0.0, x, epsabs=1e-13, epsrel=1e-11, limit=400)
    return val


@pytest.mark.parametrize("x", [0.01, 0.3, 1.0, 2.0, 6.0])
def test_product_cdf_single_factor_matches_quadrature(x):
    got = product_gg_cdf(1, DEFAULT_GAMMA_GAMMA, x)
    assert got == pytest.approx(_gg_cdf_quad(DEFAULT_GAMMA_GAMMA, x), abs=1e-6)


@pytest.mark.parametrize("x", [0.05, 0.8, 3.0])
def test_product_cdf_two_factors_matches_meijer_g(x):
    a, b = 2.7, 1.6
    # CDF of a product of two unit-mean Gamma-Gamma gains as a Meijer G function
    z = (a * b) ** 2 * x
    ref = float(mpmath.meijerg([[1], []], [[a, b, a, b], [0]], z)) / (mpmath.gamma(a) * mpmath.gamma(b)) ** 2
    assert product_gg_cdf(2, GammaGammaParams(a, b), x) == pytest.approx(ref, abs=1e-6)


def test_product_cdf_limits_and_vectorization():
    xs = np.array([0.0, 1e-8, 1.0, 1e8, np.inf])
    out = product_gg_cdf(2, DEFAULT_GAMMA_GAMMA, xs)
    assert out.shape == xs.shape
    assert out[0] == 0.0 and out[-1] == 1.0
    assert np.all(np.diff(out) >= -1e-9)


@given(st.floats(1e-3, 50.0), st.floats(1e-3, 50.0))
def test_product_cdf_monotone(x1, x2):
    lo, hi = sorted((x1, x2))
    assert product_gg_cdf(3, DEFAULT_GAMMA_GAMMA, lo) <= product_gg_cdf(3, DEFAULT_GAMMA_GAMMA, hi) + 1e-8


def test_contour_validation():
    a, b = DEFAULT_GAMMA_GAMMA.a, DEFAULT_GAMMA_GAMMA.b
    default_contour(a, b).validate(a, b)
    with pytest.raises(ConfigError):
        MellinContour(1.0 - b).validate(a, b)
    with pytest.raises(ConfigError):
        MellinContour(1.0).validate(a, b)
    with pytest.raises(ConfigError):
        MellinContour(0.5, node_count=8).validate(a, b)
    with pytest.raises(ConfigError):
        product_gg_cdf(1, DEFAULT_GAMMA_GAMMA, 1.0, MellinContour(-3.0))


def test_custom_contour_agrees_with_default():
    c = MellinContour(0.3, half_height=80.0, node_count=8192)
    assert product_gg_cdf(2, DEFAULT_GAMMA_GAMMA, 0.7, c) == pytest.approx(
        product_gg_cdf(2, DEFAULT_GAMMA_GAMMA, 0.7), abs=1e-6
    )
