import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from ellipsoid_geodesics.elliptic import (
    RevolutionParams,
    carlson_rc,
    carlson_rd,
    carlson_rf,
    carlson_rj,
    legendre_E,
    legendre_K,
    legendre_Pi,
    revolution_action,
    revolution_action_quadrature,
    revolution_momentum_sq,
)
from ellipsoid_geodesics.errors import DomainError

pos = st.floats(min_value=1e-3, max_value=1e3)


def test_carlson_normalizations():
    assert carlson_rf(1, 1, 1) == 1.0
    assert carlson_rj(4, 4, 4, 4) == pytest.approx(1 / 8, rel=1e-15)
    assert carlson_rd(2, 2, 2) == pytest.approx(2 ** -1.5, rel=1e-15)
    assert carlson_rc(1, 1) == 1.0


def test_rf_against_defining_integral():
    # t = s^2 removes the endpoint singularity of the defining integral.
    f = lambda s: 1.0 / math.sqrt((s * s + 1.0) * (s * s + 1.0))
    oracle = sum(integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-13)[0] for lo, hi in ((0, 1), (1, np.inf)))
    assert carlson_rf(0, 1, 1) == pytest.approx(oracle, rel=1e-12)
    assert carlson_rf(0, 1, 1) == pytest.approx(math.pi / 2, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(x=pos, y=pos, z=pos, p=pos)
def test_carlson_against_scipy(x, y, z, p):
    assert carlson_rf(x, y, z) == pytest.approx(special.elliprf(x, y, z), rel=1e-14)
    assert carlson_rd(x, y, z) == pytest.approx(special.elliprd(x, y, z), rel=1e-14)
    assert carlson_rj(x, y, z, p) == pytest.approx(special.elliprj(x, y, z, p), rel=1e-13)


def test_carlson_domain():
    with pytest.raises(DomainError):
        carlson_rf(-1, 1, 1)
    with pytest.raises(DomainError):
        carlson_rf(0, 0, 1)


def test_legendre_degenerate_modulus():
    assert legendre_E(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert legendre_Pi(0.0, 0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert legendre_Pi(0.0, 0.6) == pytest.approx(legendre_K(0.6), rel=1e-13)


def test_legendre_E_against_quadrature():
    k = math.sqrt(0.5)
    oracle, _ = integrate.quad(lambda t: math.sqrt(1 - k * k * math.sin(t) ** 2), 0, math.pi / 2,
                               epsabs=1e-15, epsrel=1e-13)
    assert legendre_E(k) == pytest.approx(oracle, rel=1e-12)


@pytest.mark.parametrize("n,k", [(0.3, 0.5), (-2.0, 0.9), (0.95, 0.1)])
def test_legendre_Pi_against_quadrature(n, k):
    f = lambda t: 1 / ((1 - n * math.sin(t) ** 2) * math.sqrt(1 - k * k * math.sin(t) ** 2))
    oracle, _ = integrate.quad(f, 0, math.pi / 2, epsabs=1e-15, epsrel=1e-13)
    assert legendre_Pi(n, k) == pytest.approx(oracle, rel=1e-12)


def test_legendre_domain():
    with pytest.raises(DomainError):
        legendre_E(1.0)
    with pytest.raises(DomainError):
        legendre_Pi(1.0, 0.3)


def test_revolution_band_collapse():
    for jh in (1.0, -1.0):
        for a0 in (1.0, 4.0):
            assert revolution_action(RevolutionParams.from_jhat(1.0, jh, a0, 2.0)) == 0.0
    with pytest.raises(DomainError):
        revolution_action(RevolutionParams.from_jhat(1.0, 1.1, 1.0, 2.0))


def test_revolution_zero_momentum_value():
    params = RevolutionParams(1.0, 0.0, 1.0, 2.0)
    expected = 2 / math.pi * math.sqrt(2 * 1.0 * 2.0) * legendre_E(math.sqrt(0.5))
    assert revolution_action(params) == pytest.approx(expected, rel=1e-14)
    assert revolution_action_quadrature(params) == pytest.approx(expected, rel=1e-12)


def test_revolution_value_above_unit_ratio():
    params = RevolutionParams.from_jhat(1.0, 0.3, 4.0, 2.0)
    assert revolution_action(params) == pytest.approx(revolution_action_quadrature(params), abs=1e-9)


@pytest.mark.parametrize("alpha0", [1.0, 4.0])
def test_revolution_grid_both_signs(alpha0):
    for jh in np.linspace(-0.95, 0.95, 21):
        params = RevolutionParams.from_jhat(1.0, jh, alpha0, 2.0)
        assert abs(revolution_action(params) - revolution_action_quadrature(params)) <= 1e-9


@pytest.mark.parametrize("alpha0", [1.0, 4.0])
def test_revolution_monotone_in_abs_jhat(alpha0):
    values = [revolution_action(RevolutionParams.from_jhat(1.0, jh, alpha0, 2.0)) for jh in np.linspace(0, 0.999, 200)]
    assert np.all(np.diff(values) < 0)


def test_revolution_against_momentum_integral():
    # (2/pi) int p_s ds over the band s^2 < s*^2, independent of the band substitution.
    params = RevolutionParams.from_jhat(1.0, 0.4, 1.0, 2.0)
    a0 = params.alpha0
    s_star = math.sqrt(a0 * (1 - params.jhat ** 2))
    val, _ = integrate.quad(lambda s: math.sqrt(max(revolution_momentum_sq(params, s), 0.0)),
                            -s_star, s_star, epsabs=1e-13, epsrel=1e-12, limit=200)
    assert revolution_action(params) == pytest.approx(val / math.pi, rel=1e-9)


def test_sphere_rejected():
    with pytest.raises(DomainError):
        RevolutionParams(1.0, 0.0, 2.0, 2.0)
