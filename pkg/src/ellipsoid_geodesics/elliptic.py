"""Carlson symmetric elliptic integrals, Legendre complete integrals and the
action of the geodesic flow on an ellipsoid of revolution.

The Carlson functions use the duplication theorem with the stopping
tolerances of the classic double-precision implementations, which gives
relative errors around 1e-15.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError

__all__ = [
    "carlson_rf",
    "carlson_rd",
    "carlson_rj",
    "carlson_rc",
    "legendre_K",
    "legendre_E",
    "legendre_Pi",
    "ellipk_m",
    "ellipe_m",
    "ellippi_m",
    "RevolutionParams",
    "revolution_action",
    "revolution_action_quadrature",
    "revolution_momentum_sq",
]


def _check_nonneg(*args):
    for a in args:
        if not (a >= 0.0) or not math.isfinite(a):
            raise DomainError(f"argument {a} must be finite and nonnegative")


def carlson_rf(x: float, y: float, z: float) -> float:
    """``R_F(x,y,z) = 1/2 int_0^inf dt / sqrt((t+x)(t+y)(t+z))``."""
    _check_nonneg(x, y, z)
    if (x == 0) + (y == 0) + (z == 0) > 1:
        raise DomainError("R_F allows at most one zero argument")
    while True:
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        ave = (x + y + z) / 3.0
        dx, dy, dz = (ave - x) / ave, (ave - y) / ave, (ave - z) / ave
        if max(abs(dx), abs(dy), abs(dz)) <= 0.0025:
            break
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0) / math.sqrt(ave)


def carlson_rd(x: float, y: float, z: float) -> float:
    """``R_D(x,y,z) = R_J(x,y,z,z)``."""
    _check_nonneg(x, y, z)
    if z == 0 or x + y == 0:
        raise DomainError("R_D needs z > 0 and x + y > 0")
    c1, c2, c3, c4 = 3.0 / 14.0, 1.0 / 6.0, 9.0 / 22.0, 3.0 / 26.0
    c5, c6 = 0.25 * c3, 1.5 * c4
    total, fac = 0.0, 1.0
    while True:
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        total += fac / (sz * (z + lam))
        fac *= 0.25
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        ave = 0.2 * (x + y + 3.0 * z)
        dx, dy, dz = (ave - x) / ave, (ave - y) / ave, (ave - z) / ave
        if max(abs(dx), abs(dy), abs(dz)) <= 0.0015:
            break
    ea = dx * dy
    eb = dz * dz
    ec = ea - eb
    ed = ea - 6.0 * eb
    ee = ed + ec + ec
    series = 1.0 + ed * (-c1 + c5 * ed - c6 * dz * ee) + dz * (c2 * ee + dz * (-c3 * ec + dz * c4 * ea))
    return 3.0 * total + fac * series / (ave * math.sqrt(ave))


def carlson_rc(x: float, y: float) -> float:
    """``R_C(x,y) = R_F(x,y,y)`` for ``y > 0``."""
    _check_nonneg(x)
    if not y > 0:
        raise DomainError("R_C needs y > 0 here")
    while True:
        lam = 2.0 * math.sqrt(x) * math.sqrt(y) + y
        x, y = 0.25 * (x + lam), 0.25 * (y + lam)
        ave = (x + y + y) / 3.0
        s = (y - ave) / ave
        if abs(s) <= 0.0012:
            break
    return (1.0 + s * s * (0.3 + s * (1.0 / 7.0 + s * (0.375 + s * 9.0 / 22.0)))) / math.sqrt(ave)


def carlson_rj(x: float, y: float, z: float, p: float) -> float:
    """``R_J(x,y,z,p) = 3/2 int_0^inf dt / ((t+p) sqrt((t+x)(t+y)(t+z)))`` for ``p > 0``."""
    _check_nonneg(x, y, z)
    if not p > 0 or not math.isfinite(p):
        raise DomainError("R_J is implemented for p > 0 only")
    if (x == 0) + (y == 0) + (z == 0) > 1:
        raise DomainError("R_J allows at most one zero among x, y, z")
    c1, c2, c3, c4 = 3.0 / 14.0, 1.0 / 3.0, 3.0 / 22.0, 3.0 / 26.0
    c5, c6, c7, c8 = 0.75 * c3, 1.5 * c4, 0.5 * c2, c3 + c3
    total, fac = 0.0, 1.0
    while True:
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        alpha = (p * (sx + sy + sz) + sx * sy * sz) ** 2
        beta = p * (p + lam) ** 2
        total += fac * carlson_rc(alpha, beta)
        fac *= 0.25
        x, y, z, p = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam), 0.25 * (p + lam)
        ave = 0.2 * (x + y + z + p + p)
        dx, dy, dz, dp = (ave - x) / ave, (ave - y) / ave, (ave - z) / ave, (ave - p) / ave
        if max(abs(dx), abs(dy), abs(dz), abs(dp)) <= 0.0015:
            break
    ea = dx * (dy + dz) + dy * dz
    eb = dx * dy * dz
    ec = dp * dp
    ed = ea - 3.0 * ec
    ee = eb + 2.0 * dp * (ea - ec)
    series = (1.0 + ed * (-c1 + c5 * ed - c6 * ee) + eb * (c7 + dp * (-c8 + dp * c4))
              + dp * ea * (c2 - dp * c3) - c2 * dp * ec)
    return 3.0 * total + fac * series / (ave * math.sqrt(ave))


# --- Legendre complete integrals (parameter m = k^2) ---------------------------

def _check_m(m: float) -> None:
    if not m < 1 or not math.isfinite(m):
        raise DomainError(f"parameter m = k^2 = {m} must be < 1")


def ellipk_m(m: float) -> float:
    _check_m(m)
    return carlson_rf(0.0, 1.0 - m, 1.0)


def ellipe_m(m: float) -> float:
    _check_m(m)
    return carlson_rf(0.0, 1.0 - m, 1.0) - m / 3.0 * carlson_rd(0.0, 1.0 - m, 1.0)


def ellippi_m(n: float, m: float) -> float:
    """``Pi(n|m) = int_0^{pi/2} dphi / ((1 - n sin^2) sqrt(1 - m sin^2))`` for ``n < 1``."""
    _check_m(m)
    if not n < 1:
        raise DomainError(f"characteristic n = {n} must be < 1")
    rf = carlson_rf(0.0, 1.0 - m, 1.0)
    if n == 0:
        return rf
    return rf + n / 3.0 * carlson_rj(0.0, 1.0 - m, 1.0, 1.0 - n)


def legendre_K(k: float) -> float:
    return ellipk_m(k * k)


def legendre_E(k: float) -> float:
    return ellipe_m(k * k)


def legendre_Pi(n: float, k: float) -> float:
    return ellippi_m(n, k * k)


# --- ellipsoid of revolution -----------------------------------------------------

@dataclass(frozen=True)
class RevolutionParams:
    """Energy ``h``, angular momentum ``j`` and the two distinct squared axes.

    ``alpha1`` is the repeated axis and ``alpha0`` the axis of symmetry, so
    ``rho = alpha0 / alpha1`` is below one for an axis shorter than the
    equator and above one otherwise.
    """

    h: float
    j: float
    alpha0: float
    alpha1: float

    def __post_init__(self):
        if not (self.h > 0 and self.alpha0 > 0 and self.alpha1 > 0):
            raise DomainError("h, alpha0 and alpha1 must be positive")
        if self.alpha0 == self.alpha1:
            raise DomainError("rho = 1 is the sphere; the band integral degenerates")

    @classmethod
    def from_jhat(cls, h: float, jhat: float, alpha0: float, alpha1: float) -> "RevolutionParams":
        return cls(h, jhat * math.sqrt(2 * h * alpha1), alpha0, alpha1)

    @property
    def rho(self) -> float:
        return self.alpha0 / self.alpha1

    @property
    def jhat(self) -> float:
        return self.j / math.sqrt(2 * self.h * self.alpha1)

    @property
    def scale(self) -> float:
        """Prefactor turning the dimensionless band integral into ``I_l``."""
        return 2.0 / math.pi * math.sqrt(2 * self.h * self.alpha1)


def _band_status(params: RevolutionParams) -> float | None:
    jh = params.jhat
    if abs(jh) > 1.0 + 1e-14:
        raise DomainError(f"|jhat| = {abs(jh)} > 1: no real band")
    if abs(jh) >= 1.0 - 1e-14:
        return 0.0
    return None


def revolution_action(params: RevolutionParams) -> float:
    """Closed form ``I_l = (2/pi) sqrt(2 h alpha1) (U E(m) - rho jhat^2 / U Pi(n|m))``.

    Here ``U^2 = 1 - jhat^2 (1 - rho)``, ``m = 1 - rho/U^2`` and
    ``n = m / (1 - rho) = (1 - jhat^2)/U^2``.  For ``rho > 1`` the parameter
    ``m`` is negative and the same real formula applies.
    """
    collapsed = _band_status(params)
    if collapsed is not None:
        return collapsed
    rho, jh = params.rho, params.jhat
    j2 = jh * jh
    u2 = 1.0 - j2 * (1.0 - rho)
    u = math.sqrt(u2)
    m = (1.0 - rho) * (1.0 - j2) / u2
    value = u * ellipe_m(m)
    if abs(jh) >= 1e-12:
        n = (1.0 - j2) / u2
        value -= rho * j2 / u * ellippi_m(n, m)
    return params.scale * value


def band_integrand(rho: float, jhat: float, u):
    """Integrand of the band integral after ``x = x* sin u`` on ``[0, pi/2]``.

    The band integral is ``int_0^{x*} sqrt((x*^2 - x^2)(rho + (1 - rho) x^2))
    / (1 - x^2) dx`` with ``x* = sqrt(1 - jhat^2)``; the substitution removes
    the square-root endpoint singularity.
    """
    xs2 = 1.0 - jhat * jhat
    s2 = np.sin(u) ** 2
    c2 = np.cos(u) ** 2
    return xs2 * c2 * np.sqrt(rho + (1.0 - rho) * xs2 * s2) / (1.0 - xs2 * s2)


def revolution_action_quadrature(params: RevolutionParams) -> float:
    """Direct band quadrature of ``(1/2 pi) oint p_s ds``, used as an oracle."""
    collapsed = _band_status(params)
    if collapsed is not None:
        return collapsed
    rho, jh = params.rho, params.jhat
    value, _ = integrate.quad(lambda u: band_integrand(rho, jh, u), 0.0, 0.5 * math.pi,
                              epsabs=1e-14, epsrel=1e-13, limit=200)
    return params.scale * value


def revolution_momentum_sq(params: RevolutionParams, s):
    """``p_s^2`` on the meridian coordinate ``s`` with ``s^2 < alpha0``."""
    a0, a1, h, j = params.alpha0, params.alpha1, params.h, params.j
    s = np.asarray(s, dtype=float)
    return (2 * h - a0 * j * j / (a1 * (a0 - s * s))) * (a0 * a0 + (a1 - a0) * s * s) / (a0 * (a0 - s * s))
