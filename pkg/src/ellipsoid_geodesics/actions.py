"""Natural actions of the equal-middle-axes ellipsoid and their derivatives.

``I_1 = j`` and ``I_2``, ``I_3`` are band integrals of the separated momentum

    p(z)^2 = -Q~(z) / (4 A(z)),    A(z) = (a0 - z)(a1 - z)^2 (a3 - z),

over ``[a0, r1]`` and ``[r2, a3]``, each with multiplier 2:
``I_k = (2/pi) int_band |p| dz``.  When ``j`` is small one root sits within
``delta ~ j^2`` of the pole at ``a1`` and the integrand develops a spike of
width ``sqrt(delta)`` (after the endpoint substitution) at that end of the
band.  The quadrature therefore uses Gauss-Legendre panels graded
geometrically toward both band ends, down to well below the spike width.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .errors import PoleCollision, ZeroMomentum
from .geometry import EllipsoidSpec, Symmetry
from .separation import QTildeCubic, qtilde

POLE_GUARD = 1e-6
J_FLOOR = 1e-7
QUAD_RTOL = 1e-11


@lru_cache(maxsize=None)
def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return x, w


@lru_cache(maxsize=256)
def _graded_rule(t_lo: float, t_hi: float, order: int, ratio: float = 4.0):
    """Nodes and weights on ``[0, pi]`` graded toward 0 down to ``t_lo`` and toward pi down to ``t_hi``."""
    half = 0.5 * math.pi

    def breaks(t_min):
        pts = [half]
        while pts[-1] / ratio > t_min:
            pts.append(pts[-1] / ratio)
        pts.append(0.0)
        return pts[::-1]

    left = breaks(t_lo)
    right = [math.pi - b for b in breaks(t_hi)][::-1]
    edges = np.array(left[:-1] + right)
    x, w = _gauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


def _grading(delta: float, length: float) -> float:
    """Smallest panel needed at an end whose pole lies ``delta`` beyond it."""
    if length <= 0:
        return 1e-2
    if delta <= 0:
        return 1e-2
    return min(1e-2, 1e-2 * math.sqrt(delta / length))


@dataclass(frozen=True)
class _Band:
    length: float
    da: np.ndarray      # distance from the lower end
    db: np.ndarray      # distance from the upper end
    weights: np.ndarray


def _band(length: float, t_lo: float, t_hi: float, order: int) -> _Band:
    v, w = _graded_rule(t_lo, t_hi, order)
    s = np.sin(0.5 * v) ** 2
    c = np.cos(0.5 * v) ** 2
    return _Band(length, length * s, length * c, w)


def _dq(alphas, qt: QTildeCubic, z, side):
    """Partial derivatives of ``Q~`` with respect to ``(j, g, h)``; ``side`` gives ``a1 - z``."""
    a0, a1, _, a3 = alphas
    c = (a3 - a1) * (a1 - a0)
    e = (a0 * a3 - a1 * a1) / a1 ** 2
    return (2 * qt.j * z * (-c / a1 + e * side),
            z * c * side / a1,
            2 * z * side * side)


def _band2_integrands(alphas, qt: QTildeCubic, band: _Band):
    """Value and ``(j, g, h)`` derivative integrands on ``[a0, r1]`` in the graded variable."""
    a0, a1, _, a3 = alphas
    d1, d2 = qt.delta1, qt.delta2
    db = band.db
    z = a0 + band.da
    dist = d1 + db                      # a1 - z > 0
    p2 = np.sqrt(2 * qt.h * z * (d1 + d2 + db) / (4 * ((a3 - a1) + d1 + db)))
    value = p2 * db / dist
    dq = _dq(alphas, qt, z, dist)
    denom = 8 * ((a3 - a1) + d1 + db) * dist * p2
    return value, [d / denom for d in dq]


def _band3_integrands(alphas, qt: QTildeCubic, band: _Band):
    a0, a1, _, a3 = alphas
    d1, d2 = qt.delta1, qt.delta2
    da = band.da
    z = qt.r2 + da
    dist = d2 + da                      # z - a1 > 0
    p3 = np.sqrt(2 * qt.h * z * (d1 + d2 + da) / (4 * ((a1 - a0) + d2 + da)))
    value = p3 * da / dist
    dq = _dq(alphas, qt, z, -dist)
    denom = 8 * ((a1 - a0) + d2 + da) * dist * p3
    return value, [d / denom for d in dq]


def _integrate_band(alphas, qt: QTildeCubic, which: int, order: int):
    a0, a1, _, a3 = alphas
    if which == 2:
        length = qt.r1 - a0
        t_lo, t_hi = _grading(0.0, length), _grading(qt.delta1, length)
        fn = _band2_integrands
    else:
        length = a3 - qt.r2
        t_lo, t_hi = _grading(qt.delta2, length), _grading(0.0, length)
        fn = _band3_integrands
    if length <= 0:
        return 0.0, None
    band = _band(length, _round_scale(t_lo), _round_scale(t_hi), order)
    value, derivs = fn(alphas, qt, band)
    if np.any(value < 0) or not np.all(np.isfinite(value)):
        raise ArithmeticError("band integrand changed sign or is not finite")
    k = 2.0 / math.pi
    return k * float(band.weights @ value), np.array([k * float(band.weights @ d) for d in derivs])


def _round_scale(t: float) -> float:
    # Quantize to powers of two so the cached graded rules are reused.
    return 2.0 ** math.floor(math.log2(t))


def _checked_band(alphas, qt, which):
    lo = _integrate_band(alphas, qt, which, 20)
    hi = _integrate_band(alphas, qt, which, 30)
    if lo[1] is None:
        return 0.0, None
    scale = max(abs(hi[0]), 1e-300)
    if abs(hi[0] - lo[0]) > QUAD_RTOL * max(scale, 1.0):
        raise ArithmeticError(f"band quadrature did not converge ({abs(hi[0] - lo[0]):.2e})")
    return hi


def _level(spec: EllipsoidSpec, h: float, g: float, j: float) -> QTildeCubic:
    spec.require(Symmetry.EQUAL_MIDDLE, what="actions")
    if j == 0.0 and g == 0.0:
        raise PoleCollision("(j, g) = (0, 0) is the focus-focus value; actions are not smooth there")
    qt = qtilde(spec, h, g, j)
    if j == 0.0 and min(qt.delta1, qt.delta2) == 0.0 and max(qt.delta1, qt.delta2) < POLE_GUARD:
        raise PoleCollision(f"both roots within {POLE_GUARD:g} of alpha_1 at j = 0")
    if j != 0.0 and abs(j) < J_FLOOR and abs(g) < POLE_GUARD:
        raise PoleCollision(f"|j| = {abs(j):.1e} below {J_FLOOR:g} near g = 0")
    return qt


def action_I2(spec: EllipsoidSpec, h: float, g: float, j: float) -> float:
    return _checked_band(spec.alphas, _level(spec, h, g, j), 2)[0]


def action_I3(spec: EllipsoidSpec, h: float, g: float, j: float) -> float:
    return _checked_band(spec.alphas, _level(spec, h, g, j), 3)[0]


@dataclass(frozen=True)
class ActionFrame:
    """Actions ``(I1, I2, I3)`` and their Jacobian; columns are ``d/dj, d/dg, d/dh``."""

    level: tuple[float, float, float]
    I: np.ndarray
    dI_djgh: np.ndarray
    side: str


def action_frame(spec: EllipsoidSpec, h: float, g: float, j: float) -> ActionFrame:
    qt = _level(spec, h, g, j)
    i2, d2 = _checked_band(spec.alphas, qt, 2)
    i3, d3 = _checked_band(spec.alphas, qt, 3)
    jac = np.zeros((3, 3))
    jac[0, 0] = 1.0
    jac[1] = d2 if d2 is not None else 0.0
    jac[2] = d3 if d3 is not None else 0.0
    side = "j_pos" if j >= 0 else "j_neg"
    return ActionFrame((h, j, g), np.array([j, i2, i3]), jac, side)


def action_gradient(spec: EllipsoidSpec, h: float, g: float, j: float) -> tuple[float, float]:
    """``(dI_2/dj, dI_3/dj)``, including the term from the ``j^2 (a1 - z)`` part of ``Q~``."""
    jac = action_frame(spec, h, g, j).dI_djgh
    return float(jac[1, 0]), float(jac[2, 0])


def frequencies(spec: EllipsoidSpec, h: float, g: float, j: float) -> np.ndarray:
    """``dH/dI_k`` from the inverse of the action Jacobian."""
    jac = action_frame(spec, h, g, j).dI_djgh
    return np.linalg.inv(jac)[2]


# --- the pole at alpha_1 ----------------------------------------------------------

def curve_w2(spec: EllipsoidSpec, h: float, g: float, j: float, z):
    """``w^2 = -A(z) Q~(z) / (z - a1)^2 = -(a0 - z)(a3 - z) Q~(z)``."""
    a0, _, _, a3 = spec.alphas
    qt = qtilde(spec, h, g, j)
    z = np.asarray(z)
    return -(a0 - z) * (a3 - z) * qt(z)


def residue_at_pole(spec: EllipsoidSpec, j: float) -> complex:
    """Residue of ``z dz / ((z - a1) w)`` at ``z = a1``.

    ``w(a1)^2 = -c^2 j^2`` with ``c = (a3 - a1)(a1 - a0)``; on the branch
    ``w(a1) = i c |j|`` the residue is ``a1 / (i c |j|)``.
    """
    spec.require(Symmetry.EQUAL_MIDDLE, what="residue_at_pole")
    if j == 0:
        raise ZeroMomentum("the pole merges with a branch point at j = 0")
    a0, a1, _, a3 = spec.alphas
    c = (a3 - a1) * (a1 - a0)
    return a1 / (1j * c * abs(j))


def residue_contour(spec: EllipsoidSpec, h: float, g: float, j: float,
                    radius: float = 1e-3, n: int = 64) -> complex:
    """Trapezoid rule for ``(1/2 pi i) oint z dz / ((z - a1) w)`` on a small circle.

    The branch ``w = i sqrt(-w^2)`` is analytic on the circle because
    ``-w^2`` stays near ``c^2 j^2 > 0`` there.
    """
    a1 = spec.alphas[1]
    t = 2 * math.pi * np.arange(n) / n
    z = a1 + radius * np.exp(1j * t)
    w = 1j * np.sqrt(-curve_w2(spec, h, g, j, z))
    dz = 1j * radius * np.exp(1j * t)
    integral = np.sum(z / ((z - a1) * w) * dz) * (2 * math.pi / n)
    return complex(integral / (2j * math.pi))
