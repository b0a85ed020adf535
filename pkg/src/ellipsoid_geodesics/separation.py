"""Ellipsoidal coordinates, separation polynomials and the SO(2) reduction.

Sign conventions are fixed by the rational identity

    sum_i F_i / (z - alpha_i) = Q(z) / A(z),    A(z) = prod_j (alpha_j - z),

and its equal-middle-axes analogue with a double pole at ``alpha_1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AxisPoint,
    CoordinateSingularity,
    LeafIncompatible,
    OutsideImage,
    PoleHit,
)
from .geometry import EllipsoidSpec, PhasePoint, Symmetry, _split, casimirs

COORD_TOL = 1e-8
POLE_TOL = 1e-13
BISECT_ITERS = 60
IMAGE_TOL = 1e-12


@dataclass(frozen=True)
class EllipsoidalPoint:
    """Confocal coordinates; ``lambdas[0] = 0`` on the surface."""

    lambdas: np.ndarray

    def check_interlacing(self, alphas) -> None:
        lam = np.asarray(self.lambdas)
        a = np.asarray(alphas)
        if lam[0] > a[0]:
            raise ValueError(f"lambda_0={lam[0]} exceeds alpha_0={a[0]}")
        for i in range(1, lam.size):
            if not (a[i - 1] <= lam[i] <= a[i]):
                raise ValueError(f"lambda_{i}={lam[i]} outside [{a[i - 1]}, {a[i]}]")


@dataclass(frozen=True)
class SeparationConstants:
    """``Q(z) = 2h z^3 + s2 z^2 + s1 z``."""

    h: float
    s1: float
    s2: float

    def q(self, z):
        z = np.asarray(z)
        return ((2 * self.h * z + self.s2) * z + self.s1) * z


@dataclass(frozen=True)
class QTildeCubic:
    """Equal-middle-axes separation cubic ``Q~(z) = z (c2 z^2 + c1 z + c0)``.

    ``r1 <= alpha_1 <= r2`` are the roots of the quadratic factor; ``delta1 =
    alpha_1 - r1`` and ``delta2 = r2 - alpha_1`` are stored separately because
    they are computed without cancellation and control the pole behaviour.
    """

    h: float
    g: float
    j: float
    coeffs: tuple[float, float, float]
    r1: float
    r2: float
    delta1: float
    delta2: float
    alphas: tuple[float, ...]

    def __call__(self, z):
        z = np.asarray(z)
        c2, c1, c0 = self.coeffs
        return z * ((c2 * z + c1) * z + c0)

    def over_z(self, z):
        c2, c1, c0 = self.coeffs
        return (c2 * z + c1) * z + c0


@dataclass(frozen=True)
class SO2Invariants:
    pi1: float
    pi2: float
    pi3: float
    pi4: float

    def relation(self) -> float:
        return self.pi1 * self.pi2 - self.pi3 ** 2 - self.pi4 ** 2


@dataclass(frozen=True)
class ReducedPoint:
    xi: np.ndarray
    eta: np.ndarray
    j: float


# --- ellipsoidal coordinates -----------------------------------------------

def confocal_roots(axes, squares) -> np.ndarray:
    """Roots ``lambda_1..lambda_{n-1}`` of ``sum s_i/(a_i - z) = 1`` between the axes.

    On each open interval ``(a_{i-1}, a_i)`` the left side increases from
    ``-inf`` to ``+inf``, so plain bisection cannot leave the bracket.
    """
    a = np.asarray(axes, dtype=float)
    s = np.asarray(squares, dtype=float)
    out = np.empty(a.size - 1)
    for i in range(1, a.size):
        lo, hi = a[i - 1], a[i]
        for _ in range(BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if np.sum(s / (a - mid)) - 1.0 < 0.0:
                lo = mid
            else:
                hi = mid
        out[i - 1] = 0.5 * (lo + hi)
    return out


def to_ellipsoidal(spec: EllipsoidSpec, x) -> EllipsoidalPoint:
    spec.require(Symmetry.GENERIC, what="to_ellipsoidal")
    x = np.asarray(x, dtype=float)
    c1 = float(np.dot(x * x, spec.inv) - 1.0)
    if abs(c1) > 1e-10:
        raise ValueError(f"position is not on the surface (C1={c1:.3e})")
    small = np.abs(x) < COORD_TOL
    if small.any():
        raise CoordinateSingularity(f"|x_i| < {COORD_TOL:g} for i={np.flatnonzero(small).tolist()}")
    lam = np.concatenate([[0.0], confocal_roots(spec.a, x * x)])
    return EllipsoidalPoint(lam)


def _squares_from_roots(axes: np.ndarray, lam: np.ndarray) -> np.ndarray:
    out = np.empty(axes.size)
    for i, ai in enumerate(axes):
        b = np.prod(lam - ai)
        dA = -np.prod(np.delete(axes, i) - ai)
        out[i] = b / dA
    return out


def from_ellipsoidal(spec: EllipsoidSpec, lam) -> np.ndarray:
    """Squares ``x_i^2 = B(alpha_i) / A'(alpha_i)`` with ``B(z) = prod (lambda_j - z)``."""
    spec.require(Symmetry.GENERIC, what="from_ellipsoidal")
    pt = lam if isinstance(lam, EllipsoidalPoint) else EllipsoidalPoint(np.asarray(lam, float))
    pt.check_interlacing(spec.alphas)
    sq = _squares_from_roots(spec.a, np.asarray(pt.lambdas, float))
    if np.any(sq < -1e-14):
        raise ValueError(f"negative square {sq.min():.3e}; interlacing inconsistent")
    return np.maximum(sq, 0.0)


def cotangent_momenta(spec: EllipsoidSpec, p) -> tuple[np.ndarray, np.ndarray]:
    """Ellipsoidal coordinates ``lambda_1..`` and their conjugate momenta.

    From ``x_k^2 = B(alpha_k)/A'(alpha_k)`` one gets ``dx_k/dlambda_i =
    x_k / (2 (lambda_i - alpha_k))``, and the cotangent lift gives
    ``p_i = sum_k y_k dx_k/dlambda_i``.
    """
    x, y = _split(p)
    lam = to_ellipsoidal(spec, x).lambdas[1:]
    mom = np.array([0.5 * np.sum(x * y / (li - spec.a)) for li in lam])
    return lam, mom


# --- separation constants ----------------------------------------------------

def _elementary(vals) -> tuple[float, float, float]:
    a, b, c = vals
    return a + b + c, a * b + a * c + b * c, a * b * c


def separation_constants(spec: EllipsoidSpec, f, tol: float = 1e-10) -> SeparationConstants:
    """Coefficients of ``Q`` from ``Q(z) = -sum_i F_i prod_{j != i} (alpha_j - z)``."""
    spec.require_distinct("separation_constants")
    f = np.asarray(f, dtype=float)
    rel = float(np.sum(f * spec.inv))
    if abs(rel) > tol:
        raise LeafIncompatible(f"sum F_i/alpha_i = {rel:.3e} exceeds {tol:g}")
    s1 = s2 = 0.0
    for i in range(4):
        e1, e2, _ = _elementary(np.delete(spec.a, i))
        s2 -= f[i] * e1
        s1 += f[i] * e2
    return SeparationConstants(h=0.5 * float(np.sum(f)), s1=float(s1), s2=float(s2))


def constants_to_integrals(spec: EllipsoidSpec, sc: SeparationConstants) -> np.ndarray:
    """Residues ``F_i = Q(alpha_i) / A'(alpha_i)``."""
    spec.require_distinct("constants_to_integrals")
    a = spec.a
    return np.array([sc.q(ai) / -np.prod(np.delete(a, i) - ai) for i, ai in enumerate(a)])


def a_poly(spec: EllipsoidSpec, z):
    z = np.asarray(z)
    out = np.ones_like(z, dtype=np.result_type(z, float))
    for ai in spec.alphas:
        out = out * (ai - z)
    return out


# --- equal middle axes ---------------------------------------------------------

def qtilde_coefficients(alphas, h: float, g: float, j: float) -> tuple[float, float, float]:
    """Coefficients ``(c2, c1, c0)`` of ``Q~(z)/z`` in powers of ``z``."""
    a0, a1, _, a3 = alphas
    c = (a3 - a1) * (a1 - a0)
    e = (a0 * a3 - a1 * a1) / a1 ** 2
    j2 = j * j
    # 2h (a1 - z)^2 + (c/a1)(g (a1 - z) - j^2) + e j^2 (a1 - z)
    lin = c * g / a1 + e * j2
    return 2 * h, -4 * h * a1 - lin, 2 * h * a1 * a1 + lin * a1 - c * j2 / a1


def qtilde(spec: EllipsoidSpec, h: float, g: float, j: float, tol: float = IMAGE_TOL) -> QTildeCubic:
    """Build ``Q~`` and its roots ``r1 <= alpha_1 <= r2``.

    In ``y = alpha_1 - z`` the quadratic factor is ``2h y^2 + b y + c'`` with
    ``c' = -c j^2 / alpha_1 <= 0``, so there is always one root on each side
    of ``alpha_1``; a cancellation-free quadratic formula keeps the distance
    of each root from the pole accurate when ``j`` is small.
    """
    spec.require(Symmetry.EQUAL_MIDDLE, what="qtilde")
    if not h > 0:
        raise ValueError("h must be positive")
    a0, a1, _, a3 = spec.alphas
    c = (a3 - a1) * (a1 - a0)
    e = (a0 * a3 - a1 * a1) / a1 ** 2
    b = c * g / a1 + e * j * j
    cc = -c * j * j / a1
    disc = b * b - 8 * h * cc
    if disc < 0:
        raise OutsideImage(f"negative discriminant {disc:.3e}")
    sq = math.sqrt(disc)
    if b == 0.0 and cc == 0.0:
        y_pos = y_neg = 0.0
    elif b >= 0:
        q = -0.5 * (b + sq)
        y_neg, y_pos = q / (2 * h), cc / q
    else:
        q = 0.5 * (-b + sq)
        y_pos, y_neg = q / (2 * h), cc / q
    delta1, delta2 = max(y_pos, 0.0), max(-y_neg, 0.0)
    r1, r2 = a1 - delta1, a1 + delta2
    scale = max(a3, 1.0)
    if r1 < a0 - tol * scale or r2 > a3 + tol * scale:
        raise OutsideImage(f"(h, j, g)=({h}, {j}, {g}) outside the image: roots {r1}, {r2} "
                           f"not within [{a0}, {a3}]")
    return QTildeCubic(h, g, j, qtilde_coefficients(spec.alphas, h, g, j), r1, r2,
                       delta1, delta2, spec.alphas)


def momenta_on_curve(spec: EllipsoidSpec, lam_i: float, constants) -> float:
    """Squared separated momentum ``p^2 = -Q(lambda)/(4 A(lambda))``.

    ``constants`` is either :class:`SeparationConstants` (distinct axes) or
    :class:`QTildeCubic` (equal middle axes, where ``A`` has a double root).
    """
    for ak in spec.alphas:
        if abs(lam_i - ak) < POLE_TOL:
            raise PoleHit(f"lambda={lam_i} within {POLE_TOL:g} of pole alpha={ak}")
    q = constants.q(lam_i) if isinstance(constants, SeparationConstants) else constants(lam_i)
    return float(-q / (4.0 * a_poly(spec, lam_i)))


def partial_fraction_residual(spec: EllipsoidSpec, p, z) -> np.ndarray:
    """``F0/(z-a0) + F3/(z-a3) + G/(z-a1) + J^2/(z-a1)^2 - Q~(z)/A(z)`` at leaf data."""
    from .geometry import symmetric_integrals, uhlenbeck_term

    h, j, g = symmetric_integrals(spec, p)
    f0 = uhlenbeck_term(spec, p, 0)[0]
    f3 = uhlenbeck_term(spec, p, 3)[0]
    a0, a1, _, a3 = spec.alphas
    z = np.asarray(z, dtype=float)
    coeffs = qtilde_coefficients(spec.alphas, h, g, j)
    qt = z * ((coeffs[0] * z + coeffs[1]) * z + coeffs[2])
    lhs = f0 / (z - a0) + f3 / (z - a3) + g / (z - a1) + j * j / (z - a1) ** 2
    return lhs - qt / a_poly(spec, z)


def so2_invariants(p) -> SO2Invariants:
    x, y = _split(p)
    return SO2Invariants(
        pi1=float(x[1] ** 2 + x[2] ** 2),
        pi2=float(y[1] ** 2 + y[2] ** 2),
        pi3=float(x[1] * y[1] + x[2] * y[2]),
        pi4=float(x[1] * y[2] - x[2] * y[1]),
    )


def reduce(spec: EllipsoidSpec, p) -> ReducedPoint:
    """Coordinates on the reduced phase space ``J^{-1}(j)/SO(2)``."""
    spec.require(Symmetry.EQUAL_MIDDLE, what="reduce")
    x, y = _split(p)
    inv = so2_invariants(p)
    if inv.pi1 == 0.0:
        raise AxisPoint("x_1 = x_2 = 0: point on the rotation axis; use the section identity")
    r = math.sqrt(inv.pi1)
    return ReducedPoint(np.array([x[0], r, x[3]]), np.array([y[0], inv.pi3 / r, y[3]]), inv.pi4)


def reduced_casimirs(spec: EllipsoidSpec, rp: ReducedPoint) -> tuple[float, float]:
    a = np.array([spec.alphas[0], spec.alphas[1], spec.alphas[3]])
    return float(np.sum(rp.xi ** 2 / a) - 1.0), float(np.sum(rp.xi * rp.eta / a))


def reduced_energies(spec: EllipsoidSpec, rp: ReducedPoint) -> tuple[float, float]:
    """Reduced Hamiltonian and third integral, including the centrifugal terms."""
    a0, a1, _, a3 = spec.alphas
    (x0, x1, x2), (e0, e1, e2), j = rp.xi, rp.eta, rp.j
    hh = 0.5 * float(np.dot(rp.eta, rp.eta)) + j * j / (2 * x1 * x1)
    gg = (e1 ** 2 + (x1 * e0 - x0 * e1) ** 2 / (a1 - a0) + (x1 * e2 - x2 * e1) ** 2 / (a1 - a3)
          + j * j / x1 ** 2 * (1 + x0 ** 2 / (a1 - a0) + x2 ** 2 / (a1 - a3)))
    return float(hh), float(gg)


def reduced_momenta(spec: EllipsoidSpec, rp: ReducedPoint) -> tuple[np.ndarray, np.ndarray]:
    """Confocal coordinates ``(lambda_1, lambda_2)`` on the reduced 2-ellipsoid and conjugate momenta."""
    a = np.array([spec.alphas[0], spec.alphas[1], spec.alphas[3]])
    xi, eta = rp.xi, rp.eta
    if np.any(np.abs(xi) < COORD_TOL):
        raise CoordinateSingularity("reduced position too close to a coordinate plane")
    lam = confocal_roots(a, xi * xi)
    mom = np.array([0.5 * np.sum(xi * eta / (li - a)) for li in lam])
    return lam, mom


def point_from_separated(spec: EllipsoidSpec, h: float, g: float, j: float, lam1: float, lam2: float,
                         theta: float = 0.0, signs=(1, 1), octant=(1, 1, 1)) -> PhasePoint:
    """Phase point with integrals ``(h, j, g)`` at reduced confocal coordinates ``(lam1, lam2)``.

    ``lam1`` must lie in ``[alpha_0, r1]`` and ``lam2`` in ``[r2, alpha_3]``;
    ``signs`` picks the sign of each separated momentum, ``theta`` the
    rotation angle in the ``x_1 x_2`` plane and ``octant`` the signs of the
    reduced position.
    """
    qt = qtilde(spec, h, g, j)
    a = np.array([spec.alphas[0], spec.alphas[1], spec.alphas[3]])
    lam = np.array([0.0, lam1, lam2])
    xi = np.sqrt(np.maximum(_squares_from_roots(a, lam), 0.0)) * np.asarray(octant, float)
    if xi[1] < COORD_TOL:
        raise AxisPoint("reduced point on the rotation axis")
    mom = [0.0]
    for s, li in zip(signs, (lam1, lam2)):
        mom.append(s * math.sqrt(max(momenta_on_curve(spec, li, qt), 0.0)))
    # p_i = 1/2 sum_k xi_k eta_k / (lambda_i - a_k), with p_0 = 0 fixing the tangency.
    mat = 0.5 * xi[None, :] / (lam[:, None] - a[None, :])
    eta = np.linalg.solve(mat, np.array(mom))
    c, s_ = math.cos(theta), math.sin(theta)
    x = np.array([xi[0], xi[1] * c, xi[1] * s_, xi[2]])
    y = np.array([eta[0], eta[1] * c - j / xi[1] * s_, eta[1] * s_ + j / xi[1] * c, eta[2]])
    return PhasePoint(x, y)
