"""Critical values of the energy-momentum map and the type of critical points.

Generic ellipsoids use the chart ``(s1, s2)`` of the separation cubic
``Q(z) = z (2h z^2 + s2 z + s1)``; equal-middle-axes ellipsoids use ``(j, g)``.
Curves carry their exact coefficients alongside sampled polylines.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import NotOnSubflow
from .geometry import (
    EllipsoidSpec,
    PhasePoint,
    Symmetry,
    _split,
    angular_momentum,
    dirac_structure,
    third_integral,
    uhlenbeck_term,
)

ELLIPTIC = "elliptic"
HYPERBOLIC = "hyperbolic"
DEGENERATE = "degenerate"
FOCUS_FOCUS = "focus_focus"


@dataclass(frozen=True)
class EnergyMomentumValue:
    """A point of the image: ``(h, s1, s2)`` for distinct axes, ``(h, j, g)`` otherwise."""

    h: float
    s1: float | None = None
    s2: float | None = None
    j: float | None = None
    g: float | None = None

    @property
    def coords(self) -> tuple[float, float]:
        if self.s1 is not None:
            return (self.s1, self.s2)
        return (self.j, self.g)


@dataclass
class CriticalCurve:
    kind: str
    label: str
    param_range: tuple[float, float]
    param: np.ndarray
    sample: np.ndarray
    coefficients: dict
    type_tags: list[str] = field(default_factory=list)


@dataclass
class CriticalPointRecord:
    location: EnergyMomentumValue
    corank: int
    type: str
    eigenvalues: np.ndarray
    label: str = ""


@dataclass
class BifurcationDiagram:
    spec: EllipsoidSpec
    h: float
    chart: tuple[str, str]
    curves: list[CriticalCurve]
    points: list[CriticalPointRecord]
    annotations: dict = field(default_factory=dict)

    def point(self, label: str) -> CriticalPointRecord:
        for p in self.points:
            if p.label == label:
                return p
        raise KeyError(label)

    def curve(self, label: str) -> CriticalCurve:
        for c in self.curves:
            if c.label == label:
                return c
        raise KeyError(label)

    def rows(self):
        """Rows ``(curve_id, label, param, coord1, coord2, type_tag)``; points use ``param = nan``."""
        out = []
        for cid, c in enumerate(self.curves):
            for t, (u, v), tag in zip(c.param, c.sample, c.type_tags):
                out.append((cid, c.label, float(t), float(u), float(v), tag))
        base = len(self.curves)
        for k, p in enumerate(self.points):
            u, v = p.location.coords
            out.append((base + k, p.label, float("nan"), float(u), float(v), p.type))
        return out

    def to_csv(self, path) -> None:
        from .dynamics import format_float

        with open(path, "w", newline="\n") as fh:
            fh.write(f"curve_id,label,param,{self.chart[0]},{self.chart[1]},type_tag\n")
            for cid, label, t, u, v, tag in self.rows():
                fh.write(f"{cid},{label},{format_float(t)},{format_float(u)},{format_float(v)},{tag}\n")

    def to_json(self) -> dict:
        return {
            "alphas": list(self.spec.alphas),
            "h": self.h,
            "chart": list(self.chart),
            "curves": [{"kind": c.kind, "label": c.label, "param_range": list(c.param_range),
                        "coefficients": c.coefficients} for c in self.curves],
            "points": [{"label": p.label, "corank": p.corank, "type": p.type,
                        "location": list(p.location.coords),
                        "eigenvalues": [[z.real, z.imag] for z in np.asarray(p.eigenvalues, complex)]}
                       for p in self.points],
            "annotations": self.annotations,
        }

    def dump_json(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _combine(tags: list[str]) -> str:
    if DEGENERATE in tags:
        return DEGENERATE
    return "_".join(sorted(tags, key=[ELLIPTIC, HYPERBOLIC].index))


# --- generic ellipsoid -------------------------------------------------------

# For the line Q(alpha_i) = 0 the other root of Q(z)/z ranges over an interval
# of axes; below the split value the line bounds the image (elliptic), above
# it the line runs through the interior (hyperbolic), or vice versa.
_LINE_RANGES = {0: (1, 3), 1: (0, 3), 2: (0, 3), 3: (0, 2)}


def _line_tag(i: int, other: float, a: np.ndarray) -> str:
    if i == 1:
        return ELLIPTIC if other < a[1] else HYPERBOLIC
    if i == 2:
        return ELLIPTIC if other > a[2] else HYPERBOLIC
    return ELLIPTIC


def corank2_eigenvalues(spec: EllipsoidSpec, h: float, pair: tuple[int, int]):
    """Generators ``(lambda_i, lambda_j)`` at the periodic orbit where ``F_i = F_j = 0``.

    ``lambda_i^2 = 8 h alpha_i / (-(alpha_k - alpha_i)(alpha_l - alpha_i))``
    with ``k, l`` the two remaining indices.
    """
    spec.require_distinct("corank2_eigenvalues")
    i, j = pair
    if not (0 <= i < j <= 3):
        raise ValueError("pair must satisfy 0 <= i < j <= 3")
    a = spec.a
    k, l = [m for m in range(4) if m not in pair]
    gens, tags = [], []
    for m in (i, j):
        lam2 = 8 * h * a[m] / (-(a[k] - a[m]) * (a[l] - a[m]))
        gens.append(complex(np.sqrt(complex(lam2))))
        tags.append(HYPERBOLIC if lam2 > 0 else ELLIPTIC)
    return np.array(gens), _combine(tags)


def generic_diagram(spec: EllipsoidSpec, h: float = 0.5, samples: int = 512) -> BifurcationDiagram:
    spec.require_distinct("generic_diagram")
    if not h > 0:
        raise ValueError("h must be positive")
    a = spec.a
    curves = []
    for i in range(4):
        lo, hi = a[_LINE_RANGES[i][0]], a[_LINE_RANGES[i][1]]
        other = np.linspace(lo, hi, samples)
        pts = np.column_stack([2 * h * a[i] * other, -2 * h * (a[i] + other)])
        curves.append(CriticalCurve(
            kind="subflow_line", label=f"F_{i} = 0", param_range=(lo, hi), param=other, sample=pts,
            coefficients={"equation": "2h*alpha^2 + s2*alpha + s1 = 0", "alpha": a[i], "h": h},
            type_tags=[_line_tag(i, r, a) for r in other]))
    d = np.linspace(a[1], a[2], samples)
    curves.append(CriticalCurve(
        kind="double_root_curve", label="double root", param_range=(a[1], a[2]), param=d,
        sample=np.column_stack([2 * h * d * d, -4 * h * d]),
        coefficients={"s1": "2h*d^2", "s2": "-4h*d", "h": h},
        type_tags=[ELLIPTIC] * samples))
    points = []
    for i, j in combinations(range(4), 2):
        gens, tag = corank2_eigenvalues(spec, h, (i, j))
        loc = EnergyMomentumValue(h=h, s1=2 * h * a[i] * a[j], s2=-2 * h * (a[i] + a[j]))
        points.append(CriticalPointRecord(loc, 2, tag, np.concatenate([gens, -gens]), label=f"({i}{j})"))
    for i in (1, 2):
        loc = EnergyMomentumValue(h=h, s1=2 * h * a[i] ** 2, s2=-4 * h * a[i])
        points.append(CriticalPointRecord(loc, 1, DEGENERATE, np.zeros(2), label=f"tangency {i}"))
    notes = {"regular_fibre_counts": "2 or 4 tori per chamber (unverified annotation)"}
    return BifurcationDiagram(spec, h, ("s1", "s2"), curves, points, notes)


def image_contains(spec: EllipsoidSpec, h: float, s1: float, s2: float, tol: float = 1e-12) -> bool:
    """Whether ``(s1, s2)`` is in the closed image at energy ``h`` (distinct axes)."""
    a = spec.a
    disc = s2 * s2 - 8 * h * s1
    if disc < -tol * max(1.0, s2 * s2):
        return False
    sq = math.sqrt(max(disc, 0.0))
    r1, r2 = (-s2 - sq) / (4 * h), (-s2 + sq) / (4 * h)
    scale = tol * max(1.0, a[3])
    return a[0] - scale <= r1 <= a[2] + scale and a[1] - scale <= r2 <= a[3] + scale


# --- corank one classification -------------------------------------------------

def _k_form(a: np.ndarray, i: int, u, v) -> float:
    mask = np.arange(a.size) != i
    return float(np.sum(u[mask] * v[mask] / (a[mask] - a[i])))


def corank1_block(spec: EllipsoidSpec, i: int, p) -> np.ndarray:
    x, y = _split(p)
    a = spec.a
    kxy = _k_form(a, i, x, y)
    return np.array([[-2 * kxy, 2 * (_k_form(a, i, x, x) - 1)],
                     [-2 * _k_form(a, i, y, y), 2 * kxy]])


def classify_corank1(spec: EllipsoidSpec, i: int, p, tol: float = 1e-12) -> CriticalPointRecord:
    """Type of a point of the subflow ``x_i = y_i = 0`` from the ``x_i, y_i`` block of ``DX_{F_i}``."""
    x, y = _split(p)
    a = spec.a
    if any(abs(a[i] - a[k]) <= 1e-9 * a[k] for k in range(a.size) if k != i):
        raise ValueError(f"alpha_{i} is repeated; F_{i} is not defined")
    if abs(x[i]) > 1e-12 or abs(y[i]) > 1e-12:
        raise NotOnSubflow(f"x_{i}={x[i]:.3e}, y_{i}={y[i]:.3e}; point is not on the subflow")
    block = corank1_block(spec, i, p)
    det = float(np.linalg.det(block))
    scale = float(np.max(np.sum(np.abs(block), axis=1))) ** 2
    if abs(det) <= tol * max(scale, 1e-300):
        tag = DEGENERATE
    else:
        tag = ELLIPTIC if det > 0 else HYPERBOLIC
    mu = np.sqrt(complex(-det))
    loc = EnergyMomentumValue(h=0.5 * float(np.dot(y, y)))
    return CriticalPointRecord(loc, 1, tag, np.array([mu, -mu]), label=f"F_{i} = 0")


# --- equal middle axes -----------------------------------------------------------

def boundary_parabolas(spec: EllipsoidSpec, h: float):
    """``(c, k)`` pairs with ``g = c - k j^2`` for the lower (``F_0 = 0``) and upper (``F_3 = 0``) curves.

    The lower curve carries the subflow ``x_0 = y_0 = 0`` and the upper one
    ``x_3 = y_3 = 0``.
    """
    a0, a1, _, a3 = spec.alphas
    lower = (2 * a1 * h / (a1 - a3), a3 / (a1 * (a1 - a3)))
    upper = (2 * a1 * h / (a1 - a0), a0 / (a1 * (a1 - a0)))
    return lower, upper


def symmetric_image_contains(spec: EllipsoidSpec, h: float, j: float, g: float, tol: float = 1e-12) -> bool:
    (cl, kl), (cu, ku) = boundary_parabolas(spec, h)
    return cl - kl * j * j - tol <= g <= cu - ku * j * j + tol


def relative_equilibrium_point(spec: EllipsoidSpec, h: float, theta: float = 0.0, sign: int = 1) -> PhasePoint:
    """Point of the circular orbit in the ``x_1 x_2`` plane with ``j = sign sqrt(2 alpha_1 h)``."""
    r = math.sqrt(spec.alphas[1])
    v = sign * math.sqrt(2 * h)
    x = np.array([0.0, r * math.cos(theta), r * math.sin(theta), 0.0])
    y = np.array([0.0, -v * math.sin(theta), v * math.cos(theta), 0.0])
    return PhasePoint(x, y)


def focus_focus_point(spec: EllipsoidSpec, h: float, phi: float = 0.3) -> PhasePoint:
    """Point of the geodesic on the ellipse ``x_1 = x_2 = 0`` with energy ``h``."""
    a0, a3 = spec.alphas[0], spec.alphas[3]
    x = np.array([math.sqrt(a0) * math.cos(phi), 0.0, 0.0, math.sqrt(a3) * math.sin(phi)])
    t = np.array([-math.sqrt(a0) * math.sin(phi), 0.0, 0.0, math.sqrt(a3) * math.cos(phi)])
    return PhasePoint(x, t * math.sqrt(2 * h) / np.linalg.norm(t))


def symmetric_special_eigenvalues(spec: EllipsoidSpec, h: float, mu: float = 1.0, nu: float = 1.0):
    """Eigenvalues at the corner relative equilibria and on the focus-focus circles.

    Corners: ``mu DX_{F_0} + nu DX_{F_3}``; focus-focus: ``mu DX_G + nu DX_J``.
    """
    spec.require(Symmetry.EQUAL_MIDDLE, what="symmetric_special_eigenvalues")
    a0, a1, _, a3 = spec.alphas
    e0 = 2j * mu * math.sqrt(2 * a0 * h) / (a1 - a0)
    e3 = 2j * nu * math.sqrt(2 * a3 * h) / (a3 - a1)
    jc = math.sqrt(2 * a1 * h)
    corner_g = 2 * h
    corners = [CriticalPointRecord(EnergyMomentumValue(h=h, j=s * jc, g=corner_g), 2,
                                   "elliptic_elliptic", np.array([e0, -e0, e3, -e3]),
                                   label=f"corner {'+' if s > 0 else '-'}") for s in (1, -1)]
    re = mu * math.sqrt(8 * a1 * h / ((a1 - a0) * (a3 - a1)))
    quad = np.array([re + 1j * nu, re - 1j * nu, -re + 1j * nu, -re - 1j * nu])
    ff = CriticalPointRecord(EnergyMomentumValue(h=h, j=0.0, g=0.0), 2, FOCUS_FOCUS, quad,
                             label="focus-focus")
    return corners, ff


def symmetric_diagram(spec: EllipsoidSpec, h: float = 0.5, samples: int = 512) -> BifurcationDiagram:
    spec.require(Symmetry.EQUAL_MIDDLE, what="symmetric_diagram")
    if not h > 0:
        raise ValueError("h must be positive")
    jc = math.sqrt(2 * spec.alphas[1] * h)
    js = np.linspace(-jc, jc, samples)
    curves = []
    for (c, k), label in zip(boundary_parabolas(spec, h), ("F_0 = 0", "F_3 = 0")):
        curves.append(CriticalCurve(
            kind="boundary_parabola", label=label, param_range=(-jc, jc), param=js,
            sample=np.column_stack([js, c - k * js * js]),
            coefficients={"g": "c - k*j^2", "c": c, "k": k}, type_tags=[ELLIPTIC] * samples))
    corners, ff = symmetric_special_eigenvalues(spec, h)
    notes = {"regular_fibre_counts": "1 torus per regular value (unverified annotation)"}
    return BifurcationDiagram(spec, h, ("j", "g"), curves, corners + [ff], notes)


# --- numeric Jacobians ---------------------------------------------------------

def flow_jacobian(spec: EllipsoidSpec, p, grad_fn, eps: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of ``z -> B(z) grad F(z)`` on R^8."""
    z0 = p.as_array() if isinstance(p, PhasePoint) else np.asarray(p, dtype=float)
    n = z0.size
    jac = np.empty((n, n))
    for k in range(n):
        dz = np.zeros(n)
        dz[k] = eps
        fp = dirac_structure(spec, z0 + dz) @ grad_fn(z0 + dz)
        fm = dirac_structure(spec, z0 - dz) @ grad_fn(z0 - dz)
        jac[:, k] = (fp - fm) / (2 * eps)
    return jac


def nonzero_spectrum(jac: np.ndarray, floor: float = 0.1) -> np.ndarray:
    ev = np.linalg.eigvals(jac)
    return ev[np.abs(ev) > floor]


def numeric_focus_focus(spec: EllipsoidSpec, h: float, mu: float = 1.0, nu: float = 1.0,
                        phi: float = 0.3, eps: float = 1e-5) -> np.ndarray:
    p = focus_focus_point(spec, h, phi)
    return nonzero_spectrum(flow_jacobian(
        spec, p, lambda z: mu * third_integral(spec, z)[1] + nu * angular_momentum(z)[1], eps))


def numeric_corner(spec: EllipsoidSpec, h: float, mu: float = 1.0, nu: float = 1.0,
                   theta: float = 0.4, eps: float = 1e-5) -> np.ndarray:
    p = relative_equilibrium_point(spec, h, theta)
    return nonzero_spectrum(flow_jacobian(
        spec, p, lambda z: mu * uhlenbeck_term(spec, z, 0)[1] + nu * uhlenbeck_term(spec, z, 3)[1], eps))


def match_spectra(a, b) -> float:
    """Max distance after greedy matching of two eigenvalue multisets."""
    a = list(np.asarray(a, complex))
    b = list(np.asarray(b, complex))
    if len(a) != len(b):
        return math.inf
    worst = 0.0
    for z in a:
        k = int(np.argmin([abs(z - w) for w in b]))
        worst = max(worst, abs(z - b.pop(k)))
    return worst
