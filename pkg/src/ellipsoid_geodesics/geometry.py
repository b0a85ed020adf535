"""Ellipsoids, phase points, the Dirac bracket and the conserved quantities.

Phase space is R^8 with coordinates ``z = (x_0..x_3, y_0..y_3)``.  The
ellipsoid is ``sum x_i^2 / alpha_i = 1`` and the flow lives on the symplectic
leaf ``C1 = C2 = 0`` of the Dirac bracket.  Everything here is a pure
function of its inputs; gradients are closed-form.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateAxes,
    DegeneratePoint,
    InvalidSpec,
    OffLeaf,
    ProjectionFailed,
    WrongSymmetry,
)

AXIS_TOL = 1e-9
LEAF_TOL = 1e-12
SNAP_TOL = 1e-6
D_MIN = 1e-14


class Symmetry(str, Enum):
    GENERIC = "generic"
    EQUAL_MIDDLE = "equal_middle"
    REVOLUTION_2D = "revolution_2d"
    SPHERE_LIKE = "sphere_like"


def _equal_pairs(alphas: Sequence[float]) -> list[bool]:
    return [abs(b - a) <= AXIS_TOL * max(abs(a), abs(b)) for a, b in zip(alphas, alphas[1:])]


def _infer_symmetry(alphas: tuple[float, ...]) -> tuple[Symmetry, tuple[float, ...]]:
    eq = _equal_pairs(alphas)
    if all(eq):
        return Symmetry.SPHERE_LIKE, (alphas[0],) * len(alphas)
    if not any(eq):
        return Symmetry.GENERIC, alphas
    if len(alphas) == 4 and eq == [False, True, False]:
        return Symmetry.EQUAL_MIDDLE, (alphas[0], alphas[1], alphas[1], alphas[3])
    if len(alphas) == 3:
        snapped = (alphas[0], alphas[0], alphas[2]) if eq[0] else (alphas[0], alphas[1], alphas[1])
        return Symmetry.REVOLUTION_2D, snapped
    raise DegenerateAxes(f"unsupported degeneracy pattern for alphas={alphas}")


@dataclass(frozen=True)
class EllipsoidSpec:
    """Squared semi-axes ``alpha_0 <= ... <= alpha_{n-1}`` of an ellipsoid.

    Axes within a relative ``AXIS_TOL`` of each other are snapped to be
    exactly equal and the symmetry tag is inferred from the resulting
    pattern.  Passing an explicit ``symmetry`` that disagrees with the axes
    raises :class:`InvalidSpec`.
    """

    alphas: tuple[float, ...]
    symmetry: Symmetry | None = None

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) not in (3, 4):
            raise InvalidSpec(f"expected 3 or 4 semi-axes squared, got {len(alphas)}")
        if not all(np.isfinite(a) and a > 0 for a in alphas):
            raise InvalidSpec(f"all alphas must be positive and finite: {alphas}")
        if any(b < a for a, b in zip(alphas, alphas[1:])):
            raise InvalidSpec(f"alphas must be nondecreasing: {alphas}")
        tag, snapped = _infer_symmetry(alphas)
        if self.symmetry is not None and Symmetry(self.symmetry) is not tag:
            raise InvalidSpec(f"symmetry tag {Symmetry(self.symmetry).value!r} inconsistent with alphas "
                              f"{alphas} (expected {tag.value!r})")
        object.__setattr__(self, "alphas", snapped)
        object.__setattr__(self, "symmetry", tag)

    @property
    def symmetry_tag(self) -> Symmetry:
        return self.symmetry

    @property
    def dim(self) -> int:
        return len(self.alphas)

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.alphas)

    @property
    def inv(self) -> np.ndarray:
        return 1.0 / np.asarray(self.alphas)

    def require(self, *tags: Symmetry, what: str = "operation") -> None:
        if self.symmetry not in tags:
            names = ", ".join(t.value for t in tags)
            raise WrongSymmetry(f"{what} needs a spec tagged {names}; got {self.symmetry.value}")

    def require_distinct(self, what: str = "operation") -> None:
        if self.symmetry is not Symmetry.GENERIC or self.dim != 4:
            raise DegenerateAxes(f"{what} needs four distinct axes; got {self.alphas}")


@dataclass(frozen=True)
class PhasePoint:
    """Position ``x`` and momentum ``y`` (unit mass, so ``y = dx/dt``)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_array(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        n = z.size // 2
        return cls(z[:n], z[n:])

    @classmethod
    def on_leaf(cls, spec: EllipsoidSpec, x, y) -> "PhasePoint":
        """Build a point, projecting it onto the leaf if it is only slightly off."""
        z = np.concatenate([np.asarray(x, float), np.asarray(y, float)])
        c1, c2 = casimirs(spec, z)
        if max(abs(c1), abs(c2)) <= LEAF_TOL:
            return cls.from_array(z)
        if max(abs(c1), abs(c2)) > SNAP_TOL:
            raise OffLeaf(f"point is off the leaf (C1={c1:.3e}, C2={c2:.3e}); limit {SNAP_TOL:g}")
        return cls.from_array(project_state(spec, z))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class IntegralValues:
    h: float
    f: np.ndarray | None = None
    j: float | None = None
    g: float | None = None


def _split(p) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, PhasePoint):
        return p.x, p.y
    z = np.asarray(p, dtype=float)
    n = z.size // 2
    return z[:n], z[n:]


def casimirs(spec: EllipsoidSpec, p) -> tuple[float, float]:
    x, y = _split(p)
    ia = spec.inv
    return float(np.dot(x * x, ia) - 1.0), float(np.dot(x * y, ia))


def dirac_denominator(spec: EllipsoidSpec, x) -> float:
    ax = np.asarray(x) * spec.inv
    return float(np.dot(ax, ax))


def dirac_structure(spec: EllipsoidSpec, p) -> np.ndarray:
    """Poisson tensor of the Dirac bracket as a ``2n x 2n`` matrix.

    Entry ``[a, b]`` is the bracket ``{z_a, z_b}``, so the Hamiltonian vector
    field of ``F`` is ``B @ grad F``.
    """
    x, y = _split(p)
    n = x.size
    d = dirac_denominator(spec, x)
    if d <= D_MIN:
        raise DegeneratePoint(f"D = {d:.3e} <= {D_MIN:g}; position too close to the origin")
    ax = x * spec.inv
    xy = np.eye(n) - np.outer(ax, ax) / d
    ay = y * spec.inv
    yy = -(np.outer(ax, ay) - np.outer(ay, ax)) / d
    b = np.zeros((2 * n, 2 * n))
    b[:n, n:] = xy
    b[n:, :n] = -xy.T
    b[n:, n:] = yy
    return b


def bracket(spec: EllipsoidSpec, p, grad_f, grad_g) -> float:
    return float(np.asarray(grad_f) @ dirac_structure(spec, p) @ np.asarray(grad_g))


def flow_of(spec: EllipsoidSpec, p, grad_f) -> np.ndarray:
    """Hamiltonian vector field ``B grad F`` of a function with the given gradient."""
    return dirac_structure(spec, p) @ np.asarray(grad_f)


# --- conserved quantities --------------------------------------------------

def _angular(x, y) -> np.ndarray:
    return np.outer(x, y) - np.outer(y, x)


def _pair_form(x, y, w) -> tuple[float, np.ndarray]:
    """Value and gradient of ``sum_{i<j} w_ij (x_i y_j - x_j y_i)^2``."""
    wl = w * _angular(x, y)
    value = 0.5 * float(np.sum(wl * _angular(x, y)))
    return value, np.concatenate([2.0 * wl @ y, -2.0 * wl @ x])


def _uhlenbeck_weights(alphas: np.ndarray, i: int) -> np.ndarray:
    n = alphas.size
    w = np.zeros((n, n))
    for j in range(n):
        if j != i:
            w[i, j] = w[j, i] = 1.0 / (alphas[i] - alphas[j])
    return w


def _g_weights(alphas: np.ndarray) -> np.ndarray:
    a0, a1, _, a3 = alphas
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = w[0, 2] = w[2, 0] = 1.0 / (a1 - a0)
    w[1, 3] = w[3, 1] = w[2, 3] = w[3, 2] = 1.0 / (a1 - a3)
    return w


def energy(p) -> float:
    _, y = _split(p)
    return 0.5 * float(np.dot(y, y))


def grad_energy(p) -> np.ndarray:
    x, y = _split(p)
    return np.concatenate([np.zeros_like(x), y])


def grad_casimirs(spec: EllipsoidSpec, p) -> tuple[np.ndarray, np.ndarray]:
    x, y = _split(p)
    ia = spec.inv
    return np.concatenate([2 * x * ia, np.zeros_like(y)]), np.concatenate([y * ia, x * ia])


def uhlenbeck_term(spec: EllipsoidSpec, p, i: int) -> tuple[float, np.ndarray]:
    """Value and gradient of ``F_i``, valid whenever alpha_i is a simple axis."""
    x, y = _split(p)
    a = spec.a
    if any(abs(a[i] - a[j]) <= AXIS_TOL * a[j] for j in range(a.size) if j != i):
        raise DegenerateAxes(f"F_{i} is undefined: alpha_{i} is repeated in {spec.alphas}")
    value, grad = _pair_form(x, y, _uhlenbeck_weights(a, i))
    value += y[i] ** 2
    grad[x.size + i] += 2 * y[i]
    return value, grad


def uhlenbeck_integrals(spec: EllipsoidSpec, p) -> np.ndarray:
    spec.require_distinct("uhlenbeck_integrals")
    return np.array([uhlenbeck_term(spec, p, i)[0] for i in range(4)])


def uhlenbeck_gradients(spec: EllipsoidSpec, p) -> np.ndarray:
    spec.require_distinct("uhlenbeck_gradients")
    return np.array([uhlenbeck_term(spec, p, i)[1] for i in range(4)])


def angular_momentum(p) -> tuple[float, np.ndarray]:
    x, y = _split(p)
    j = x[1] * y[2] - x[2] * y[1]
    grad = np.array([0.0, y[2], -y[1], 0.0, 0.0, -x[2], x[1], 0.0])
    return float(j), grad


def third_integral(spec: EllipsoidSpec, p) -> tuple[float, np.ndarray]:
    """``G = F_1 + F_2`` for equal middle axes, with its gradient."""
    x, y = _split(p)
    value, grad = _pair_form(x, y, _g_weights(spec.a))
    value += y[1] ** 2 + y[2] ** 2
    grad[5] += 2 * y[1]
    grad[6] += 2 * y[2]
    return value, grad


def symmetric_integrals(spec: EllipsoidSpec, p) -> tuple[float, float, float]:
    spec.require(Symmetry.EQUAL_MIDDLE, what="symmetric_integrals")
    return energy(p), angular_momentum(p)[0], third_integral(spec, p)[0]


def symmetric_gradients(spec: EllipsoidSpec, p) -> np.ndarray:
    """Rows: gradients of H, J, G."""
    spec.require(Symmetry.EQUAL_MIDDLE, what="symmetric_gradients")
    return np.array([grad_energy(p), angular_momentum(p)[1], third_integral(spec, p)[1]])


def integrals(spec: EllipsoidSpec, p) -> IntegralValues:
    if spec.symmetry is Symmetry.GENERIC and spec.dim == 4:
        return IntegralValues(h=energy(p), f=uhlenbeck_integrals(spec, p))
    if spec.symmetry is Symmetry.EQUAL_MIDDLE:
        h, j, g = symmetric_integrals(spec, p)
        return IntegralValues(h=h, j=j, g=g)
    raise DegenerateAxes(f"no integrals beyond the energy for symmetry {spec.symmetry.value}")


# --- dynamics on the leaf --------------------------------------------------

def multiplier(spec: EllipsoidSpec, p) -> float:
    """Lagrange multiplier ``<A^-1 y, y> / <A^-1 x, A^-1 x>`` of the constraint force."""
    x, y = _split(p)
    d = dirac_denominator(spec, x)
    if d <= D_MIN:
        raise DegeneratePoint(f"D = {d:.3e} <= {D_MIN:g}")
    return float(np.dot(y * y, spec.inv) / d)


def hamiltonian_vector_field(spec: EllipsoidSpec, p) -> tuple[np.ndarray, np.ndarray]:
    x, y = _split(p)
    lam = multiplier(spec, p)
    return y.copy(), -lam * x * spec.inv


def project_state(spec: EllipsoidSpec, z, *, max_iter: int = 25) -> np.ndarray:
    """Move ``z`` onto the leaf ``C1 = C2 = 0``.

    The position is moved along ``A^-1 x`` by scalar Newton on ``C1``; the
    momentum then loses its component along the leaf normal ``A^-1 x``.
    """
    ia = spec.inv
    z = np.array(z, dtype=float)
    n = z.size // 2
    x, y = z[:n], z[n:]
    for _ in range(max_iter):
        c1 = np.dot(x * x, ia) - 1.0
        if abs(c1) <= 0.25 * LEAF_TOL:
            break
        ax = x * ia
        # C1(x + t A^-1 x) is quadratic in t; Newton step at t = 0.
        x = x - (c1 / (2.0 * np.dot(ax, ax))) * ax
    else:
        c1 = np.dot(x * x, ia) - 1.0
        if abs(c1) > LEAF_TOL:
            raise ProjectionFailed(f"Newton projection did not converge (C1={c1:.3e})")
    ax = x * ia
    y = y - (np.dot(x * y, ia) / np.dot(ax, ax)) * ax
    return np.concatenate([x, y])


def random_leaf_point(spec: EllipsoidSpec, rng: np.random.Generator, h: float = 0.5,
                      margin: float = 0.0) -> PhasePoint:
    """A random point on the leaf with energy ``h``.

    With ``margin > 0`` every ``|x_i| / sqrt(alpha_i)`` is kept above it, which
    keeps ellipsoidal coordinates away from their singular hyperplanes.
    """
    a = spec.a
    while True:
        v = rng.normal(size=a.size)
        x = np.sqrt(a) * v / np.linalg.norm(v)
        if np.min(np.abs(x) / np.sqrt(a)) >= margin:
            break
    y = rng.normal(size=a.size)
    ax = x / a
    y = y - (np.dot(ax, y) / np.dot(ax, ax)) * ax
    y *= np.sqrt(2 * h) / np.linalg.norm(y)
    return PhasePoint(x, y)
