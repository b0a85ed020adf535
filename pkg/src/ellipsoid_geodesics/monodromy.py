"""Gluing matrices, monodromy and its integer normal form.

The natural actions ``I(j) = (j, I_2(|j|), I_3(|j|))`` are smooth on each side
of ``j = 0`` but their Jacobians jump there.  Near a crossing at ``g > 0``
(``g < 0``) the frames are related by an integer matrix ``M_1`` (``M_2``)
with ``M_i dI(0^-) = dI(0^+)``.  Transporting the frame once around the
focus-focus value accumulates ``X = M_1 M_2^{-1}``; the monodromy is reported
as ``M = X^{-1} = (M_2 S)^{-1} (M_1 S)`` with ``S = diag(-1, 1, 1)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .actions import action_frame
from .bifurcation import symmetric_image_contains
from .errors import LoopOutsideImage, NonIntegerTransition, NotParabolic
from .geometry import EllipsoidSpec, Symmetry

ROUND_TOL = 1e-4
GLUE_EPS = 1e-6
STEP_TOL = 0.25
S = np.diag([-1, 1, 1])


@dataclass(frozen=True)
class TransitionMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if abs(self.determinant) != 1:
            raise NonIntegerTransition(f"matrix {self.entries} is not unimodular")

    @classmethod
    def of(cls, a) -> "TransitionMatrix":
        a = np.asarray(a)
        return cls(tuple(tuple(int(v) for v in row) for row in a))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    @property
    def determinant(self) -> int:
        return int(round(np.linalg.det(np.array(self.entries, dtype=float))))

    def inverse(self) -> "TransitionMatrix":
        return TransitionMatrix.of(_int_inverse(self.array))

    def __matmul__(self, other: "TransitionMatrix") -> "TransitionMatrix":
        return TransitionMatrix.of(self.array @ other.array)

    def __eq__(self, other) -> bool:
        if isinstance(other, TransitionMatrix):
            return self.entries == other.entries
        return bool(np.array_equal(self.array, np.asarray(other)))

    def __hash__(self):
        return hash(self.entries)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


IDENTITY = TransitionMatrix.of(np.eye(3, dtype=int))


def _int_inverse(a: np.ndarray) -> np.ndarray:
    """Exact inverse of a unimodular integer 3x3 matrix via the adjugate."""
    a = [[int(v) for v in row] for row in a]
    det = (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
           - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
           + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))
    if abs(det) != 1:
        raise NonIntegerTransition("matrix is not unimodular")
    adj = np.zeros((3, 3), dtype=np.int64)
    for i in range(3):
        for k in range(3):
            rows = [r for r in range(3) if r != k]
            cols = [c for c in range(3) if c != i]
            minor = a[rows[0]][cols[0]] * a[rows[1]][cols[1]] - a[rows[0]][cols[1]] * a[rows[1]][cols[0]]
            adj[i, k] = (-1) ** (i + k) * minor
    return adj * det


def round_integer(a, tol: float = ROUND_TOL) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    r = np.rint(a)
    err = np.max(np.abs(a - r))
    if err > tol:
        raise NonIntegerTransition(f"entry off an integer by {err:.2e} (> {tol:g})")
    return r.astype(np.int64)


def glue_matrix(spec: EllipsoidSpec, h: float, g: float, eps: float = GLUE_EPS) -> TransitionMatrix:
    """Integer matrix relating the action Jacobians at ``j = -eps`` and ``j = +eps``."""
    spec.require(Symmetry.EQUAL_MIDDLE, what="glue_matrix")
    jp = action_frame(spec, h, g, eps).dI_djgh
    jm = action_frame(spec, h, g, -eps).dI_djgh
    return TransitionMatrix.of(round_integer(jp @ np.linalg.inv(jm)))


def glue_matrices(spec: EllipsoidSpec, h: float, g_abs: float = 0.5,
                  eps: float = GLUE_EPS) -> tuple[TransitionMatrix, TransitionMatrix]:
    """``(M_1, M_2)`` from crossings of ``j = 0`` at ``g = +g_abs`` and ``g = -g_abs``."""
    if not h > 0:
        raise ValueError("h must be positive")
    return glue_matrix(spec, h, g_abs, eps), glue_matrix(spec, h, -g_abs, eps)


def assemble_monodromy(m1: TransitionMatrix, m2: TransitionMatrix) -> TransitionMatrix:
    s = TransitionMatrix.of(S)
    return (m2 @ s).inverse() @ (m1 @ s)


# --- normal form ------------------------------------------------------------------

def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, x, y)`` with ``a x + b y = g = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _complete_basis(u: np.ndarray) -> np.ndarray:
    """Unimodular ``U`` whose first two columns span ``u^perp`` and ``u . U[:, 2] = 1``.

    ``u`` must be a primitive integer vector.  Column operations reduce the
    row vector ``u^T`` to ``(0, 0, 1)``.
    """
    row = [int(v) for v in u]
    U = np.eye(3, dtype=np.int64)

    def combine(i, k):
        # Replace columns i, k so that row[i] -> 0 and row[k] -> gcd.
        g, x, y = _ext_gcd(row[k], row[i])
        if g == 0:
            return
        a, b = row[k] // g, row[i] // g
        ci, ck = U[:, i].copy(), U[:, k].copy()
        U[:, k] = x * ck + y * ci
        U[:, i] = -b * ck + a * ci
        row[k], row[i] = g, 0

    combine(0, 2)
    combine(1, 2)
    if row[2] != 1:
        raise ValueError("vector is not primitive")
    return U


def _content(v) -> int:
    g = 0
    for x in v:
        g = math.gcd(g, int(x))
    return g


def normal_form(m: TransitionMatrix) -> tuple[TransitionMatrix, TransitionMatrix]:
    """``(N, T)`` with ``T M T^{-1} = N = I + k e_3 e_1^T`` and ``k > 0`` the content of ``M - I``."""
    a = m.array
    k_mat = a - np.eye(3, dtype=np.int64)
    if np.any(k_mat @ k_mat != 0):
        raise NotParabolic("(M - I)^2 != 0")
    if not np.any(k_mat):
        return IDENTITY, IDENTITY
    # Rank one: K = u w^T with u primitive.
    col = next(c for c in range(3) if np.any(k_mat[:, c]))
    u = k_mat[:, col] // _content(k_mat[:, col])
    piv = next(r for r in range(3) if u[r] != 0)
    w = k_mat[piv] // u[piv]
    if np.any(np.outer(u, w) != k_mat):
        raise NotParabolic("M - I is not of rank one")
    k = _content(w)
    v = w // k
    U = _complete_basis(u)
    # v lies in u^perp; write it in the basis U[:, 0], U[:, 1].
    basis = U[:, :2].astype(float)
    coef = np.linalg.lstsq(basis, v.astype(float), rcond=None)[0]
    p, q = (int(round(c)) for c in coef)
    if np.any(p * U[:, 0] + q * U[:, 1] != v):
        raise NotParabolic("M - I does not annihilate its own image")
    _, x, y = _ext_gcd(p, q)             # p x + q y = 1
    r1 = -y * U[:, 0] + x * U[:, 1]       # det [[p, q], [-y, x]] = 1
    t = np.vstack([v, r1, U[:, 2]]).astype(np.int64)
    if round(np.linalg.det(t.astype(float))) < 0:
        t[1] = -t[1]
    n = np.eye(3, dtype=np.int64)
    n[2, 0] = k
    T = TransitionMatrix.of(t)
    if not is_conjugator(m, T, TransitionMatrix.of(n)):
        raise NotParabolic("conjugator check failed")
    return TransitionMatrix.of(n), T


def is_conjugator(m: TransitionMatrix, t: TransitionMatrix, n: TransitionMatrix) -> bool:
    """Exact integer check of ``T M T^{-1} = N``."""
    return bool(np.array_equal(t.array @ m.array, n.array @ t.array))


# --- loop continuation -------------------------------------------------------------

@dataclass
class MonodromyResult:
    h: float
    loop: list[tuple[float, float]]
    center: tuple[float, float]
    radii: tuple[float, float]
    n_steps: int
    crossings: list[dict]
    M1: TransitionMatrix
    M2: TransitionMatrix
    M: TransitionMatrix
    N: TransitionMatrix
    T: TransitionMatrix
    transported: TransitionMatrix = field(default=IDENTITY)

    def to_json(self) -> dict:
        return {
            "loop": {"h": self.h, "center": list(self.center), "radii": list(self.radii),
                     "n_steps": self.n_steps, "orientation": "counterclockwise"},
            "crossings": self.crossings,
            "M1": self.M1.tolist(), "M2": self.M2.tolist(), "M": self.M.tolist(),
            "N": self.N.tolist(), "T": self.T.tolist(),
        }

    def dump_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


def loop_points(radii, n_steps: int, center=(0.0, 0.0)) -> np.ndarray:
    theta = 2 * math.pi * (np.arange(n_steps) + 0.5) / n_steps
    return np.column_stack([center[0] + radii[0] * np.cos(theta), center[1] + radii[1] * np.sin(theta)])


def _transport(spec, h, pts):
    """Integer frame change accumulated around the closed polygon ``pts``.

    The continued actions are ``frame @ I_natural``.  The frame only changes
    where the path crosses ``j = 0``, by the gluing matrix at the crossing.
    Returns ``(None, None)`` when some step changes the continued Jacobian
    by ``STEP_TOL`` or more, so the caller refines the loop.
    """
    jacs = [action_frame(spec, h, g, j).dI_djgh for j, g in pts]
    frame = np.eye(3, dtype=np.int64)
    crossings = []
    for k in range(len(pts)):
        nxt = (k + 1) % len(pts)
        (j0, g0), (j1, g1) = pts[k], pts[nxt]
        new = frame
        if j0 * j1 < 0:
            gc = g0 + (g1 - g0) * j0 / (j0 - j1)
            glue = glue_matrix(spec, h, gc).array
            new = frame @ glue if j0 > 0 else frame @ _int_inverse(glue)
            crossings.append({"step": k, "j_from": float(j0), "j_to": float(j1), "g": float(gc),
                              "glue": glue.tolist()})
        if np.max(np.abs(new @ jacs[nxt] - frame @ jacs[k])) >= STEP_TOL:
            return None, None
        frame = new
    return frame, crossings


def monodromy(spec: EllipsoidSpec, h: float, radii=(0.5, 0.5), n_steps: int = 64,
              center=(0.0, 0.0), max_steps: int = 4096) -> MonodromyResult:
    """Continue the action frame counterclockwise around an elliptical loop in the ``(j, g)`` plane."""
    spec.require(Symmetry.EQUAL_MIDDLE, what="monodromy")
    if n_steps < 32:
        raise ValueError("n_steps must be at least 32")
    radii = (float(radii[0]), float(radii[1]))
    center = (float(center[0]), float(center[1]))
    while True:
        pts = loop_points(radii, n_steps, center)
        for j, g in pts:
            if not symmetric_image_contains(spec, h, j, g, tol=-1e-12):
                raise LoopOutsideImage(f"loop point (j, g) = ({j:.6g}, {g:.6g}) is not inside the image")
        frame, crossings = _transport(spec, h, [tuple(p) for p in pts])
        if frame is not None:
            break
        n_steps *= 2
        if n_steps > max_steps:
            raise NonIntegerTransition("loop continuation did not resolve within max_steps")
    transported = TransitionMatrix.of(frame)
    m = transported.inverse()
    m1, m2 = glue_matrices(spec, h)
    n, t = normal_form(m)
    return MonodromyResult(h, [tuple(map(float, p)) for p in pts], center, radii, n_steps,
                           crossings, m1, m2, m, n, t, transported)
