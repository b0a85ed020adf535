"""Geodesic integration on the constraint leaf and the j = 0 Poincare section.

The integrator is classical RK4 on the constrained equations followed by a
projection back onto ``C1 = C2 = 0`` after every step.  The section routines
work with the closed-form section identity only; no trajectories are involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContourFailed, OffLeaf, ProjectionFailed
from .geometry import (
    LEAF_TOL,
    EllipsoidSpec,
    PhasePoint,
    Symmetry,
    casimirs,
    project_state,
)
from . import geometry

__all__ = [
    "Trajectory",
    "SectionCurve",
    "project_to_leaf",
    "integrate",
    "conserved_quantities",
    "relative_drift",
    "section_identity",
    "section_gradient",
    "separatrix_section",
]

SCHEME_ID = "rk4+leaf-projection"
PROJECT_TOL = 0.25 * LEAF_TOL


def project_to_leaf(spec: EllipsoidSpec, q) -> PhasePoint:
    q = np.asarray(q, dtype=float)
    c1, _ = casimirs(spec, q)
    if abs(c1) > 1e-3:
        raise OffLeaf(f"|C1| = {abs(c1):.3e} exceeds 1e-3; point is not near the leaf")
    return PhasePoint.from_array(project_state(spec, q))


@dataclass
class Trajectory:
    """Samples ``(t, z)`` of a leaf trajectory; ``z`` rows are ``(x, y)``."""

    t: np.ndarray
    z: np.ndarray
    spec: EllipsoidSpec
    dt: float
    scheme_id: str = SCHEME_ID

    @property
    def samples(self):
        return [(float(t), PhasePoint.from_array(z)) for t, z in zip(self.t, self.z)]

    def __len__(self):
        return self.t.size

    def quantities(self) -> tuple[list[str], np.ndarray]:
        return conserved_quantities(self.spec, self.z)

    def to_csv(self, path) -> None:
        n = self.spec.dim
        names, values = self.quantities()
        header = ["t"] + [f"x{i}" for i in range(n)] + [f"y{i}" for i in range(n)] + names
        table = np.column_stack([self.t, self.z, values])
        write_csv(path, header, table)


def write_csv(path, header, table) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in np.atleast_2d(table):
            fh.write(",".join(format_float(v) for v in row) + "\n")


def format_float(v) -> str:
    return f"{float(v):.17g}"


def conserved_quantities(spec: EllipsoidSpec, z: np.ndarray) -> tuple[list[str], np.ndarray]:
    """Columns ``h`` plus ``f0..f3`` (distinct axes) or ``j, g`` (equal middle axes)."""
    z = np.atleast_2d(z)
    h = 0.5 * np.sum(z[:, spec.dim:] ** 2, axis=1)
    if spec.symmetry is Symmetry.GENERIC and spec.dim == 4:
        f = np.array([geometry.uhlenbeck_integrals(spec, row) for row in z])
        return ["h", "f0", "f1", "f2", "f3"], np.column_stack([h, f])
    if spec.symmetry is Symmetry.EQUAL_MIDDLE:
        jg = np.array([geometry.symmetric_integrals(spec, row)[1:] for row in z])
        return ["h", "j", "g"], np.column_stack([h, jg])
    return ["h"], h[:, None]


def relative_drift(values: np.ndarray, scale: float | None = None) -> np.ndarray:
    """Max deviation of each column from its first entry, over ``scale``.

    Individual integrals can pass through zero, so the default scale is the
    largest absolute initial value across columns (for the F columns this is
    comparable to ``2h``).
    """
    values = np.atleast_2d(values)
    if scale is None:
        scale = float(np.max(np.abs(values[0])))
    return np.max(np.abs(values - values[0]), axis=0) / scale


def _field(ia: np.ndarray, z: np.ndarray, out: np.ndarray, n: int) -> np.ndarray:
    x = z[:n]
    y = z[n:]
    ax = x * ia
    lam = np.dot(y * y, ia) / np.dot(ax, ax)
    out[:n] = y
    np.multiply(ax, -lam, out=out[n:])
    return out


def _project_inplace(ia: np.ndarray, z: np.ndarray, n: int) -> None:
    x = z[:n]
    y = z[n:]
    for _ in range(25):
        c1 = np.dot(x * x, ia) - 1.0
        if abs(c1) <= PROJECT_TOL:
            break
        ax = x * ia
        x -= (c1 / (2.0 * np.dot(ax, ax))) * ax
    else:
        raise ProjectionFailed(f"leaf projection did not converge (C1={c1:.3e})")
    ax = x * ia
    y -= (np.dot(x * y, ia) / np.dot(ax, ax)) * ax


def integrate(spec: EllipsoidSpec, p0, t_end: float, dt: float, *, stride: int = 1) -> Trajectory:
    """RK4 with per-step leaf projection.

    ``dt`` is adjusted down so that an integer number of steps lands exactly
    on ``t_end``; every ``stride``-th state is stored.  The state update uses
    compensated summation so that rounding does not mask the fourth-order
    truncation error over ~1e5 steps.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    z0 = p0.as_array() if isinstance(p0, PhasePoint) else np.asarray(p0, dtype=float)
    c1, c2 = casimirs(spec, z0)
    if max(abs(c1), abs(c2)) > LEAF_TOL:
        raise OffLeaf(f"initial point is off the leaf (C1={c1:.3e}, C2={c2:.3e})")
    steps = max(1, int(round(t_end / dt)))
    h = t_end / steps
    n = spec.dim
    ia = spec.inv
    z = z0.copy()
    k1, k2, k3, k4 = (np.empty_like(z) for _ in range(4))
    tmp = np.empty_like(z)
    carry = np.zeros_like(z)
    nsave = steps // stride + 1
    zs = np.empty((nsave, 2 * n))
    ts = np.empty(nsave)
    zs[0] = z
    ts[0] = 0.0
    saved = 1
    half = 0.5 * h
    sixth = h / 6.0
    for s in range(1, steps + 1):
        _field(ia, z, k1, n)
        np.multiply(k1, half, out=tmp); tmp += z
        _field(ia, tmp, k2, n)
        np.multiply(k2, half, out=tmp); tmp += z
        _field(ia, tmp, k3, n)
        np.multiply(k3, h, out=tmp); tmp += z
        _field(ia, tmp, k4, n)
        k2 += k3
        k2 *= 2.0
        k1 += k4
        k1 += k2
        k1 *= sixth
        k1 -= carry
        np.add(z, k1, out=tmp)
        np.subtract(tmp, z, out=carry)
        carry -= k1
        z[:] = tmp
        _project_inplace(ia, z, n)
        if s % stride == 0:
            zs[saved] = z
            ts[saved] = s * h
            saved += 1
    return Trajectory(ts[:saved], zs[:saved], spec, h)


# --- Poincare section at j = 0 ---------------------------------------------

def _section_parts(alphas, phi):
    a0, a1, _, a3 = alphas
    s2 = np.sin(phi) ** 2
    d = a0 * s2 + a1 * np.cos(phi) ** 2
    kin = (d * s2 / (a3 - a1) + ((a1 + a0) / (a1 - a0) + np.cos(2 * phi)) / 2) / d ** 2
    return s2, d, kin


def section_identity(spec: EllipsoidSpec, h: float, g: float, phi, p_phi):
    """Residual of the energy/``G`` relation on the section ``x_2 = 0, j = 0``.

    The reduced ellipse is parametrized as ``(sqrt(a0) cos phi, sqrt(a1) sin phi)``
    and ``p_phi`` is the conjugate momentum; the residual vanishes exactly on
    the level set ``G = g`` of the energy surface ``H = h``.
    """
    spec.require(Symmetry.EQUAL_MIDDLE, what="section_identity")
    a0, a1, _, a3 = spec.alphas
    phi = np.asarray(phi, dtype=float)
    p_phi = np.asarray(p_phi, dtype=float)
    s2, _, kin = _section_parts(spec.alphas, phi)
    return 2 * h * s2 / (a3 - a1) + g / a1 - p_phi ** 2 * kin


def section_gradient(spec: EllipsoidSpec, h: float, g: float, phi, p_phi):
    """Gradient ``(dr/dphi, dr/dp)`` of the section residual.

    The ``p`` derivative is exact; the ``phi`` derivative uses a complex step,
    which is exact to rounding for this analytic expression.
    """
    a0, a1, _, a3 = spec.alphas
    phi = np.asarray(phi, dtype=float)
    p_phi = np.asarray(p_phi, dtype=float)
    zc = phi + 1j * 1e-20
    s2, _, kin = _section_parts(spec.alphas, zc)
    r = 2 * h * s2 / (a3 - a1) + g / a1 - p_phi ** 2 * kin
    return np.imag(r) / 1e-20, -2 * p_phi * np.real(kin)


def section_hessian(spec: EllipsoidSpec, h: float, g: float, phi: float, p_phi: float,
                    eps: float = 1e-5) -> np.ndarray:
    gp = section_gradient(spec, h, g, phi + eps, p_phi)
    gm = section_gradient(spec, h, g, phi - eps, p_phi)
    hpp = -2 * np.real(_section_parts(spec.alphas, phi)[2])
    hpf = (gp[1] - gm[1]) / (2 * eps)
    hff = (gp[0] - gm[0]) / (2 * eps)
    return np.array([[hff, hpf], [hpf, hpp]])


@dataclass
class SectionCurve:
    """Ordered branches of a section level set on the ``(phi, p_phi)`` cylinder.

    ``branches[k]`` is an ``(m, 2)`` array of ``(phi, p_phi)`` with ``phi`` in
    ``[0, 2 pi)``; ``crossings`` holds self-intersection points.
    """

    branches: list[np.ndarray]
    crossings: np.ndarray
    windings: list[int]
    level: tuple[float, float]
    spec: EllipsoidSpec
    max_residual: float = field(default=0.0)

    @property
    def points(self) -> np.ndarray:
        return np.vstack(self.branches)

    def to_csv(self, path) -> None:
        rows = [(k, phi, p) for k, br in enumerate(self.branches) for phi, p in br]
        write_csv(path, ["branch_id", "phi", "p_phi"], np.array(rows))


def _polish(spec, h, g, pts, tol=1e-12, max_iter=30):
    """Move points onto the zero set by Newton steps along the gradient."""
    out = np.array(pts, dtype=float)
    for _ in range(max_iter):
        r = section_identity(spec, h, g, out[:, 0], out[:, 1])
        if np.max(np.abs(r)) <= tol:
            break
        gphi, gp = section_gradient(spec, h, g, out[:, 0], out[:, 1])
        nrm = gphi ** 2 + gp ** 2
        step = np.where(nrm > 0, r / np.where(nrm > 0, nrm, 1.0), 0.0)
        out[:, 0] -= step * gphi
        out[:, 1] -= step * gp
    return out


def _saddle_newton(spec, h, g, z, max_iter=50):
    """Newton on the gradient of the residual; converges to critical points."""
    z = np.array(z, dtype=float)
    for _ in range(max_iter):
        grad = np.array(section_gradient(spec, h, g, z[0], z[1]), dtype=float)
        hess = section_hessian(spec, h, g, z[0], z[1])
        try:
            dz = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return None
        z -= dz
        if np.max(np.abs(dz)) < 1e-14:
            break
    return z


def _find_crossings(spec, h, g, phis, ps, res, tol):
    """Self-intersections: saddle points of the residual lying on its zero set."""
    gphi, gp = section_gradient(spec, h, g, *np.meshgrid(phis, ps, indexing="ij"))
    gn = np.hypot(gphi, gp)
    scale = np.max(np.abs(res))
    # Seeds: grid nodes where both the residual and its gradient are small
    # relative to their typical size, i.e. candidates for singular zeros.
    cand = (np.abs(res) < 0.05 * scale) & (gn < 0.05 * np.max(gn))
    seeds = np.argwhere(cand)
    found: list[np.ndarray] = []
    for i, k in seeds:
        z = _saddle_newton(spec, h, g, (phis[i], ps[k]))
        if z is None or not (phis[0] <= z[0] <= phis[-1]):
            continue
        if abs(section_identity(spec, h, g, z[0], z[1])) > tol:
            continue
        if np.linalg.det(section_hessian(spec, h, g, z[0], z[1])) >= 0:
            continue
        if all(np.hypot(*(z - f)) > 1e-6 for f in found):
            found.append(z)
    return sorted(found, key=lambda z: z[0])


def _momentum_bound(spec, h, g, phis):
    s2, _, kin = _section_parts(spec.alphas, phis)
    a1, a3 = spec.alphas[1], spec.alphas[3]
    top = 2 * h * s2 / (a3 - a1) + g / a1
    with np.errstate(divide="ignore", invalid="ignore"):
        p2 = np.where(kin > 0, top / kin, 0.0)
    return math.sqrt(max(float(np.max(p2)), 0.0))


def _wrap(phi):
    """Map to ``[0, 2 pi)``, sending values within rounding of ``2 pi`` to 0."""
    out = np.mod(phi, 2 * math.pi)
    return np.where(2 * math.pi - out < 1e-12, 0.0, out)


def separatrix_section(spec: EllipsoidSpec, h: float, n: int = 256, g: float = 0.0,
                       polish_tol: float = 1e-12) -> SectionCurve:
    """Contour ``section_identity = 0`` on an ``n x n`` grid and assemble branches.

    The grid covers ``phi`` in ``[-pi/2, 3 pi/2]`` so that no seam passes
    through a crossing.  Raw marching-squares polylines are cut open around
    every self-intersection, the resulting arms are paired straight through
    each crossing, and the pieces are chained across the seam into closed
    loops on the cylinder.
    """
    from skimage.measure import find_contours

    spec.require(Symmetry.EQUAL_MIDDLE, what="separatrix_section")
    if n < 64:
        raise ValueError("n must be at least 64")
    lo, hi = -0.5 * math.pi, 1.5 * math.pi
    phis = np.linspace(lo, hi, n)
    pmax = 1.3 * _momentum_bound(spec, h, g, phis)
    if pmax <= 0:
        raise ContourFailed(f"empty level set for h={h}, g={g}")
    ps = np.linspace(-pmax, pmax, n)
    res = section_identity(spec, h, g, *np.meshgrid(phis, ps, indexing="ij"))
    raw = find_contours(res, 0.0)
    if not raw:
        raise ContourFailed(f"empty level set for h={h}, g={g}")
    dphi = phis[1] - phis[0]
    dp = ps[1] - ps[0]
    polylines = [np.column_stack([lo + c[:, 0] * dphi, -pmax + c[:, 1] * dp]) for c in raw]

    crossings = _find_crossings(spec, h, g, phis, ps, res, tol=1e-12)
    radius = 4.0 * max(dphi, dp)

    # Cut polylines into arms that avoid the crossing disks.
    arms: list[np.ndarray] = []
    for line in polylines:
        keep = np.ones(len(line), dtype=bool)
        for c in crossings:
            keep &= np.hypot(line[:, 0] - c[0], line[:, 1] - c[1]) > radius
        start = None
        for i, flag in enumerate(np.append(keep, False)):
            if flag and start is None:
                start = i
            elif not flag and start is not None:
                if i - start >= 2:
                    arms.append(line[start:i])
                start = None
    if not arms:
        raise ContourFailed("contouring produced no usable arms")

    # Every arm end is either at a crossing or on the seam.
    def classify(pt):
        for ci, c in enumerate(crossings):
            if np.hypot(*(pt - c)) < 2.5 * radius:
                return ("x", ci)
        if abs(pt[0] - lo) < 2 * dphi:
            return ("lo", None)
        if abs(pt[0] - hi) < 2 * dphi:
            return ("hi", None)
        raise ContourFailed(f"arm ends in the interior at {pt}; grid too coarse")

    ends = []  # (arm index, side 0=start/1=end, kind, crossing, point, outward dir)
    for ai, arm in enumerate(arms):
        for side, pt in ((0, arm[0]), (1, arm[-1])):
            kind, ci = classify(pt)
            ends.append((ai, side, kind, ci, pt))

    partner: dict[tuple[int, int], tuple[int, int]] = {}
    for ci, c in enumerate(crossings):
        group = [e for e in ends if e[2] == "x" and e[3] == ci]
        dirs = [(e[4] - c) / np.hypot(*(e[4] - c)) for e in group]
        unused = set(range(len(group)))
        while len(unused) >= 2:
            i = min(unused)
            unused.discard(i)
            j = min(unused, key=lambda k: float(np.dot(dirs[i], dirs[k])))
            unused.discard(j)
            partner[group[i][:2]] = group[j][:2]
            partner[group[j][:2]] = group[i][:2]
    los = [e for e in ends if e[2] == "lo"]
    his = [e for e in ends if e[2] == "hi"]
    for e in los:
        if not his:
            raise ContourFailed("unmatched seam end")
        m = min(his, key=lambda f: abs(f[4][1] - e[4][1]))
        his.remove(m)
        partner[e[:2]] = m[:2]
        partner[m[:2]] = e[:2]

    # Walk the arm graph into loops.
    crossing_of = {e[:2]: e[3] for e in ends if e[2] == "x"}
    visited = set()
    branches, windings = [], []
    for start in range(len(arms)):
        if start in visited:
            continue
        pieces = []
        ai, entry = start, 0
        while ai not in visited:
            visited.add(ai)
            arm = arms[ai] if entry == 0 else arms[ai][::-1]
            pieces.append(arm)
            exit_key = (ai, 1 - entry)
            if exit_key not in partner:
                raise ContourFailed("open arm end; level set not closed")
            if exit_key in crossing_of:
                pieces.append(crossings[crossing_of[exit_key]][None, :])
            ai, entry = partner[exit_key]
        pts = np.vstack(pieces)
        # Seam jumps are exactly one period and wrap to small steps.
        steps = np.diff(np.append(pts[:, 0], pts[0, 0]))
        steps = np.mod(steps + math.pi, 2 * math.pi) - math.pi
        branches.append(pts)
        windings.append(int(round(abs(steps.sum()) / (2 * math.pi))))

    crossings_arr = np.array(crossings).reshape(-1, 2)
    polished, worst = [], 0.0
    for br in branches:
        is_cross = np.zeros(len(br), dtype=bool)
        for c in crossings_arr:
            is_cross |= np.all(br == c, axis=1)
        out = br.copy()
        out[~is_cross] = _polish(spec, h, g, br[~is_cross], tol=polish_tol)
        worst = max(worst, float(np.max(np.abs(section_identity(spec, h, g, out[:, 0], out[:, 1])))))
        out[:, 0] = _wrap(out[:, 0])
        polished.append(out)
    if crossings_arr.size:
        crossings_arr = crossings_arr.copy()
        crossings_arr[:, 0] = _wrap(crossings_arr[:, 0])
    return SectionCurve(polished, crossings_arr, windings, (h, g), spec, worst)
