"""Acceptance checks with fixed tolerances and runtime budgets.

Each check returns ``(passed, detail)``; :func:`run` times it and also fails
it when the runtime budget is exceeded.  ``python -m
ellipsoid_geodesics.acceptance`` prints one line per check.
"""
from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import actions, bifurcation, dynamics, elliptic, monodromy, separation
from .geometry import (
    EllipsoidSpec,
    angular_momentum,
    bracket,
    energy,
    random_leaf_point,
    third_integral,
    uhlenbeck_gradients,
    uhlenbeck_integrals,
    uhlenbeck_term,
)

GENERIC = (1.0 / 3.0, 1.0, 3.0, 4.0)
SYMMETRIC = (1.0, 2.0, 2.0, 4.0)
SEED = 20240607


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.title} ({self.seconds:.2f}s / {self.budget:g}s) {self.detail}"


def check_involution():
    spec = EllipsoidSpec(GENERIC)
    sym = EllipsoidSpec(SYMMETRIC)
    rng = np.random.default_rng(SEED)
    worst_pb = worst_sum = worst_rel = worst_fg = 0.0
    for _ in range(100):
        p = random_leaf_point(spec, rng, h=rng.uniform(0.1, 2.0))
        f = uhlenbeck_integrals(spec, p)
        grads = uhlenbeck_gradients(spec, p)
        for i in range(4):
            for k in range(i + 1, 4):
                worst_pb = max(worst_pb, abs(bracket(spec, p, grads[i], grads[k])))
        worst_sum = max(worst_sum, abs(f.sum() - 2 * energy(p)))
        worst_rel = max(worst_rel, abs(np.sum(f / spec.a)))
    a0, a1, _, a3 = sym.alphas
    for _ in range(100):
        p = random_leaf_point(sym, rng, h=rng.uniform(0.1, 2.0))
        g = third_integral(sym, p)[0]
        j = angular_momentum(p)[0]
        res = (uhlenbeck_term(sym, p, 0)[0] / a0 + g / a1 - j * j / a1 ** 2
               + uhlenbeck_term(sym, p, 3)[0] / a3)
        worst_fg = max(worst_fg, abs(res))
    ok = worst_pb <= 1e-10 and worst_sum <= 1e-12 and worst_rel <= 1e-12 and worst_fg <= 1e-12
    return ok, (f"max|{{Fi,Fj}}|={worst_pb:.1e} max|sumF-2H|={worst_sum:.1e} "
                f"max|sumF/a|={worst_rel:.1e} max|FG relation|={worst_fg:.1e}")


def check_conservation():
    spec = EllipsoidSpec(GENERIC)
    p0 = random_leaf_point(spec, np.random.default_rng(SEED), h=0.5)
    drifts = []
    for dt in (1e-3, 5e-4):
        traj = dynamics.integrate(spec, p0, 100.0, dt, stride=100)
        _, values = traj.quantities()
        drifts.append(float(np.max(dynamics.relative_drift(values[:, 1:]))))
    ratio = drifts[0] / drifts[1] if drifts[1] > 0 else math.inf
    ok = drifts[0] <= 1e-8 and ratio >= 12.0
    return ok, f"drift(dt=1e-3)={drifts[0]:.2e} drift(dt=5e-4)={drifts[1]:.2e} ratio={ratio:.1f}"


def check_generic_diagram():
    spec = EllipsoidSpec(GENERIC)
    a = spec.a
    diag = bifurcation.generic_diagram(spec, 0.5)
    exact = True
    for i in range(4):
        for k in range(i + 1, 4):
            loc = diag.point(f"({i}{k})").location
            exact &= loc.s1 == a[i] * a[k] and loc.s2 == -a[i] - a[k]
    worst = 0.0
    for d, target in ((a[1], (1.0, -2.0)), (a[2], (9.0, -6.0))):
        s1, s2 = target
        on_line = 2 * 0.5 * d * d + s2 * d + s1
        on_arc = max(abs(s1 - 2 * 0.5 * d * d), abs(s2 + 4 * 0.5 * d))
        worst = max(worst, abs(on_line), on_arc)
    for label, target in (("tangency 1", (1.0, -2.0)), ("tangency 2", (9.0, -6.0))):
        loc = diag.point(label).location
        worst = max(worst, abs(loc.s1 - target[0]), abs(loc.s2 - target[1]))
    expected = {(1, 2): "hyperbolic_hyperbolic", (0, 3): "elliptic_elliptic", (0, 1): "elliptic_elliptic",
                (2, 3): "elliptic_elliptic", (0, 2): "elliptic_hyperbolic", (1, 3): "elliptic_hyperbolic"}
    types_ok = all(diag.point(f"({i}{k})").type == t for (i, k), t in expected.items())
    ok = exact and worst <= 1e-12 and types_ok
    return ok, f"corank-2 exact={exact} tangency err={worst:.1e} types={'ok' if types_ok else 'mismatch'}"


def check_symmetric_diagram():
    spec = EllipsoidSpec(SYMMETRIC)
    (cl, kl), (cu, ku) = bifurcation.boundary_parabolas(spec, 0.5)
    par_err = max(abs(cl + 1), abs(kl + 1), abs(cu - 2), abs(ku - 0.5))
    diag = bifurcation.symmetric_diagram(spec, 0.5)
    corner_err = 0.0
    for label, sgn in (("corner +", 1), ("corner -", -1)):
        loc = diag.point(label).location
        corner_err = max(corner_err, abs(loc.j - sgn * math.sqrt(2)), abs(loc.g - 1))
    ff = diag.point("focus-focus").eigenvalues
    ff_err = bifurcation.match_spectra(bifurcation.numeric_focus_focus(spec, 0.5), ff)
    ok = par_err <= 1e-12 and corner_err <= 1e-12 and ff_err <= 1e-8
    return ok, f"parabola err={par_err:.1e} corner err={corner_err:.1e} focus-focus FD err={ff_err:.1e}"


def check_separatrix():
    spec = EllipsoidSpec(SYMMETRIC)
    curve = dynamics.separatrix_section(spec, 0.5)
    cr = curve.crossings
    n_ok = cr.shape[0] == 2
    err = math.inf
    if n_ok:
        err = max(np.max(np.abs(cr[0])), abs(cr[1, 0] - math.pi), abs(cr[1, 1]))
    wind_ok = curve.windings == [1, 1]
    ok = n_ok and err <= 1e-8 and wind_ok
    return ok, f"crossings={cr.shape[0]} position err={err:.1e} windings={curve.windings}"


def check_action_limits():
    spec = EllipsoidSpec(SYMMETRIC)
    worst = 0.0
    for g, big in ((-0.5, 1), (0.5, 0)):
        for j in (1e-4, -1e-4):
            d = actions.action_gradient(spec, 0.5, g, j)
            worst = max(worst, abs(d[big] + math.copysign(1.0, j)), abs(d[1 - big]))
    limits_ok = worst <= 1e-2
    stated = SYMMETRIC[1] / (2 * (SYMMETRIC[3] - SYMMETRIC[1]) * (SYMMETRIC[1] - SYMMETRIC[0]) * 1j * 1.0)
    contour = actions.residue_contour(spec, 0.5, 0.5, 1.0)
    res_err = abs(stated - contour) / abs(contour)
    ok = limits_ok and res_err <= 1e-8
    return ok, (f"limit err={worst:.1e} ({'ok' if limits_ok else 'fail'}); residue stated={stated:.3g} "
                f"contour={contour.real:.2g}{contour.imag:+.12g}j rel err={res_err:.1e}")


def check_monodromy():
    spec = EllipsoidSpec(SYMMETRIC)
    res = monodromy.monodromy(spec, 0.5, (0.5, 0.5), 64)
    m_ok = res.M == [[1, 0, 0], [2, 1, 0], [-2, 0, 1]]
    n_ok = res.N == [[1, 0, 0], [0, 1, 0], [2, 0, 1]]
    away = monodromy.monodromy(spec, 0.5, (0.3, 0.3), 64, center=(0.0, 1.5))
    id_ok = away.M == monodromy.IDENTITY
    return m_ok and n_ok and id_ok, f"M={res.M.tolist()} N={res.N.tolist()} non-enclosing M={away.M.tolist()}"


def check_revolution():
    h, a0, a1, a3 = 1.0, 1.0, 2.0, 4.0
    worst = 0.0
    ends_ok = True
    for axis in (a0, a3):
        for jh in np.linspace(-1, 1, 21):
            params = elliptic.RevolutionParams.from_jhat(h, float(jh), axis, a1)
            closed = elliptic.revolution_action(params)
            quad = elliptic.revolution_action_quadrature(params)
            worst = max(worst, abs(closed - quad))
        for jh in (-1.0, 1.0):
            ends_ok &= elliptic.revolution_action(elliptic.RevolutionParams.from_jhat(h, jh, axis, a1)) == 0.0
    spec = EllipsoidSpec(SYMMETRIC)
    hb = 0.5
    boundary = 0.0
    for j in (0.2, 0.5, 0.8):
        g_lo = -1 + j * j + 1e-8
        g_hi = 2 - j * j / 2 - 1e-8
        i3 = actions.action_I3(spec, hb, g_lo, j)
        i2 = actions.action_I2(spec, hb, g_hi, j)
        boundary = max(boundary,
                       abs(i3 - elliptic.revolution_action(elliptic.RevolutionParams(hb, j, 4.0, 2.0))),
                       abs(i2 - elliptic.revolution_action(elliptic.RevolutionParams(hb, j, 1.0, 2.0))))
    ok = worst <= 1e-9 and ends_ok and boundary <= 1e-6
    return ok, f"closed vs quadrature={worst:.1e} I(+-1)=0: {ends_ok} boundary err={boundary:.1e}"


def check_roundtrip():
    spec = EllipsoidSpec(GENERIC)
    rng = np.random.default_rng(SEED)
    worst_x = worst_l = 0.0
    for _ in range(50):
        x = random_leaf_point(spec, rng, margin=0.1).x
        lam = separation.to_ellipsoidal(spec, x).lambdas
        back = np.sign(x) * np.sqrt(separation.from_ellipsoidal(spec, lam))
        worst_x = max(worst_x, float(np.max(np.abs(back - x))))
        lam2 = separation.to_ellipsoidal(spec, back).lambdas
        worst_l = max(worst_l, float(np.max(np.abs(lam2 - lam))))
    ok = worst_x <= 1e-10 and worst_l <= 1e-10
    return ok, f"x roundtrip={worst_x:.1e} lambda roundtrip={worst_l:.1e}"


CRITERIA: list[tuple[int, str, float, Callable]] = [
    (1, "involution and relations", 5.0, check_involution),
    (2, "conservation and dt refinement", 30.0, check_conservation),
    (3, "generic bifurcation diagram", 1.0, check_generic_diagram),
    (4, "equal-middle bifurcation diagram", 5.0, check_symmetric_diagram),
    (5, "separatrix section", 5.0, check_separatrix),
    (6, "action derivative limits and residue", 10.0, check_action_limits),
    (7, "monodromy", 60.0, check_monodromy),
    (8, "revolution actions", 10.0, check_revolution),
    (9, "coordinate roundtrips", 1.0, check_roundtrip),
]


def run(number: int) -> CriterionResult:
    for num, title, budget, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failed criterion, not an aborted suite
                ok, detail = False, f"raised {type(exc).__name__}: {exc}"
            dt = time.perf_counter() - t0
            if dt > budget:
                ok, detail = False, detail + " (over time budget)"
            return CriterionResult(num, title, bool(ok), detail, dt, budget)
    raise KeyError(number)


def run_all(numbers=None) -> list[CriterionResult]:
    return [run(n) for n, *_ in CRITERIA if numbers is None or n in numbers]


def main(argv=None) -> int:
    results = run_all()
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
