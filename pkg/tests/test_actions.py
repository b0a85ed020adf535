import math

import numpy as np
import pytest

from ellipsoid_geodesics.actions import (
    action_I2,
    action_I3,
    action_frame,
    action_gradient,
    frequencies,
    residue_at_pole,
    residue_contour,
)
from ellipsoid_geodesics.bifurcation import boundary_parabolas
from ellipsoid_geodesics.dynamics import integrate
from ellipsoid_geodesics.errors import OutsideImage, PoleCollision, WrongSymmetry, ZeroMomentum
from ellipsoid_geodesics.monodromy import glue_matrix
from ellipsoid_geodesics.separation import a_poly, point_from_separated, qtilde

H = 0.5


def random_levels(spec, n, seed):
    """Random ``(h, g, |j|)`` strictly inside the image."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        h = rng.uniform(0.2, 2.0)
        (cl, kl), (cu, ku) = boundary_parabolas(spec, h)
        jmax = math.sqrt(2 * spec.alphas[1] * h)
        j = rng.uniform(0.05, 0.9) * jmax
        lo, hi = cl - kl * j * j, cu - ku * j * j
        g = lo + rng.uniform(0.05, 0.95) * (hi - lo)
        out.append((h, g, j))
    return out


def adaptive_gauss_kronrod(f, a, b, tol):
    """Interval halving with a 7/15-point embedded pair until each piece meets its share of ``tol``."""
    xg, wg = np.polynomial.legendre.leggauss(7)
    xk, wk = np.polynomial.legendre.leggauss(15)
    total, stack = 0.0, [(a, b, tol)]
    while stack:
        lo, hi, t = stack.pop()
        m, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
        coarse, fine = r * wg @ f(m + r * xg), r * wk @ f(m + r * xk)
        if abs(coarse - fine) <= t:
            total += fine
        else:
            stack += [(lo, m, t / 2), (m, hi, t / 2)]
    return total


def band_oracle(spec, qt, lo, hi):
    # z = c + r sin u removes the square-root endpoint behaviour.
    c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def f(u):
        z = c + r * np.sin(u)
        p2 = -qt(z) / (4 * a_poly(spec, z))
        return np.sqrt(np.maximum(p2, 0.0)) * r * np.cos(u)

    return 2 / math.pi * adaptive_gauss_kronrod(f, -math.pi / 2, math.pi / 2, 1e-12)


def test_actions_match_adaptive_oracle(symmetric):
    qt = qtilde(symmetric, H, 0.5, 0.5)
    assert action_I2(symmetric, H, 0.5, 0.5) == pytest.approx(band_oracle(symmetric, qt, 1.0, qt.r1), abs=1e-9)
    assert action_I3(symmetric, H, 0.5, 0.5) == pytest.approx(band_oracle(symmetric, qt, qt.r2, 4.0), abs=1e-9)


def test_frame_invariants(symmetric):
    fr = action_frame(symmetric, H, 0.3, -0.4)
    assert fr.I[0] == -0.4
    assert fr.I[1] >= 0 and fr.I[2] >= 0
    np.testing.assert_array_equal(fr.dI_djgh[0], [1.0, 0.0, 0.0])
    assert fr.side == "j_neg"
    assert action_frame(symmetric, H, 0.3, 0.4).side == "j_pos"


def test_actions_even_and_derivatives_odd(symmetric):
    for h, g, j in random_levels(symmetric, 20, seed=31):
        a = action_frame(symmetric, h, g, j)
        b = action_frame(symmetric, h, g, -j)
        np.testing.assert_allclose(a.I[1:], b.I[1:], atol=1e-9)
        np.testing.assert_allclose(a.dI_djgh[1:, 0], -b.dI_djgh[1:, 0], atol=1e-9)
        np.testing.assert_allclose(a.dI_djgh[1:, 1:], b.dI_djgh[1:, 1:], atol=1e-9)


def test_gradient_matches_finite_differences(symmetric):
    step = 1e-5
    for h, g, j in random_levels(symmetric, 10, seed=32):
        d2, d3 = action_gradient(symmetric, h, g, j)
        fd2 = (action_I2(symmetric, h, g, j + step) - action_I2(symmetric, h, g, j - step)) / (2 * step)
        fd3 = (action_I3(symmetric, h, g, j + step) - action_I3(symmetric, h, g, j - step)) / (2 * step)
        assert d2 == pytest.approx(fd2, abs=1e-6)
        assert d3 == pytest.approx(fd3, abs=1e-6)


def test_g_and_h_derivatives_match_finite_differences(symmetric):
    h, g, j = 0.7, 0.2, 0.6
    jac = action_frame(symmetric, h, g, j).dI_djgh
    step = 1e-5
    dg = (action_frame(symmetric, h, g + step, j).I - action_frame(symmetric, h, g - step, j).I) / (2 * step)
    dh = (action_frame(symmetric, h + step, g, j).I - action_frame(symmetric, h - step, g, j).I) / (2 * step)
    np.testing.assert_allclose(jac[:, 1], dg, atol=1e-6)
    np.testing.assert_allclose(jac[:, 2], dh, atol=1e-6)


def test_band_collapse_at_lower_boundary(symmetric):
    (cl, kl), (cu, ku) = boundary_parabolas(symmetric, H)
    for j in (0.0, 0.3, 0.9):
        g = cl - kl * j * j + 1e-8
        if j == 0.0:
            g = -1.0 + 1e-8
        assert action_I2(symmetric, H, g, j) <= 1e-6
        g_top = cu - ku * j * j - 1e-8
        assert action_I3(symmetric, H, g_top, j) <= 1e-6


@pytest.mark.parametrize("g,collapsing,limit", [(-0.5, 2, 1.0), (0.5, 1, 1.0)])
def test_derivative_limits(symmetric, g, collapsing, limit):
    for sign in (1, -1):
        d = action_gradient(symmetric, H, g, sign * 1e-4)
        assert d[collapsing - 1] == pytest.approx(-sign * limit, abs=1e-2)
        assert d[2 - collapsing] == pytest.approx(0.0, abs=1e-2)


@pytest.mark.parametrize("g", [0.5, -0.5])
def test_glued_frame_continuous_across_zero(symmetric, g):
    eps = 1e-4
    glue = glue_matrix(symmetric, H, g).array
    plus = action_frame(symmetric, H, g, eps)
    minus = action_frame(symmetric, H, g, -eps)
    assert np.max(np.abs(glue @ minus.I - plus.I)) <= 1e-3
    assert np.max(np.abs(glue @ minus.dI_djgh - plus.dI_djgh)) <= 1e-3


def test_actions_continuous_in_j_through_zero(symmetric):
    values = [action_frame(symmetric, H, 0.5, j).I[1:] for j in (-1e-6, 0.0, 1e-6)]
    np.testing.assert_allclose(values[0], values[1], atol=1e-5)
    np.testing.assert_allclose(values[2], values[1], atol=1e-5)


def test_pole_collision_guards(symmetric):
    with pytest.raises(PoleCollision):
        action_I2(symmetric, H, 0.0, 0.0)
    with pytest.raises(PoleCollision):
        action_I2(symmetric, H, 1e-8, 0.0)
    with pytest.raises(PoleCollision):
        action_I3(symmetric, H, 0.0, 1e-8)


def test_outside_image_and_symmetry(symmetric, generic):
    with pytest.raises(OutsideImage):
        action_I2(symmetric, H, 2.5, 0.1)
    with pytest.raises(WrongSymmetry):
        action_I2(generic, H, 0.1, 0.1)


def test_residue_contour_matches_closed_form(symmetric):
    for j in (1.0, 0.5, -0.7):
        closed = residue_at_pole(symmetric, j)
        numeric = residue_contour(symmetric, H, 0.2, j)
        assert abs(numeric - closed) <= 1e-8 * abs(closed)


def test_residue_scales_inversely_with_momentum(symmetric):
    assert residue_at_pole(symmetric, 2.0) == pytest.approx(residue_at_pole(symmetric, 1.0) / 2, rel=1e-15)
    assert residue_at_pole(symmetric, 1.0).real == 0.0
    with pytest.raises(ZeroMomentum):
        residue_at_pole(symmetric, 0.0)


def test_frequency_matches_band_oscillation(symmetric):
    h, g, j = 0.5, 0.4, 0.3
    qt = qtilde(symmetric, h, g, j)
    p = point_from_separated(symmetric, h, g, j, 0.5 * (1 + qt.r1), 0.5 * (qt.r2 + 4), theta=0.2)
    omega = frequencies(symmetric, h, g, j)
    tr = integrate(symmetric, p, 40.0, 2e-3)
    x3, t = tr.z[:, 3], tr.t
    idx = np.flatnonzero(np.sign(x3[1:]) != np.sign(x3[:-1]))
    tc = t[idx] - x3[idx] * (t[idx + 1] - t[idx]) / (x3[idx + 1] - x3[idx])
    half_period = np.mean(np.diff(tc))
    assert half_period == pytest.approx(math.pi / omega[2], rel=1e-2)


def test_boundary_actions_reduce_to_revolution(symmetric):
    # On the lower boundary the x_0 direction is frozen and I_3 is the action of
    # the ellipsoid of revolution with axes (4, 2); on the upper one I_2 uses (1, 2).
    from ellipsoid_geodesics.elliptic import RevolutionParams, revolution_action

    (cl, kl), (cu, ku) = boundary_parabolas(symmetric, H)
    for j in (-0.9, -0.4, 0.1, 0.6, 0.95):
        i3 = action_I3(symmetric, H, cl - kl * j * j, j)
        i2 = action_I2(symmetric, H, cu - ku * j * j, j)
        assert abs(i3 - revolution_action(RevolutionParams(H, j, 4.0, 2.0))) <= 1e-8
        assert abs(i2 - revolution_action(RevolutionParams(H, j, 1.0, 2.0))) <= 1e-8
