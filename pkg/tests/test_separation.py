import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellipsoid_geodesics.errors import (
    AxisPoint,
    CoordinateSingularity,
    LeafIncompatible,
    OutsideImage,
    PoleHit,
    WrongSymmetry,
)
from ellipsoid_geodesics.geometry import (
    EllipsoidSpec,
    PhasePoint,
    random_leaf_point,
    symmetric_integrals,
    uhlenbeck_integrals,
)
from ellipsoid_geodesics.separation import (
    EllipsoidalPoint,
    SeparationConstants,
    a_poly,
    constants_to_integrals,
    cotangent_momenta,
    from_ellipsoidal,
    momenta_on_curve,
    partial_fraction_residual,
    point_from_separated,
    qtilde,
    reduce,
    reduced_casimirs,
    reduced_energies,
    separation_constants,
    so2_invariants,
    to_ellipsoidal,
)

from conftest import GENERIC_ALPHAS, SYMMETRIC_ALPHAS, leaf_points

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_interlaced(spec, rng):
    a = spec.a
    return np.array([0.0] + [rng.uniform(a[i - 1], a[i]) for i in range(1, 4)])


def test_roundtrip_positions(generic):
    for p in leaf_points(generic, 50, seed=11, margin=0.05):
        lam = to_ellipsoidal(generic, p.x)
        lam.check_interlacing(generic.alphas)
        assert lam.lambdas[0] == 0.0
        np.testing.assert_allclose(from_ellipsoidal(generic, lam), p.x ** 2, atol=1e-10)


def test_roots_interlace_exactly(generic):
    a = generic.a
    for p in leaf_points(generic, 20, seed=12, margin=0.05):
        lam = to_ellipsoidal(generic, p.x).lambdas
        for i in range(1, 4):
            assert a[i - 1] <= lam[i] <= a[i]


def test_coordinate_singularity(generic):
    x = np.array([math.sqrt(1 / 3), 0.0, 0.0, 0.0])
    with pytest.raises(CoordinateSingularity):
        to_ellipsoidal(generic, x)


def test_off_surface_rejected(generic):
    with pytest.raises(ValueError):
        to_ellipsoidal(generic, np.array([0.3, 0.3, 0.3, 0.3]))


def test_from_ellipsoidal_properties(generic):
    rng = np.random.default_rng(13)
    for _ in range(50):
        lam = random_interlaced(generic, rng)
        sq = from_ellipsoidal(generic, lam)
        assert abs(np.sum(sq * generic.inv) - 1.0) <= 1e-12
        # Trace of the confocal polynomial identity.
        assert abs(sq.sum() - (generic.a.sum() - lam.sum())) <= 1e-12


def test_from_ellipsoidal_endpoint_gives_zero(generic):
    lam = np.array([0.0, 1.0, 2.0, 3.5])
    assert from_ellipsoidal(generic, lam)[1] == 0.0


def test_from_ellipsoidal_rejects_bad_input(generic, symmetric):
    with pytest.raises(ValueError):
        from_ellipsoidal(generic, np.array([0.0, 2.0, 1.5, 3.5]))
    with pytest.raises(WrongSymmetry):
        from_ellipsoidal(symmetric, np.array([0.0, 1.5, 2.0, 3.0]))


def test_separation_constants_zero():
    sc = separation_constants(EllipsoidSpec(GENERIC_ALPHAS), np.zeros(4))
    assert (sc.h, sc.s1, sc.s2) == (0.0, 0.0, 0.0)


def test_separation_constants_match_rational_assembly(generic):
    rng = np.random.default_rng(14)
    for p in leaf_points(generic, 10, seed=14):
        f = uhlenbeck_integrals(generic, p)
        sc = separation_constants(generic, f)
        # Interpolate Q(z) = A(z) sum F_i/(z - a_i) through sample points.
        z = rng.uniform(-5, 10, 7)
        q = a_poly(generic, z) * np.sum(f[None, :] / (z[:, None] - generic.a[None, :]), axis=1)
        coeffs = np.polyfit(z, q, 3)
        assert coeffs[0] == pytest.approx(2 * sc.h, abs=1e-11)
        assert coeffs[1] == pytest.approx(sc.s2, abs=1e-11)
        assert coeffs[2] == pytest.approx(sc.s1, abs=1e-11)
        assert abs(coeffs[3]) <= 1e-10
        np.testing.assert_allclose(constants_to_integrals(generic, sc), f, atol=1e-12)


def test_separation_constants_reject_incompatible(generic):
    with pytest.raises(LeafIncompatible):
        separation_constants(generic, np.array([1.0, 0.0, 0.0, 0.0]))


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_rational_identity(seed):
    spec = EllipsoidSpec(GENERIC_ALPHAS)
    rng = np.random.default_rng(seed)
    f = uhlenbeck_integrals(spec, random_leaf_point(spec, rng))
    sc = separation_constants(spec, f)
    z = rng.uniform(-10, 10, 7)
    z = z[np.min(np.abs(z[:, None] - spec.a[None, :]), axis=1) > 1e-3]
    lhs = np.sum(f[None, :] / (z[:, None] - spec.a[None, :]), axis=1)
    np.testing.assert_allclose(lhs, sc.q(z) / a_poly(spec, z), atol=1e-11)


def test_generic_momenta_match_cotangent_lift(generic):
    """p_i^2 from the separated curve against a finite-difference chain rule."""
    for p in leaf_points(generic, 20, seed=15, margin=0.1):
        sc = separation_constants(generic, uhlenbeck_integrals(generic, p))
        lam = to_ellipsoidal(generic, p.x).lambdas
        signs = np.sign(p.x)
        def x_of(lam_i, i):
            shifted = lam.copy()
            shifted[i] = lam_i
            return signs * np.sqrt(from_ellipsoidal(generic, shifted))

        for i in (1, 2, 3):
            # Keep the stencil well inside the band; x is not smooth at its ends.
            step = 1e-3 * min(lam[i] - generic.a[i - 1], generic.a[i] - lam[i])
            dx = (8 * (x_of(lam[i] + step, i) - x_of(lam[i] - step, i))
                  - (x_of(lam[i] + 2 * step, i) - x_of(lam[i] - 2 * step, i))) / (12 * step)
            p_fd = float(np.dot(p.y, dx))
            assert momenta_on_curve(generic, lam[i], sc) == pytest.approx(p_fd ** 2, abs=1e-9)
        _, mom = cotangent_momenta(generic, p)
        for i in (1, 2, 3):
            assert momenta_on_curve(generic, lam[i], sc) == pytest.approx(mom[i - 1] ** 2, abs=1e-10)


def test_momenta_vanish_at_turning_point(symmetric):
    qt = qtilde(symmetric, 0.5, 0.5, 0.5)
    assert momenta_on_curve(symmetric, qt.r1, qt) == pytest.approx(0.0, abs=1e-15)
    assert momenta_on_curve(symmetric, qt.r2, qt) == pytest.approx(0.0, abs=1e-15)


def test_momenta_pole_hit(symmetric):
    qt = qtilde(symmetric, 0.5, 0.5, 0.5)
    with pytest.raises(PoleHit):
        momenta_on_curve(symmetric, 2.0, qt)


def test_symmetric_momenta_sign_on_bands(symmetric):
    qt = qtilde(symmetric, 0.5, 0.3, 0.4)
    band2 = np.linspace(1.0, qt.r1, 102)[1:-1]
    band3 = np.linspace(qt.r2, 4.0, 102)[1:-1]
    gap = np.linspace(qt.r1, qt.r2, 102)[1:-1]
    gap = gap[np.abs(gap - 2.0) > 1e-6]
    assert all(momenta_on_curve(symmetric, z, qt) >= 0 for z in np.concatenate([band2, band3]))
    assert all(momenta_on_curve(symmetric, z, qt) < 0 for z in gap)


def test_qtilde_example(symmetric):
    qt = qtilde(symmetric, 0.5, -0.5, 0.0)
    assert (qt.r1, qt.r2) == (1.5, 2.0)


@pytest.mark.parametrize("g", [-0.9, -0.3, 0.2, 1.7])
def test_qtilde_root_at_pole_when_j_vanishes(symmetric, g):
    qt = qtilde(symmetric, 0.5, g, 0.0)
    if g < 0:
        assert qt.r2 == 2.0 and qt.r1 < 2.0
    else:
        assert qt.r1 == 2.0 and qt.r2 > 2.0


def test_qtilde_outside_image(symmetric):
    with pytest.raises(OutsideImage):
        qtilde(symmetric, 0.5, 2.5, 0.0)
    with pytest.raises(OutsideImage):
        qtilde(symmetric, 0.5, -1.2, 0.1)


def test_partial_fraction_identity(symmetric):
    rng = np.random.default_rng(16)
    for p in leaf_points(symmetric, 10, seed=16):
        z = rng.uniform(-5, 10, 7)
        assert np.max(np.abs(partial_fraction_residual(symmetric, p, z))) <= 1e-12


def test_qtilde_roots_within_bands(symmetric):
    for p in leaf_points(symmetric, 30, seed=17):
        h, j, g = symmetric_integrals(symmetric, p)
        qt = qtilde(symmetric, h, g, j, tol=1e-10)
        assert 1.0 - 1e-10 <= qt.r1 <= 2.0 <= qt.r2 <= 4.0 + 1e-10


def test_qtilde_roots_continuous(symmetric):
    t = np.linspace(0, 1, 2001)
    step = t[1] - t[0]
    js = -0.8 + 1.6 * t
    gs = 0.1 + 0.5 * t
    roots = np.array([[qtilde(symmetric, 0.5, g, j).r1, qtilde(symmetric, 0.5, g, j).r2] for j, g in zip(js, gs)])
    assert np.max(np.abs(np.diff(roots, axis=0))) <= 10 * step


def test_so2_relation(symmetric):
    for p in leaf_points(symmetric, 20, seed=18):
        inv = so2_invariants(p)
        assert inv.pi1 >= 0 and inv.pi2 >= 0
        assert abs(inv.relation()) <= 1e-12


def test_reduce_slice_example(symmetric):
    x = np.array([0.5, -0.9, 0.0, 0.0])
    x[3] = math.sqrt(4 * (1 - x[0] ** 2 - x[1] ** 2 / 2))
    y = np.array([0.2, 0.4, 0.0, 0.0])
    y[3] = -(x[0] * y[0] + x[1] * y[1] / 2) * 4 / x[3]
    rp = reduce(symmetric, PhasePoint(x, y))
    assert rp.xi[1] == 0.9
    assert rp.eta[1] == pytest.approx(-0.4, abs=1e-16)


def test_reduced_energies_match(symmetric):
    for p in leaf_points(symmetric, 20, seed=19):
        rp = reduce(symmetric, p)
        h, j, g = symmetric_integrals(symmetric, p)
        hh, gg = reduced_energies(symmetric, rp)
        assert abs(hh - h) <= 1e-12
        assert abs(gg - g) <= 1e-12
        assert max(map(abs, reduced_casimirs(symmetric, rp))) <= 1e-12
        assert rp.xi[1] > 0


def test_reduce_invariant_under_rotation(symmetric):
    rng = np.random.default_rng(20)
    p = random_leaf_point(symmetric, rng)
    base = reduce(symmetric, p)
    for theta in rng.uniform(0, 2 * math.pi, 10):
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1]])
        rp = reduce(symmetric, PhasePoint(rot @ p.x, rot @ p.y))
        np.testing.assert_allclose(rp.xi, base.xi, atol=1e-12)
        np.testing.assert_allclose(rp.eta, base.eta, atol=1e-12)
        assert rp.j == pytest.approx(base.j, abs=1e-12)


def test_reduce_rejects_axis_points(symmetric):
    x = np.array([0.6, 0.0, 0.0, math.sqrt(4 * 0.64)])
    with pytest.raises(AxisPoint):
        reduce(symmetric, PhasePoint(x, np.zeros(4)))


@pytest.mark.parametrize("j,g", [(0.5, 0.5), (-0.3, -0.4), (1.0, 1.0)])
def test_point_from_separated_realizes_level(symmetric, j, g):
    qt = qtilde(symmetric, 0.5, g, j)
    lam1 = 0.5 * (1.0 + qt.r1)
    lam2 = 0.5 * (qt.r2 + 4.0)
    p = point_from_separated(symmetric, 0.5, g, j, lam1, lam2, theta=0.7, signs=(1, -1))
    h2, j2, g2 = symmetric_integrals(symmetric, p)
    assert (h2, j2, g2) == pytest.approx((0.5, j, g), abs=1e-12)
