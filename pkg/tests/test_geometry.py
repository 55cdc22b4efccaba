"""Disk model geometry: isometries, cocycles, tangents, Hopf coordinates."""

import cmath
import math

import numpy as np
import pytest

from loopcensus.geometry import (
    MoebiusMap,
    UnitTangent,
    angular_distance,
    busemann,
    busemann_rel,
    direction_angles,
    geodesic_between,
    geodesic_endpoints,
    geodesic_flow,
    hopf_coordinates,
    horocycle_gap,
    hyperbolic_distance,
    normalize_angle,
    signed_angle_gap,
    tangent_from_hopf,
    tangent_pushforward,
)

EXACT_TOL = 1e-12
ROUND_TRIP_TOL = 1e-9

TAU = 2.0 * math.pi


def random_points(rng, n, radius=0.95):
    r = radius * np.sqrt(rng.random(n))
    phi = TAU * rng.random(n)
    return r * np.exp(1j * phi)


def random_maps(rng, n):
    out = []
    for _ in range(n):
        length = 3.0 * rng.random()
        direction = TAU * rng.random()
        spin = TAU * rng.random()
        out.append(
            MoebiusMap.translation(length, direction) @ MoebiusMap.rotation(spin)
        )
    return out


# -- angles ------------------------------------------------------------------


def test_normalize_angle_range():
    for theta in (-9.0, -math.pi, 0.0, 3.0, 8.5, 4000.0):
        n = normalize_angle(theta)
        assert 0.0 <= n < TAU
        assert np.isclose(math.sin(n - theta), 0.0, atol=EXACT_TOL)


def test_angular_distance_symmetric_and_wrapped():
    assert np.isclose(angular_distance(0.1, TAU + 0.1), 0.0, atol=EXACT_TOL)
    assert np.isclose(angular_distance(-3.0, 3.0), TAU - 6.0, atol=EXACT_TOL)
    assert angular_distance(1.0, 2.0) == angular_distance(2.0, 1.0)


def test_signed_angle_gap_inverts():
    assert np.isclose(signed_angle_gap(0.5, 2.0), 1.5, atol=EXACT_TOL)
    assert np.isclose(signed_angle_gap(2.0, 0.5), -1.5, atol=EXACT_TOL)


# -- distance ----------------------------------------------------------------


def test_distance_along_radius_closed_form():
    for r in (0.0, 0.3, 0.9, 0.99):
        assert np.isclose(hyperbolic_distance(0j, r), 2.0 * math.atanh(r), atol=EXACT_TOL)


def test_distance_invariant_under_isometries():
    rng = np.random.default_rng(7)
    z, w = random_points(rng, 2)
    d = hyperbolic_distance(z, w)
    for m in random_maps(rng, 10):
        assert np.isclose(hyperbolic_distance(m(z), m(w)), d, atol=1e-10)


# -- MoebiusMap structure ----------------------------------------------------


def test_map_requires_unit_determinant():
    with pytest.raises(ValueError):
        MoebiusMap(2.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        MoebiusMap(-1.0, 0.0, 0.0, 1.0)  # negative determinant


def test_map_renormalizes_small_drift():
    s = 1.0 + 2e-10  # within DET_TOL of unit determinant
    m = MoebiusMap(s, 0.0, 0.0, s)
    assert m.is_identity(tol=1e-9)


def test_sign_canonicalization():
    # diag(-2, -1/2) has unit determinant; the largest entry is made positive
    m = MoebiusMap(-2.0, 0.0, 0.0, -0.5)
    assert m.a == 2.0 and m.d == 0.5


def test_compose_matches_pointwise_action():
    rng = np.random.default_rng(11)
    m1, m2 = random_maps(rng, 2)
    z = complex(0.21, -0.35)
    assert abs((m1 @ m2)(z) - m1(m2(z))) < EXACT_TOL


def test_inverse_round_trip():
    rng = np.random.default_rng(13)
    for m in random_maps(rng, 5):
        assert (m @ m.inverse()).is_identity(tol=1e-12)
        z = complex(-0.4, 0.1)
        assert abs(m.inverse()(m(z)) - z) < 1e-12


def test_translation_moves_origin_as_promised():
    m = MoebiusMap.translation(1.7, 0.9)
    expect = cmath.rect(math.tanh(0.85), 0.9)
    assert abs(m(0j) - expect) < EXACT_TOL
    assert np.isclose(m.origin_displacement(), 1.7, atol=EXACT_TOL)


def test_rotation_fixes_origin():
    m = MoebiusMap.rotation(2.1)
    assert abs(m(0j)) < EXACT_TOL
    assert abs(m(0.5 + 0j) - cmath.rect(0.5, 2.1)) < EXACT_TOL


def test_taking_origin_to():
    z = complex(0.3, -0.6)
    m = MoebiusMap.taking_origin_to(z)
    assert abs(m(0j) - z) < EXACT_TOL


def test_translation_length_of_pure_translation():
    m = MoebiusMap.translation(2.4, 1.0)
    assert np.isclose(m.translation_length(), 2.4, atol=1e-12)
    assert MoebiusMap.rotation(1.0).translation_length() == 0.0


def test_boundary_angle_extends_interior_action():
    rng = np.random.default_rng(17)
    (m,) = random_maps(rng, 1)
    theta = 1.234
    inner = m(cmath.rect(1.0 - 1e-9, theta))
    assert angular_distance(m.boundary_angle(theta), cmath.phase(inner)) < 1e-6


def test_boundary_stretch_is_angle_derivative():
    rng = np.random.default_rng(19)
    (m,) = random_maps(rng, 1)
    theta, h = 0.77, 1e-6
    diff = (m.boundary_angle(theta + h) - m.boundary_angle(theta - h)) / (2.0 * h)
    assert np.isclose(m.boundary_stretch(theta), diff, rtol=1e-6)


def test_direction_angles_point_at_orbit_images():
    rng = np.random.default_rng(23)
    for m in random_maps(rng, 8):
        if abs(m(0j)) < 1e-6:
            continue
        out, inc = direction_angles(m)
        assert angular_distance(out, cmath.phase(m(0j))) < 1e-12
        # the point arrives from the direction opposite m^{-1}(0)
        assert angular_distance(inc + math.pi, cmath.phase(m.inverse()(0j))) < 1e-12


def test_direction_angles_reject_rotations():
    with pytest.raises(ValueError):
        direction_angles(MoebiusMap.rotation(0.3))


# -- cocycles ----------------------------------------------------------------


def test_busemann_vanishes_at_origin():
    assert busemann(0j, 1.1) == 0.0


def test_busemann_truncated_limit():
    # b_0(q, xi) = lim_T d(q, c(T)) - T along the ray toward xi
    rng = np.random.default_rng(29)
    T = 20.0
    worst = 0.0
    for q, xi in zip(random_points(rng, 50), TAU * rng.random(50)):
        ray_point = cmath.rect(math.tanh(0.5 * T), xi)
        truncated = hyperbolic_distance(q, ray_point) - T
        worst = max(worst, abs(busemann(q, xi) - truncated))
    assert worst < 1e-6


def test_busemann_is_one_lipschitz():
    rng = np.random.default_rng(31)
    pts = random_points(rng, 40)
    for q, p in zip(pts[:20], pts[20:]):
        for xi in (0.0, 2.0, -2.5):
            gap = abs(busemann(q, xi) - busemann(p, xi))
            assert gap <= hyperbolic_distance(q, p) + 1e-12


def test_busemann_rel_cocycle_identity():
    q, p, r = complex(0.2, 0.1), complex(-0.5, 0.3), complex(0.0, -0.7)
    xi = 0.9
    total = busemann_rel(q, p, xi) + busemann_rel(r, q, xi)
    assert np.isclose(total, busemann_rel(r, p, xi), atol=EXACT_TOL)


def test_horocycle_gap_values():
    assert np.isclose(horocycle_gap(0.3, 0.3 + math.pi), 0.0, atol=EXACT_TOL)
    with pytest.raises(ValueError):
        horocycle_gap(1.0, 1.0)


def test_horocycle_gap_constant_along_geodesic():
    xi, eta = 0.7, 2.9
    v = geodesic_between(xi, eta)
    gap = horocycle_gap(xi, eta)
    for t in (-1.3, 0.0, 2.1):
        q = geodesic_flow(v, t).base
        assert np.isclose(busemann(q, xi) + busemann(q, eta), -gap, atol=1e-12)


# -- tangents and flow -------------------------------------------------------


def test_unit_tangent_needs_interior_base():
    with pytest.raises(ValueError):
        UnitTangent(1.0 + 0j, 0.0)


def test_flow_additive_and_distance_correct():
    v = UnitTangent(complex(0.2, -0.1), 0.8)
    w = geodesic_flow(geodesic_flow(v, 0.7), -1.9)
    u = geodesic_flow(v, -1.2)
    assert abs(w.base - u.base) < EXACT_TOL
    assert angular_distance(w.angle, u.angle) < EXACT_TOL
    assert np.isclose(
        hyperbolic_distance(v.base, geodesic_flow(v, 1.2).base), 1.2, atol=EXACT_TOL
    )


def test_radial_tangent_endpoints():
    v = UnitTangent(0j, 1.1)
    past, future = geodesic_endpoints(v)
    assert angular_distance(future, 1.1) < EXACT_TOL
    assert angular_distance(past, 1.1 + math.pi) < EXACT_TOL


def test_endpoints_flow_invariant():
    v = UnitTangent(complex(-0.3, 0.4), 2.3)
    before = geodesic_endpoints(v)
    after = geodesic_endpoints(geodesic_flow(v, 1.7))
    assert angular_distance(before[0], after[0]) < 1e-12
    assert angular_distance(before[1], after[1]) < 1e-12


def test_geodesic_between_recovers_endpoints():
    xi, eta = -2.0, 1.1
    past, future = geodesic_endpoints(geodesic_between(xi, eta))
    assert angular_distance(past, xi) < 1e-12
    assert angular_distance(future, eta) < 1e-12
    with pytest.raises(ValueError):
        geodesic_between(1.0, 1.0)


def test_geodesic_between_base_is_closest_point():
    v = geodesic_between(0.4, 2.8)
    r0 = abs(v.base)
    for t in (-0.5, -0.1, 0.1, 0.5):
        assert abs(geodesic_flow(v, t).base) >= r0 - EXACT_TOL


def test_pushforward_is_equivariant_on_endpoints():
    rng = np.random.default_rng(37)
    (m,) = random_maps(rng, 1)
    v = UnitTangent(complex(0.25, 0.15), -0.9)
    past, future = geodesic_endpoints(v)
    ipast, ifuture = geodesic_endpoints(tangent_pushforward(m, v))
    assert angular_distance(ipast, m.boundary_angle(past)) < ROUND_TRIP_TOL
    assert angular_distance(ifuture, m.boundary_angle(future)) < ROUND_TRIP_TOL


def test_hopf_round_trip():
    rng = np.random.default_rng(41)
    for base, angle in zip(random_points(rng, 30), TAU * rng.random(30)):
        v = UnitTangent(base, angle)
        past, future, s = hopf_coordinates(v)
        w = tangent_from_hopf(past, future, s)
        assert abs(w.base - v.base) < ROUND_TRIP_TOL
        assert angular_distance(w.angle, v.angle) < ROUND_TRIP_TOL


def test_hopf_s_is_flow_time():
    v = UnitTangent(complex(0.1, 0.5), 2.2)
    past, future, s = hopf_coordinates(v)
    for t in (-2.0, 0.4, 3.1):
        p2, f2, s2 = hopf_coordinates(geodesic_flow(v, t))
        assert angular_distance(p2, past) < 1e-9
        assert angular_distance(f2, future) < 1e-9
        assert np.isclose(s2, s + t, atol=1e-10)
