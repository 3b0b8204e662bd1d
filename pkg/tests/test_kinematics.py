"""Angle wrapping, the zyx rotation and the course/flight-path decomposition."""
import math

import numpy as np
import pytest

from alos3d.kinematics import (
    AsinDomainError,
    BodyVelocity,
    ChartSingularityError,
    DegenerateVelocityError,
    EulerAngles,
    KinematicsError,
    NedVector,
    SphericalVelocity,
    clamped_asin,
    ned_from_spherical,
    ned_velocity,
    rot_x,
    rot_y,
    rot_z,
    rotation_body_to_ned,
    spherical_velocity,
    ssa,
)

SEED = 20240611


def _random_attitude(rng):
    return EulerAngles(rng.uniform(-math.pi, math.pi), rng.uniform(-1.4, 1.4),
                       rng.uniform(-math.pi, math.pi))


@pytest.mark.parametrize("angle, expected", [
    (0.0, 0.0),
    (math.pi, -math.pi),
    (-math.pi, -math.pi),
    (3 * math.pi / 2, -math.pi / 2),
    (-3 * math.pi / 2, math.pi / 2),
    (7.0, 7.0 - 2 * math.pi),
])
def test_ssa_wraps_onto_half_open_interval(angle, expected):
    assert ssa(angle) == pytest.approx(expected, abs=1e-12)
    assert -math.pi <= ssa(angle) < math.pi


def test_ssa_is_idempotent_and_2pi_periodic():
    rng = np.random.default_rng(SEED)
    for angle in rng.uniform(-20.0, 20.0, size=500):
        wrapped = ssa(angle)
        assert ssa(wrapped) == wrapped
        for k in range(-3, 4):
            # compared modulo 2 pi: -pi and pi - 1ulp are neighbours
            assert abs(ssa(ssa(angle + 2 * math.pi * k) - wrapped)) < 1e-12


def test_ssa_rejects_non_finite_angles():
    with pytest.raises(KinematicsError, match="finite"):
        ssa(math.nan)


def test_euler_angles_wrap_roll_and_yaw_but_keep_pitch():
    att = EulerAngles(2 * math.pi + 0.1, 0.3, -2 * math.pi - 0.2)
    assert att.phi == pytest.approx(0.1)
    assert att.psi == pytest.approx(-0.2)
    assert att.theta == 0.3


def test_elementary_rotations_compose_to_zyx_matrix():
    att = EulerAngles(0.3, -0.7, 2.1)
    expected = rot_z(att.psi) @ rot_y(att.theta) @ rot_x(att.phi)
    np.testing.assert_allclose(rotation_body_to_ned(att), expected, atol=1e-15)


def test_rotation_is_orthonormal_on_random_attitudes():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(10_000):
        R = rotation_body_to_ned(_random_attitude(rng))
        worst = max(worst, float(np.abs(R.T @ R - np.eye(3)).max()))
    assert worst < 1e-12


@pytest.mark.parametrize("theta", [math.pi / 2, -math.pi / 2, math.pi / 2 - 1e-7])
def test_pitch_at_chart_boundary_is_rejected(theta):
    with pytest.raises(ChartSingularityError, match="zyx chart"):
        rotation_body_to_ned(EulerAngles(0.0, theta, 0.0))
    with pytest.raises(ChartSingularityError):
        ned_velocity(EulerAngles(0.0, theta, 0.0), BodyVelocity(1.0, 0.0, 0.0))


def test_ned_velocity_matches_rotation_matrix():
    rng = np.random.default_rng(SEED + 1)
    for _ in range(200):
        att = _random_attitude(rng)
        vb = BodyVelocity(*rng.uniform(-2.0, 2.0, size=3))
        np.testing.assert_allclose(ned_velocity(att, vb).as_array(),
                                   rotation_body_to_ned(att) @ vb.as_array(), atol=1e-12)


def test_spherical_velocity_examples():
    sv = spherical_velocity(NedVector(1.0, 0.0, 0.0))
    assert (sv.speed_total, sv.speed_horizontal, sv.course, sv.flight_path) == (1.0, 1.0, 0.0, 0.0)

    sv = spherical_velocity(NedVector(0.0, 1.0, -1.0))
    assert sv.speed_total == pytest.approx(math.sqrt(2))
    assert sv.course == pytest.approx(math.pi / 2)
    assert sv.flight_path == pytest.approx(math.pi / 4)

    vn = NedVector(2.0, 1.0, 0.5)
    sv = spherical_velocity(vn)
    assert sv.speed_total == pytest.approx(math.sqrt(5.25))
    assert sv.course == pytest.approx(math.atan2(1.0, 2.0))
    assert sv.flight_path == pytest.approx(math.asin(-0.5 / math.sqrt(5.25)))
    np.testing.assert_allclose(ned_from_spherical(sv).as_array(), vn.as_array(), atol=1e-15)


def test_spherical_round_trip_on_random_states():
    rng = np.random.default_rng(SEED + 2)
    for _ in range(2_000):
        att = EulerAngles(rng.uniform(-math.pi, math.pi), rng.uniform(-0.6, 0.6),
                          rng.uniform(-math.pi, math.pi))
        vb = BodyVelocity(rng.uniform(1.0, 2.0), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        vn = ned_velocity(att, vb)
        back = ned_from_spherical(spherical_velocity(vn))
        np.testing.assert_allclose(back.as_array(), vn.as_array(), rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("vn, match", [
    (NedVector(0.0, 0.0, 0.0), "zero speed"),
    (NedVector(0.0, 0.0, 1.5), "vertical flight"),
])
def test_degenerate_velocities_are_rejected(vn, match):
    with pytest.raises(DegenerateVelocityError, match=match):
        spherical_velocity(vn)


def test_clamped_asin_absorbs_rounding_only():
    assert clamped_asin(1.0 + 1e-15) == pytest.approx(math.pi / 2)
    assert clamped_asin(-1.0 - 1e-15) == pytest.approx(-math.pi / 2)
    with pytest.raises(AsinDomainError, match="outside"):
        clamped_asin(1.0 + 1e-9)


def test_spherical_velocity_type_checks_its_amplitudes():
    with pytest.raises(KinematicsError, match="speed_horizontal = speed_total"):
        SphericalVelocity(1.0, 1.0, 0.0, 0.3)
    with pytest.raises(KinematicsError, match="flight_path"):
        SphericalVelocity(1.0, 0.0, 0.0, math.pi / 2)
    with pytest.raises(KinematicsError, match="finite"):
        NedVector(math.inf, 0.0, 0.0)


def test_rotation_examples():
    np.testing.assert_array_equal(rotation_body_to_ned(EulerAngles(0.0, 0.0, 0.0)), np.eye(3))
    R = rotation_body_to_ned(EulerAngles(0.0, 0.0, math.pi / 2))
    np.testing.assert_allclose(R @ [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], atol=1e-15)
    assert np.linalg.det(rotation_body_to_ned(EulerAngles(0.1, 0.2, 0.5))) == pytest.approx(1.0)


def test_ned_velocity_examples():
    vn = ned_velocity(EulerAngles(0.0, math.pi / 4, 0.0), BodyVelocity(1.0, 0.0, 0.0))
    np.testing.assert_allclose(vn.as_array(), [math.cos(math.pi / 4), 0.0, -math.sin(math.pi / 4)],
                               atol=1e-15)
    vb = BodyVelocity(2.0, 0.5, 0.3)
    assert ned_velocity(EulerAngles(0.1, 0.2, 0.5), vb).norm() == pytest.approx(vb.speed, rel=1e-14)
