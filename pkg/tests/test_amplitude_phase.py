"""The spherical and body-velocity amplitude-phase models: where they agree,
how their vertical crab angles are related, and where each breaks down."""
import math
import time

import numpy as np
import pytest

from alos3d.amplitude_phase import (
    ArctangentDomainError,
    CrabAngleError,
    CrabAngles,
    RelationSingularityError,
    VerticalCrabUndefinedError,
    alpha_star_array,
    alpha_star_from_spherical,
    body_ap_velocity,
    body_crab_angles,
    body_track_error_rates,
    crab_angle_arrays,
    spherical_ap_velocity,
    spherical_crab_from_angles,
    spherical_crab_from_body,
    spherical_track_error_rates,
    ssa_array,
)
from alos3d.kinematics import (
    BodyVelocity,
    DegenerateVelocityError,
    EulerAngles,
    KinematicsError,
    NedVector,
    SphericalVelocity,
    ned_from_spherical,
    ned_velocity,
    spherical_velocity,
    ssa,
)
from alos3d.path_frame import SegmentGeometry, tracking_errors

SEED = 1729
N_STATES = 100_000
TIME_BUDGET = 10.0  # seconds for the whole batch, generation and checks included


def _random_state_arrays(seed, count=N_STATES):
    """(phi, theta, psi, u, v, w) arrays.

    u > 0 and a positive along-track component keep the single-quadrant
    arctangents of the body form on their principal branch.
    """
    rng = np.random.default_rng(seed)
    phi = rng.uniform(-math.pi, math.pi, count)
    theta = rng.uniform(-0.6, 0.6, count)
    psi = rng.uniform(-math.pi, math.pi, count)
    u = rng.uniform(1.0, 2.0, count)
    v = rng.uniform(-0.5, 0.5, count)
    w = rng.uniform(-0.5, 0.5, count)
    return phi, theta, psi, u, v, w


def _random_states(seed, count):
    phi, theta, psi, u, v, w = _random_state_arrays(seed, count)
    for index in range(count):
        yield (EulerAngles(phi[index], theta[index], psi[index]),
               BodyVelocity(u[index], v[index], w[index]))


def _rotations(phi, theta, psi):
    """Stacked R_z(psi) R_y(theta) R_x(phi), composed from the elementary rotations."""
    def elementary(angle, axes):
        out = np.zeros(angle.shape + (3, 3))
        (i, j), k = axes, 3 - sum(axes)
        out[:, k, k] = 1.0
        out[:, i, i] = out[:, j, j] = np.cos(angle)
        out[:, i, j] = -np.sin(angle)
        out[:, j, i] = np.sin(angle)
        return out
    # R_y has the sine signs of a (z, x) pair
    return elementary(psi, (0, 1)) @ elementary(theta, (2, 0)) @ elementary(phi, (1, 2))


def test_both_models_agree_horizontally_and_obey_the_relation():
    start = time.perf_counter()
    phi, theta, psi, u, v, w = _random_state_arrays(SEED)
    batch = crab_angle_arrays(phi, theta, psi, u, v, w)
    relation = alpha_star_array(batch.alpha_c, batch.beta_c, batch.flight_path)
    worst_beta = np.abs(ssa_array(batch.beta_c - batch.beta_c_star)).max()
    worst_speed = np.abs(batch.speed_horizontal - batch.speed_horizontal_star).max()
    worst_relation = np.abs(batch.alpha_c_star - relation).max()
    elapsed = time.perf_counter() - start
    assert len(batch.alpha_c) == N_STATES
    assert np.all(np.isfinite(relation))
    assert worst_beta < 1e-9
    assert worst_speed < 1e-9
    assert worst_relation < 1e-9
    assert elapsed < TIME_BUDGET


def test_both_models_reconstruct_the_ned_velocity():
    start = time.perf_counter()
    phi, theta, psi, u, v, w = _random_state_arrays(SEED + 2)
    vn = np.einsum("nij,nj->ni", _rotations(phi, theta, psi), np.stack([u, v, w], axis=-1))
    batch = crab_angle_arrays(phi, theta, psi, u, v, w)
    spherical = np.stack([
        batch.speed_horizontal * np.cos(psi + batch.beta_c),
        batch.speed_horizontal * np.sin(psi + batch.beta_c),
        -batch.speed_total * np.sin(theta - batch.alpha_c),
    ], axis=-1)
    body = np.stack([
        batch.speed_horizontal_star * np.cos(psi + batch.beta_c_star),
        batch.speed_horizontal_star * np.sin(psi + batch.beta_c_star),
        -batch.speed_vertical_plane * np.sin(theta - batch.alpha_c_star),
    ], axis=-1)
    elapsed = time.perf_counter() - start
    assert np.abs(batch.velocity - vn).max() < 1e-12
    assert np.abs(spherical - vn).max() < 1e-9
    assert np.abs(body - vn).max() < 1e-9
    assert elapsed < TIME_BUDGET


def test_batch_matches_the_scalar_models():
    states = list(_random_states(SEED + 6, count=500))
    batch = crab_angle_arrays(*_random_state_arrays(SEED + 6, count=500))
    for index, (att, vb) in enumerate(states):
        ca = spherical_crab_from_body(att, vb)
        bca = body_crab_angles(att, vb)
        assert batch.alpha_c[index] == pytest.approx(ca.alpha_c, abs=1e-12)
        assert ssa(batch.beta_c[index] - ca.beta_c) == pytest.approx(0.0, abs=1e-12)
        assert batch.speed_horizontal[index] == pytest.approx(ca.speed_horizontal, rel=1e-12)
        assert batch.alpha_c_star[index] == pytest.approx(bca.alpha_c_star, abs=1e-12)
        assert batch.beta_c_star[index] == pytest.approx(bca.beta_c_star, abs=1e-12)
        np.testing.assert_allclose(batch.velocity[index], ned_velocity(att, vb).as_array(),
                                   atol=1e-12)
        np.testing.assert_allclose(spherical_ap_velocity(att, ca).as_array(), batch.velocity[index],
                                   atol=1e-9)
        np.testing.assert_allclose(body_ap_velocity(att, bca).as_array(), batch.velocity[index],
                                   atol=1e-9)
        assert float(alpha_star_array(ca.alpha_c, ca.beta_c, batch.flight_path[index])) == \
            pytest.approx(alpha_star_from_spherical(ca, batch.flight_path[index]), abs=1e-12)


def test_batch_domain_errors():
    ones, zeros = np.ones(3), np.zeros(3)
    with pytest.raises(DegenerateVelocityError, match="horizontal"):
        crab_angle_arrays(zeros, zeros, zeros, zeros, zeros, np.array([1.0, 1.0, 1.0]))
    with pytest.raises(ArctangentDomainError, match="u = 0"):
        crab_angle_arrays(zeros, zeros, zeros, np.array([1.0, 0.0, 1.0]), ones, ones)
    with pytest.raises(KinematicsError, match="pitch"):
        crab_angle_arrays(zeros, np.array([0.0, 1.6, 0.0]), zeros, ones, zeros, zeros)
    assert math.isnan(alpha_star_array(0.0, math.pi / 2, 0.2)[()])


def test_ssa_array_matches_ssa():
    angles = np.array([-7.0, -math.pi, 0.0, math.pi, 3 * math.pi, 12.5])
    np.testing.assert_allclose(ssa_array(angles), [ssa(angle) for angle in angles], atol=1e-15)


def test_closed_form_matches_definition():
    for att, vb in _random_states(SEED + 1, count=2_000):
        from_body = spherical_crab_from_body(att, vb)
        from_angles = spherical_crab_from_angles(att, spherical_velocity(ned_velocity(att, vb)))
        assert from_body.alpha_c == pytest.approx(from_angles.alpha_c, abs=1e-12)
        assert ssa(from_body.beta_c - from_angles.beta_c) == pytest.approx(0.0, abs=1e-12)
        assert from_body.speed_total == pytest.approx(from_angles.speed_total, rel=1e-12)


def test_horizontal_speed_identities():
    for att, vb in _random_states(SEED + 3, count=2_000):
        ca = spherical_crab_from_body(att, vb)
        sphi, cphi = math.sin(att.phi), math.cos(att.phi)
        vertical = vb.v * sphi + vb.w * cphi
        along = vb.u * math.cos(att.theta) + vertical * math.sin(att.theta)
        lateral = vb.v * cphi - vb.w * sphi
        assert along == pytest.approx(ca.speed_horizontal * math.cos(ca.beta_c), abs=1e-12)
        assert lateral == pytest.approx(ca.speed_horizontal * math.sin(ca.beta_c), abs=1e-12)


def test_horizontal_amplitude_needs_the_starred_angle():
    # U_v* cos(theta - alpha_c) is not the horizontal speed once alpha_c* != alpha_c.
    att = EulerAngles(0.2, 0.4, 0.0)
    vb = BodyVelocity(1.5, 0.4, -0.3)
    ca = spherical_crab_from_body(att, vb)
    bca = body_crab_angles(att, vb)
    assert abs(bca.alpha_c_star - ca.alpha_c) > 1e-3
    assert bca.speed_horizontal_star == pytest.approx(ca.speed_horizontal, abs=1e-12)
    assert abs(bca.speed_vertical_plane * math.cos(att.theta - ca.alpha_c)
               - ca.speed_horizontal * math.cos(ca.beta_c)) > 1e-4


@pytest.mark.parametrize("beta_c, gamma", [(0.0, 0.3), (0.7, 0.0), (0.0, -0.5)])
def test_vertical_crab_angles_coincide_without_course_or_climb(beta_c, gamma):
    ca = CrabAngles(alpha_c=0.05, beta_c=beta_c, speed_total=2.0,
                    speed_horizontal=2.0 * math.cos(gamma))
    assert alpha_star_from_spherical(ca, gamma) == pytest.approx(ca.alpha_c, abs=1e-15)


def test_zero_current_level_flight_gives_zero_crab():
    att = EulerAngles(0.0, 0.0, 0.4)
    ca = spherical_crab_from_body(att, BodyVelocity(2.0, 0.0, 0.0))
    assert ca.alpha_c == 0.0
    assert ca.beta_c == 0.0


def test_body_form_breaks_down_across_ninety_degree_crab_where_spherical_does_not():
    gamma = 0.2
    att = EulerAngles(0.0, 0.0, 0.0)
    alpha_c, alpha_star = [], []
    for beta in np.linspace(math.pi / 2 - 0.01, math.pi / 2 + 0.01, 20):
        sv = SphericalVelocity(1.0, math.cos(gamma), beta, gamma)
        # identity attitude: body velocity equals the NED velocity
        vb = BodyVelocity(*ned_from_spherical(sv).as_array())
        alpha_c.append(spherical_crab_from_body(att, vb).alpha_c)
        alpha_star.append(body_crab_angles(att, vb).alpha_c_star)
    np.testing.assert_allclose(alpha_c, -gamma, atol=1e-12)
    assert np.abs(np.diff(alpha_star)).max() > 3.0

    ca = CrabAngles(alpha_c=-gamma, beta_c=math.pi / 2, speed_total=1.0,
                    speed_horizontal=math.cos(gamma))
    with pytest.raises(RelationSingularityError, match="cos"):
        alpha_star_from_spherical(ca, gamma)


def test_body_form_domain_errors():
    att = EulerAngles(0.0, 0.0, 0.0)
    with pytest.raises(VerticalCrabUndefinedError, match="U_v"):
        body_crab_angles(att, BodyVelocity(0.0, 1.0, 0.0))
    with pytest.raises(ArctangentDomainError, match="u = 0"):
        body_crab_angles(att, BodyVelocity(0.0, 0.0, 1.0))
    # spherical form only needs a horizontal component
    assert spherical_crab_from_body(att, BodyVelocity(0.0, 1.0, 0.0)).beta_c == \
        pytest.approx(math.pi / 2)


def test_crab_angles_type_invariants():
    with pytest.raises(CrabAngleError, match="alpha_c"):
        CrabAngles(alpha_c=math.pi, beta_c=0.0, speed_total=1.0, speed_horizontal=1.0)
    with pytest.raises(KinematicsError, match="speed_horizontal"):
        CrabAngles(alpha_c=0.0, beta_c=0.0, speed_total=1.0, speed_horizontal=0.0)


def test_track_error_rates_match_path_frame_projection():
    rng = np.random.default_rng(SEED + 4)
    seg = SegmentGeometry(NedVector(0.0, 0.0, 0.0), pi_h=0.8, pi_v=-0.3, length=1000.0)
    for att, vb in _random_states(SEED + 5, count=500):
        vn = ned_velocity(att, vb)
        p = NedVector(*rng.uniform(-50.0, 50.0, size=3))
        h = 1e-3
        before = tracking_errors(seg, p)
        after = tracking_errors(seg, p + vn.scaled(h))
        expected_y = (after.y_e - before.y_e) / h
        expected_z = (after.z_e - before.z_e) / h
        y_dot, z_dot = spherical_track_error_rates(att, spherical_crab_from_body(att, vb),
                                                   seg.pi_h, seg.pi_v)
        assert y_dot == pytest.approx(expected_y, abs=1e-9)
        assert z_dot == pytest.approx(expected_z, abs=1e-9)
        y_star, z_star = body_track_error_rates(att, body_crab_angles(att, vb), seg.pi_h, seg.pi_v)
        assert y_star == pytest.approx(y_dot, abs=1e-9)
        assert z_star == pytest.approx(z_dot, abs=1e-9)
