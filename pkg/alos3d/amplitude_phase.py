"""Amplitude-phase forms of the NED kinematics.

Two decompositions of the same velocity are provided side by side:

* the spherical form, whose phases are the crab angles
  ``beta_c = ssa(chi - psi)`` and ``alpha_c = theta - gamma`` and whose
  amplitudes are the horizontal speed ``U_h`` and the total speed ``U``;
* the body-velocity form, whose phases ``alpha_c*``/``beta_c*`` are built
  from (u, v, w) with single-quadrant arctangents and whose amplitudes are
  ``U_v*``/``U_h*``.

The horizontal parts coincide (``beta_c* = beta_c`` and ``U_h* = U_h``
whenever both are defined); the vertical crab angles differ unless
``beta_c = 0`` or ``gamma = 0`` and are linked by
:func:`alpha_star_from_spherical`. The body form breaks down when
``cos(beta_c) = 0`` while the spherical form only needs ``U_h > 0``.

The amplitude of the body-velocity horizontal speed is evaluated with
``cos(theta - alpha_c*)``; that is the reading under which ``U_h* = U_h``
holds (the unstarred reading does not, see tests/test_amplitude_phase.py).

Reads: kinematics
"""

from __future__ import annotations

from dataclasses import dataclass
import math
import typing as tp

import numpy as np

from .kinematics import (
    DEFAULT_TOL,
    SPEED_FLOOR,
    BodyVelocity,
    DegenerateVelocityError,
    EulerAngles,
    KinematicsError,
    NedVector,
    SphericalVelocity,
    check_pitch,
    clamped_asin,
    ssa,
)


class CrabAngleError(KinematicsError):
    pass


class VerticalCrabUndefinedError(CrabAngleError):
    """U_v* = 0: the velocity has no component in the body x-z plane."""


class ArctangentDomainError(CrabAngleError):
    """A single-quadrant arctangent of the body-velocity form has a zero denominator."""


class RelationSingularityError(CrabAngleError):
    """cos(beta_c) too small for the alpha_c*/alpha_c relation."""


@dataclass(frozen=True)
class CrabAngles:
    alpha_c: float
    beta_c: float
    speed_total: float
    speed_horizontal: float

    def __post_init__(self):
        alpha = float(self.alpha_c)
        if not math.isfinite(alpha) or abs(alpha) >= math.pi:
            raise CrabAngleError(f"alpha_c must lie in (-pi, pi) (got {alpha})")
        if not self.speed_horizontal > 0:
            raise DegenerateVelocityError(
                f"crab angles need speed_horizontal > 0 (got {self.speed_horizontal})")
        if self.speed_total < self.speed_horizontal - DEFAULT_TOL * max(1.0, self.speed_total):
            raise CrabAngleError("crab angles need speed_total >= speed_horizontal")
        object.__setattr__(self, "alpha_c", alpha)
        object.__setattr__(self, "beta_c", ssa(self.beta_c))


@dataclass(frozen=True)
class BodyCrabAngles:
    alpha_c_star: float
    beta_c_star: float
    speed_vertical_plane: float
    speed_horizontal_star: float

    def __post_init__(self):
        if self.speed_vertical_plane < 0 or self.speed_horizontal_star < 0:
            raise CrabAngleError("body-velocity amplitudes must be non-negative")
        for name in ("alpha_c_star", "beta_c_star"):
            if not math.isfinite(getattr(self, name)):
                raise CrabAngleError(f"{name} must be finite")


def spherical_crab_from_angles(att: EulerAngles, sv: SphericalVelocity) -> CrabAngles:
    """Crab angles straight from their definition, given attitude and the
    spherical decomposition of the velocity."""
    check_pitch(att.theta)
    if sv.speed_horizontal <= SPEED_FLOOR:
        raise DegenerateVelocityError("zero horizontal speed: horizontal crab angle undefined")
    return CrabAngles(
        alpha_c=att.theta - sv.flight_path,
        beta_c=ssa(sv.course - att.psi),
        speed_total=sv.speed_total,
        speed_horizontal=sv.speed_horizontal,
    )


def _body_terms(att: EulerAngles, vb: BodyVelocity):
    sphi, cphi = math.sin(att.phi), math.cos(att.phi)
    # velocity in the yaw-pitch frame, after undoing roll: (u, lateral, vertical)
    lateral = vb.v * cphi - vb.w * sphi
    vertical = vb.v * sphi + vb.w * cphi
    return lateral, vertical


def spherical_crab_from_body(att: EulerAngles, vb: BodyVelocity) -> CrabAngles:
    """Crab angles from body-fixed velocities and Euler angles (closed form)."""
    check_pitch(att.theta)
    speed = vb.speed
    if speed <= SPEED_FLOOR:
        raise DegenerateVelocityError("zero speed: crab angles undefined")
    lateral, vertical = _body_terms(att, vb)
    sth, cth = math.sin(att.theta), math.cos(att.theta)
    along = vb.u * cth + vertical * sth
    horizontal = math.hypot(along, lateral)
    if horizontal <= SPEED_FLOOR:
        raise DegenerateVelocityError("zero horizontal speed: horizontal crab angle undefined")
    gamma = clamped_asin((vb.u * sth - vertical * cth) / speed, "flight-path sine")
    return CrabAngles(
        alpha_c=att.theta - gamma,
        beta_c=math.atan2(lateral, along),
        speed_total=speed,
        speed_horizontal=horizontal,
    )


def body_crab_angles(att: EulerAngles, vb: BodyVelocity) -> BodyCrabAngles:
    """Phases and amplitudes of the body-velocity amplitude-phase model.

    Both phases use the single-quadrant arctangent, so alpha_c* lives in
    (-pi/2, pi/2) and is only meaningful for u > 0.
    """
    check_pitch(att.theta)
    lateral, vertical = _body_terms(att, vb)
    speed_vertical_plane = math.hypot(vb.u, vertical)
    if speed_vertical_plane <= SPEED_FLOOR:
        raise VerticalCrabUndefinedError("U_v* = 0: vertical crab angle alpha_c* undefined")
    if vb.u == 0.0:
        raise ArctangentDomainError("u = 0: alpha_c* = atan((v sin(phi) + w cos(phi)) / u) undefined")
    alpha_star = math.atan(vertical / vb.u)
    along = speed_vertical_plane * math.cos(att.theta - alpha_star)
    if abs(along) <= SPEED_FLOOR:
        raise ArctangentDomainError("U_v* cos(theta - alpha_c*) = 0: beta_c* undefined")
    return BodyCrabAngles(
        alpha_c_star=alpha_star,
        beta_c_star=math.atan(lateral / along),
        speed_vertical_plane=speed_vertical_plane,
        speed_horizontal_star=math.hypot(along, lateral),
    )


def alpha_star_from_spherical(ca: CrabAngles, gamma: float, tol: float = DEFAULT_TOL) -> float:
    """Body-velocity vertical crab angle from the spherical one and the flight-path angle."""
    cos_beta = math.cos(ca.beta_c)
    if abs(cos_beta) < tol:
        raise RelationSingularityError(
            f"|cos(beta_c)| = {abs(cos_beta):.3g} below {tol}: alpha_c* undefined")
    return ca.alpha_c + gamma - math.atan(math.tan(gamma) / cos_beta)


def spherical_ap_velocity(att: EulerAngles, ca: CrabAngles) -> NedVector:
    heading = att.psi + ca.beta_c
    return NedVector(
        ca.speed_horizontal * math.cos(heading),
        ca.speed_horizontal * math.sin(heading),
        -ca.speed_total * math.sin(att.theta - ca.alpha_c),
    )


def body_ap_velocity(att: EulerAngles, bca: BodyCrabAngles) -> NedVector:
    heading = att.psi + bca.beta_c_star
    return NedVector(
        bca.speed_horizontal_star * math.cos(heading),
        bca.speed_horizontal_star * math.sin(heading),
        -bca.speed_vertical_plane * math.sin(att.theta - bca.alpha_c_star),
    )


def spherical_track_error_rates(att: EulerAngles, ca: CrabAngles,
                                pi_h: float, pi_v: float) -> tp.Tuple[float, float]:
    """Cross- and vertical-track error rates on a straight segment, spherical form."""
    relative_course = att.psi + ca.beta_c - pi_h
    y_dot = ca.speed_horizontal * math.sin(relative_course)
    z_dot = (-ca.speed_total * math.sin(att.theta - ca.alpha_c - pi_v)
             + ca.speed_horizontal * math.sin(pi_v) * (math.cos(relative_course) - 1.0))
    return y_dot, z_dot


def body_track_error_rates(att: EulerAngles, bca: BodyCrabAngles,
                           pi_h: float, pi_v: float) -> tp.Tuple[float, float]:
    """Same rates written with the body-velocity phases and amplitudes."""
    relative_course = att.psi + bca.beta_c_star - pi_h
    secant = math.sqrt(1.0 + math.tan(bca.beta_c_star) ** 2)
    y_dot = bca.speed_horizontal_star * math.sin(relative_course)
    z_dot = (-bca.speed_vertical_plane * math.sin(att.theta - bca.alpha_c_star - pi_v)
             + bca.speed_horizontal_star * math.sin(pi_v) / secant
             * (secant * math.cos(relative_course) - 1.0))
    return y_dot, z_dot


@dataclass(frozen=True)
class CrabAngleArrays:
    """Both amplitude-phase models evaluated over a batch of states.

    `velocity` is the NED velocity, shape (n, 3); every other field has shape (n,).
    """
    velocity: np.ndarray
    flight_path: np.ndarray
    alpha_c: np.ndarray
    beta_c: np.ndarray
    speed_total: np.ndarray
    speed_horizontal: np.ndarray
    alpha_c_star: np.ndarray
    beta_c_star: np.ndarray
    speed_vertical_plane: np.ndarray
    speed_horizontal_star: np.ndarray


def ssa_array(angle) -> np.ndarray:
    wrapped = np.mod(np.asarray(angle, dtype=float) + math.pi, 2 * math.pi) - math.pi
    return np.where(wrapped >= math.pi, wrapped - 2 * math.pi, wrapped)


def crab_angle_arrays(phi, theta, psi, u, v, w) -> CrabAngleArrays:
    """Vectorized :func:`spherical_crab_from_angles` and :func:`body_crab_angles`.

    The spherical phases come from the NED velocity by definition, the body
    phases from (u, v, w); the batch fails as a whole if any state is outside
    the domain of either model.
    """
    phi, theta, psi, u, v, w = np.broadcast_arrays(
        *(np.asarray(item, dtype=float) for item in (phi, theta, psi, u, v, w)))
    if theta.size:
        check_pitch(float(np.max(np.abs(theta))))
    sphi, cphi = np.sin(phi), np.cos(phi)
    sth, cth = np.sin(theta), np.cos(theta)
    lateral = v * cphi - w * sphi
    vertical = v * sphi + w * cphi
    along = u * cth + vertical * sth
    velocity = np.stack([
        np.cos(psi) * along - np.sin(psi) * lateral,
        np.sin(psi) * along + np.cos(psi) * lateral,
        -u * sth + vertical * cth,
    ], axis=-1)

    speed = np.linalg.norm(velocity, axis=-1)
    horizontal = np.hypot(velocity[..., 0], velocity[..., 1])
    if np.any(horizontal <= SPEED_FLOOR):
        raise DegenerateVelocityError("zero horizontal speed: horizontal crab angle undefined")
    gamma = np.arcsin(np.clip(-velocity[..., 2] / speed, -1.0, 1.0))
    course = np.arctan2(velocity[..., 1], velocity[..., 0])

    speed_vertical_plane = np.hypot(u, vertical)
    if np.any(speed_vertical_plane <= SPEED_FLOOR):
        raise VerticalCrabUndefinedError("U_v* = 0: vertical crab angle alpha_c* undefined")
    if np.any(u == 0.0):
        raise ArctangentDomainError("u = 0: alpha_c* undefined")
    alpha_star = np.arctan(vertical / u)
    along_star = speed_vertical_plane * np.cos(theta - alpha_star)
    if np.any(np.abs(along_star) <= SPEED_FLOOR):
        raise ArctangentDomainError("U_v* cos(theta - alpha_c*) = 0: beta_c* undefined")
    return CrabAngleArrays(
        velocity=velocity,
        flight_path=gamma,
        alpha_c=theta - gamma,
        beta_c=ssa_array(course - psi),
        speed_total=speed,
        speed_horizontal=horizontal,
        alpha_c_star=alpha_star,
        beta_c_star=np.arctan(lateral / along_star),
        speed_vertical_plane=speed_vertical_plane,
        speed_horizontal_star=np.hypot(along_star, lateral),
    )


def alpha_star_array(alpha_c, beta_c, gamma, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Elementwise :func:`alpha_star_from_spherical`; nan where |cos(beta_c)| < tol."""
    alpha_c, beta_c, gamma = np.broadcast_arrays(
        *(np.asarray(item, dtype=float) for item in (alpha_c, beta_c, gamma)))
    cos_beta = np.cos(beta_c)
    defined = np.abs(cos_beta) >= tol
    out = np.full(alpha_c.shape, np.nan)
    out[defined] = (alpha_c[defined] + gamma[defined]
                    - np.arctan(np.tan(gamma[defined]) / cos_beta[defined]))
    return out
