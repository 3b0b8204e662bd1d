"""Rigid-body kinematic maps: angle wrapping, the zyx Euler rotation from
BODY to NED, and the azimuth/elevation (course/flight-path) decomposition
of a NED velocity.

Everything here is a pure function over frozen value types. Angles are
stored in radians and wrapped when a value is constructed, so the
invariants of every type can be checked at the boundary where it is built
rather than deep inside the guidance loop.

Reads: (nothing internal)
"""

from __future__ import annotations

from dataclasses import dataclass
import math
import typing as tp

import numpy as np


DEFAULT_TOL = 1e-9
# |theta| closer than this to pi/2 is outside the zyx chart.
PITCH_MARGIN = 1e-6
ASIN_OVERSHOOT = 1e-12
SPEED_FLOOR = 1e-12

_TWO_PI = 2.0 * math.pi


class KinematicsError(ValueError):
    """Base class for geometric domain violations."""


class AngleDomainError(KinematicsError):
    pass


class ChartSingularityError(KinematicsError):
    """Pitch at (or numerically at) +-pi/2, where zyx Euler angles break down."""


class DegenerateVelocityError(KinematicsError):
    """Zero speed, or zero horizontal speed where a course angle is needed."""


class AsinDomainError(KinematicsError):
    """asin argument outside [-1, 1] by more than floating-point noise."""


def _finite(value, name):
    value = float(value)
    if not math.isfinite(value):
        raise AngleDomainError(f"{name} must be finite (got {value})")
    return value


def ssa(angle: float) -> float:
    """Smallest signed angle: wrap `angle` onto [-pi, pi)."""
    angle = _finite(angle, "angle")
    wrapped = (angle + math.pi) % _TWO_PI - math.pi
    # % can round up to exactly 2*pi for arguments just below a multiple.
    if wrapped >= math.pi:
        wrapped -= _TWO_PI
    return wrapped


def check_pitch(theta: float) -> None:
    if abs(theta) >= math.pi / 2 - PITCH_MARGIN:
        raise ChartSingularityError(
            f"pitch {theta!r} rad is outside the zyx chart (|theta| < pi/2 - {PITCH_MARGIN})")


@dataclass(frozen=True)
class NedVector:
    """North-East-Down coordinates; a position in m or a velocity in m/s."""
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise KinematicsError(f"NedVector.{name} must be finite (got {value})")
            object.__setattr__(self, name, value)

    @classmethod
    def from_iterable(cls, values: tp.Iterable[float]) -> "NedVector":
        x, y, z = values
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def __add__(self, other: "NedVector") -> "NedVector":
        return NedVector(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "NedVector") -> "NedVector":
        return NedVector(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, factor: float) -> "NedVector":
        return NedVector(factor * self.x, factor * self.y, factor * self.z)


@dataclass(frozen=True)
class EulerAngles:
    """zyx roll/pitch/yaw. Roll and yaw are wrapped onto [-pi, pi) on
    construction; pitch is kept as given and checked by the operations
    that need the chart."""
    phi: float
    theta: float
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "phi", ssa(self.phi))
        object.__setattr__(self, "theta", _finite(self.theta, "theta"))
        object.__setattr__(self, "psi", ssa(self.psi))


@dataclass(frozen=True)
class BodyVelocity:
    """Surge, sway and heave in m/s."""
    u: float
    v: float
    w: float

    def __post_init__(self):
        for name in ("u", "v", "w"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise KinematicsError(f"BodyVelocity.{name} must be finite (got {value})")
            object.__setattr__(self, name, value)

    @property
    def speed(self) -> float:
        return math.sqrt(self.u * self.u + self.v * self.v + self.w * self.w)

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w])

    def scaled(self, factor: float) -> "BodyVelocity":
        return BodyVelocity(factor * self.u, factor * self.v, factor * self.w)


@dataclass(frozen=True)
class SphericalVelocity:
    speed_total: float
    speed_horizontal: float
    course: float
    flight_path: float

    def __post_init__(self):
        total = float(self.speed_total)
        horizontal = float(self.speed_horizontal)
        if not (math.isfinite(total) and math.isfinite(horizontal)):
            raise KinematicsError("SphericalVelocity speeds must be finite")
        if horizontal < 0 or total < horizontal - DEFAULT_TOL * max(1.0, total):
            raise KinematicsError(
                f"SphericalVelocity requires speed_total >= speed_horizontal >= 0 "
                f"(got {total}, {horizontal})")
        gamma = _finite(self.flight_path, "flight_path")
        if abs(gamma) >= math.pi / 2:
            raise KinematicsError(f"flight_path must lie in (-pi/2, pi/2) (got {gamma})")
        if abs(horizontal - total * math.cos(gamma)) > DEFAULT_TOL * max(1.0, total):
            raise KinematicsError(
                "SphericalVelocity requires speed_horizontal = speed_total * cos(flight_path)")
        object.__setattr__(self, "speed_total", total)
        object.__setattr__(self, "speed_horizontal", horizontal)
        object.__setattr__(self, "course", ssa(self.course))
        object.__setattr__(self, "flight_path", gamma)


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rotation_rows(phi, theta, psi):
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    return (
        (cpsi * cth, -spsi * cphi + cpsi * sth * sphi, spsi * sphi + cpsi * cphi * sth),
        (spsi * cth, cpsi * cphi + sphi * sth * spsi, -cpsi * sphi + sth * spsi * cphi),
        (-sth, cth * sphi, cth * cphi),
    )


def rotation_body_to_ned(att: EulerAngles) -> np.ndarray:
    """zyx rotation matrix R_z(psi) R_y(theta) R_x(phi) taking BODY vectors to NED."""
    check_pitch(att.theta)
    return np.array(_rotation_rows(att.phi, att.theta, att.psi))


def ned_velocity(att: EulerAngles, vb: BodyVelocity) -> NedVector:
    """NED kinematic differential equation: p_dot = R(att) v_b."""
    check_pitch(att.theta)
    r0, r1, r2 = _rotation_rows(att.phi, att.theta, att.psi)
    u, v, w = vb.u, vb.v, vb.w
    return NedVector(
        r0[0] * u + r0[1] * v + r0[2] * w,
        r1[0] * u + r1[1] * v + r1[2] * w,
        r2[0] * u + r2[1] * v + r2[2] * w,
    )


def clamped_asin(value: float, what: str = "asin argument") -> float:
    """asin that absorbs floating-point overshoot of +-1 but rejects real violations."""
    if abs(value) > 1.0:
        if abs(value) - 1.0 > ASIN_OVERSHOOT:
            raise AsinDomainError(f"{what} {value!r} outside [-1, 1]")
        value = math.copysign(1.0, value)
    return math.asin(value)


def spherical_velocity(vn: NedVector) -> SphericalVelocity:
    """Speed, horizontal speed, course and flight-path angle of a NED velocity."""
    speed = vn.norm()
    if speed <= SPEED_FLOOR:
        raise DegenerateVelocityError("zero speed: course and flight-path angles undefined")
    horizontal = math.hypot(vn.x, vn.y)
    if horizontal <= SPEED_FLOOR:
        raise DegenerateVelocityError("zero horizontal speed: course undefined (vertical flight)")
    return SphericalVelocity(
        speed_total=speed,
        speed_horizontal=horizontal,
        course=math.atan2(vn.y, vn.x),
        flight_path=clamped_asin(-vn.z / speed, "flight-path sine"),
    )


def ned_from_spherical(sv: SphericalVelocity) -> NedVector:
    """Rebuild the NED velocity from its spherical decomposition."""
    u = sv.speed_total
    cg = math.cos(sv.flight_path)
    return NedVector(
        u * cg * math.cos(sv.course),
        u * cg * math.sin(sv.course),
        -u * math.sin(sv.flight_path),
    )
