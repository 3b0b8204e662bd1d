"""PATH-frame geometry: waypoint segments, track errors, and regular
parametrized curves with the frame angular velocity they induce.

The PATH frame {p} is R_z(pi_h) R_y(pi_v): azimuth about NED z, then
elevation about the new y-axis, so its y-axis is always horizontal and its
x-axis is the path tangent. For a curve the angles depend on the path
parameter varpi, and the frame turns with

    omega = [-sin(pi_v) pi_h_dot, pi_v_dot, cos(pi_v) pi_h_dot]

expressed in {p}. varpi is advanced so the along-track error stays at zero,
which gives varpi_dot in closed form (see `curved_errors_and_rates`).

Reads: kinematics
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
import math
import typing as tp

import numpy as np

from .kinematics import (
    DEFAULT_TOL,
    PITCH_MARGIN,
    NedVector,
    rot_y,
    rot_z,
    ssa,
)


class PathFrameError(ValueError):
    pass


class DegenerateSegmentError(PathFrameError):
    pass


class PathSingularityError(PathFrameError):
    """varpi_dot cannot be solved: too far from the path, or tangent degenerate."""


class IrregularPathError(PathFrameError):
    pass


@dataclass(frozen=True)
class Waypoint:
    position: NedVector


@dataclass(frozen=True)
class SegmentGeometry:
    origin: NedVector
    pi_h: float
    pi_v: float
    length: float

    def __post_init__(self):
        object.__setattr__(self, "pi_h", ssa(self.pi_h))
        if not abs(self.pi_v) < math.pi / 2:
            raise DegenerateSegmentError(f"pi_v must lie in (-pi/2, pi/2) (got {self.pi_v})")
        if not self.length > 0:
            raise DegenerateSegmentError(f"segment length must be > 0 (got {self.length})")

    @property
    def direction(self) -> NedVector:
        cv = math.cos(self.pi_v)
        return NedVector(cv * math.cos(self.pi_h), cv * math.sin(self.pi_h), -math.sin(self.pi_v))

    @property
    def end(self) -> NedVector:
        return self.origin + self.direction.scaled(self.length)


@dataclass(frozen=True)
class TrackingError:
    x_e: float
    y_e: float
    z_e: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x_e, self.y_e, self.z_e)):
            raise PathFrameError("tracking errors must be finite")


@dataclass(frozen=True)
class PathFrameRates:
    omega_x: float
    omega_y: float
    omega_z: float
    varpi_dot: float


@dataclass(frozen=True)
class FrameAngles:
    """Bare (pi_h, pi_v) pair for the frame attached to a curve point."""
    pi_h: float
    pi_v: float


def path_rotation(pi_h: float, pi_v: float) -> np.ndarray:
    """R_z(pi_h) R_y(pi_v): PATH-frame vectors to NED."""
    return rot_z(pi_h) @ rot_y(pi_v)


def _to_path(pi_h, pi_v, dx, dy, dz):
    ch, sh = math.cos(pi_h), math.sin(pi_h)
    cv, sv = math.cos(pi_v), math.sin(pi_v)
    along = ch * dx + sh * dy
    return cv * along - sv * dz, -sh * dx + ch * dy, sv * along + cv * dz


def segment_geometry(wp_i: Waypoint, wp_next: Waypoint) -> SegmentGeometry:
    delta = wp_next.position - wp_i.position
    length = delta.norm()
    if length <= DEFAULT_TOL:
        raise DegenerateSegmentError(
            f"waypoints {wp_i.position} and {wp_next.position} coincide")
    pi_v = math.atan2(-delta.z, math.hypot(delta.x, delta.y))
    if abs(pi_v) >= math.pi / 2 - PITCH_MARGIN:
        raise DegenerateSegmentError(
            f"segment {wp_i.position} -> {wp_next.position} is vertical (|pi_v| = pi/2)")
    return SegmentGeometry(
        origin=wp_i.position,
        pi_h=math.atan2(delta.y, delta.x),
        pi_v=pi_v,
        length=length,
    )


def build_segments(waypoints: tp.Sequence[Waypoint]) -> tp.Tuple[SegmentGeometry, ...]:
    if len(waypoints) < 2:
        raise DegenerateSegmentError("a waypoint path needs at least two waypoints")
    return tuple(segment_geometry(a, b) for a, b in zip(waypoints[:-1], waypoints[1:]))


def tracking_errors(seg: SegmentGeometry, p: NedVector) -> TrackingError:
    """Along-, cross- and vertical-track errors of `p` in the segment's PATH frame."""
    return TrackingError(*_to_path(seg.pi_h, seg.pi_v,
                                   p.x - seg.origin.x, p.y - seg.origin.y, p.z - seg.origin.z))


def from_path_frame(seg: SegmentGeometry, err: TrackingError) -> NedVector:
    """Inverse of `tracking_errors`."""
    offset = path_rotation(seg.pi_h, seg.pi_v) @ np.array([err.x_e, err.y_e, err.z_e])
    return seg.origin + NedVector.from_iterable(offset)


def switch_segment(seg: SegmentGeometry, err: TrackingError, radius: float) -> bool:
    """Sphere-of-acceptance test on along-track progress (strict)."""
    if not radius > 0:
        raise ValueError(f"switch radius must be > 0 (got {radius})")
    return err.x_e > seg.length - radius


def frame_angular_velocity(pi_v: float, pi_h_dot: float,
                           pi_v_dot: float) -> tp.Tuple[float, float, float]:
    """Angular velocity of R_z(pi_h) R_y(pi_v), expressed in the PATH frame."""
    return (-math.sin(pi_v) * pi_h_dot, pi_v_dot, math.cos(pi_v) * pi_h_dot)


class CurvedPath(abc.ABC):
    """Regular path p(varpi) over [varpi_min, varpi_max], described analytically.

    Subclasses give the position, the tangent azimuth/elevation, the norm of
    dp/dvarpi and the derivatives of the tangent angles w.r.t. varpi.
    """

    varpi_min: float = 0.0
    varpi_max: float = math.inf

    @abc.abstractmethod
    def position(self, varpi: float) -> NedVector:
        ...

    @abc.abstractmethod
    def tangent(self, varpi: float) -> tp.Tuple[float, float]:
        """(pi_h, pi_v) of the tangent at varpi."""

    @abc.abstractmethod
    def speed(self, varpi: float) -> float:
        """||dp/dvarpi||."""

    @abc.abstractmethod
    def angle_rates(self, varpi: float) -> tp.Tuple[float, float]:
        """(d pi_h / d varpi, d pi_v / d varpi)."""

    def derivative(self, varpi: float) -> NedVector:
        pi_h, pi_v = self.tangent(varpi)
        scale = self.speed(varpi)
        cv = math.cos(pi_v)
        return NedVector(scale * cv * math.cos(pi_h), scale * cv * math.sin(pi_h),
                         -scale * math.sin(pi_v))

    def _check_regular(self, varpi):
        speed = self.speed(varpi)
        if not speed > 0:
            raise IrregularPathError(f"||p'(varpi)|| = {speed} at varpi = {varpi}")
        return speed


@dataclass(frozen=True)
class StraightPath(CurvedPath):
    """Straight line parametrized by arc length; the degenerate curve."""
    origin: NedVector
    pi_h: float
    pi_v: float
    length: float = math.inf

    def __post_init__(self):
        if not abs(self.pi_v) < math.pi / 2:
            raise IrregularPathError(f"pi_v must lie in (-pi/2, pi/2) (got {self.pi_v})")
        if not self.length > 0:
            raise IrregularPathError(f"path length must be > 0 (got {self.length})")

    @property
    def varpi_max(self):
        return self.length

    def position(self, varpi):
        cv = math.cos(self.pi_v)
        return NedVector(self.origin.x + varpi * cv * math.cos(self.pi_h),
                         self.origin.y + varpi * cv * math.sin(self.pi_h),
                         self.origin.z - varpi * math.sin(self.pi_v))

    def tangent(self, varpi):
        return ssa(self.pi_h), self.pi_v

    def speed(self, varpi):
        return 1.0

    def angle_rates(self, varpi):
        return 0.0, 0.0


@dataclass(frozen=True)
class Helix(CurvedPath):
    """Helix about a vertical axis through `center`; varpi is the turn angle.

    `pitch_per_turn` is the altitude gained per revolution (m, positive
    climbs, i.e. z decreases). `turn` = +1 turns clockwise seen from above
    (north towards east), -1 anticlockwise. pitch_per_turn = 0 is a
    horizontal circle.
    """
    center: NedVector
    radius: float
    pitch_per_turn: float = 0.0
    turn: int = 1

    def __post_init__(self):
        if not self.radius > 0:
            raise IrregularPathError(f"radius must be > 0 (got {self.radius})")
        if self.turn not in (1, -1):
            raise IrregularPathError(f"turn must be +1 or -1 (got {self.turn})")

    @property
    def climb(self) -> float:
        """Altitude gained per radian of varpi."""
        return self.pitch_per_turn / (2 * math.pi)

    def position(self, varpi):
        return NedVector(self.center.x + self.radius * math.cos(varpi),
                         self.center.y + self.turn * self.radius * math.sin(varpi),
                         self.center.z - self.climb * varpi)

    def tangent(self, varpi):
        return ssa(self.turn * (varpi + math.pi / 2)), math.atan2(self.climb, self.radius)

    def speed(self, varpi):
        return math.hypot(self.radius, self.climb)

    def angle_rates(self, varpi):
        return float(self.turn), 0.0


def horizontal_circle(center: NedVector, radius: float, turn: int = 1) -> Helix:
    return Helix(center=center, radius=radius, pitch_per_turn=0.0, turn=turn)


@dataclass(frozen=True)
class VerticalCircle(CurvedPath):
    """Arc of a circle in the vertical plane of azimuth `azimuth`.

    varpi is the tangent elevation itself: varpi = 0 is the lowest point
    (center + radius straight down), positive varpi climbs. The arc is
    limited to `arc` = (start, end) inside (-pi/2, pi/2).
    """
    center: NedVector
    radius: float
    azimuth: float = 0.0
    arc: tp.Tuple[float, float] = (-math.pi / 4, math.pi / 4)

    def __post_init__(self):
        if not self.radius > 0:
            raise IrregularPathError(f"radius must be > 0 (got {self.radius})")
        start, end = self.arc
        limit = math.pi / 2 - PITCH_MARGIN
        if not (-limit < start < end < limit):
            raise IrregularPathError(
                f"vertical circle arc must satisfy -pi/2 < start < end < pi/2 (got {self.arc})")

    @property
    def varpi_min(self):
        return self.arc[0]

    @property
    def varpi_max(self):
        return self.arc[1]

    def position(self, varpi):
        s = self.radius * math.sin(varpi)
        return NedVector(self.center.x + s * math.cos(self.azimuth),
                         self.center.y + s * math.sin(self.azimuth),
                         self.center.z + self.radius * math.cos(varpi))

    def tangent(self, varpi):
        return ssa(self.azimuth), varpi

    def speed(self, varpi):
        return self.radius

    def angle_rates(self, varpi):
        return 0.0, 1.0


def _curve_frame(path: CurvedPath, varpi: float, p: NedVector):
    origin = path.position(varpi)
    pi_h, pi_v = path.tangent(varpi)
    err = _to_path(pi_h, pi_v, p.x - origin.x, p.y - origin.y, p.z - origin.z)
    return pi_h, pi_v, err


def curve_tracking_errors(path: CurvedPath, varpi: float, p: NedVector) -> TrackingError:
    """`tracking_errors` for the PATH frame attached at `path.position(varpi)`."""
    return TrackingError(*_curve_frame(path, varpi, p)[2])


def _along_track_gain(path, varpi, pi_v, err, tol):
    """d(x_e)/d(varpi) with the vehicle held still, negated."""
    speed = path._check_regular(varpi)
    rate_h, rate_v = path.angle_rates(varpi)
    _, wy, wz = frame_angular_velocity(pi_v, rate_h, rate_v)
    gain = speed + wy * err[2] - wz * err[1]
    if abs(gain) < tol * max(1.0, speed):
        raise PathSingularityError(
            f"varpi_dot undefined at varpi = {varpi}: along-track balance {gain:.3g} "
            f"(y_e = {err[1]:.3g}, z_e = {err[2]:.3g})")
    return gain, rate_h, rate_v


def curved_errors_and_rates(path: CurvedPath, varpi: float, p: NedVector, vn: NedVector,
                            tol: float = DEFAULT_TOL) -> tp.Tuple[TrackingError, PathFrameRates]:
    """Track errors w.r.t. the curve point at `varpi` and the frame rates that
    keep the along-track error constant (zero once initialized on the path)."""
    pi_h, pi_v, err = _curve_frame(path, varpi, p)
    gain, rate_h, rate_v = _along_track_gain(path, varpi, pi_v, err, tol)
    tangential, _, _ = _to_path(pi_h, pi_v, vn.x, vn.y, vn.z)
    varpi_dot = tangential / gain
    wx, wy, wz = frame_angular_velocity(pi_v, rate_h * varpi_dot, rate_v * varpi_dot)
    return TrackingError(*err), PathFrameRates(wx, wy, wz, varpi_dot)


def curved_error_rates(path: CurvedPath, varpi: float, p: NedVector,
                       vn: NedVector) -> tp.Tuple[float, float, float]:
    """Time derivative of the PATH-frame error, e_dot = R^T (p_dot - p' varpi_dot) - omega x e."""
    err, rates = curved_errors_and_rates(path, varpi, p, vn)
    pi_h, pi_v = path.tangent(varpi)
    vx, vy, vz = _to_path(pi_h, pi_v, vn.x, vn.y, vn.z)
    wx, wy, wz = rates.omega_x, rates.omega_y, rates.omega_z
    x, y, z = err.x_e, err.y_e, err.z_e
    return (
        vx - path.speed(varpi) * rates.varpi_dot - (wy * z - wz * y),
        vy - (wz * x - wx * z),
        vz - (wx * y - wy * x),
    )


def project_onto_path(path: CurvedPath, p: NedVector, guess: float = 0.0,
                      tol: float = 1e-12, max_iter: int = 50) -> float:
    """Path parameter whose PATH frame puts `p` at zero along-track error (Newton)."""
    varpi = guess
    for _ in range(max_iter):
        _, pi_v, err = _curve_frame(path, varpi, p)
        if abs(err[0]) <= tol * max(1.0, path.speed(varpi)):
            return varpi
        gain, _, _ = _along_track_gain(path, varpi, pi_v, err, DEFAULT_TOL)
        varpi += err[0] / gain
    raise PathSingularityError(f"could not place {p} on the path (last varpi {varpi})")
