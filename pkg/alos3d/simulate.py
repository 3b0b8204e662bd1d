"""Closed-loop kinematic simulation of the guided vehicle.

The vehicle is a kinematic surrogate: it moves with a body-fixed velocity
relative to the water (optionally rescaled by a speed profile), rotated into
NED by its attitude and carried by a current. Heading and pitch come from
the autopilot (perfect tracking of the guidance commands, or a first-order
lag); roll is exogenous. Everything is advanced together with fixed-step
RK4, so a run is a pure function of its configuration.

The integration state is [x, y, z, psi, theta, alpha_hat, beta_hat, varpi].
In perfect mode psi/theta are recomputed from the commands inside every
derivative evaluation and their own derivatives are zero. varpi is only
used on curved paths.

Reads: amplitude_phase, guidance, kinematics, path_frame, utils
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
import logging
import math
import typing as tp

import numpy as np

from .amplitude_phase import (
    CrabAngleError,
    body_crab_angles,
    spherical_crab_from_angles,
)
from .guidance import (
    EstimatorState,
    GuidanceCommand,
    GuidanceParams,
    estimator_rates,
    guidance_command,
)
from .kinematics import (
    BodyVelocity,
    EulerAngles,
    KinematicsError,
    NedVector,
    check_pitch,
    ned_velocity,
    rotation_body_to_ned,
    spherical_velocity,
    ssa,
)
from .path_frame import (
    CurvedPath,
    FrameAngles,
    PathFrameError,
    SegmentGeometry,
    TrackingError,
    curve_tracking_errors,
    curved_errors_and_rates,
    from_path_frame,
    path_rotation,
    project_onto_path,
    switch_segment,
    tracking_errors,
)
from .utils import rk4_step, step_count

if tp.TYPE_CHECKING:  # pragma: no cover
    from .scenario import ScenarioConfig


logger = logging.getLogger(__name__)

FLAG_CLIPPED = 1
FLAG_SWITCH = 2
FLAG_ALPHA_STAR_UNDEFINED = 4

_STATE_SIZE = 8


class CommandSaturationError(RuntimeError):
    pass


class SimulationAbort(RuntimeError):
    """A run stopped early; `log` holds every row recorded before the failure."""

    def __init__(self, step: int, time: float, cause: BaseException, log: "SimLog" = None):
        super().__init__(f"step {step} (t = {time:.3f} s): {cause}")
        self.step = step
        self.time = time
        self.cause = cause
        self.log = log


@dataclass(frozen=True)
class VehicleState:
    position: NedVector
    attitude: EulerAngles
    relative_velocity_body: BodyVelocity

    def __post_init__(self):
        check_pitch(self.attitude.theta)
        if not self.relative_velocity_body.speed > 0:
            raise KinematicsError("vehicle relative speed must be > 0")


@dataclass(frozen=True)
class CurrentModel:
    velocity: NedVector = NedVector(0.0, 0.0, 0.0)
    ramp: NedVector = NedVector(0.0, 0.0, 0.0)

    def at(self, t: float) -> NedVector:
        return self.velocity + self.ramp.scaled(t)


@dataclass(frozen=True)
class AutopilotModel:
    mode: str = "perfect"
    time_constant: float = 1.0

    def __post_init__(self):
        if self.mode not in ("perfect", "lag"):
            raise ValueError(f"autopilot mode must be 'perfect' or 'lag' (got {self.mode!r})")
        if self.mode == "lag" and not self.time_constant > 0:
            raise ValueError(f"autopilot time_constant must be > 0 (got {self.time_constant})")

    @property
    def perfect(self) -> bool:
        return self.mode == "perfect"


@dataclass(frozen=True)
class RollProfile:
    """phi(t) = mean + amplitude * sin(2 pi t / period)."""
    mean: float = 0.0
    amplitude: float = 0.0
    period: float = 10.0

    def __post_init__(self):
        if self.amplitude and not self.period > 0:
            raise ValueError(f"roll period must be > 0 (got {self.period})")

    def at(self, t: float) -> float:
        if not self.amplitude:
            return self.mean
        return self.mean + self.amplitude * math.sin(2 * math.pi * t / self.period)


@dataclass(frozen=True)
class SpeedProfile:
    """Relative speed U0 + amplitude * sin(2 pi t / period), clipped to [speed_min, speed_max].

    Applied as a scale factor on the nominal body-relative velocity.
    """
    amplitude: float = 0.0
    period: float = 60.0
    speed_min: float = 0.0
    speed_max: float = math.inf

    def __post_init__(self):
        if self.amplitude and not self.period > 0:
            raise ValueError(f"speed period must be > 0 (got {self.period})")
        if not 0 <= self.speed_min <= self.speed_max:
            raise ValueError(
                f"speed bounds need 0 <= speed_min <= speed_max (got {self.speed_min}, {self.speed_max})")

    def factor(self, t: float, nominal: float) -> float:
        speed = nominal + self.amplitude * math.sin(2 * math.pi * t / self.period)
        speed = min(max(speed, self.speed_min), self.speed_max)
        if not speed > 0:
            raise KinematicsError(f"speed profile reached {speed} m/s at t = {t}")
        return speed / nominal


@dataclass(frozen=True)
class LoopContext:
    """Everything a step needs besides the evolving state."""
    guidance: GuidanceParams
    relative_velocity: BodyVelocity
    segments: tp.Tuple[SegmentGeometry, ...] = ()
    curve: tp.Optional[CurvedPath] = None
    switch_radius: float = 40.0
    current: CurrentModel = CurrentModel()
    autopilot: AutopilotModel = AutopilotModel()
    roll: RollProfile = RollProfile()
    speed: SpeedProfile = SpeedProfile()
    saturation_abort: float = 5.0

    def __post_init__(self):
        if (self.curve is None) == (not self.segments):
            raise ValueError("exactly one of segments or curve must be given")
        if not self.switch_radius > 0:
            raise ValueError(f"switch radius must be > 0 (got {self.switch_radius})")
        if not self.saturation_abort > 0:
            raise ValueError(f"saturation_abort must be > 0 (got {self.saturation_abort})")


@dataclass(frozen=True)
class SimState:
    step: int
    t: float
    vehicle: VehicleState
    estimator: EstimatorState
    segment: int = 0
    varpi: float = 0.0
    saturated_for: float = 0.0


@dataclass(frozen=True)
class LogRow:
    t: float
    x_n: float
    y_n: float
    z_n: float
    x_e: float
    y_e: float
    z_e: float
    phi: float
    theta: float
    psi: float
    psi_d: float
    theta_d: float
    alpha_c: float
    alpha_c_star: float
    beta_c: float
    alpha_hat: float
    beta_hat: float
    gamma: float
    U: float
    U_h: float
    segment_index_or_varpi: float
    flags: int


LOG_COLUMNS = tuple(f.name for f in fields(LogRow))


@dataclass
class SimLog:
    """Rows of a run at a fixed step, strictly increasing in time."""
    dt: float
    rows: tp.List[LogRow] = field(default_factory=list)
    delta_h: float = 20.0
    delta_v: float = 20.0

    def append(self, row: LogRow):
        if self.rows and not row.t > self.rows[-1].t:
            raise ValueError(f"log time must increase (got {row.t} after {self.rows[-1].t})")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        if name not in LOG_COLUMNS:
            raise KeyError(f"unknown log column {name!r}")
        return np.array([getattr(row, name) for row in self.rows], dtype=float)

    @property
    def time(self) -> np.ndarray:
        return self.column("t")

    @property
    def xi(self) -> np.ndarray:
        """(n, 4) array of z_e, alpha_tilde, y_e, beta_tilde."""
        beta_tilde = self.column("beta_c") - self.column("beta_hat")
        beta_tilde = np.mod(beta_tilde + np.pi, 2 * np.pi) - np.pi
        return np.stack([
            self.column("z_e"),
            self.column("alpha_c") - self.column("alpha_hat"),
            self.column("y_e"),
            beta_tilde,
        ], axis=1)

    @property
    def final(self) -> LogRow:
        return self.rows[-1]


def _frame(ctx: LoopContext, segment: int, varpi: float, p: NedVector):
    if ctx.curve is None:
        seg = ctx.segments[segment]
        return seg, tracking_errors(seg, p)
    pi_h, pi_v = ctx.curve.tangent(varpi)
    return FrameAngles(pi_h, pi_v), curve_tracking_errors(ctx.curve, varpi, p)


def _attitude(ctx: LoopContext, t: float, x: np.ndarray, command: GuidanceCommand) -> EulerAngles:
    if ctx.autopilot.perfect:
        return EulerAngles(ctx.roll.at(t), command.theta_d, command.psi_d)
    return EulerAngles(ctx.roll.at(t), x[4], x[3])


def _relative_velocity(ctx: LoopContext, t: float) -> BodyVelocity:
    nominal = ctx.relative_velocity
    if not ctx.speed.amplitude:
        return nominal
    return nominal.scaled(ctx.speed.factor(t, nominal.speed))


def _evaluate(ctx: LoopContext, t: float, x: np.ndarray, segment: int):
    p = NedVector(x[0], x[1], x[2])
    est = EstimatorState(x[5], x[6])
    angles, err = _frame(ctx, segment, x[7], p)
    command = guidance_command(angles, err, est, ctx.guidance)
    att = _attitude(ctx, t, x, command)
    vn = ned_velocity(att, _relative_velocity(ctx, t)) + ctx.current.at(t)
    return p, est, angles, err, command, att, vn


def _derivatives(ctx: LoopContext, segment: int) -> tp.Callable[[float, np.ndarray], np.ndarray]:
    def rhs(t, x):
        p, est, _, err, command, att, vn = _evaluate(ctx, t, x, segment)
        dx = np.zeros(_STATE_SIZE)
        dx[0:3] = (vn.x, vn.y, vn.z)
        if not ctx.autopilot.perfect:
            tau = ctx.autopilot.time_constant
            dx[3] = ssa(command.psi_d - att.psi) / tau
            dx[4] = (command.theta_d - att.theta) / tau
        dx[5], dx[6] = estimator_rates(err, est, ctx.guidance)
        if ctx.curve is not None:
            dx[7] = curved_errors_and_rates(ctx.curve, x[7], p, vn)[1].varpi_dot
        return dx
    return rhs


def _pack(state: SimState) -> np.ndarray:
    p, att, est = state.vehicle.position, state.vehicle.attitude, state.estimator
    return np.array([p.x, p.y, p.z, att.psi, att.theta, est.alpha_hat, est.beta_hat, state.varpi])


def observe(state: SimState, ctx: LoopContext, flags: int = 0) -> LogRow:
    """Log row for `state`: errors, commands, true and estimated crab angles."""
    x = _pack(state)
    p, est, _, err, command, att, vn = _evaluate(ctx, state.t, x, state.segment)
    sv = spherical_velocity(vn)
    ca = spherical_crab_from_angles(att, sv)
    if command.saturated:
        flags |= FLAG_CLIPPED
    ground_body = rotation_body_to_ned(att).T @ vn.as_array()
    try:
        alpha_star = body_crab_angles(att, BodyVelocity(*ground_body)).alpha_c_star
    except CrabAngleError:
        alpha_star = math.nan
        flags |= FLAG_ALPHA_STAR_UNDEFINED
    return LogRow(
        t=state.t, x_n=p.x, y_n=p.y, z_n=p.z,
        x_e=err.x_e, y_e=err.y_e, z_e=err.z_e,
        phi=att.phi, theta=att.theta, psi=att.psi,
        psi_d=command.psi_d, theta_d=command.theta_d,
        alpha_c=ca.alpha_c, alpha_c_star=alpha_star, beta_c=ca.beta_c,
        alpha_hat=est.alpha_hat, beta_hat=est.beta_hat,
        gamma=sv.flight_path, U=sv.speed_total, U_h=sv.speed_horizontal,
        segment_index_or_varpi=float(state.segment) if ctx.curve is None else state.varpi,
        flags=flags,
    )


def step_full(state: SimState, ctx: LoopContext, dt: float) -> tp.Tuple[SimState, LogRow]:
    """Advance the closed loop by one RK4 step and log the new state.

    Kinematic and path-frame failures, and pitch commands clipped for longer
    than `ctx.saturation_abort` seconds, are raised as `SimulationAbort`.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0 (got {dt})")
    step = state.step + 1
    t = step * dt
    try:
        x = rk4_step(_derivatives(ctx, state.segment), state.t, _pack(state), dt)
        segment, flags = state.segment, 0
        p = NedVector(x[0], x[1], x[2])
        if ctx.curve is None and segment + 1 < len(ctx.segments):
            if switch_segment(ctx.segments[segment], tracking_errors(ctx.segments[segment], p),
                              ctx.switch_radius):
                segment += 1
                flags |= FLAG_SWITCH
                logger.debug("t = %.3f s: switching to segment %d", t, segment)
        est = EstimatorState(x[5], x[6])
        _, _, _, _, command, att, _ = _evaluate(ctx, t, x, segment)
        saturated_for = state.saturated_for + dt if command.saturated else 0.0
        if saturated_for >= ctx.saturation_abort:
            raise CommandSaturationError(
                f"pitch command clipped for {saturated_for:.2f} s "
                f"(theta_d = {command.theta_d:.4f} rad)")
        new_state = SimState(
            step=step, t=t,
            vehicle=VehicleState(p, att, state.vehicle.relative_velocity_body),
            estimator=est, segment=segment, varpi=float(x[7]),
            saturated_for=saturated_for,
        )
        row = observe(new_state, ctx, flags)
    except (KinematicsError, PathFrameError, CommandSaturationError) as exc:
        raise SimulationAbort(step, t, exc) from exc
    if command.saturated and not state.saturated_for:
        logger.warning("t = %.3f s: pitch command clipped to %.4f rad", t, command.theta_d)
    return new_state, row


def initial_state(config: "ScenarioConfig", ctx: LoopContext) -> SimState:
    """Place the vehicle at the configured PATH-frame offset from the path start."""
    ini = config.initial
    cross, vertical = ini.cross_track, ini.vertical_track
    if ini.error_radius:
        rng = np.random.default_rng(config.sim.seed)
        direction = rng.uniform(-math.pi, math.pi)
        cross += ini.error_radius * math.cos(direction)
        vertical += ini.error_radius * math.sin(direction)
    varpi = 0.0
    if ctx.curve is None:
        seg = ctx.segments[0]
        position = from_path_frame(seg, TrackingError(ini.along_track, cross, vertical))
    else:
        start = ctx.curve.varpi_min if math.isfinite(ctx.curve.varpi_min) else 0.0
        guess = start + ini.along_track / ctx.curve.speed(start)
        pi_h, pi_v = ctx.curve.tangent(guess)
        offset = path_rotation(pi_h, pi_v) @ np.array([0.0, cross, vertical])
        position = ctx.curve.position(guess) + NedVector.from_iterable(offset)
        varpi = project_onto_path(ctx.curve, position, guess=guess)
    est = EstimatorState(ini.alpha_hat, ini.beta_hat)
    x = np.array([position.x, position.y, position.z, 0.0, 0.0,
                  est.alpha_hat, est.beta_hat, varpi])
    angles, err = _frame(ctx, 0, varpi, position)
    if not ctx.autopilot.perfect:
        x[3] = angles.pi_h if ini.psi is None else ini.psi
        x[4] = angles.pi_v if ini.theta is None else ini.theta
    command = guidance_command(angles, err, est, ctx.guidance)
    att = _attitude(ctx, 0.0, x, command)
    return SimState(
        step=0, t=0.0,
        vehicle=VehicleState(position, att, ctx.relative_velocity),
        estimator=est, segment=0, varpi=varpi,
    )


def loop_context(config: "ScenarioConfig") -> LoopContext:
    vehicle = config.vehicle
    return LoopContext(
        guidance=config.guidance,
        relative_velocity=vehicle.relative_velocity,
        segments=config.path.segments,
        curve=config.path.curve,
        switch_radius=config.path.switch_radius,
        current=config.current,
        autopilot=vehicle.autopilot,
        roll=vehicle.roll,
        speed=vehicle.speed,
        saturation_abort=config.sim.saturation_abort,
    )


def run_scenario(config: "ScenarioConfig") -> SimLog:
    """Run a scenario to `sim.duration` (or the end of a bounded curve).

    Raises `SimulationAbort` with the partial log attached.
    """
    ctx = loop_context(config)
    dt = config.sim.dt
    steps = step_count(config.sim.duration, dt)
    log = SimLog(dt=dt, delta_h=config.guidance.delta_h, delta_v=config.guidance.delta_v)
    try:
        state = initial_state(config, ctx)
        log.append(observe(state, ctx))
    except (KinematicsError, PathFrameError) as exc:
        raise SimulationAbort(0, 0.0, exc, log) from exc
    logger.info("running %s: %d steps of %g s", config.name, steps, dt)
    for _ in range(steps):
        try:
            state, row = step_full(state, ctx, dt)
        except SimulationAbort as abort:
            abort.log = log
            logger.warning("%s aborted at %s", config.name, abort)
            raise
        log.append(row)
        if ctx.curve is not None and state.varpi >= ctx.curve.varpi_max:
            logger.info("%s: reached the end of the path at t = %.2f s", config.name, state.t)
            break
    final = log.final
    logger.info("%s finished at t = %.2f s: y_e = %.3g m, z_e = %.3g m",
                config.name, final.t, final.y_e, final.z_e)
    return log
