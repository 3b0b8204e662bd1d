"""Parse scenario files into validated, immutable run configurations.

A scenario is one TOML document with the sections [scenario], [path],
[current], [vehicle], [initial], [guidance], [sim] and [output]. Unknown
sections or keys are rejected, and every value is re-validated by the type
that owns it, so a typo in a gain name never silently falls back to a
default. Angles are in radians, lengths in m, speeds in m/s.

Built-in scenarios live next to this module in scenarios/*.toml and can be
named instead of given as a path.

Reads: scenarios/*.toml.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, replace
import math
from pathlib import Path
import typing as tp

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python 3.8-3.10 fallback
    import tomli as tomllib

from .guidance import GuidanceError, GuidanceParams
from .kinematics import BodyVelocity, KinematicsError, NedVector
from .path_frame import (
    CurvedPath,
    Helix,
    PathFrameError,
    SegmentGeometry,
    StraightPath,
    VerticalCircle,
    Waypoint,
    build_segments,
    segment_geometry,
)
from .simulate import AutopilotModel, CurrentModel, RollProfile, SpeedProfile


_SECTIONS = {"scenario", "path", "current", "vehicle", "initial", "guidance", "sim", "output"}
_SECTION_FIELDS = {
    "scenario": {"name", "description"},
    "path": {
        "kind", "waypoints", "switch_radius", "center", "radius", "pitch_per_turn",
        "turn", "azimuth", "arc", "start", "direction", "length",
    },
    "current": {"velocity", "ramp"},
    "vehicle": {
        "relative_velocity", "autopilot", "time_constant", "roll", "roll_amplitude",
        "roll_period", "speed_amplitude", "speed_period", "speed_min", "speed_max",
    },
    "initial": {
        "along_track", "cross_track", "vertical_track", "error_radius",
        "alpha_hat", "beta_hat", "psi", "theta",
    },
    "guidance": {"delta_h", "delta_v", "k_h", "k_v", "proj_bound", "proj_layer", "projection"},
    "sim": {"dt", "duration", "seed", "converge_tol", "saturation_abort", "rate_weight"},
    "output": {"csv", "decimation"},
}
_PATH_KINDS = {"waypoints", "straight", "horizontal_circle", "vertical_circle", "helix"}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class PathConfig:
    kind: str
    segments: tp.Tuple[SegmentGeometry, ...]
    curve: tp.Optional[CurvedPath]
    switch_radius: float
    waypoints: tp.Tuple[Waypoint, ...] = ()


@dataclass(frozen=True)
class VehicleConfig:
    relative_velocity: BodyVelocity
    autopilot: AutopilotModel
    roll: RollProfile
    speed: SpeedProfile


@dataclass(frozen=True)
class InitialConfig:
    along_track: float = 0.0
    cross_track: float = 0.0
    vertical_track: float = 0.0
    error_radius: float = 0.0
    alpha_hat: float = 0.0
    beta_hat: float = 0.0
    psi: tp.Optional[float] = None
    theta: tp.Optional[float] = None


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    duration: float = 300.0
    seed: int = 0
    converge_tol: float = 0.1
    saturation_abort: float = 5.0
    rate_weight: tp.Optional[tp.Tuple[float, float, float, float]] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ScenarioError(f"sim.dt must be > 0 (got {self.dt})")
        if not self.duration >= self.dt:
            raise ScenarioError(f"sim.duration must be >= sim.dt (got {self.duration})")
        if not self.converge_tol > 0:
            raise ScenarioError(f"sim.converge_tol must be > 0 (got {self.converge_tol})")
        if not self.saturation_abort > 0:
            raise ScenarioError(f"sim.saturation_abort must be > 0 (got {self.saturation_abort})")
        if self.seed < 0:
            raise ScenarioError(f"sim.seed must be >= 0 (got {self.seed})")


@dataclass(frozen=True)
class OutputConfig:
    csv: tp.Optional[str] = None
    decimation: int = 1

    def __post_init__(self):
        if self.decimation < 1:
            raise ScenarioError(f"output.decimation must be >= 1 (got {self.decimation})")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    description: str
    path: PathConfig
    current: CurrentModel
    vehicle: VehicleConfig
    initial: InitialConfig
    guidance: GuidanceParams
    sim: SimConfig
    output: OutputConfig


def scenarios_dir() -> Path:
    return Path(__file__).with_name("scenarios")


def builtin_scenarios() -> tp.List[str]:
    return sorted(path.stem for path in scenarios_dir().glob("*.toml"))


def scenario_path(name) -> Path:
    """Resolve a file path, or the name of a built-in scenario."""
    path = Path(name)
    if path.is_file():
        return path
    builtin = scenarios_dir() / f"{name}.toml"
    if builtin.is_file():
        return builtin
    raise ScenarioError(
        f"no scenario file or built-in scenario named {str(name)!r} "
        f"(built-in: {', '.join(builtin_scenarios())})")


def load_raw(path) -> tp.Dict[str, tp.Any]:
    try:
        with Path(path).open("rb") as handle:
            return tomllib.load(handle)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ScenarioError(f"invalid scenario file {path}: {exc}") from exc


def _number(record, field, owner, default=None):
    if field not in record:
        return default
    value = record[field]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"{owner}.{field} must be a finite number (got {value!r})")
    return float(value)


def _integer(record, field, owner, default):
    value = record.get(field, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{owner}.{field} must be an integer (got {value!r})")
    return value


def _triple(value, what):
    if (not isinstance(value, list) or len(value) != 3 or any(
            isinstance(item, bool) or not isinstance(item, (int, float)) for item in value)):
        raise ScenarioError(f"{what} must be a list of three numbers (got {value!r})")
    try:
        return NedVector(*value)
    except KinematicsError as exc:
        raise ScenarioError(f"{what}: {exc}") from exc


def _vector(record, field, owner, default=(0.0, 0.0, 0.0)):
    if field not in record:
        return NedVector(*default)
    return _triple(record[field], f"{owner}.{field}")


def _section(raw, name):
    record = raw.get(name, {})
    if not isinstance(record, dict):
        raise ScenarioError(f"[{name}] must be a table")
    unknown = set(record) - _SECTION_FIELDS[name]
    if unknown:
        raise ScenarioError(f"[{name}] has unsupported fields: {sorted(unknown)}")
    return record


def _required_number(record, field, owner):
    if field not in record:
        raise ScenarioError(f"{owner}.{field} is required")
    return _number(record, field, owner)


def _parse_curve(record, kind) -> CurvedPath:
    owner = "path"
    if kind == "straight":
        start = _vector(record, "start", owner)
        direction = _vector(record, "direction", owner, default=(1.0, 0.0, 0.0))
        seg = segment_geometry(Waypoint(start), Waypoint(start + direction))
        return StraightPath(start, seg.pi_h, seg.pi_v, _number(record, "length", owner, math.inf))
    center = _vector(record, "center", owner)
    radius = _required_number(record, "radius", owner)
    if kind == "vertical_circle":
        arc = record.get("arc", [-math.pi / 4, math.pi / 4])
        if (not isinstance(arc, list) or len(arc) != 2 or any(
                isinstance(item, bool) or not isinstance(item, (int, float)) for item in arc)):
            raise ScenarioError(f"path.arc must be [start, end] in radians (got {arc!r})")
        return VerticalCircle(center, radius, _number(record, "azimuth", owner, 0.0),
                              (float(arc[0]), float(arc[1])))
    pitch = _number(record, "pitch_per_turn", owner, 0.0) if kind == "helix" else 0.0
    if kind == "horizontal_circle" and "pitch_per_turn" in record:
        raise ScenarioError("path.pitch_per_turn only applies to kind = 'helix'")
    return Helix(center, radius, pitch, _integer(record, "turn", owner, 1))


def _parse_path(record, guidance: GuidanceParams) -> PathConfig:
    kind = record.get("kind", "waypoints")
    if not isinstance(kind, str) or kind not in _PATH_KINDS:
        raise ScenarioError(f"path.kind must be one of {sorted(_PATH_KINDS)} (got {kind!r})")
    switch_radius = _number(record, "switch_radius", "path", 2.0 * guidance.delta_h)
    if not switch_radius > 0:
        raise ScenarioError(f"path.switch_radius must be > 0 (got {switch_radius})")
    try:
        if kind == "waypoints":
            points = record.get("waypoints")
            if not isinstance(points, list) or len(points) < 2:
                raise ScenarioError("path.waypoints must list at least two [x, y, z] points")
            waypoints = tuple(Waypoint(_triple(point, f"path.waypoints[{index}]"))
                              for index, point in enumerate(points))
            return PathConfig(kind, build_segments(waypoints), None, switch_radius, waypoints)
        return PathConfig(kind, (), _parse_curve(record, kind), switch_radius)
    except PathFrameError as exc:
        raise ScenarioError(f"path: {exc}") from exc


def _parse_vehicle(record) -> VehicleConfig:
    owner = "vehicle"
    relative = _vector(record, "relative_velocity", owner, default=(2.0, 0.0, 0.0))
    velocity = BodyVelocity(relative.x, relative.y, relative.z)
    if not velocity.speed > 0:
        raise ScenarioError("vehicle.relative_velocity must be nonzero")
    try:
        return VehicleConfig(
            relative_velocity=velocity,
            autopilot=AutopilotModel(record.get("autopilot", "perfect"),
                                     _number(record, "time_constant", owner, 1.0)),
            roll=RollProfile(_number(record, "roll", owner, 0.0),
                             _number(record, "roll_amplitude", owner, 0.0),
                             _number(record, "roll_period", owner, 10.0)),
            speed=SpeedProfile(_number(record, "speed_amplitude", owner, 0.0),
                               _number(record, "speed_period", owner, 60.0),
                               _number(record, "speed_min", owner, 0.0),
                               _number(record, "speed_max", owner, math.inf)),
        )
    except ValueError as exc:
        raise ScenarioError(f"vehicle: {exc}") from exc


def _parse_initial(record, guidance: GuidanceParams) -> InitialConfig:
    owner = "initial"
    initial = InitialConfig(**{
        field: _number(record, field, owner, default)
        for field, default in (
            ("along_track", 0.0), ("cross_track", 0.0), ("vertical_track", 0.0),
            ("error_radius", 0.0), ("alpha_hat", 0.0), ("beta_hat", 0.0),
            ("psi", None), ("theta", None),
        )
    })
    if initial.error_radius < 0:
        raise ScenarioError(f"initial.error_radius must be >= 0 (got {initial.error_radius})")
    for field in ("alpha_hat", "beta_hat"):
        value = getattr(initial, field)
        if guidance.projection and abs(value) > guidance.estimate_limit:
            raise ScenarioError(
                f"initial.{field} must satisfy |{field}| <= proj_bound + proj_layer "
                f"(got {value}, limit {guidance.estimate_limit:.4f})")
    if initial.theta is not None and abs(initial.theta) >= math.pi / 2:
        raise ScenarioError(f"initial.theta must lie in (-pi/2, pi/2) (got {initial.theta})")
    return initial


def _parse_guidance(record) -> GuidanceParams:
    values = {field: _number(record, field, "guidance")
              for field in ("delta_h", "delta_v", "k_h", "k_v", "proj_bound", "proj_layer")
              if field in record}
    if "projection" in record:
        if not isinstance(record["projection"], bool):
            raise ScenarioError("guidance.projection must be true or false")
        values["projection"] = record["projection"]
    try:
        return GuidanceParams(**values)
    except GuidanceError as exc:
        raise ScenarioError(str(exc)) from exc


def _parse_sim(record) -> SimConfig:
    owner = "sim"
    weight = record.get("rate_weight")
    if weight is not None:
        if (not isinstance(weight, list) or len(weight) != 4 or any(
                isinstance(item, bool) or not isinstance(item, (int, float)) or item < 0
                for item in weight)):
            raise ScenarioError(f"sim.rate_weight must be four non-negative numbers (got {weight!r})")
        weight = tuple(float(item) for item in weight)
    return SimConfig(
        dt=_number(record, "dt", owner, 0.01),
        duration=_number(record, "duration", owner, 300.0),
        seed=_integer(record, "seed", owner, 0),
        converge_tol=_number(record, "converge_tol", owner, 0.1),
        saturation_abort=_number(record, "saturation_abort", owner, 5.0),
        rate_weight=weight,
    )


def _parse_output(record) -> OutputConfig:
    csv = record.get("csv")
    if csv is not None and (not isinstance(csv, str) or not csv):
        raise ScenarioError(f"output.csv must be a non-empty string (got {csv!r})")
    return OutputConfig(csv=csv, decimation=_integer(record, "decimation", "output", 1))


def parse_scenario(raw: tp.Mapping[str, tp.Any], name: str = "scenario") -> ScenarioConfig:
    unknown = set(raw) - _SECTIONS
    if unknown:
        raise ScenarioError(f"unsupported scenario sections: {sorted(unknown)}")
    sections = {section: _section(raw, section) for section in _SECTIONS}
    meta = sections["scenario"]
    guidance = _parse_guidance(sections["guidance"])
    current = sections["current"]
    return ScenarioConfig(
        name=str(meta.get("name", name)),
        description=str(meta.get("description", "")),
        path=_parse_path(sections["path"], guidance),
        current=CurrentModel(_vector(current, "velocity", "current"),
                             _vector(current, "ramp", "current")),
        vehicle=_parse_vehicle(sections["vehicle"]),
        initial=_parse_initial(sections["initial"], guidance),
        guidance=guidance,
        sim=_parse_sim(sections["sim"]),
        output=_parse_output(sections["output"]),
    )


def load_scenario(name_or_path) -> ScenarioConfig:
    path = scenario_path(name_or_path)
    return parse_scenario(load_raw(path), name=path.stem)


def set_parameter(raw: tp.Mapping[str, tp.Any], key: str, value) -> tp.Dict[str, tp.Any]:
    """Copy of `raw` with `section.field` set to `value`."""
    section, _, field = key.partition(".")
    if section not in _SECTIONS or field not in _SECTION_FIELDS[section]:
        raise ScenarioError(f"unknown scenario parameter {key!r}")
    updated = copy.deepcopy(dict(raw))
    updated.setdefault(section, {})[field] = value
    return updated


def with_overrides(config: ScenarioConfig, *, dt=None, duration=None, seed=None,
                   csv=None) -> ScenarioConfig:
    """Apply command-line overrides; the replaced sections re-validate themselves."""
    sim = config.sim
    if dt is not None:
        sim = replace(sim, dt=dt)
    if duration is not None:
        sim = replace(sim, duration=duration)
    if seed is not None:
        sim = replace(sim, seed=seed)
    output = config.output if csv is None else replace(config.output, csv=str(csv))
    return replace(config, sim=sim, output=output)
