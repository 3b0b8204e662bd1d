"""Scenario files: built-ins, defaults and rejection of bad configurations."""
import copy
import math

import pytest

from alos3d.path_frame import Helix, VerticalCircle
from alos3d.scenario import (
    ScenarioError,
    builtin_scenarios,
    load_scenario,
    parse_scenario,
    scenario_path,
    set_parameter,
    with_overrides,
)

MINIMAL = {"path": {"waypoints": [[0.0, 0.0, 0.0], [100.0, 0.0, 0.0]]}}


def _with(section, **values):
    raw = copy.deepcopy(MINIMAL)
    raw.setdefault(section, {}).update(values)
    return raw


@pytest.mark.parametrize("name", builtin_scenarios())
def test_builtin_scenarios_parse(name):
    config = load_scenario(name)
    assert config.name == name
    assert config.sim.duration >= config.sim.dt


def test_defaults():
    config = parse_scenario(MINIMAL, name="minimal")
    assert config.name == "minimal"
    assert config.path.kind == "waypoints"
    assert config.path.switch_radius == 2 * config.guidance.delta_h
    assert config.vehicle.relative_velocity.u == 2.0
    assert config.vehicle.autopilot.perfect
    assert config.guidance.projection
    assert (config.sim.dt, config.sim.saturation_abort, config.output.decimation) == (0.01, 5.0, 1)
    assert config.output.csv is None


def test_curved_paths():
    circle = load_scenario("horizontal_circle").path.curve
    assert isinstance(circle, Helix) and circle.pitch_per_turn == 0.0
    arc = load_scenario("vertical_circle").path.curve
    assert isinstance(arc, VerticalCircle)
    assert (arc.varpi_min, arc.varpi_max) == (-0.6, 0.6)
    line = parse_scenario({"path": {"kind": "straight", "direction": [1.0, 1.0, 0.0],
                                    "length": 50.0}}).path.curve
    assert line.pi_h == pytest.approx(math.pi / 4)


@pytest.mark.parametrize("raw, match", [
    ({**MINIMAL, "physics": {}}, "unsupported scenario sections"),
    (_with("sim", dtt=0.1), r"\[sim\] has unsupported fields"),
    (_with("sim", dt=0.0), "sim.dt must be > 0"),
    (_with("sim", dt=1.0, duration=0.5), "sim.duration must be >= sim.dt"),
    (_with("sim", seed=-1), "sim.seed must be >= 0"),
    (_with("sim", seed=1.5), "sim.seed must be an integer"),
    (_with("sim", rate_weight=[1.0, 1.0]), "sim.rate_weight"),
    (_with("output", decimation=0), "output.decimation must be >= 1"),
    (_with("guidance", projection="yes"), "guidance.projection must be true or false"),
    (_with("guidance", delta_h=0.0), "guidance.delta_h must be > 0"),
    (_with("guidance", k_v=True), "guidance.k_v must be a finite number"),
    (_with("initial", alpha_hat=1.0), r"initial.alpha_hat must satisfy \|alpha_hat\|"),
    (_with("initial", theta=1.6), "initial.theta must lie in"),
    (_with("initial", error_radius=-1.0), "initial.error_radius must be >= 0"),
    (_with("vehicle", autopilot="pid"), "autopilot mode"),
    (_with("vehicle", relative_velocity=[0.0, 0.0, 0.0]), "relative_velocity must be nonzero"),
    (_with("current", velocity=[1.0, 0.0]), "current.velocity must be a list of three numbers"),
    ({"path": {"waypoints": [[0.0, 0.0, 0.0]]}}, "at least two"),
    ({"path": {"waypoints": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]}}, "coincide"),
    ({"path": {"waypoints": [[0.0, 0.0, 0.0], [0.0, 0.0, 10.0]]}}, "vertical"),
    ({"path": {"kind": "spiral"}}, "path.kind must be one of"),
    ({"path": {"kind": "helix", "radius": 100.0, "turn": 2}}, "turn must be"),
    ({"path": {"kind": "helix"}}, "path.radius is required"),
    ({"path": {"kind": "horizontal_circle", "radius": 50.0, "pitch_per_turn": 10.0}},
     "only applies to kind = 'helix'"),
    ({"path": {"kind": "vertical_circle", "radius": 50.0, "arc": [0.5, -0.5]}}, "arc"),
    ({"path": {"kind": "vertical_circle", "radius": 50.0, "arc": [-2.0, 0.5]}}, "arc"),
])
def test_bad_configurations_are_rejected(raw, match):
    with pytest.raises(ScenarioError, match=match):
        parse_scenario(raw)


def test_projection_off_lifts_the_initial_estimate_limit():
    raw = _with("initial", alpha_hat=1.0)
    raw["guidance"] = {"projection": False}
    assert parse_scenario(raw).initial.alpha_hat == 1.0


def test_unknown_scenario_names_list_the_builtins():
    with pytest.raises(ScenarioError, match="straight_level"):
        scenario_path("no_such_scenario")


def test_files_load_from_disk(tmp_path):
    path = tmp_path / "mine.toml"
    path.write_text('[path]\nwaypoints = [[0.0, 0.0, 0.0], [50.0, 50.0, 0.0]]\n'
                    '[guidance]\ndelta_h = 15.0\n')
    config = load_scenario(path)
    assert config.name == "mine"
    assert config.guidance.delta_h == 15.0
    assert config.path.switch_radius == 30.0
    path.write_text("[path\n")
    with pytest.raises(ScenarioError, match="invalid scenario file"):
        load_scenario(path)


def test_overrides_revalidate():
    config = load_scenario("straight_level")
    changed = with_overrides(config, dt=0.2, duration=10.0, seed=3, csv="out.csv")
    assert (changed.sim.dt, changed.sim.duration, changed.sim.seed) == (0.2, 10.0, 3)
    assert changed.output.csv == "out.csv"
    assert config.sim.dt == 0.05
    with pytest.raises(ScenarioError, match="sim.dt"):
        with_overrides(config, dt=-1.0)


def test_set_parameter_copies():
    raw = copy.deepcopy(MINIMAL)
    updated = set_parameter(raw, "guidance.k_h", 0.01)
    assert updated["guidance"] == {"k_h": 0.01}
    assert "guidance" not in raw
    with pytest.raises(ScenarioError, match="unknown scenario parameter"):
        set_parameter(raw, "guidance.gain_h", 0.01)
