"""Parameter sweeps: one scenario, one parameter, a grid of values.

A sweep spec is a small YAML document:

    scenario: straight_level        # built-in name, or a path relative to the spec
    parameter: initial.error_radius # section.field of the scenario file
    values: [1.0, 10.0, 100.0]
    overrides:                      # optional, applied before the grid value
      sim.duration: 400.0

Besides plain scenario fields, `guidance.gain` sets k_h and k_v together,
`current.magnitude` rescales the current to the given speed, and
`path.curvature` sets the radius of a circle or helix to 1/curvature.

Each grid point is parsed, run and summarized independently; a failing
point (bad value, aborted run) becomes a row with its error message instead
of stopping the sweep. Rows come back in grid order whatever the
completion order.

Reads: analysis, scenario, simulate, utils
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import logging
import math
from pathlib import Path
import typing as tp

import tqdm
import yaml

from .analysis import summarize_run, xi_weights
from .scenario import (
    ScenarioError,
    load_raw,
    parse_scenario,
    scenario_path,
    scenarios_dir,
    set_parameter,
)
from .simulate import SimulationAbort, run_scenario
from .utils import InlinePoolExecutor


logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("index", "parameter", "value", "converged", "rate", "r2", "final_bias", "error")
_SPEC_FIELDS = {"scenario", "parameter", "values", "overrides"}


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    scenario: Path
    parameter: str
    values: tp.Tuple[float, ...]
    overrides: tp.Mapping[str, tp.Any]


@dataclass(frozen=True)
class SweepRow:
    index: int
    parameter: str
    value: float
    converged: bool
    rate: float = math.nan
    r2: float = math.nan
    final_bias: float = math.nan
    error: str = ""

    def as_row(self):
        return [self.index, self.parameter, self.value, int(self.converged),
                self.rate, self.r2, self.final_bias, self.error]


def sweep_spec_path(name) -> Path:
    path = Path(name)
    if path.is_file():
        return path
    builtin = scenarios_dir() / f"{name}.yaml"
    if builtin.is_file():
        return builtin
    raise SweepError(f"no sweep spec file or built-in sweep named {str(name)!r}")


def _resolve_scenario(name, base: Path) -> Path:
    candidate = base / str(name)
    if candidate.is_file():
        return candidate
    return scenario_path(name)


def load_sweep_spec(path) -> SweepSpec:
    path = sweep_spec_path(path)
    with open(path) as handle:
        raw = yaml.safe_load(handle)
    if not isinstance(raw, dict):
        raise SweepError(f"{path}: a sweep spec must be a mapping")
    unknown = set(raw) - _SPEC_FIELDS
    if unknown:
        raise SweepError(f"{path}: unsupported sweep fields: {sorted(unknown)}")
    for field in ("scenario", "parameter", "values"):
        if field not in raw:
            raise SweepError(f"{path}: sweep spec must define {field}")
    overrides = raw.get("overrides") or {}
    if not isinstance(overrides, dict):
        raise SweepError(f"{path}: overrides must be a mapping of section.field to value")
    return make_spec(_resolve_scenario(raw["scenario"], path.parent), raw["parameter"],
                     raw["values"], overrides)


def make_spec(scenario, parameter, values, overrides=None) -> SweepSpec:
    if not isinstance(parameter, str) or "." not in parameter:
        raise SweepError(f"sweep parameter must be section.field (got {parameter!r})")
    if (not isinstance(values, (list, tuple)) or not values or any(
            isinstance(item, bool) or not isinstance(item, (int, float)) for item in values)):
        raise SweepError(f"sweep values must be a non-empty list of numbers (got {values!r})")
    return SweepSpec(Path(scenario), parameter, tuple(float(v) for v in values),
                     dict(overrides or {}))


def apply_parameter(raw: tp.Mapping[str, tp.Any], key: str, value: float) -> tp.Dict[str, tp.Any]:
    """`scenario.set_parameter`, plus the derived sweep parameters."""
    if key == "guidance.gain":
        return set_parameter(set_parameter(raw, "guidance.k_h", value), "guidance.k_v", value)
    if key == "current.magnitude":
        velocity = raw.get("current", {}).get("velocity", [0.0, 0.0, 0.0])
        norm = math.sqrt(sum(float(c) ** 2 for c in velocity))
        if norm == 0:
            raise ScenarioError("current.magnitude needs a nonzero current.velocity direction")
        return set_parameter(raw, "current.velocity", [float(c) * value / norm for c in velocity])
    if key == "path.curvature":
        if not value > 0:
            raise ScenarioError(f"path.curvature must be > 0 (got {value})")
        return set_parameter(raw, "path.radius", 1.0 / value)
    return set_parameter(raw, key, value)


def run_point(raw: tp.Mapping[str, tp.Any], name: str, index: int, parameter: str,
              value: float) -> SweepRow:
    """Run one grid point; never raises for scenario or simulation failures."""
    try:
        config = parse_scenario(apply_parameter(raw, parameter, value), name=f"{name}[{index}]")
        log = run_scenario(config)
    except (ScenarioError, SimulationAbort) as exc:
        return SweepRow(index, parameter, value, converged=False, error=str(exc))
    weights = config.sim.rate_weight or xi_weights(config.guidance.delta_h, config.guidance.delta_v)
    summary = summarize_run(log, config.sim.converge_tol, weights)
    rate = summary.rate
    return SweepRow(
        index, parameter, value,
        converged=summary.converged,
        rate=rate.rate if rate else math.nan,
        r2=rate.r2 if rate else math.nan,
        final_bias=summary.alpha_bias,
    )


def run_sweep(spec: SweepSpec, jobs: int = 0, progress: bool = True) -> tp.List[SweepRow]:
    raw = load_raw(spec.scenario)
    for key, value in spec.overrides.items():
        raw = apply_parameter(raw, key, value)
    name = spec.scenario.stem
    logger.info("sweeping %s over %d values of %s", name, len(spec.values), spec.parameter)
    pool = ProcessPoolExecutor(jobs) if jobs > 0 else InlinePoolExecutor()
    with pool:
        futures = [pool.submit(run_point, raw, name, index, spec.parameter, value)
                   for index, value in enumerate(spec.values)]
        if progress:
            futures = tqdm.tqdm(futures, ncols=120, unit="run")
        rows = [future.result() for future in futures]
    failed = sum(1 for row in rows if row.error)
    if failed:
        logger.warning("%d of %d sweep points failed", failed, len(rows))
    return rows
