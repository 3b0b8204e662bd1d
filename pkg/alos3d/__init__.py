# alos3d: 3-D adaptive line-of-sight guidance with the spherical
# amplitude-phase crab-angle model, plus a closed-loop kinematic simulator.
#
# __version__ is single-sourced from __about__.py (pyproject.toml's
# `version` is `dynamic` and reads the same file via hatchling).

from .__about__ import __version__

from .kinematics import EulerAngles, BodyVelocity, NedVector, SphericalVelocity, ssa
from .amplitude_phase import CrabAngles, BodyCrabAngles
from .path_frame import SegmentGeometry, TrackingError, Waypoint
from .guidance import EstimatorState, GuidanceCommand, GuidanceParams
from .simulate import SimLog, SimulationAbort, run_scenario
from .scenario import ScenarioError, load_scenario

__all__ = [
    "__version__",
    "EulerAngles",
    "BodyVelocity",
    "NedVector",
    "SphericalVelocity",
    "ssa",
    "CrabAngles",
    "BodyCrabAngles",
    "SegmentGeometry",
    "TrackingError",
    "Waypoint",
    "EstimatorState",
    "GuidanceCommand",
    "GuidanceParams",
    "SimLog",
    "SimulationAbort",
    "run_scenario",
    "ScenarioError",
    "load_scenario",
]

# Reads: __about__ (__version__), and the public types of each module
