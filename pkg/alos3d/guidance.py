"""Adaptive line-of-sight guidance.

Commands heading and pitch towards a point `delta` ahead along the path,
offset by running estimates of the horizontal and vertical crab angles:

    psi_d   = ssa(pi_h - beta_hat - atan(y_e / delta_h))
    theta_d = pi_v + alpha_hat + atan(z_e / delta_v)

The estimates adapt on the track errors through a scalar boundary-layer
projection that keeps them inside [-(bound + layer), bound + layer] and is
inert while they stay within `bound`. Pitch commands are clipped to
+-(pi/2 - 5 deg) so that the zyx chart is never left; the command carries a
`saturated` flag instead of raising.

Reads: kinematics, path_frame
"""

from __future__ import annotations

from dataclasses import dataclass
import math
import typing as tp

from .kinematics import ssa
from .path_frame import TrackingError


THETA_LIMIT = math.pi / 2 - math.radians(5.0)


class PathAngles(tp.Protocol):
    pi_h: float
    pi_v: float


class GuidanceError(ValueError):
    pass


@dataclass(frozen=True)
class GuidanceParams:
    delta_h: float = 20.0
    delta_v: float = 20.0
    k_h: float = 0.0015
    k_v: float = 0.0015
    proj_bound: float = math.radians(45.0)
    proj_layer: float = math.radians(5.0)
    # False runs the unprojected adaptation law (comparison runs only).
    projection: bool = True

    def __post_init__(self):
        for name in ("delta_h", "delta_v", "k_h", "k_v", "proj_bound", "proj_layer"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise GuidanceError(f"guidance.{name} must be > 0 (got {value!r})")

    @property
    def estimate_limit(self) -> float:
        return self.proj_bound + self.proj_layer


@dataclass(frozen=True)
class EstimatorState:
    alpha_hat: float = 0.0
    beta_hat: float = 0.0

    def __post_init__(self):
        for name in ("alpha_hat", "beta_hat"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise GuidanceError(f"{name} must be finite (got {value})")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class GuidanceCommand:
    psi_d: float
    theta_d: float
    saturated: bool = False


def psi_command(seg: PathAngles, err: TrackingError, est: EstimatorState,
                gp: GuidanceParams) -> float:
    return ssa(seg.pi_h - est.beta_hat - math.atan(err.y_e / gp.delta_h))


def theta_command(seg: PathAngles, err: TrackingError, est: EstimatorState,
                  gp: GuidanceParams) -> float:
    """Unclipped pitch command; see `guidance_command` for the saturated one."""
    return seg.pi_v + est.alpha_hat + math.atan(err.z_e / gp.delta_v)


def guidance_command(seg: PathAngles, err: TrackingError, est: EstimatorState,
                     gp: GuidanceParams) -> GuidanceCommand:
    theta_d = theta_command(seg, err, est, gp)
    saturated = abs(theta_d) > THETA_LIMIT
    if saturated:
        theta_d = math.copysign(THETA_LIMIT, theta_d)
    return GuidanceCommand(psi_command(seg, err, est, gp), theta_d, saturated)


def projection(estimate: float, signal: float, gp: GuidanceParams) -> float:
    """Scale back `signal` when it would push `estimate` further out than `proj_bound`.

    Inside the bound, or moving inwards, the signal passes unchanged. Across
    the boundary layer it fades linearly to zero at `proj_bound + proj_layer`.
    """
    if not gp.projection:
        return signal
    excess = abs(estimate) - gp.proj_bound
    if excess <= 0 or estimate * signal <= 0:
        return signal
    return signal * max(0.0, 1.0 - excess / gp.proj_layer)


def estimator_rates(err: TrackingError, est: EstimatorState,
                    gp: GuidanceParams) -> tp.Tuple[float, float]:
    """(d alpha_hat/dt, d beta_hat/dt)."""
    alpha_rate = (gp.k_v * gp.delta_v / math.hypot(gp.delta_v, err.z_e)
                  * projection(est.alpha_hat, err.z_e, gp))
    beta_rate = (gp.k_h * gp.delta_h / math.hypot(gp.delta_h, err.y_e)
                 * projection(est.beta_hat, err.y_e, gp))
    return alpha_rate, beta_rate
