"""Reduced closed-loop model on a straight segment.

With a perfect autopilot and constant crab angles the full loop collapses
to the state xi = (z_e, alpha_tilde, y_e, beta_tilde), alpha_tilde =
alpha_c - alpha_hat, beta_tilde = beta_c - beta_hat. The vertical pair is
driven by the horizontal one only through the perturbation `g`, which
vanishes when pi_v = 0 or at the origin.

Reads: guidance, utils
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
import typing as tp

import numpy as np

from .guidance import GuidanceParams, projection
from .utils import rk4_step, step_count


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CascadeState:
    z_e: float = 0.0
    alpha_tilde: float = 0.0
    y_e: float = 0.0
    beta_tilde: float = 0.0

    def __post_init__(self):
        for name in ("z_e", "alpha_tilde", "y_e", "beta_tilde"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"CascadeState.{name} must be finite (got {value})")
            object.__setattr__(self, name, value)

    def as_array(self) -> np.ndarray:
        return np.array([self.z_e, self.alpha_tilde, self.y_e, self.beta_tilde])

    @classmethod
    def from_array(cls, values) -> "CascadeState":
        z_e, alpha_tilde, y_e, beta_tilde = (float(v) for v in values)
        return cls(z_e, alpha_tilde, y_e, beta_tilde)


def perturbation_g(y_e: float, beta_tilde: float, U_h: float, pi_v: float,
                   gp: GuidanceParams) -> float:
    """Coupling from the horizontal loop into the vertical-track error rate."""
    return U_h * math.sin(pi_v) * (math.cos(beta_tilde - math.atan(y_e / gp.delta_h)) - 1.0)


def cascade_rhs(xi: CascadeState, U: float, U_h: float, pi_v: float, gp: GuidanceParams,
                alpha_c: float = 0.0, beta_c: float = 0.0) -> CascadeState:
    """Time derivative of xi.

    `alpha_c`/`beta_c` are the (constant) true crab angles; they only enter
    through the projection, which acts on the estimates alpha_c - alpha_tilde
    and beta_c - beta_tilde.
    """
    if not (U_h > 0 and U >= U_h):
        raise ValueError(f"cascade needs U >= U_h > 0 (got U={U}, U_h={U_h})")
    z, at, y, bt = xi.z_e, xi.alpha_tilde, xi.y_e, xi.beta_tilde
    dv, dh = gp.delta_v, gp.delta_h
    root_v = math.hypot(dv, z)
    root_h = math.hypot(dh, y)
    z_dot = (-U * dv / root_v * (math.cos(at) * z / dv - math.sin(at))
             + perturbation_g(y, bt, U_h, pi_v, gp))
    y_dot = -U_h * dh / root_h * (math.cos(bt) * y / dh - math.sin(bt))
    return CascadeState(
        z_e=z_dot,
        alpha_tilde=-gp.k_v * dv / root_v * projection(alpha_c - at, z, gp),
        y_e=y_dot,
        beta_tilde=-gp.k_h * dh / root_h * projection(beta_c - bt, y, gp),
    )


def linearized_rate(U: float, delta: float, k: float) -> float:
    """Decay rate of one unperturbed subsystem linearized at the origin.

    The linearization has characteristic polynomial s^2 + (U/delta) s + k U;
    the rate is minus the largest real part of its roots.
    """
    if not (U > 0 and delta > 0 and k > 0):
        raise ValueError(f"linearized_rate needs U, delta, k > 0 (got {U}, {delta}, {k})")
    damping = U / delta
    disc = damping * damping - 4.0 * k * U
    if disc < 0:
        return damping / 2.0
    return (damping - math.sqrt(disc)) / 2.0


@dataclass(frozen=True)
class CascadeTrajectory:
    time: np.ndarray
    xi: np.ndarray  # (steps + 1, 4): z_e, alpha_tilde, y_e, beta_tilde

    @property
    def final(self) -> CascadeState:
        return CascadeState.from_array(self.xi[-1])


def simulate_cascade(xi0: CascadeState, U: float, U_h: float, pi_v: float,
                     gp: GuidanceParams, duration: float, dt: float = 0.01,
                     alpha_c: float = 0.0, beta_c: float = 0.0,
                     consistent_speed: bool = False) -> CascadeTrajectory:
    """Integrate the reduced model with fixed-step RK4.

    With `consistent_speed`, U_h is recomputed from the commanded flight-path
    angle, U_h = U cos(pi_v + atan(z_e/delta_v) - alpha_tilde), instead of
    being held at the given value.
    """
    steps = step_count(duration, dt)

    def rhs(t, x):
        state = CascadeState.from_array(x)
        horizontal = U_h
        if consistent_speed:
            gamma = pi_v + math.atan(state.z_e / gp.delta_v) - state.alpha_tilde
            horizontal = U * math.cos(gamma)
        return cascade_rhs(state, U, horizontal, pi_v, gp, alpha_c, beta_c).as_array()

    xi = np.empty((steps + 1, 4))
    xi[0] = xi0.as_array()
    for index in range(steps):
        xi[index + 1] = rk4_step(rhs, index * dt, xi[index], dt)
    logger.debug("cascade: %d steps of %g s, final |xi| = %.3g",
                 steps, dt, float(np.linalg.norm(xi[-1])))
    return CascadeTrajectory(time=np.arange(steps + 1) * dt, xi=xi)
