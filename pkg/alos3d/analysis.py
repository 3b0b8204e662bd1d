"""Convergence diagnostics on logged runs.

The main entry is `fit_exponential_rate`: a least-squares line through
ln ||xi(t)|| over the stretch where the error is genuinely decaying, i.e.
after it has fallen below `start_fraction` of its peak for good and before
it reaches `floor` times that peak. ||xi|| mixes metres and radians, so the
error components are weighted by 1/delta by default.

Reads: simulate (SimLog), amplitude_phase
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
import typing as tp

import numpy as np

from .amplitude_phase import alpha_star_array


logger = logging.getLogger(__name__)

XI_COMPONENTS = ("z_e", "alpha_tilde", "y_e", "beta_tilde")


class Trajectory(tp.Protocol):
    time: np.ndarray
    xi: np.ndarray


class RateFitError(RuntimeError):
    def __init__(self, message: str, **diagnostics):
        details = ", ".join(f"{key}={value:.4g}" for key, value in diagnostics.items())
        super().__init__(f"{message} ({details})" if details else message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class RateFit:
    rate: float
    r2: float
    t_start: float
    t_end: float
    decades: float


def xi_weights(delta_h: float, delta_v: float) -> np.ndarray:
    return np.array([1.0 / delta_v, 1.0, 1.0 / delta_h, 1.0])


def _component_indices(components) -> tp.List[int]:
    if components is None:
        return list(range(len(XI_COMPONENTS)))
    indices = []
    for item in components:
        if isinstance(item, str):
            if item not in XI_COMPONENTS:
                raise ValueError(f"unknown xi component {item!r}, expected one of {XI_COMPONENTS}")
            item = XI_COMPONENTS.index(item)
        indices.append(int(item))
    return indices


def weighted_xi_norm(xi: np.ndarray, weights=None, components=None) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    weights = np.ones(xi.shape[1]) if weights is None else np.asarray(weights, dtype=float)
    indices = _component_indices(components)
    return np.linalg.norm(xi[:, indices] * weights[indices], axis=1)


def fit_exponential_rate(trajectory: Trajectory, weights=None, components=None,
                         start_fraction: float = 0.1, floor: float = 1e-9,
                         min_decades: float = 2.0) -> RateFit:
    """Fit ||xi(t)|| ~ C exp(-rate t) on the decay window of `trajectory`.

    `weights` defaults to `xi_weights` of the trajectory's look-ahead
    distances when it has them, else to ones.
    """
    if weights is None and hasattr(trajectory, "delta_h"):
        weights = xi_weights(trajectory.delta_h, trajectory.delta_v)
    time = np.asarray(trajectory.time, dtype=float)
    norm = weighted_xi_norm(trajectory.xi, weights, components)
    if len(norm) < 3 or not np.all(np.isfinite(norm)):
        raise RateFitError("need at least three finite samples", samples=len(norm))
    peak = float(norm.max())
    if peak == 0:
        raise RateFitError("error is identically zero: nothing to fit")
    above = np.nonzero(norm >= start_fraction * peak)[0]
    start = int(above[-1]) + 1
    if start >= len(norm):
        raise RateFitError("error never drops below the start fraction of its peak",
                           peak=peak, final=float(norm[-1]))
    tail = np.nonzero(norm[start:] <= floor * peak)[0]
    end = start + int(tail[0]) if len(tail) else len(norm)
    if end - start < 3:
        raise RateFitError("decay window too short", samples=end - start)
    decades = math.log10(norm[start] / max(norm[end - 1], np.finfo(float).tiny))
    if decades < min_decades:
        raise RateFitError("error does not decay enough to fit a rate",
                           decades=decades, required=min_decades, final=float(norm[-1]))
    t = time[start:end]
    y = np.log(norm[start:end])
    slope, intercept = np.polyfit(t, y, 1)
    residual = y - (slope * t + intercept)
    spread = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(residual ** 2)) / spread if spread > 0 else 0.0
    logger.debug("rate fit over [%.2f, %.2f] s: rate %.5g, r2 %.5f", t[0], t[-1], -slope, r2)
    return RateFit(rate=float(-slope), r2=r2, t_start=float(t[0]), t_end=float(t[-1]),
                   decades=decades)


def envelope_is_monotone(time: np.ndarray, norm: np.ndarray, after: float = 0.0,
                         rtol: float = 1e-6) -> bool:
    """True when the local maxima of `norm` after `after` never grow."""
    time = np.asarray(time)
    norm = np.asarray(norm)
    tail = norm[time >= after]
    if len(tail) < 3:
        return True
    interior = (tail[1:-1] >= tail[:-2]) & (tail[1:-1] >= tail[2:])
    peaks = tail[1:-1][interior]
    return bool(np.all(peaks[1:] <= peaks[:-1] * (1 + rtol)))


def richardson_order(coarse, medium, fine) -> float:
    """Observed convergence order from results at steps h, h/2 and h/4."""
    coarse, medium, fine = (np.asarray(item, dtype=float) for item in (coarse, medium, fine))
    first = np.linalg.norm(coarse - medium)
    second = np.linalg.norm(medium - fine)
    if second == 0:
        raise ValueError("results at h/2 and h/4 coincide: order undefined")
    return math.log2(first / second)


@dataclass(frozen=True)
class FormulationComparison:
    time: np.ndarray
    segment: np.ndarray
    gamma: np.ndarray
    beta_c: np.ndarray
    alpha_c: np.ndarray
    alpha_c_star: np.ndarray
    difference: np.ndarray
    predicted: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return self.difference - self.predicted

    @property
    def max_residual(self) -> float:
        residual = np.abs(self.residual)
        if not np.any(np.isfinite(residual)):
            return math.nan
        return float(np.nanmax(residual))


def formulation_comparison(log, tol: float = 1e-9) -> FormulationComparison:
    """alpha_c* - alpha_c per row next to its prediction gamma - atan(tan gamma / cos beta_c).

    Rows where either side is undefined hold nan.
    """
    alpha_c = log.column("alpha_c")
    alpha_star = log.column("alpha_c_star")
    gamma = log.column("gamma")
    beta_c = log.column("beta_c")
    return FormulationComparison(
        time=log.time,
        segment=log.column("segment_index_or_varpi"),
        gamma=gamma,
        beta_c=beta_c,
        alpha_c=alpha_c,
        alpha_c_star=alpha_star,
        difference=alpha_star - alpha_c,
        predicted=alpha_star_array(alpha_c, beta_c, gamma, tol) - alpha_c,
    )


@dataclass(frozen=True)
class RunSummary:
    final_time: float
    final_y_e: float
    final_z_e: float
    alpha_bias: float
    alpha_star_gap: float
    converged: bool
    rate: tp.Optional[RateFit]
    # local maxima of the weighted error norm never grow inside the fit window; None without a fit
    monotone_envelope: tp.Optional[bool] = None


def summarize_run(log, converge_tol: float, weights=None) -> RunSummary:
    final = log.final
    try:
        rate = fit_exponential_rate(log, weights)
    except RateFitError as exc:
        logger.info("no rate fit: %s", exc)
        rate = None
    monotone = None
    if rate is not None:
        if weights is None:
            weights = xi_weights(log.delta_h, log.delta_v)
        window = log.time <= rate.t_end
        norm = weighted_xi_norm(log.xi[window], weights)
        monotone = envelope_is_monotone(log.time[window], norm, after=rate.t_start)
    return RunSummary(
        final_time=final.t,
        final_y_e=final.y_e,
        final_z_e=final.z_e,
        alpha_bias=abs(final.alpha_c - final.alpha_hat),
        alpha_star_gap=abs(final.alpha_c_star - final.alpha_hat),
        converged=abs(final.y_e) < converge_tol and abs(final.z_e) < converge_tol,
        rate=rate,
        monotone_envelope=monotone,
    )
