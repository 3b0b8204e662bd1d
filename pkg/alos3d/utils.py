"""Foundation-layer grab-bag: the fixed-step RK4 integrator shared by
simulate.py and cascade.py, plus `InlinePoolExecutor`, the in-process
stand-in sweep.py uses when `--jobs 0`.

No internal alos3d imports -- this sits at the bottom of the dependency
graph so it can't accidentally create an import cycle.

Reads: (nothing internal)
"""

from concurrent.futures import Future
import typing as tp

import numpy as np


Vector = np.ndarray
Derivative = tp.Callable[[float, Vector], Vector]


def rk4_step(fn: Derivative, t: float, x: Vector, dt: float) -> Vector:
    """Advance `x' = fn(t, x)` by one classical Runge-Kutta step of size `dt`."""
    k1 = fn(t, x)
    k2 = fn(t + dt / 2, x + dt / 2 * k1)
    k3 = fn(t + dt / 2, x + dt / 2 * k2)
    k4 = fn(t + dt, x + dt * k3)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_count(duration: float, dt: float) -> int:
    """Number of fixed steps of size `dt` covering `duration`."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0 (got {dt})")
    return int(round(duration / dt))


class InlinePoolExecutor:
    """Executor look-alike that runs each submitted call immediately.

    Results (and exceptions) are stored on ordinary `Future` objects so
    callers can treat it exactly like a `ProcessPoolExecutor`.
    """

    def __init__(self, workers=0):
        self._open = True

    def submit(self, func, *args, **kwargs):
        if not self._open:
            raise RuntimeError("cannot schedule new futures after shutdown")
        future = Future()
        try:
            future.set_result(func(*args, **kwargs))
        except Exception as exc:
            future.set_exception(exc)
        return future

    def shutdown(self, *_, **__):
        self._open = False

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, exc_tb):
        self.shutdown()
        return False
