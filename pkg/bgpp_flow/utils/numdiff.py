"""Central-difference derivatives shared by the bracket, Jacobi and pullback oracles."""

from typing import Callable

import numpy as np

from ..core.config import FD_STEP


def _steps(x: np.ndarray, h: float) -> np.ndarray:
    return h * np.maximum(1.0, np.abs(x))


def gradient(fn: Callable[[np.ndarray], float], x, h: float = FD_STEP) -> np.ndarray:
    """Gradient of a scalar field, step h * max(1, |x_i|) per coordinate."""
    x = np.asarray(x, dtype=float)
    steps = _steps(x, h)
    grad = np.empty_like(x)
    for i, hi in enumerate(steps):
        xp = x.copy()
        xm = x.copy()
        xp[i] += hi
        xm[i] -= hi
        grad[i] = (fn(xp) - fn(xm)) / (xp[i] - xm[i])
    return grad


def jacobian(fn: Callable[[np.ndarray], np.ndarray], x, h: float = FD_STEP, absolute: bool = False) -> np.ndarray:
    """Derivative of an array-valued map; result has the input axis last.

    With ``absolute`` the step is exactly h for every coordinate.
    """
    x = np.asarray(x, dtype=float)
    steps = np.full_like(x, h) if absolute else _steps(x, h)
    cols = []
    for i, hi in enumerate(steps):
        xp = x.copy()
        xm = x.copy()
        xp[i] += hi
        xm[i] -= hi
        cols.append((np.asarray(fn(xp)) - np.asarray(fn(xm))) / (xp[i] - xm[i]))
    return np.stack(cols, axis=-1)
