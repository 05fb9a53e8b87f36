"""Seeded random states away from coordinate singularities."""

import numpy as np

from ..models.schemas import MetricParams, MixedState, ReducedState

ANGLE_MARGIN = 0.2
MOMENTUM_RANGE = 3.0
T_OFFSETS = (0.1, 10.0)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_mixed_state(rng: np.random.Generator, params: MetricParams) -> MixedState:
    lo, hi = T_OFFSETS
    t = params.t_max + rng.uniform(lo, hi)
    P_t, M1, M2, M3 = rng.uniform(-MOMENTUM_RANGE, MOMENTUM_RANGE, size=4)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    theta = rng.uniform(ANGLE_MARGIN, np.pi - ANGLE_MARGIN)
    psi = rng.uniform(0.0, 2.0 * np.pi)
    return MixedState(t=t, P_t=P_t, M1=M1, M2=M2, M3=M3, phi=phi, theta=theta, psi=psi)


def random_reduced_state(rng: np.random.Generator, params: MetricParams) -> ReducedState:
    s = random_mixed_state(rng, params)
    return ReducedState(t=s.t, P_t=s.P_t, M1=s.M1, M2=s.M2, M3=s.M3)


def dominant_axis(params: MetricParams) -> int:
    """Slot of the extreme parameter lying farther from the middle one (largest on ties)."""
    tv = params.as_array()
    lo, mid, hi = np.sort(tv)
    if hi - mid >= mid - lo:
        return int(np.argmax(tv))
    return int(np.argmin(tv))


def pinned_axis_state(rng: np.random.Generator, params: MetricParams) -> MixedState:
    """Full-flow state whose body momentum is dominated by the :func:`dominant_axis` component.

    That component never changes sign along the Euler flow. When it is M3 the
    space-fixed momentum is put in the horizontal plane (P_phi = 0), otherwise
    along the vertical axis (P_phi = |M|); either way theta = 0 or pi would need
    the dominant component to vanish.
    """
    lo, hi = T_OFFSETS
    t = params.t_max + rng.uniform(lo, hi)
    P_t = rng.uniform(-MOMENTUM_RANGE, MOMENTUM_RANGE)
    axis = dominant_axis(params)
    M = rng.uniform(-0.4, 0.4, size=3)
    M[axis] = rng.uniform(1.5, MOMENTUM_RANGE)
    M1, M2, M3 = (float(v) for v in M)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    if axis == 2:
        psi = rng.uniform(0.0, 2.0 * np.pi)
        x = M1 * np.cos(psi) + M2 * np.sin(psi)
        theta = float(np.arctan2(M3, -x))
    else:
        psi = float(np.arctan2(M2, M1))
        theta = float(np.arccos(M3 / np.linalg.norm(M)))
    return MixedState(t=t, P_t=P_t, M1=M1, M2=M2, M3=M3, phi=phi, theta=theta, psi=psi)
