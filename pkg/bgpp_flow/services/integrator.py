"""Dormand-Prince 5(4) integration of the full, reduced and Eguchi-Hanson flows
with proportional-integral step control, sampling on a fixed lambda stride
and first-integral drift monitoring.
"""

import math
from typing import Callable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.config import ABS_TOL, MAX_STEPS, MIN_STEP, REL_TOL, SAMPLE_STRIDE, SINGULAR_SIN_TOL
from ..core.exceptions import DomainError, DomainExit, NonFinite, SingularPoint, StepFailure
from ..core.logger import get_logger
from ..models.schemas import (
    EHState,
    FlowKind,
    IntegratorConfig,
    MetricParams,
    MixedState,
    ReducedState,
    Trajectory,
    TrajectorySample,
)
from . import eguchi_hanson, full_flow, reduced_flow
from .metric_core import check_domain, profile_values

logger = get_logger(__name__)

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th and embedded 4th order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# PI controller (Hairer & Wanner's dopri5 settings)
_ORDER_EXP = 0.2 - 0.75 * 0.04
_BETA = 0.04
_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0

StateLike = Union[MixedState, ReducedState, EHState, Sequence[float], np.ndarray]


class _LeftDomain(Exception):
    pass


class FlowSystem(NamedTuple):
    kind: FlowKind
    state_names: Tuple[str, ...]
    rhs: Callable[[np.ndarray], np.ndarray]
    integrals: Callable[[np.ndarray], dict]
    in_domain: Callable[[np.ndarray], bool]
    tau_rate: Callable[[np.ndarray], float]


def make_system(flow: FlowKind, params: Optional[MetricParams] = None, gamma2: Optional[float] = None) -> FlowSystem:
    """Bundle right-hand side, first integrals and domain test of one flow."""
    flow = FlowKind(flow)
    if flow is FlowKind.EH:
        g2 = eguchi_hanson.eh_gamma2(gamma2, params)
        gamma = math.sqrt(g2)
        return FlowSystem(
            kind=flow,
            state_names=eguchi_hanson.STATE_NAMES,
            rhs=lambda x: eguchi_hanson.eh_rhs_array(g2, x),
            integrals=lambda x: eguchi_hanson.eh_integrals_array(g2, x),
            in_domain=lambda x: x[0] > gamma,
            tau_rate=lambda x: 1.0 / (x[0] * (x[0] * x[0] - g2)),
        )

    if params is None:
        raise DomainError(f"The {flow.value} flow needs metric parameters")
    tv = params.as_array()
    t_max = params.t_max

    def tau_rate(x: np.ndarray) -> float:
        A, B, C = profile_values(tv[0], tv[1], tv[2], x[0])
        return 1.0 / (A * B * C)

    if flow is FlowKind.FULL:
        return FlowSystem(
            kind=flow,
            state_names=full_flow.STATE_NAMES,
            rhs=lambda x: full_flow.rhs_full_array(tv, x),
            integrals=lambda x: full_flow.integrals_array(tv, x),
            in_domain=lambda x: x[0] > t_max and abs(math.sin(x[6])) >= SINGULAR_SIN_TOL,
            tau_rate=tau_rate,
        )
    return FlowSystem(
        kind=flow,
        state_names=reduced_flow.STATE_NAMES,
        rhs=lambda x: reduced_flow.rhs_reduced_array(tv, x),
        integrals=lambda x: reduced_flow.reduced_integrals_array(tv, x),
        in_domain=lambda x: x[0] > t_max,
        tau_rate=tau_rate,
    )


def _as_array(initial: StateLike) -> np.ndarray:
    if hasattr(initial, "as_array"):
        return initial.as_array()
    return np.asarray(initial, dtype=float).copy()


def _check_initial(system: FlowSystem, x: np.ndarray, params: Optional[MetricParams]):
    if len(x) != len(system.state_names):
        raise DomainError(f"{system.kind.value} flow state needs {len(system.state_names)} components, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise NonFinite(f"Initial state has non-finite entries: {x}")
    if system.kind is FlowKind.FULL and abs(math.sin(x[6])) < SINGULAR_SIN_TOL:
        raise SingularPoint(f"Initial theta={x[6]} is on the Euler-angle singularity")
    if system.kind is not FlowKind.EH and params is not None:
        check_domain(params, x[0])
    if not system.in_domain(x):
        raise DomainError(f"Initial state {x} lies outside the {system.kind.value} flow domain")


def validate_initial(
    flow: FlowKind,
    initial: StateLike,
    params: Optional[MetricParams] = None,
    gamma2: Optional[float] = None,
) -> np.ndarray:
    """Check an initial state against the domain of a flow and return it as an array.

    Raises:
        DomainError: if the state has the wrong length or lies outside the domain
    """
    system = make_system(flow, params, gamma2)
    x = _as_array(initial)
    _check_initial(system, x, params)
    return x


def _augment(system: FlowSystem, track_tau: bool) -> Tuple[Callable, Callable]:
    """Right-hand side and domain test, with tau appended as an extra component when tracked."""
    if not track_tau:
        return system.rhs, system.in_domain

    def rhs(y: np.ndarray) -> np.ndarray:
        return np.append(system.rhs(y[:-1]), system.tau_rate(y[:-1]))

    return rhs, lambda y: system.in_domain(y[:-1])


def _evaluate(rhs: Callable, in_domain: Callable, y: np.ndarray) -> np.ndarray:
    if not in_domain(y):
        raise _LeftDomain()
    try:
        k = rhs(y)
    except (ValueError, ZeroDivisionError, FloatingPointError) as e:
        raise _LeftDomain() from e
    if not np.all(np.isfinite(k)):
        raise _LeftDomain()
    return k


def _dp_step(rhs: Callable, in_domain: Callable, y: np.ndarray, k1: np.ndarray, h: float):
    """One Dormand-Prince step; returns (y_new, error vector, k7)."""
    ks = [k1]
    for i in range(1, 7):
        acc = y.copy()
        for aij, kj in zip(_A[i], ks):
            if aij != 0.0:
                acc += h * aij * kj
        ks.append(_evaluate(rhs, in_domain, acc))
    # row 6 of the tableau equals the 5th order weights, so stage 7 sits at y_new
    y_new = y + h * sum(b * k for b, k in zip(_B, ks) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
    return y_new, err, ks[6]


def _error_norm(err: np.ndarray, y: np.ndarray, y_new: np.ndarray, rel_tol: float, abs_tol: float) -> float:
    scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(rhs, in_domain, y: np.ndarray, f0: np.ndarray, direction: float, rel_tol: float, abs_tol: float) -> float:
    scale = abs_tol + rel_tol * np.abs(y)
    d0 = float(np.sqrt(np.mean((y / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    try:
        f1 = _evaluate(rhs, in_domain, y + direction * h0 * f0)
    except _LeftDomain:
        return h0 * 1e-3
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 5.0)
    return min(100.0 * h0, h1)


def _sample_grid(lam0: float, lam1: float, stride: float) -> np.ndarray:
    if lam1 == lam0:
        return np.array([lam0])
    n = int(math.floor(abs(lam1 - lam0) / stride + 1e-9))
    direction = 1.0 if lam1 > lam0 else -1.0
    grid = lam0 + direction * stride * np.arange(n + 1)
    if abs(grid[-1] - lam1) > 1e-12 * max(1.0, abs(lam1)):
        grid = np.append(grid, lam1)
    else:
        grid[-1] = lam1
    return grid


def _drift(reference: dict, current: dict, drift: dict):
    for name, i0 in reference.items():
        rel = abs(current[name] - i0) / max(abs(i0), 1.0)
        drift[name] = max(drift.get(name, 0.0), rel)


def integrate(
    flow: FlowKind,
    initial: StateLike,
    params: Optional[MetricParams] = None,
    gamma2: Optional[float] = None,
    span: Tuple[float, float] = (0.0, 1.0),
    cfg: Optional[IntegratorConfig] = None,
    track_tau: bool = False,
) -> Trajectory:
    """Integrate one flow over ``span`` and record samples every ``cfg.sample_stride``.

    Steps are clipped so that every sample point is hit exactly. A span with
    lambda1 < lambda0 integrates backwards. With ``track_tau`` the
    reparametrization d tau/d lambda = 1/(ABC) (or 1/(rho (rho^2 - gamma^2)))
    is integrated alongside and stored in the samples.

    Raises:
        DomainError: if the initial state is outside the domain of the flow
        StepFailure: if the step size underflows or max_steps is exhausted
        DomainExit: if the trajectory cannot be continued inside the domain
    """
    cfg = cfg or IntegratorConfig(rel_tol=REL_TOL, abs_tol=ABS_TOL, max_steps=MAX_STEPS, sample_stride=SAMPLE_STRIDE)
    system = make_system(flow, params, gamma2)
    lam0, lam1 = float(span[0]), float(span[1])
    if not (math.isfinite(lam0) and math.isfinite(lam1)):
        raise NonFinite(f"Integration span must be finite, got {span}")
    x0 = _as_array(initial)
    _check_initial(system, x0, params)

    rhs, in_domain = _augment(system, track_tau)
    y = np.append(x0, 0.0) if track_tau else x0.copy()
    n_state = len(x0)

    reference = system.integrals(x0)
    drift = {name: 0.0 for name in reference}

    def record(lam: float, y_now: np.ndarray) -> TrajectorySample:
        values = system.integrals(y_now[:n_state])
        _drift(reference, values, drift)
        return TrajectorySample(
            lam=lam,
            state=tuple(float(v) for v in y_now[:n_state]),
            integrals=values,
            tau=float(y_now[-1]) if track_tau else None,
        )

    grid = _sample_grid(lam0, lam1, cfg.sample_stride)
    samples = [record(lam0, y)]
    logger.info(f"Integrating {system.kind.value} flow over [{lam0}, {lam1}] (rel_tol={cfg.rel_tol}, abs_tol={cfg.abs_tol})")

    n_steps = n_rejected = 0
    if len(grid) > 1:
        direction = 1.0 if lam1 > lam0 else -1.0
        lam = lam0
        k1 = _evaluate(rhs, in_domain, y)
        h = _initial_step(rhs, in_domain, y, k1, direction, cfg.rel_tol, cfg.abs_tol)
        err_prev = 1e-4
        for target in grid[1:]:
            while direction * (target - lam) > 0.0:
                if n_steps >= cfg.max_steps:
                    raise StepFailure(f"max_steps={cfg.max_steps} exhausted at lambda={lam}", lam)
                h_min = MIN_STEP * max(1.0, abs(lam))
                remaining = abs(target - lam)
                clipped = h >= remaining
                h_step = remaining if clipped else h
                try:
                    y_new, err_vec, k7 = _dp_step(rhs, in_domain, y, k1, direction * h_step)
                except _LeftDomain:
                    n_rejected += 1
                    h = 0.25 * h_step
                    logger.debug(f"stage left the domain at lambda={lam}, h -> {h:.3e}")
                    if h < h_min:
                        raise DomainExit(f"Trajectory leaves the {system.kind.value} domain at lambda={lam}", lam)
                    continue

                err = _error_norm(err_vec, y, y_new, cfg.rel_tol, cfg.abs_tol)
                fac_err = err**_ORDER_EXP if err > 0.0 else 0.0
                if err <= 1.0:
                    n_steps += 1
                    fac = fac_err / err_prev**_BETA if err > 0.0 else 1.0 / _FAC_MAX
                    fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, fac / _SAFETY))
                    h_next = h_step / fac
                    err_prev = max(err, 1e-4)
                    lam = target if clipped else lam + direction * h_step
                    y, k1 = y_new, k7
                    # a step shortened to land on a sample keeps the controller's proposal
                    h = max(h, h_next) if clipped else h_next
                else:
                    n_rejected += 1
                    h = h_step / min(1.0 / _FAC_MIN, fac_err / _SAFETY)
                    logger.debug(f"rejected step at lambda={lam}: err={err:.3e}, h -> {h:.3e}")
                    if h < h_min:
                        raise StepFailure(f"Step size underflow (h={h:.3e}) at lambda={lam}", lam)
            samples.append(record(float(target), y))

    logger.info(
        f"{system.kind.value} flow done: {n_steps} steps, {n_rejected} rejected, "
        + ", ".join(f"drift[{k}]={v:.2e}" for k, v in drift.items())
    )
    return Trajectory(
        flow=system.kind,
        state_names=system.state_names,
        samples=samples,
        drift_report=drift,
        n_steps=n_steps,
        n_rejected=n_rejected,
    )


def integrate_fixed(
    flow: FlowKind,
    initial: StateLike,
    params: Optional[MetricParams] = None,
    gamma2: Optional[float] = None,
    span: Tuple[float, float] = (0.0, 1.0),
    n_steps: int = 100,
) -> np.ndarray:
    """Final state after ``n_steps`` equal Dormand-Prince steps (5th order solution).

    Raises:
        DomainExit: if a stage leaves the domain
    """
    if n_steps < 1:
        raise DomainError(f"n_steps must be at least 1, got {n_steps}")
    system = make_system(flow, params, gamma2)
    y = _as_array(initial)
    _check_initial(system, y, params)
    lam0, lam1 = float(span[0]), float(span[1])
    h = (lam1 - lam0) / n_steps
    for i in range(n_steps):
        try:
            k1 = _evaluate(system.rhs, system.in_domain, y)
            y, _, _ = _dp_step(system.rhs, system.in_domain, y, k1, h)
        except _LeftDomain:
            lam = lam0 + i * h
            raise DomainExit(f"Fixed-step run left the domain at lambda={lam}", lam)
    return y
