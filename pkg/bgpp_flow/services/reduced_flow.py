"""Closed 5-dimensional Poisson subsystem (t, P_t, M1, M2, M3), its separated
radial equation S(t) and the tau(t) quadrature.
"""

import math
from typing import Tuple

import numpy as np
from numpy.polynomial import Polynomial

from ..core.config import CASE_TOL
from ..core.exceptions import DomainError, TurningPointCrossed
from ..core.logger import get_logger
from ..models.schemas import LevelSet, MetricParams, MixedState, ReducedState, SingularEnd
from .full_flow import casimir_array, grad_hamiltonian_array, hamiltonian_array, hat_matrix, radial_euler_rates
from .full_flow import second_integral_array
from .metric_core import check_domain
from .special_functions import bracketed_root, positive_branch, quad_sqrt_endpoint

logger = get_logger(__name__)

STATE_NAMES = ("t", "P_t", "M1", "M2", "M3")
INTEGRAL_NAMES = ("H", "C", "I")

# |S| below this fraction of its scale marks an endpoint as a turning point
_ROOT_REL_TOL = 1e-6


def reduce_state(s: MixedState) -> ReducedState:
    return ReducedState(t=s.t, P_t=s.P_t, M1=s.M1, M2=s.M2, M3=s.M3)


def rhs_reduced_array(tv: np.ndarray, x: np.ndarray) -> np.ndarray:
    return radial_euler_rates(tv, x)


def rhs_reduced(s: ReducedState, params: MetricParams) -> np.ndarray:
    """Time derivative of (t, P_t, M1, M2, M3).

    Raises:
        DomainError: if t <= t_max
    """
    check_domain(params, s.t)
    return radial_euler_rates(params.as_array(), s.as_array())


def poisson_tensor_reduced_array(x: np.ndarray) -> np.ndarray:
    P = np.zeros((5, 5))
    P[0, 1] = 1.0
    P[1, 0] = -1.0
    P[2:5, 2:5] = hat_matrix(x[2], x[3], x[4])
    return P


def poisson_tensor_reduced(s: ReducedState) -> np.ndarray:
    """Block-diagonal J2 (+) M_hat."""
    return poisson_tensor_reduced_array(s.as_array())


def casimir(s: ReducedState) -> float:
    return casimir_array(s.as_array())


def reduced_integrals_array(tv: np.ndarray, x: np.ndarray) -> dict:
    return {
        "H": hamiltonian_array(tv, x),
        "C": casimir_array(x),
        "I": second_integral_array(tv, x),
    }


def reduced_integral_gradients(s: ReducedState, params: MetricParams) -> dict:
    """Analytic gradients of H, C and I over the 5 reduced variables."""
    tv = params.as_array()
    x = s.as_array()
    g_c = np.zeros(5)
    g_c[2:5] = 2.0 * x[2:5]
    g_i = np.zeros(5)
    g_i[2:5] = 2.0 * tv * x[2:5]
    return {"H": grad_hamiltonian_array(tv, x), "C": g_c, "I": g_i}


def levels_from_state(s: ReducedState, params: MetricParams) -> LevelSet:
    """Level set (e, m^2, n^2) through the given state.

    Raises:
        DomainError: if t <= t_max
    """
    check_domain(params, s.t)
    values = reduced_integrals_array(params.as_array(), s.as_array())
    return LevelSet(e=values["H"], m2=values["C"], n2=values["I"])


def _cubic(params: MetricParams, u: float) -> float:
    return (u - params.t1) * (u - params.t2) * (u - params.t3)


def _s_value(levels: LevelSet, params: MetricParams, u: float) -> float:
    root = math.sqrt(max(_cubic(params, u), 0.0))
    return 4.0 * (levels.n2 - levels.m2 * u + 2.0 * levels.e * root)


def _s_scale(levels: LevelSet, params: MetricParams, u: float) -> float:
    root = math.sqrt(max(_cubic(params, u), 0.0))
    return 4.0 * (abs(levels.n2) + levels.m2 * abs(u) + 2.0 * abs(levels.e) * root) + 1e-300


def s_polynomial(levels: LevelSet, params: MetricParams, t: float) -> float:
    """S(t) = 4 (n^2 - m^2 t + 2 e sqrt((t - t1)(t - t2)(t - t3))), so that (dt/dlambda)^2 = S(t).

    Raises:
        DomainError: if t < t_max
    """
    if not math.isfinite(t) or t < params.t_max:
        raise DomainError(f"S(t) needs t >= t_max={params.t_max}, got t={t}")
    return _s_value(levels, params, t)


def _tau_integrand(levels: LevelSet, params: MetricParams):
    def integrand(u: float) -> float:
        value = _cubic(params, u) * _s_value(levels, params, u)
        if value <= 0.0:
            raise TurningPointCrossed(f"S({u}) <= 0 inside the quadrature interval")
        return 1.0 / math.sqrt(value)

    return integrand


def _near_root(levels: LevelSet, params: MetricParams, u: float) -> bool:
    return _s_value(levels, params, u) <= _ROOT_REL_TOL * _s_scale(levels, params, u)


def _stationary_candidates(levels: LevelSet, params: MetricParams) -> np.ndarray:
    """Real parts of the roots of e^2 P'^2 - m^4 P, with P the parameter cubic.

    Every stationary point of S above t_max is among them.
    """
    cubic = Polynomial.fromroots([params.t1, params.t2, params.t3])
    q = (levels.e**2 * cubic.deriv() ** 2 - levels.m2**2 * cubic).trim()
    return q.roots().real


def _allowed_branch(levels: LevelSet, params: MetricParams, lo: float, hi: float) -> Tuple[float, float]:
    """Require S > 0 strictly inside (lo, hi); endpoints within tolerance of a root are moved onto it."""
    return positive_branch(
        lambda u: _s_value(levels, params, u),
        lo,
        hi,
        _stationary_candidates(levels, params),
        lambda u: _ROOT_REL_TOL * _s_scale(levels, params, u),
    )


def tau_of_t(levels: LevelSet, params: MetricParams, t0: float, t: float) -> float:
    """tau(t) - tau(t0) = integral of du / sqrt((u - t1)(u - t2)(u - t3) S(u)) from t0 to t.

    Defined branch-wise: S must stay positive strictly between the limits. An
    endpoint sitting on a simple root of S is desingularized.

    Raises:
        DomainError: if t0 or t is not above t_max
        TurningPointCrossed: if S vanishes inside the interval
        NoConvergence: if the quadrature fails
    """
    check_domain(params, t0)
    check_domain(params, t)
    if t == t0:
        return 0.0
    lo, hi = _allowed_branch(levels, params, *sorted((t0, t)))

    left, right = _near_root(levels, params, lo), _near_root(levels, params, hi)
    if left and right:
        end = SingularEnd.BOTH
    elif left:
        end = SingularEnd.LEFT
    elif right:
        end = SingularEnd.RIGHT
    else:
        end = SingularEnd.NONE
    value, err = quad_sqrt_endpoint(_tau_integrand(levels, params), lo, hi, end)
    logger.debug(f"tau quadrature on [{lo}, {hi}] ({end.value}): {value:.17g} +- {err:.2e}")
    return value if t > t0 else -value


def tau_from_tmax(levels: LevelSet, params: MetricParams, t: float, tol: float = CASE_TOL) -> float:
    """tau measured from the base point t = t_max.

    Only real-valued when S(t_max) >= 0, which for attainable levels means
    n^2 = t_max m^2; t_max must also be a simple root of the cubic. Near t_max
    the integrand behaves like (u - t_max)^(-3/4), removed by u = t_max + v^2
    followed by the square-root substitution in v.

    Raises:
        DomainError: if t_max is a repeated parameter or S(t_max) < 0
        TurningPointCrossed: if S vanishes inside (t_max, t)
    """
    check_domain(params, t)
    tv = sorted((params.t1, params.t2, params.t3))
    scale = max(1.0, abs(params.t_max))
    if tv[2] - tv[1] <= params.tol * scale:
        raise DomainError(f"t_max={params.t_max} is a repeated root of the cubic")
    s_base = 4.0 * (levels.n2 - levels.m2 * params.t_max)
    if s_base < -tol * max(1.0, 4.0 * levels.m2 * scale):
        raise DomainError(f"S(t_max)={s_base:.3e} < 0: t_max lies outside the allowed region")
    _allowed_branch(levels, params, params.t_max + 1e-12 * scale, t)

    g = _tau_integrand(levels, params)
    base = params.t_max

    def in_v(v: float) -> float:
        return 2.0 * v * g(base + v * v)

    value, _ = quad_sqrt_endpoint(in_v, 0.0, math.sqrt(t - base), SingularEnd.LEFT)
    return value


def turning_point(levels: LevelSet, params: MetricParams, t_lo: float, t_hi: float) -> float:
    """Root of S in [t_lo, t_hi], located with Brent's method.

    ``t_lo`` may equal t_max.

    Raises:
        DomainError: if S has no sign change on the bracket
    """
    if t_lo < params.t_max or t_hi <= t_lo:
        raise DomainError(f"Invalid turning-point bracket [{t_lo}, {t_hi}] for t_max={params.t_max}")
    s_lo = _s_value(levels, params, t_lo)
    s_hi = _s_value(levels, params, t_hi)
    if s_lo == 0.0:
        return t_lo
    if s_hi == 0.0:
        return t_hi
    if s_lo * s_hi > 0.0:
        raise DomainError(f"S has no sign change on [{t_lo}, {t_hi}] (S={s_lo:.3e}, {s_hi:.3e})")
    root = bracketed_root(lambda u: _s_value(levels, params, u), t_lo, t_hi)
    logger.debug(f"turning point t*={root:.17g} in [{t_lo}, {t_hi}]")
    return float(root)


def radial_identity_residual(levels: LevelSet, params: MetricParams, x: np.ndarray) -> Tuple[float, float]:
    """(tdot^2 - S(t), scale) at a reduced state array."""
    tdot = radial_euler_rates(params.as_array(), x)[0]
    return tdot * tdot - _s_value(levels, params, x[0]), _s_scale(levels, params, x[0])
