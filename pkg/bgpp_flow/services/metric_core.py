"""BGPP metric profile functions, parameter validation, Eguchi-Hanson limit map and
the multicentre representation used as an independent consistency oracle.
"""

import math
from typing import NamedTuple, Tuple

import numpy as np

from ..core.config import DEGENERACY_TOL, MULTICENTRE_STEP, SINGULAR_SIN_TOL
from ..core.exceptions import DomainError, NegativeParameter, NonFinite, NotEHLimit, SingularPoint
from ..core.logger import get_logger
from ..models.schemas import Degeneracy, MetricParams, MetricProfile
from ..utils.numdiff import jacobian

logger = get_logger(__name__)


class EHLimit(NamedTuple):
    gamma2: float
    t_distinct: float
    axis: int  # positional index (0-based) of the distinct parameter


def _equal(a: float, b: float, threshold: float) -> bool:
    return abs(a - b) <= threshold


def validate_params(t1: float, t2: float, t3: float, tol: float = DEGENERACY_TOL) -> MetricParams:
    """Validate (t1, t2, t3) and classify their degeneracy pattern.

    Equality is tested with ``tol * max(1, max|t_i|)``, i.e. relative for large
    parameters and absolute near zero.

    Raises:
        NonFinite: if any parameter is NaN or infinite
        NegativeParameter: if any parameter is negative
    """
    ts = (float(t1), float(t2), float(t3))
    if not all(math.isfinite(t) for t in ts):
        raise NonFinite(f"Metric parameters must be finite, got {ts}")
    if any(t < 0.0 for t in ts):
        raise NegativeParameter(f"Metric parameters must be non-negative, got {ts}")

    threshold = tol * max(1.0, max(abs(t) for t in ts))
    e12 = _equal(ts[0], ts[1], threshold)
    e23 = _equal(ts[1], ts[2], threshold)
    e13 = _equal(ts[0], ts[2], threshold)
    if e12 and e23:
        degeneracy = Degeneracy.ISOTROPIC
    elif e12:
        degeneracy = Degeneracy.EH_II
    elif e23:
        degeneracy = Degeneracy.EH_I
    elif e13:
        degeneracy = Degeneracy.PAIR_13
    else:
        degeneracy = Degeneracy.GENERIC

    order = tuple(int(i) for i in np.argsort(ts, kind="stable"))
    return MetricParams(
        t1=ts[0],
        t2=ts[1],
        t3=ts[2],
        t_max=max(ts),
        t_min=min(ts),
        order=order,
        degeneracy=degeneracy,
        tol=tol,
    )


def check_domain(params: MetricParams, t: float):
    if not math.isfinite(t):
        raise NonFinite(f"Coordinate t must be finite, got {t}")
    if t <= params.t_max:
        raise DomainError(f"Coordinate t={t} must exceed t_max={params.t_max}")


def profile_values(t1: float, t2: float, t3: float, t: float) -> Tuple[float, float, float]:
    """(A, B, C) without validation, for the numerical hot paths."""
    return math.sqrt(t - t1), math.sqrt(t - t2), math.sqrt(t - t3)


def profile(params: MetricParams, t: float) -> MetricProfile:
    """Profile functions A, B, C and the squared metric functions f^2, a^2, b^2, c^2.

    Raises:
        DomainError: if t <= t_max
    """
    check_domain(params, t)
    A, B, C = profile_values(params.t1, params.t2, params.t3, t)
    return MetricProfile(
        A=A,
        B=B,
        C=C,
        f2=1.0 / (4.0 * A * B * C),
        a2=B * C / A,
        b2=C * A / B,
        c2=A * B / C,
    )


def _sigma_forms(theta: float, psi: float) -> np.ndarray:
    """Left-invariant one-forms sigma_i as rows over (dt, dtheta, dphi, dpsi)."""
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(psi), math.cos(psi)
    return np.array(
        [
            [0.0, -sp, st * cp, 0.0],
            [0.0, cp, st * sp, 0.0],
            [0.0, 0.0, ct, 1.0],
        ]
    )


def bgpp_metric_matrix(params: MetricParams, t: float, theta: float, psi: float) -> np.ndarray:
    """Metric components in coordinates (t, theta, phi, psi)."""
    prof = profile(params, t)
    sig = _sigma_forms(theta, psi)
    g = np.zeros((4, 4))
    g[0, 0] = prof.f2
    for coeff, row in zip((prof.a2, prof.b2, prof.c2), sig):
        g += coeff * np.outer(row, row)
    return g


def multicentre_potential(prof: MetricProfile, theta: float, psi: float) -> Tuple[float, float, float]:
    """Potential V and the (dtheta, dpsi) components of the one-form omega."""
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(psi), math.cos(psi)
    V = 1.0 / (prof.a2 * st**2 * cp**2 + prof.b2 * st**2 * sp**2 + prof.c2 * ct**2)
    w_theta = V * (prof.b2 - prof.a2) * st * sp * cp
    w_psi = V * prof.c2 * ct
    return V, w_theta, w_psi


def _cartesian(params: MetricParams, y: np.ndarray) -> np.ndarray:
    t, theta, psi = y
    A, B, C = profile_values(params.t1, params.t2, params.t3, t)
    return np.array(
        [
            A * math.sin(theta) * math.cos(psi),
            B * math.sin(theta) * math.sin(psi),
            C * math.cos(theta),
        ]
    )


def multicentre_metric_matrix(params: MetricParams, t: float, theta: float, psi: float, h: float) -> np.ndarray:
    """Pull back (1/V)(dphi + omega)^2 + V dx.dx to (t, theta, phi, psi) numerically."""
    prof = profile(params, t)
    V, w_theta, w_psi = multicentre_potential(prof, theta, psi)

    # dx/d(t, theta, psi) by central differences with absolute step h
    jac3 = jacobian(lambda y: _cartesian(params, y), np.array([t, theta, psi]), h=h, absolute=True)
    jac = np.zeros((3, 4))
    jac[:, 0] = jac3[:, 0]
    jac[:, 1] = jac3[:, 1]
    jac[:, 3] = jac3[:, 2]

    w = np.array([0.0, w_theta, 1.0, w_psi])
    return np.outer(w, w) / V + V * jac.T @ jac


def multicentre_check(
    params: MetricParams,
    t: float,
    theta: float,
    psi: float,
    h: float = MULTICENTRE_STEP,
) -> float:
    """Max absolute deviation between the multicentre pullback and the BGPP metric.

    Raises:
        DomainError: if t <= t_max, or if the difference stencil leaves the domain
        SingularPoint: if |sin theta| is below the singular-angle tolerance
    """
    check_domain(params, t)
    if abs(math.sin(theta)) < SINGULAR_SIN_TOL:
        raise SingularPoint(f"sin(theta) vanishes at theta={theta}")
    if t - h <= params.t_max:
        raise DomainError(f"Difference step h={h} reaches t_max from t={t}")

    g_mc = multicentre_metric_matrix(params, t, theta, psi, h)
    g = bgpp_metric_matrix(params, t, theta, psi)
    residual = float(np.max(np.abs(g_mc - g)))
    logger.debug(f"multicentre residual {residual:.3e} at t={t}, theta={theta}, psi={psi}, h={h}")
    return residual


def eh_limit(params: MetricParams) -> EHLimit:
    """Eguchi-Hanson data of a parameter triple whose two largest entries coincide.

    Returns gamma^2 = repeated - distinct, the distinct value (so that
    rho = sqrt(t - t_distinct), rho > gamma) and the positional index of the
    distinct parameter, which labels the conserved momentum component.

    Raises:
        NotEHLimit: unless exactly the two largest parameters are equal
    """
    ts = (params.t1, params.t2, params.t3)
    lo, mid, hi = params.order
    threshold = params.tol * max(1.0, params.t_max)
    if not _equal(ts[mid], ts[hi], threshold) or _equal(ts[lo], ts[mid], threshold):
        raise NotEHLimit(f"Parameters {ts} are not of Eguchi-Hanson form (two largest equal, smallest distinct)")
    repeated = 0.5 * (ts[mid] + ts[hi])
    return EHLimit(gamma2=repeated - ts[lo], t_distinct=ts[lo], axis=lo)


def rho_of_t(limit: EHLimit, t: float) -> float:
    return math.sqrt(t - limit.t_distinct)


def t_of_rho(limit: EHLimit, rho: float) -> float:
    return rho * rho + limit.t_distinct
