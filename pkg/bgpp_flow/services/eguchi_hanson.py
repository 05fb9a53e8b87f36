"""Eguchi-Hanson limit of the reduced flow: Hamiltonian, flow, radial cubic R(rho),
its roots, the trigonometric (M1, M2) solution and closed forms of tau(rho).
"""

import math
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ..core.config import CASE_TOL, DEGENERACY_TOL
from ..core.exceptions import (
    BoundaryBolt,
    DegenerateRoots,
    DomainError,
    NonFinite,
    NotDegenerate,
    TurningPointCrossed,
)
from ..core.logger import get_logger
from ..models.schemas import EHLevels, EHState, MetricParams, ReducedState, SingularEnd
from .metric_core import EHLimit, eh_limit
from .special_functions import elliptic_F, elliptic_Pi, positive_branch, quad_sqrt_endpoint

logger = get_logger(__name__)

STATE_NAMES = ("rho", "P_rho", "M1", "M2", "M3")
INTEGRAL_NAMES = ("H", "M3", "mu2")


class EHMetric(NamedTuple):
    g_rho_rho: float
    a2: float
    b2: float
    c2: float


def _check_rho(gamma2: float, rho: float):
    if not math.isfinite(rho):
        raise NonFinite(f"rho must be finite, got {rho}")
    if gamma2 <= 0.0:
        raise DomainError(f"gamma^2 must be positive, got {gamma2}")
    if rho <= math.sqrt(gamma2):
        raise DomainError(f"rho={rho} must exceed gamma={math.sqrt(gamma2)}")


def eh_metric_components(gamma2: float, rho: float) -> EHMetric:
    """g_rho_rho and the sigma-form coefficients; a^2 = b^2 = rho, c^2 = (rho^2 - gamma^2)/rho."""
    _check_rho(gamma2, rho)
    w = rho * rho - gamma2
    return EHMetric(g_rho_rho=rho / w, a2=rho, b2=rho, c2=w / rho)


def eh_hamiltonian_array(gamma2: float, x: np.ndarray) -> float:
    rho, P, M1, M2, M3 = x
    w = rho * rho - gamma2
    return 0.5 * (w / rho * P * P + (M1 * M1 + M2 * M2) / rho + rho / w * M3 * M3)


def eh_hamiltonian(s: EHState, gamma2: float) -> float:
    """H = ((rho^2 - gamma^2)/rho P_rho^2 + (M1^2 + M2^2)/rho + rho/(rho^2 - gamma^2) M3^2) / 2.

    Raises:
        DomainError: if rho <= gamma
    """
    _check_rho(gamma2, s.rho)
    return eh_hamiltonian_array(gamma2, s.as_array())


def eh_rhs_array(gamma2: float, x: np.ndarray) -> np.ndarray:
    rho, P, M1, M2, M3 = x
    r2 = rho * rho
    w = r2 - gamma2
    twist = gamma2 / (rho * w)
    return np.array(
        [
            w * P / rho,
            0.5 * (-P * P * (r2 + gamma2) / r2 + (M1 * M1 + M2 * M2) / r2 + M3 * M3 * (r2 + gamma2) / (w * w)),
            -twist * M2 * M3,
            twist * M3 * M1,
            0.0,
        ]
    )


def eh_rhs(s: EHState, gamma2: float) -> np.ndarray:
    """Time derivative of (rho, P_rho, M1, M2, M3); M3 is conserved exactly.

    Raises:
        DomainError: if rho <= gamma
    """
    _check_rho(gamma2, s.rho)
    return eh_rhs_array(gamma2, s.as_array())


def eh_integrals_array(gamma2: float, x: np.ndarray) -> dict:
    return {
        "H": eh_hamiltonian_array(gamma2, x),
        "M3": float(x[4]),
        "mu2": float(x[2] * x[2] + x[3] * x[3]),
    }


def make_eh_levels(e: float, m3: float, mu2: float, gamma2: float, tol: float = DEGENERACY_TOL) -> EHLevels:
    """EHLevels with the roots of R attached whenever they are simple."""
    levels = EHLevels(e=e, m3=m3, mu2=mu2, gamma2=gamma2)
    if e <= 0.0:
        return levels
    try:
        roots = eh_roots(levels, tol)
    except DegenerateRoots:
        return levels
    return levels.model_copy(update={"roots": roots})


def eh_levels_from_state(s: EHState, gamma2: float) -> EHLevels:
    _check_rho(gamma2, s.rho)
    values = eh_integrals_array(gamma2, s.as_array())
    return make_eh_levels(values["H"], values["M3"], values["mu2"], gamma2)


def r_cubic(levels: EHLevels, rho: float) -> float:
    """R(rho) = 2 e rho^3 - (mu^2 + m3^2) rho^2 - 2 e gamma^2 rho + gamma^2 mu^2."""
    e, g2 = levels.e, levels.gamma2
    return 2.0 * e * rho**3 - (levels.mu2 + levels.m3**2) * rho**2 - 2.0 * e * g2 * rho + g2 * levels.mu2


def _r_derivative(levels: EHLevels, rho: float) -> float:
    e, g2 = levels.e, levels.gamma2
    return 6.0 * e * rho**2 - 2.0 * (levels.mu2 + levels.m3**2) * rho - 2.0 * e * g2


def _r_stationary_points(levels: EHLevels) -> np.ndarray:
    return np.roots([6.0 * levels.e, -2.0 * (levels.mu2 + levels.m3**2), -2.0 * levels.e * levels.gamma2]).real


def _discriminant_terms(levels: EHLevels) -> Tuple[float, float, float]:
    g2, e, mu2, m32 = levels.gamma2, levels.e, levels.mu2, levels.m3**2
    mu4 = mu2 * mu2
    lead = (mu4 - 4.0 * g2 * e * e) ** 2
    tail = m32 * (g2 * e * e * (20.0 * mu2 + m32) + mu2 * (3.0 * mu4 + m32 * m32 + 3.0 * mu2 * m32))
    # same terms with absolute values, used as the scale of the degeneracy test
    scale = (mu4 + 4.0 * g2 * e * e) ** 2 + abs(tail)
    return lead, tail, scale


def eh_discriminant(levels: EHLevels) -> float:
    """4 gamma^2 [(mu^4 - 4 gamma^2 e^2)^2 + m3^2 (gamma^2 e^2 (20 mu^2 + m3^2) + mu^2 (3 mu^4 + m3^4 + 3 mu^2 m3^2))].

    Equal to the standard discriminant of the cubic R.
    """
    lead, tail, _ = _discriminant_terms(levels)
    return 4.0 * levels.gamma2 * (lead + tail)


def eh_roots(levels: EHLevels, tol: float = DEGENERACY_TOL) -> Tuple[float, float, float]:
    """Sorted real roots rho1 < rho2 < rho3 of R.

    Trigonometric solution of the depressed cubic, then two Newton steps.

    Raises:
        DomainError: if e <= 0
        DegenerateRoots: if the discriminant vanishes within tolerance
    """
    if levels.e <= 0.0:
        raise DomainError(f"Three real roots need e > 0, got e={levels.e}")
    lead, tail, scale = _discriminant_terms(levels)
    if lead + tail <= tol * scale:
        raise DegenerateRoots(f"R(rho) has a repeated root (discriminant {4.0 * levels.gamma2 * (lead + tail):.3e})")

    two_e = 2.0 * levels.e
    b = -(levels.mu2 + levels.m3**2) / two_e
    c = -levels.gamma2
    d = levels.gamma2 * levels.mu2 / two_e
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    amp = 2.0 * math.sqrt(-p / 3.0)
    arg = min(1.0, max(-1.0, 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p)))
    base = math.acos(arg) / 3.0
    roots = []
    for k in range(3):
        r = amp * math.cos(base - 2.0 * math.pi * k / 3.0) - b / 3.0
        for _ in range(2):
            slope = _r_derivative(levels, r)
            if slope != 0.0:
                r -= r_cubic(levels, r) / slope
        roots.append(r)
    roots.sort()
    logger.debug(f"EH roots {roots} for e={levels.e}, m3={levels.m3}, mu2={levels.mu2}, gamma2={levels.gamma2}")
    return tuple(roots)


def _roots_of(levels: EHLevels) -> Tuple[float, float, float]:
    return levels.roots if levels.roots is not None else eh_roots(levels)


def eh_m12_solution(levels: EHLevels, tau, phi0: float) -> Tuple:
    """M1 = mu sin(omega tau + phi0), M2 = -mu cos(omega tau + phi0), omega = gamma^2 m3."""
    mu = math.sqrt(levels.mu2)
    phase = levels.gamma2 * levels.m3 * np.asarray(tau, dtype=float) + phi0
    M1, M2 = mu * np.sin(phase), -mu * np.cos(phase)
    if np.ndim(tau) == 0:
        return float(M1), float(M2)
    return M1, M2


def eh_phase_from_state(M1: float, M2: float) -> float:
    """phi0 such that eh_m12_solution at tau = 0 returns (M1, M2)."""
    return math.atan2(M1, -M2)


def eh_tau_closed(levels: EHLevels, rho: float, anchored: bool = False, tol: float = CASE_TOL) -> float:
    """tau(rho) for rho >= rho3 in incomplete elliptic integrals of the first and third kind.

    The raw value tends to 0 as rho -> infinity; with ``anchored`` the value at
    rho3 is subtracted so that tau(rho3) = 0.

    Raises:
        DegenerateRoots: on the double-root levels (use :func:`eh_tau_degenerate`)
        BoundaryBolt: if m3 = 0, where R(gamma) = 0 puts a root on the bolt
        DomainError: if rho < rho3
    """
    rho1, rho2, rho3 = _roots_of(levels)
    gamma = math.sqrt(levels.gamma2)
    if abs(levels.m3) <= tol * max(1.0, math.sqrt(levels.mu2)):
        raise BoundaryBolt("m3 = 0 gives R(gamma) = 0; the closed form needs R(gamma) < 0")
    if not math.isfinite(rho) or rho < rho3 * (1.0 - 1e-14):
        raise DomainError(f"rho={rho} lies below the turning point rho3={rho3}")

    k2 = (rho2 - rho1) / (rho3 - rho1)
    n_minus = (rho1 - gamma) / (rho1 - rho3)
    n_plus = (rho1 + gamma) / (rho1 - rho3)
    pref = 1.0 / (gamma * math.sqrt(2.0 * levels.e) * math.sqrt(rho3 - rho1) * (levels.gamma2 - rho1 * rho1))

    def value_at(sigma: float) -> float:
        return pref * (
            2.0 * gamma * elliptic_F(sigma, k2)
            - (gamma + rho1) * elliptic_Pi(sigma, n_minus, k2)
            - (gamma - rho1) * elliptic_Pi(sigma, n_plus, k2)
        )

    sigma = math.asin(math.sqrt(min(1.0, (rho3 - rho1) / (rho - rho1))))
    value = value_at(sigma)
    if anchored:
        value -= value_at(0.5 * math.pi)
    return value


def eh_tau_degenerate(levels: EHLevels, rho: float, tol: float = CASE_TOL) -> float:
    """tau(rho) on the double-root levels m3 = 0, mu^2 = 2 e gamma, where R = 2e (rho - gamma)^2 (rho + gamma).

    Diverges as rho -> gamma; tends to 0 as rho -> infinity.

    Raises:
        NotDegenerate: unless m3 = 0 and mu^2 = 2 e gamma within tolerance
        DomainError: if rho <= gamma or e <= 0
    """
    gamma = math.sqrt(levels.gamma2)
    if levels.e <= 0.0:
        raise DomainError(f"Degenerate closed form needs e > 0, got e={levels.e}")
    target = 2.0 * levels.e * gamma
    if abs(levels.m3) > tol * max(1.0, math.sqrt(levels.mu2)) or abs(levels.mu2 - target) > tol * max(1.0, target):
        raise NotDegenerate(f"Levels (m3={levels.m3}, mu2={levels.mu2}) are not on m3 = 0, mu^2 = 2 e gamma = {target}")
    _check_rho(levels.gamma2, rho)

    root = math.sqrt(rho + gamma)
    s2g = math.sqrt(2.0 * gamma)
    rational = (gamma - 3.0 * rho) / ((rho - gamma) * root)
    log_term = 3.0 / (2.0 * s2g) * math.log((root + s2g) / (root - s2g))
    return (rational + log_term) / (4.0 * math.sqrt(2.0 * levels.e) * levels.gamma2)


def _eh_integrand(levels: EHLevels):
    g2 = levels.gamma2

    def integrand(rho: float) -> float:
        value = r_cubic(levels, rho)
        if value <= 0.0:
            raise TurningPointCrossed(f"R({rho}) <= 0 inside the quadrature interval")
        return 1.0 / ((rho * rho - g2) * math.sqrt(value))

    return integrand


def _r_scale(levels: EHLevels, rho: float) -> float:
    e, g2 = abs(levels.e), levels.gamma2
    return 2.0 * e * abs(rho) ** 3 + (levels.mu2 + levels.m3**2) * rho**2 + 2.0 * e * g2 * abs(rho) + g2 * levels.mu2


def eh_tau_quadrature(levels: EHLevels, rho_a: float, rho_b: float) -> float:
    """Integral of d rho / ((rho^2 - gamma^2) sqrt(R(rho))) from rho_a to rho_b.

    An endpoint on a simple root of R is desingularized.

    Raises:
        DomainError: if an endpoint is not above gamma
        TurningPointCrossed: if R is negative anywhere inside the interval
    """
    _check_rho(levels.gamma2, rho_a)
    _check_rho(levels.gamma2, rho_b)
    if rho_a == rho_b:
        return 0.0
    lo, hi = positive_branch(
        lambda rho: r_cubic(levels, rho),
        *sorted((rho_a, rho_b)),
        _r_stationary_points(levels),
        lambda rho: 1e-10 * _r_scale(levels, rho),
    )
    near = [r_cubic(levels, end) <= 1e-6 * _r_scale(levels, end) for end in (lo, hi)]

    end = {
        (True, True): SingularEnd.BOTH,
        (True, False): SingularEnd.LEFT,
        (False, True): SingularEnd.RIGHT,
        (False, False): SingularEnd.NONE,
    }[tuple(near)]
    value, _ = quad_sqrt_endpoint(_eh_integrand(levels), lo, hi, end)
    return value if rho_b > rho_a else -value


def _cyclic_frame(axis: int) -> Tuple[int, int, int]:
    # cyclic, so no sign change of the Euler equations
    return ((axis + 1) % 3, (axis + 2) % 3, axis)


def reduced_to_eh(s: ReducedState, params: MetricParams) -> Tuple[EHState, EHLimit]:
    """Map a reduced state on Eguchi-Hanson parameters to (rho, P_rho, M1, M2, M3).

    rho = sqrt(t - t_distinct), P_rho = 2 rho P_t; the conserved component is
    moved to the third slot by a cyclic relabelling.

    Raises:
        NotEHLimit: unless the two largest parameters coincide
    """
    limit = eh_limit(params)
    rho = math.sqrt(s.t - limit.t_distinct)
    M = (s.M1, s.M2, s.M3)
    a, b, c = _cyclic_frame(limit.axis)
    return EHState(rho=rho, P_rho=2.0 * rho * s.P_t, M1=M[a], M2=M[b], M3=M[c]), limit


def eh_to_reduced(s: EHState, limit: EHLimit) -> ReducedState:
    M = [0.0, 0.0, 0.0]
    a, b, c = _cyclic_frame(limit.axis)
    M[a], M[b], M[c] = s.M1, s.M2, s.M3
    return ReducedState(t=s.rho * s.rho + limit.t_distinct, P_t=s.P_rho / (2.0 * s.rho), M1=M[0], M2=M[1], M3=M[2])


def reduced_rate_to_eh(s: ReducedState, rate: np.ndarray, limit: EHLimit) -> np.ndarray:
    """Chain rule taking d/dlambda of (t, P_t, M) to d/dlambda of (rho, P_rho, M) in the EH frame."""
    rho = math.sqrt(s.t - limit.t_distinct)
    rho_dot = rate[0] / (2.0 * rho)
    a, b, c = _cyclic_frame(limit.axis)
    return np.array(
        [
            rho_dot,
            2.0 * rho_dot * s.P_t + 2.0 * rho * rate[1],
            rate[2 + a],
            rate[2 + b],
            rate[2 + c],
        ]
    )


def eh_radial_residual(levels: EHLevels, x: np.ndarray) -> float:
    """(drho/dlambda)^2 - R(rho)/rho^2 at an EH state array."""
    rho_dot = eh_rhs_array(levels.gamma2, x)[0]
    return rho_dot * rho_dot - r_cubic(levels, x[0]) / (x[0] * x[0])


def eh_gamma2(gamma2: Optional[float], params: Optional[MetricParams]) -> float:
    """gamma^2 from an explicit value or from Eguchi-Hanson parameters."""
    if gamma2 is not None:
        if gamma2 <= 0.0:
            raise DomainError(f"gamma^2 must be positive, got {gamma2}")
        return float(gamma2)
    if params is None:
        raise DomainError("Either gamma^2 or Eguchi-Hanson parameters are required")
    return eh_limit(params).gamma2
