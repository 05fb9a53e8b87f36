"""Closed-form solutions of the Euler subsystem dM/dtau in the tau variable.

Solutions are built in the sorted frame t1 <= t2 <= t3. A caller's positional
components map to it by N_a = parity * M[order[a]], which keeps the Euler
equations in their standard cyclic form for odd permutations as well.
"""

import math
from typing import Sequence, Tuple

import numpy as np

from ..core.config import CASE_TOL, ILL_CONDITIONED_K2
from ..core.exceptions import InconsistentInitialData, UnattainableLevel, ZeroCasimir
from ..core.logger import get_logger
from ..models.schemas import EulerCase, EulerCaseId, LevelSet, MetricParams
from .special_functions import elliptic_F, jacobi_sn_cn_dn

logger = get_logger(__name__)


def permutation_parity(order: Sequence[int]) -> int:
    inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if order[i] > order[j])
    return -1 if inversions % 2 else 1


def _sorted_frame(params: MetricParams) -> Tuple[Tuple[float, float, float], Tuple[int, int, int], int]:
    order = params.order
    return params.sorted_values, order, permutation_parity(order)


def _to_sorted(M: Sequence[float], order, parity) -> np.ndarray:
    return parity * np.array([M[i] for i in order], dtype=float)


def _equal_params(a: float, b: float, params: MetricParams) -> bool:
    return abs(a - b) <= params.tol * max(1.0, params.t_max)


def classify_case(levels: LevelSet, params: MetricParams, tol: float = CASE_TOL) -> EulerCaseId:
    """Which closed-form family describes the level set.

    Case I when t3 > n^2/m^2 > t2, case II when t2 > n^2/m^2 > t1, case III when
    n^2/m^2 = t2 within ``tol * max(1, |t2|)``; the sorted convention t1 <= t2 <= t3 is used.
    Parameter triples with a repeated value give the trigonometric AXIAL family.

    Raises:
        ZeroCasimir: if m^2 = 0
        UnattainableLevel: if n^2 lies outside [t1 m^2, t3 m^2]
    """
    if levels.m2 <= 0.0:
        raise ZeroCasimir("Casimir level m^2 = 0 has only the trivial solution M = 0")
    (T1, T2, T3), _, _ = _sorted_frame(params)
    ratio = levels.n2 / levels.m2
    slack = tol * max(1.0, abs(T3))
    if ratio < T1 - slack or ratio > T3 + slack:
        raise UnattainableLevel(f"n^2/m^2={ratio} outside [{T1}, {T3}]")

    if _equal_params(T1, T2, params) or _equal_params(T2, T3, params):
        return EulerCaseId.AXIAL
    if abs(ratio - T2) <= tol * max(1.0, abs(T2)):
        return EulerCaseId.III
    return EulerCaseId.I if ratio > T2 else EulerCaseId.II


def _sign(x: float) -> int:
    return -1 if x < 0.0 else 1


def _ratio(x: float, a: float) -> float:
    return x / a if a > 0.0 else 0.0


def _check_levels(M: np.ndarray, T, levels: LevelSet, tol: float):
    C = float(np.sum(M * M))
    I = float(np.dot(T, M * M))  # noqa: E741
    if abs(C - levels.m2) > tol * max(1.0, levels.m2):
        raise InconsistentInitialData(f"C(M)={C} does not match m^2={levels.m2}")
    if abs(I - levels.n2) > tol * max(1.0, abs(levels.n2), abs(T[2]) * levels.m2):
        raise InconsistentInitialData(f"I(M)={I} does not match n^2={levels.n2}")


def _case_i(T, levels: LevelSet, N: np.ndarray):
    T1, T2, T3 = T
    m2, n2 = levels.m2, levels.n2
    upper = max(m2 * T3 - n2, 0.0)
    lower = max(n2 - m2 * T1, 0.0)
    amps = (
        math.sqrt(upper / (T3 - T1)),
        math.sqrt(upper / (T3 - T2)),
        math.sqrt(lower / (T3 - T1)),
    )
    rate = math.sqrt((T3 - T2) * lower)
    k2 = (T2 - T1) * upper / ((T3 - T2) * lower) if lower > 0.0 else 0.0
    s3, eps = _sign(N[2]), 1
    sn0 = _ratio(N[1], amps[1])
    cn0 = _ratio(-N[0], s3 * amps[0])
    return amps, rate, min(k2, 1.0), (s3, eps), (sn0, cn0)


def _case_ii(T, levels: LevelSet, N: np.ndarray):
    T1, T2, T3 = T
    m2, n2 = levels.m2, levels.n2
    upper = max(m2 * T3 - n2, 0.0)
    lower = max(n2 - m2 * T1, 0.0)
    amps = (
        math.sqrt(upper / (T3 - T1)),
        math.sqrt(lower / (T2 - T1)),
        math.sqrt(lower / (T3 - T1)),
    )
    rate = math.sqrt((T2 - T1) * upper)
    k2 = (T3 - T2) * lower / ((T2 - T1) * upper) if upper > 0.0 else 0.0
    s1, eps = _sign(N[0]), 1
    sn0 = _ratio(N[1], amps[1])
    cn0 = _ratio(-N[2], s1 * amps[2])
    return amps, rate, min(k2, 1.0), (s1, eps), (sn0, cn0)


def build_solution(
    levels: LevelSet,
    params: MetricParams,
    initial_M: Sequence[float],
    tol: float = CASE_TOL,
) -> EulerCase:
    """Closed-form solution through ``initial_M`` at tau = 0.

    Branch signs and the phase are fitted to the initial momenta; the result
    reproduces them to 1e-9 or the data is rejected.

    Raises:
        ZeroCasimir, UnattainableLevel: as in :func:`classify_case`
        InconsistentInitialData: if initial_M is off the level set or no branch matches
    """
    case_id = classify_case(levels, params, tol)
    T, order, parity = _sorted_frame(params)
    N = _to_sorted(initial_M, order, parity)
    _check_levels(N, T, levels, tol)
    m = math.sqrt(levels.m2)
    T1, T2, T3 = T

    axis = None
    ill = False
    if case_id is EulerCaseId.AXIAL:
        if _equal_params(T1, T2, params):
            axis = 2
            c = N[2]
            mu = math.hypot(N[0], N[1])
            sigma0 = math.atan2(N[0], N[1])
        else:
            axis = 0
            c = N[0]
            mu = math.hypot(N[1], N[2])
            sigma0 = math.atan2(N[2], N[1])
        rate = (T3 - T1) * c
        amps, k2, signs = (mu, mu, c), 0.0, (1, 1)
    elif case_id is EulerCaseId.III:
        b1 = m * math.sqrt((T3 - T2) / (T3 - T1))
        b3 = m * math.sqrt((T2 - T1) / (T3 - T1))
        rate = m * math.sqrt((T3 - T2) * (T2 - T1))
        amps, k2 = (b1, m, b3), 1.0
        if abs(N[0]) <= tol * max(1.0, m) and abs(N[2]) <= tol * max(1.0, m):
            # unstable equilibrium M = (0, +-m, 0)
            amps = (0.0, m, 0.0)
            signs = (1, _sign(N[1]))
            sigma0 = 0.0
        else:
            s1 = _sign(N[0])
            q = -_sign(N[2] * s1)
            signs = (s1, q)
            sigma0 = math.asinh((q * N[1] / m) / (abs(N[0]) / b1))
    else:
        fit = _case_i if case_id is EulerCaseId.I else _case_ii
        amps, rate, k2, signs, (sn0, cn0) = fit(T, levels, N)
        sigma0 = elliptic_F(math.atan2(sn0, cn0), k2) if k2 < 1.0 else 0.0
        ill = k2 > ILL_CONDITIONED_K2

    sol = EulerCase(
        case_id=case_id,
        k2=k2,
        sigma_rate=rate,
        amplitudes=tuple(float(a) for a in amps),
        signs=signs,
        sigma0=sigma0,
        tau0=-sigma0 / rate if rate != 0.0 else 0.0,
        order=order,
        parity=parity,
        m=m,
        axis=axis,
        ill_conditioned=ill,
    )
    if ill:
        logger.warning(f"Level set is close to the separatrix (k2={k2:.12f}); periods are long and ill-conditioned")

    fitted = np.array(eval_solution(sol, 0.0))
    # near-separatrix levels routed to case III carry an O(sqrt(offset)) fit error
    offset = abs(levels.n2 / levels.m2 - T2) if case_id is EulerCaseId.III else 0.0
    fit_tol = 1e-9 * max(1.0, m) + m * math.sqrt(offset)
    mismatch = float(np.max(np.abs(fitted - np.asarray(initial_M, dtype=float))))
    if mismatch > fit_tol:
        raise InconsistentInitialData(f"No {case_id.value} branch reproduces the initial momenta (mismatch {mismatch:.3e})")
    logger.debug(f"case {case_id.value}: k2={k2}, rate={rate}, amplitudes={amps}, signs={signs}, sigma0={sigma0}")
    return sol


def eval_solution(sol: EulerCase, tau) -> Tuple:
    """(M1, M2, M3) in the caller's positional order at tau (scalar or array)."""
    sigma = sol.sigma_rate * np.asarray(tau, dtype=float) + sol.sigma0
    a1, a2, a3 = sol.amplitudes
    s, q = sol.signs

    if sol.case_id is EulerCaseId.AXIAL:
        mu, c = a1, a3
        ones = np.ones_like(sigma)
        if sol.axis == 2:
            N = (mu * np.sin(sigma), mu * np.cos(sigma), c * ones)
        else:
            N = (c * ones, mu * np.cos(sigma), mu * np.sin(sigma))
    elif sol.case_id is EulerCaseId.III:
        if a1 == 0.0 and a3 == 0.0:
            zeros = np.zeros_like(sigma)
            N = (zeros, q * a2 + zeros, zeros)
        else:
            sech = 1.0 / np.cosh(sigma)
            N = (s * a1 * sech, q * a2 * np.tanh(sigma), -q * s * a3 * sech)
    else:
        sn, cn, dn = jacobi_sn_cn_dn(sigma, sol.k2)
        if sol.case_id is EulerCaseId.I:
            N = (-q * s * a1 * cn, q * a2 * sn, s * a3 * dn)
        else:
            N = (s * a1 * dn, q * a2 * sn, -q * s * a3 * cn)

    M = [None, None, None]
    for a, idx in enumerate(sol.order):
        M[idx] = sol.parity * N[a]
    if np.ndim(tau) == 0:
        return tuple(float(v) for v in M)
    return tuple(M)
