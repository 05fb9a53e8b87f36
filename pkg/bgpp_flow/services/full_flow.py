"""Full 8-dimensional geodesic flow in the non-canonical variables
(t, P_t, M1, M2, M3, phi, theta, psi).
"""

import math
from typing import Callable, Optional

import numpy as np

from ..core.config import FD_STEP, SINGULAR_SIN_TOL
from ..core.exceptions import SingularPoint
from ..core.logger import get_logger
from ..models.schemas import CanonicalState, IntegralValues, MetricParams, MixedState
from ..utils.numdiff import gradient, jacobian
from .metric_core import check_domain, profile, profile_values

logger = get_logger(__name__)

STATE_NAMES = ("t", "P_t", "M1", "M2", "M3", "phi", "theta", "psi")
INTEGRAL_NAMES = ("H", "P_phi", "C", "I")

ScalarField = Callable[[np.ndarray], float]


def _check_angle(theta: float):
    if abs(math.sin(theta)) < SINGULAR_SIN_TOL:
        raise SingularPoint(f"Euler angles are singular at theta={theta}")


def to_mixed(s: CanonicalState) -> MixedState:
    """Canonical momenta -> (M1, M2, M3) body-frame variables.

    Raises:
        SingularPoint: if sin(theta) ~ 0
    """
    _check_angle(s.theta)
    st, ct = math.sin(s.theta), math.cos(s.theta)
    sp, cp = math.sin(s.psi), math.cos(s.psi)
    cot = ct / st
    M1 = -sp * s.P_theta + cp / st * s.P_phi - cp * cot * s.P_psi
    M2 = cp * s.P_theta + sp / st * s.P_phi - sp * cot * s.P_psi
    return MixedState(t=s.t, P_t=s.P_t, M1=M1, M2=M2, M3=s.P_psi, phi=s.phi, theta=s.theta, psi=s.psi)


def from_mixed(s: MixedState) -> CanonicalState:
    """Inverse of :func:`to_mixed`.

    Raises:
        SingularPoint: if sin(theta) ~ 0
    """
    _check_angle(s.theta)
    st, ct = math.sin(s.theta), math.cos(s.theta)
    sp, cp = math.sin(s.psi), math.cos(s.psi)
    P_theta = -sp * s.M1 + cp * s.M2
    P_phi = st * (s.M1 * cp + s.M2 * sp) + s.M3 * ct
    return CanonicalState(
        t=s.t, theta=s.theta, phi=s.phi, psi=s.psi, P_t=s.P_t, P_theta=P_theta, P_phi=P_phi, P_psi=s.M3
    )


def inverse_metric_coefficients(t1: float, t2: float, t3: float, t: float):
    """(1/f^2, 1/a^2, 1/b^2, 1/c^2) and their t-derivatives."""
    A, B, C = profile_values(t1, t2, t3, t)
    iA2, iB2, iC2 = 1.0 / (A * A), 1.0 / (B * B), 1.0 / (C * C)
    inv = (4.0 * A * B * C, A / (B * C), B / (C * A), C / (A * B))
    dinv = (
        2.0 * A * B * C * (iA2 + iB2 + iC2),
        inv[1] * 0.5 * (iA2 - iB2 - iC2),
        inv[2] * 0.5 * (iB2 - iC2 - iA2),
        inv[3] * 0.5 * (iC2 - iA2 - iB2),
    )
    return A, B, C, inv, dinv


def radial_euler_rates(tv: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Rates of (t, P_t, M1, M2, M3); shared by the full and reduced flows."""
    t1, t2, t3 = tv
    t, P, M1, M2, M3 = x[0], x[1], x[2], x[3], x[4]
    A, B, C, inv, dinv = inverse_metric_coefficients(t1, t2, t3, t)
    iabc = 1.0 / (A * B * C)
    return np.array(
        [
            inv[0] * P,
            -0.5 * (dinv[0] * P * P + dinv[1] * M1 * M1 + dinv[2] * M2 * M2 + dinv[3] * M3 * M3),
            (t3 - t2) * iabc * M2 * M3,
            (t1 - t3) * iabc * M3 * M1,
            (t2 - t1) * iabc * M1 * M2,
        ]
    )


def hamiltonian_array(tv: np.ndarray, x: np.ndarray) -> float:
    _, _, _, inv, _ = inverse_metric_coefficients(tv[0], tv[1], tv[2], x[0])
    return 0.5 * (inv[0] * x[1] ** 2 + inv[1] * x[2] ** 2 + inv[2] * x[3] ** 2 + inv[3] * x[4] ** 2)


def hamiltonian(s: MixedState, params: MetricParams) -> float:
    """H = (P_t^2/f^2 + M1^2/a^2 + M2^2/b^2 + M3^2/c^2) / 2.

    Raises:
        DomainError: if t <= t_max
    """
    check_domain(params, s.t)
    return hamiltonian_array(params.as_array(), s.as_array())


def canonical_hamiltonian(s: CanonicalState, params: MetricParams) -> float:
    """The same Hamiltonian written in the canonical momenta (four-angle form)."""
    check_domain(params, s.t)
    _check_angle(s.theta)
    prof = profile(params, s.t)
    csc = 1.0 / math.sin(s.theta)
    cot = math.cos(s.theta) * csc
    sp, cp = math.sin(s.psi), math.cos(s.psi)
    term1 = (csc * cp * (s.P_phi - s.P_psi * math.cos(s.theta)) - s.P_theta * sp) ** 2 / (2.0 * prof.a2)
    term2 = (s.P_theta * cp + sp * (s.P_phi * csc - s.P_psi * cot)) ** 2 / (2.0 * prof.b2)
    return term1 + term2 + s.P_psi**2 / (2.0 * prof.c2) + s.P_t**2 / (2.0 * prof.f2)


def _k_matrix(theta: float, psi: float) -> np.ndarray:
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(psi), math.cos(psi)
    csc = 1.0 / st
    cot = ct / st
    return np.array(
        [
            [csc * cp, csc * sp, 0.0],
            [-sp, cp, 0.0],
            [-cot * cp, -cot * sp, 1.0],
        ]
    )


def hat_matrix(M1: float, M2: float, M3: float) -> np.ndarray:
    return np.array(
        [
            [0.0, M3, -M2],
            [-M3, 0.0, M1],
            [M2, -M1, 0.0],
        ]
    )


def poisson_tensor_array(x: np.ndarray) -> np.ndarray:
    J = np.zeros((8, 8))
    J[0, 1] = 1.0
    J[1, 0] = -1.0
    J[2:5, 2:5] = hat_matrix(x[2], x[3], x[4])
    K = _k_matrix(x[6], x[7])
    J[2:5, 5:8] = -K.T
    J[5:8, 2:5] = K
    return J


def poisson_tensor(s: MixedState) -> np.ndarray:
    """8x8 Poisson tensor J2 (+) [M_hat, -K^T; K, 0] in the fixed state ordering.

    Raises:
        SingularPoint: if sin(theta) ~ 0
    """
    _check_angle(s.theta)
    return poisson_tensor_array(s.as_array())


def poisson_tensor_derivatives(s: MixedState) -> np.ndarray:
    """Analytic dJ_ij/dx_l, indexed [i, j, l]."""
    _check_angle(s.theta)
    theta, psi = s.theta, s.psi
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(psi), math.cos(psi)
    csc = 1.0 / st
    cot = ct / st
    dJ = np.zeros((8, 8, 8))
    for l, comp in ((2, (1, 2)), (3, (2, 0)), (4, (0, 1))):
        # d(M_hat)/dM_k: +1 at (i, j) with (i, j, k) cyclic, -1 transposed
        i, j = comp
        dJ[2 + i, 2 + j, l] = 1.0
        dJ[2 + j, 2 + i, l] = -1.0
    dK_dtheta = np.array(
        [
            [-csc * cot * cp, -csc * cot * sp, 0.0],
            [0.0, 0.0, 0.0],
            [csc * csc * cp, csc * csc * sp, 0.0],
        ]
    )
    dK_dpsi = np.array(
        [
            [-csc * sp, csc * cp, 0.0],
            [-cp, -sp, 0.0],
            [cot * sp, -cot * cp, 0.0],
        ]
    )
    for l, dK in ((6, dK_dtheta), (7, dK_dpsi)):
        dJ[5:8, 2:5, l] = dK
        dJ[2:5, 5:8, l] = -dK.T
    return dJ


def grad_hamiltonian_array(tv: np.ndarray, x: np.ndarray) -> np.ndarray:
    _, _, _, inv, dinv = inverse_metric_coefficients(tv[0], tv[1], tv[2], x[0])
    grad = np.zeros(len(x))
    grad[0] = 0.5 * (dinv[0] * x[1] ** 2 + dinv[1] * x[2] ** 2 + dinv[2] * x[3] ** 2 + dinv[3] * x[4] ** 2)
    grad[1] = inv[0] * x[1]
    grad[2] = inv[1] * x[2]
    grad[3] = inv[2] * x[3]
    grad[4] = inv[3] * x[4]
    return grad


def rhs_full_array(tv: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Hamilton equations of the full flow, unchecked array form."""
    _, _, _, inv, _ = inverse_metric_coefficients(tv[0], tv[1], tv[2], x[0])
    M1, M2, M3 = x[2], x[3], x[4]
    theta, psi = x[6], x[7]
    st = math.sin(theta)
    cot = math.cos(theta) / st
    sp, cp = math.sin(psi), math.cos(psi)
    w1 = inv[1] * M1
    w2 = inv[2] * M2
    w3 = inv[3] * M3
    out = np.empty(8)
    out[:5] = radial_euler_rates(tv, x)
    out[5] = (w1 * cp + w2 * sp) / st
    out[6] = w2 * cp - w1 * sp
    out[7] = -cot * (w1 * cp + w2 * sp) + w3
    return out


def rhs_full(s: MixedState, params: MetricParams) -> np.ndarray:
    """Time derivative of (t, P_t, M1, M2, M3, phi, theta, psi).

    Raises:
        DomainError: if t <= t_max
        SingularPoint: if sin(theta) ~ 0
    """
    check_domain(params, s.t)
    _check_angle(s.theta)
    return rhs_full_array(params.as_array(), s.as_array())


def p_phi_array(x: np.ndarray) -> float:
    theta, psi = x[6], x[7]
    return math.sin(theta) * (x[2] * math.cos(psi) + x[3] * math.sin(psi)) + x[4] * math.cos(theta)


def casimir_array(x: np.ndarray) -> float:
    return x[2] ** 2 + x[3] ** 2 + x[4] ** 2


def second_integral_array(tv: np.ndarray, x: np.ndarray) -> float:
    return tv[0] * x[2] ** 2 + tv[1] * x[3] ** 2 + tv[2] * x[4] ** 2


def integrals_array(tv: np.ndarray, x: np.ndarray) -> dict:
    return {
        "H": hamiltonian_array(tv, x),
        "P_phi": p_phi_array(x),
        "C": casimir_array(x),
        "I": second_integral_array(tv, x),
    }


def integrals(s: MixedState, params: MetricParams) -> IntegralValues:
    """First integrals H, P_phi, C = sum M_i^2 and I = sum t_i M_i^2.

    Raises:
        DomainError: if t <= t_max
    """
    check_domain(params, s.t)
    return IntegralValues(**integrals_array(params.as_array(), s.as_array()))


def integral_gradients(s: MixedState, params: MetricParams) -> dict:
    """Analytic gradients of H, P_phi, C and I over the 8 state variables."""
    tv = params.as_array()
    x = s.as_array()
    st, ct = math.sin(s.theta), math.cos(s.theta)
    sp, cp = math.sin(s.psi), math.cos(s.psi)
    g_pphi = np.zeros(8)
    g_pphi[2] = st * cp
    g_pphi[3] = st * sp
    g_pphi[4] = ct
    g_pphi[6] = ct * (s.M1 * cp + s.M2 * sp) - s.M3 * st
    g_pphi[7] = st * (-s.M1 * sp + s.M2 * cp)
    g_c = np.zeros(8)
    g_c[2:5] = 2.0 * x[2:5]
    g_i = np.zeros(8)
    g_i[2:5] = 2.0 * tv * x[2:5]
    return {
        "H": grad_hamiltonian_array(tv, x),
        "P_phi": g_pphi,
        "C": g_c,
        "I": g_i,
    }


def bracket_gradients(grad_f: np.ndarray, grad_g: np.ndarray, J: np.ndarray) -> float:
    return float(grad_f @ J @ grad_g)


def bracket(
    F: ScalarField,
    G: ScalarField,
    s: MixedState,
    grad_F: Optional[np.ndarray] = None,
    grad_G: Optional[np.ndarray] = None,
    h: float = FD_STEP,
) -> float:
    """{F, G}(s) = grad F^T J grad G.

    F and G take the 8-vector of the state. Gradients may be supplied; missing
    ones are formed by central differences.

    Raises:
        SingularPoint: if sin(theta) ~ 0
    """
    J = poisson_tensor(s)
    x = s.as_array()
    gF = grad_F if grad_F is not None else gradient(F, x, h)
    gG = grad_G if grad_G is not None else gradient(G, x, h)
    return bracket_gradients(gF, gG, J)


def jacobi_residual(x: np.ndarray, tensor_fn=poisson_tensor_array, dtensor: Optional[np.ndarray] = None, h: float = FD_STEP) -> float:
    """Max |sum_l (J_il d_l J_jk + J_jl d_l J_ki + J_kl d_l J_ij)| over all (i, j, k).

    ``dtensor`` is dJ indexed [i, j, l]; if omitted it is formed by central differences.
    """
    J = tensor_fn(x)
    dJ = dtensor if dtensor is not None else jacobian(tensor_fn, x, h)
    term = np.einsum("il,jkl->ijk", J, dJ)
    cyc = term + np.transpose(term, (1, 2, 0)) + np.transpose(term, (2, 0, 1))
    return float(np.max(np.abs(cyc)))
