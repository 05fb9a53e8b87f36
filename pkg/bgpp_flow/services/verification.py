"""Cross-verification drivers: Poisson-bracket and rank checks, conservation
sweeps, analytic-vs-numeric comparisons, the multicentre oracle, special
function identities and the Eguchi-Hanson closed forms.
"""

import math
from itertools import combinations
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy import special

from ..core.config import CASE_TOL, DEFAULT_SAMPLES, DEFAULT_SEED, FD_STEP, MULTICENTRE_STEP, REL_TOL, VERIFY_TOLERANCES
from ..core.exceptions import (
    BGPPError,
    ComputationError,
    InconsistentInitialData,
    NotDegenerate,
)
from ..core.logger import get_logger
from ..models.schemas import (
    AnalyticReport,
    CheckResult,
    EHLevels,
    EHState,
    FlowKind,
    IntegratorConfig,
    LevelSet,
    MetricParams,
    ReducedState,
    SingularEnd,
    Trajectory,
    VerificationReport,
    VerificationSection,
)
from ..utils.sampling import make_rng, pinned_axis_state, random_mixed_state, random_reduced_state
from ..utils.timer import timer
from . import eguchi_hanson as eh
from .analytic_solutions import build_solution, classify_case, eval_solution
from .full_flow import (
    INTEGRAL_NAMES,
    bracket_gradients,
    grad_hamiltonian_array,
    integral_gradients,
    jacobi_residual,
    poisson_tensor,
    poisson_tensor_derivatives,
    rhs_full_array,
)
from .integrator import integrate
from .metric_core import multicentre_check, validate_params
from .reduced_flow import (
    levels_from_state,
    poisson_tensor_reduced,
    poisson_tensor_reduced_array,
    radial_identity_residual,
    reduce_state,
    reduced_integral_gradients,
    rhs_reduced,
    s_polynomial,
    tau_of_t,
    turning_point,
)
from .special_functions import elliptic_F, elliptic_K, elliptic_Pi, jacobi_sn_cn_dn, quad_sqrt_endpoint

logger = get_logger(__name__)

CHECK_NAMES = ("brackets", "conservation", "analytic", "multicentre", "special", "eh", "reversibility")

CONSERVATION_SAMPLES = 20
CONSERVATION_SPAN = (0.0, 10.0)
REVERSIBILITY_SAMPLES = 5
REVERSIBILITY_SPAN = (0.0, 5.0)
ANALYTIC_SPAN = (0.0, 2.0)
MULTICENTRE_SAMPLES = 50
MULTICENTRE_ORDER_STEPS = (1e-2, 5e-3, 2.5e-3)
EH_ROOT_SWEEP = 1000
EH_TAU_PAIRS = 20
EH_LIMIT_SAMPLES = 100


def _check(name: str, value: float, tolerance: float, details: Optional[dict] = None, at_least: bool = False) -> CheckResult:
    passed = value >= tolerance if at_least else value <= tolerance
    return CheckResult(name=name, value=float(value), tolerance=float(tolerance), passed=bool(passed), details=details or {})


def _section(name: str, checks: List[CheckResult]) -> VerificationSection:
    passed = all(c.passed for c in checks)
    for c in checks:
        if not c.passed:
            logger.warning(f"[{name}] {c.name} failed: {c.value:.3e} vs tolerance {c.tolerance:.3e}")
    logger.info(f"[{name}] {'passed' if passed else 'FAILED'} ({len(checks)} checks)")
    return VerificationSection(name=name, checks=checks, passed=passed)


def _rank_ratio(matrix: np.ndarray) -> float:
    sv = np.linalg.svd(matrix, compute_uv=False)
    return float(sv[-1] / sv[0]) if sv[0] > 0.0 else 0.0


def verify_bracket_suite(
    params: MetricParams,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> VerificationSection:
    """Pairwise brackets of the first integrals, Jacobi identity, Casimir annihilation and rank checks."""
    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples}")
    tol = VERIFY_TOLERANCES
    rng = make_rng(seed)
    tv = params.as_array()
    isotropic = params.t_max - params.t_min <= params.tol * max(1.0, params.t_max)

    full_comm = reduced_comm = m_algebra = 0.0
    jac_exact = jac_fd = jac_reduced = 0.0
    rhs_err = rhs_red_err = casimir_null = 0.0
    full_rank = reduced_rank = tensor_rank = math.inf
    tensor_null = 0.0

    for _ in range(n_samples):
        s = random_mixed_state(rng, params)
        x = s.as_array()
        J = poisson_tensor(s)
        grads = integral_gradients(s, params)
        for a, b in combinations(INTEGRAL_NAMES, 2):
            full_comm = max(full_comm, abs(bracket_gradients(grads[a], grads[b], J)))

        # {M1, M2} = M3 and cyclic, read off the tensor with unit gradients
        m_algebra = max(m_algebra, abs(J[2, 3] - s.M3), abs(J[3, 4] - s.M1), abs(J[4, 2] - s.M2))

        norm = max(1.0, float(np.max(np.abs(J)))) ** 2
        jac_exact = max(jac_exact, jacobi_residual(x, dtensor=poisson_tensor_derivatives(s)) / norm)
        jac_fd = max(jac_fd, jacobi_residual(x, h=FD_STEP) / norm)

        rate = rhs_full_array(tv, x)
        rhs_err = max(rhs_err, float(np.max(np.abs(rate - J @ grad_hamiltonian_array(tv, x)))) / max(1.0, float(np.max(np.abs(rate)))))

        r = reduce_state(s)
        xr = r.as_array()
        P = poisson_tensor_reduced(r)
        rgrads = reduced_integral_gradients(r, params)
        for a, b in combinations(("H", "C", "I"), 2):
            reduced_comm = max(reduced_comm, abs(bracket_gradients(rgrads[a], rgrads[b], P)))
        casimir_null = max(casimir_null, float(np.max(np.abs(P @ rgrads["C"]))))
        jac_reduced = max(jac_reduced, jacobi_residual(xr, tensor_fn=poisson_tensor_reduced_array) / max(1.0, float(np.max(np.abs(P)))) ** 2)
        rate_r = rhs_reduced(r, params)
        rhs_red_err = max(rhs_red_err, float(np.max(np.abs(rate_r - P @ rgrads["H"]))) / max(1.0, float(np.max(np.abs(rate_r)))))

        sv = np.linalg.svd(P, compute_uv=False)
        tensor_rank = min(tensor_rank, float(sv[3] / sv[0]))
        tensor_null = max(tensor_null, float(sv[4] / sv[0]))

        if not isotropic:
            full_rank = min(full_rank, _rank_ratio(np.vstack([grads[k] for k in INTEGRAL_NAMES])))
            reduced_rank = min(reduced_rank, _rank_ratio(np.vstack([rgrads[k] for k in ("H", "C", "I")])))

    detail = {"n_samples": float(n_samples), "seed": float(seed)}
    checks = [
        _check("full_commutation", full_comm, tol["bracket"], detail),
        _check("m_algebra", m_algebra, 1e-10),
        _check("jacobi_analytic", jac_exact, tol["jacobi"]),
        _check("jacobi_finite_difference", jac_fd, tol["jacobi"]),
        _check("rhs_equals_tensor_gradient", rhs_err, 1e-12),
        _check("reduced_commutation", reduced_comm, tol["bracket"]),
        _check("casimir_annihilation", casimir_null, 1e-12),
        _check("reduced_jacobi", jac_reduced, tol["jacobi"]),
        _check("reduced_rhs_equals_tensor_gradient", rhs_red_err, 1e-12),
        _check("reduced_tensor_rank4", tensor_rank, tol["rank_sigma"], {"null_ratio": tensor_null}, at_least=True),
    ]
    if isotropic:
        logger.info("Isotropic parameters: I = t C, the integral rank checks are skipped")
    else:
        checks.append(_check("integral_rank_full", full_rank, tol["rank_sigma"], at_least=True))
        checks.append(_check("integral_rank_reduced", reduced_rank, tol["rank_sigma"], at_least=True))
    return _section("brackets", checks)


def _conservation_run(flow: FlowKind, state, params: MetricParams, span, cfg: IntegratorConfig) -> Trajectory:
    return integrate(flow, state, params=params, span=span, cfg=cfg)


def verify_conservation(
    params: MetricParams,
    n_samples: int = CONSERVATION_SAMPLES,
    seed: int = DEFAULT_SEED,
    span: Tuple[float, float] = CONSERVATION_SPAN,
    cfg: Optional[IntegratorConfig] = None,
) -> VerificationSection:
    """Integral drift along reduced and full trajectories, plus tdot^2 = S(t) along reduced ones."""
    cfg = cfg or IntegratorConfig(rel_tol=REL_TOL)
    drift_tol = VERIFY_TOLERANCES["drift_factor"] * cfg.rel_tol
    rng = make_rng(seed)

    reduced_drift: dict = {}
    full_drift: dict = {}
    radial = 0.0
    failures = 0
    for _ in range(n_samples):
        r = random_reduced_state(rng, params)
        f = pinned_axis_state(rng, params)
        try:
            traj = _conservation_run(FlowKind.REDUCED, r, params, span, cfg)
            levels = levels_from_state(r, params)
            for sample in traj.samples:
                res, scale = radial_identity_residual(levels, params, np.array(sample.state))
                radial = max(radial, abs(res) / scale)
            for k, v in traj.drift_report.items():
                reduced_drift[k] = max(reduced_drift.get(k, 0.0), v)
            traj = _conservation_run(FlowKind.FULL, f, params, span, cfg)
            for k, v in traj.drift_report.items():
                full_drift[k] = max(full_drift.get(k, 0.0), v)
        except ComputationError as e:
            failures += 1
            logger.warning(f"Conservation run failed: {e}")

    checks = [
        _check(f"reduced_drift_{k}", v, drift_tol) for k, v in sorted(reduced_drift.items())
    ] + [
        _check(f"full_drift_{k}", v, drift_tol) for k, v in sorted(full_drift.items())
    ]
    checks.append(_check("radial_identity", radial, 1e-9))
    checks.append(_check("integration_failures", float(failures), 0.0))
    return _section("conservation", checks)


def _turning_between(levels: LevelSet, params: MetricParams, t_a: float, t_b: float, minimum: bool) -> float:
    if minimum:
        return turning_point(levels, params, params.t_max, min(t_a, t_b))
    hi = max(t_a, t_b)
    upper = 2.0 * hi + 1.0
    for _ in range(60):
        if s_polynomial(levels, params, upper) < 0.0:
            break
        upper = 2.0 * upper
    return turning_point(levels, params, hi, upper)


def branchwise_tau(levels: LevelSet, params: MetricParams, traj: Trajectory) -> Tuple[np.ndarray, int]:
    """tau at every sample from the t-quadrature, split at sign changes of P_t.

    tau grows with lambda, so each piece contributes its absolute value.
    """
    taus = [0.0]
    branches = 1
    for prev, cur in zip(traj.samples[:-1], traj.samples[1:]):
        t_a, p_a = prev.state[0], prev.state[1]
        t_b, p_b = cur.state[0], cur.state[1]
        if p_a * p_b < 0.0:
            t_star = _turning_between(levels, params, t_a, t_b, minimum=p_b > 0.0)
            step = abs(tau_of_t(levels, params, t_a, t_star)) + abs(tau_of_t(levels, params, t_star, t_b))
            branches += 1
        else:
            step = abs(tau_of_t(levels, params, t_a, t_b))
        taus.append(taus[-1] + step)
    return np.array(taus), branches


def verify_analytic_vs_numeric(
    levels: LevelSet,
    params: MetricParams,
    initial: ReducedState,
    span: Tuple[float, float] = ANALYTIC_SPAN,
    cfg: Optional[IntegratorConfig] = None,
) -> AnalyticReport:
    """Compare M(lambda) from the reduced flow with the closed form at tau(lambda).

    Raises:
        InconsistentInitialData: if ``initial`` is not on ``levels``
    """
    cfg = cfg or IntegratorConfig(rel_tol=REL_TOL)
    sol = build_solution(levels, params, (initial.M1, initial.M2, initial.M3))
    traj = integrate(FlowKind.REDUCED, initial, params=params, span=span, cfg=cfg, track_tau=True)
    taus, branches = branchwise_tau(levels, params, traj)

    states = traj.states()
    analytic = np.array(eval_solution(sol, taus)).T
    errors = np.max(np.abs(states[:, 2:5] - analytic), axis=0)
    tau_ode = np.array([s.tau for s in traj.samples])
    report = AnalyticReport(
        case_id=sol.case_id.value,
        n_samples=len(traj.samples),
        max_error=tuple(float(e) for e in errors),
        max_abs_error=float(np.max(errors)),
        tau_mismatch=float(np.max(np.abs(taus - tau_ode))),
        n_branches=branches,
    )
    logger.info(f"case {report.case_id}: max |M - M_analytic| = {report.max_abs_error:.3e} over {branches} branch(es)")
    return report


def _eh_tau_function(levels: EHLevels, rho0: float):
    """Closed-form tau(rho) for the levels, or None when only the integrated tau is available."""
    try:
        if levels.roots is not None or abs(levels.m3) > CASE_TOL * max(1.0, math.sqrt(levels.mu2)):
            rho3 = (levels.roots or eh.eh_roots(levels))[2]
            eh.eh_tau_closed(levels, max(rho0, rho3))
            return lambda rho: eh.eh_tau_closed(levels, max(rho, rho3))
        eh.eh_tau_degenerate(levels, rho0)
        return lambda rho: eh.eh_tau_degenerate(levels, rho)
    except (NotDegenerate, BGPPError) as e:
        logger.info(f"No closed-form tau for these levels ({e}); using the integrated tau")
        return None


def verify_eh_analytic_vs_numeric(
    levels: EHLevels,
    initial: EHState,
    span: Tuple[float, float] = ANALYTIC_SPAN,
    cfg: Optional[IntegratorConfig] = None,
) -> AnalyticReport:
    """Compare (M1, M2, M3) along the EH flow with the trigonometric solution at tau(rho).

    Raises:
        InconsistentInitialData: if ``initial`` is not on ``levels``
    """
    cfg = cfg or IntegratorConfig(rel_tol=REL_TOL)
    found = eh.eh_integrals_array(levels.gamma2, initial.as_array())
    scale = max(1.0, abs(levels.e), levels.mu2)
    if (
        abs(found["H"] - levels.e) > 1e-9 * scale
        or abs(found["M3"] - levels.m3) > 1e-9 * scale
        or abs(found["mu2"] - levels.mu2) > 1e-9 * scale
    ):
        raise InconsistentInitialData(f"EH state integrals {found} do not match the levels")

    traj = integrate(FlowKind.EH, initial, gamma2=levels.gamma2, span=span, cfg=cfg, track_tau=True)
    tau_ode = np.array([s.tau for s in traj.samples])
    closed = _eh_tau_function(levels, initial.rho)
    branches = 1
    if closed is None:
        taus = tau_ode
    else:
        values = [0.0]
        for prev, cur in zip(traj.samples[:-1], traj.samples[1:]):
            r_a, p_a = prev.state[0], prev.state[1]
            r_b, p_b = cur.state[0], cur.state[1]
            c_a, c_b = closed(r_a), closed(r_b)
            if p_a * p_b < 0.0:
                c_turn = closed(levels.roots[2] if levels.roots else eh.eh_roots(levels)[2])
                step = abs(c_a - c_turn) + abs(c_turn - c_b)
                branches += 1
            else:
                step = abs(c_b - c_a)
            values.append(values[-1] + step)
        taus = np.array(values)

    phi0 = eh.eh_phase_from_state(initial.M1, initial.M2)
    M1, M2 = eh.eh_m12_solution(levels, taus, phi0)
    states = traj.states()
    errors = (
        float(np.max(np.abs(states[:, 2] - M1))),
        float(np.max(np.abs(states[:, 3] - M2))),
        float(np.max(np.abs(states[:, 4] - levels.m3))),
    )
    return AnalyticReport(
        case_id="eh",
        n_samples=len(traj.samples),
        max_error=errors,
        max_abs_error=max(errors),
        tau_mismatch=float(np.max(np.abs(taus - tau_ode))),
        n_branches=branches,
    )


def representative_state(params: MetricParams, ratio: float, t_offset: float = 1.0, P_t: float = 0.2) -> ReducedState:
    """Reduced state with m^2 = 1 and n^2/m^2 = ratio, built in the sorted frame."""
    T1, T2, T3 = params.sorted_values
    N2 = 0.3
    rest = 1.0 - N2 * N2
    if T3 > T1:
        N3sq = min(rest, max(0.0, (ratio - N2 * N2 * T2 - rest * T1) / (T3 - T1)))
    else:
        N3sq = 0.5 * rest
    N = (math.sqrt(rest - N3sq), N2, -math.sqrt(N3sq))
    M = [0.0, 0.0, 0.0]
    for a, idx in enumerate(params.order):
        M[idx] = N[a]
    return ReducedState(t=params.t_max + t_offset, P_t=P_t, M1=M[0], M2=M[1], M3=M[2])


def verify_analytic_suite(params: MetricParams, cfg: Optional[IntegratorConfig] = None) -> VerificationSection:
    """One representative level set per case, plus one Eguchi-Hanson run."""
    tol = VERIFY_TOLERANCES["analytic"]
    T1, T2, T3 = params.sorted_values
    checks = []
    seen = set()
    for ratio in (0.5 * (T2 + T3), 0.5 * (T1 + T2), T2):
        state = representative_state(params, ratio)
        levels = levels_from_state(state, params)
        case = classify_case(levels, params)
        if case in seen:
            continue
        seen.add(case)
        report = verify_analytic_vs_numeric(levels, params, state, cfg=cfg)
        details = {"n_branches": float(report.n_branches), "tau_mismatch": report.tau_mismatch}
        checks.append(_check(f"case_{case.value}", report.max_abs_error, tol, details))
        checks.append(_check(f"case_{case.value}_tau_quadrature_vs_ode", report.tau_mismatch, 1e-8))

    gamma2 = 1.0
    initial = EHState(rho=2.0, P_rho=-0.3, M1=0.5, M2=0.2, M3=0.7)
    levels = eh.eh_levels_from_state(initial, gamma2)
    report = verify_eh_analytic_vs_numeric(levels, initial, span=(0.0, 3.0), cfg=cfg)
    checks.append(_check("eguchi_hanson", report.max_abs_error, tol, {"n_branches": float(report.n_branches)}))
    return _section("analytic", checks)


def verify_multicentre(
    params: MetricParams,
    n_samples: int = MULTICENTRE_SAMPLES,
    seed: int = DEFAULT_SEED,
    h: float = MULTICENTRE_STEP,
) -> VerificationSection:
    """Multicentre pullback against the BGPP metric, with an h-halving order estimate."""
    rng = make_rng(seed)
    worst = 0.0
    first = None
    for _ in range(n_samples):
        s = random_mixed_state(rng, params)
        if first is None:
            first = s
        worst = max(worst, multicentre_check(params, s.t, s.theta, s.psi, h))

    residuals = [multicentre_check(params, first.t, first.theta, first.psi, step) for step in MULTICENTRE_ORDER_STEPS]
    if residuals[-1] < 1e-13:
        order = math.inf
    else:
        order = min(math.log2(residuals[i] / residuals[i + 1]) for i in range(len(residuals) - 1))
    details = {f"residual_h{i}": r for i, r in enumerate(residuals)}
    return _section(
        "multicentre",
        [
            _check("pullback_residual", worst, VERIFY_TOLERANCES["multicentre"], {"h": h}),
            _check("convergence_order", order, VERIFY_TOLERANCES["multicentre_order"], details, at_least=True),
        ],
    )


def _defining_integral(phi: float, n: float, k2: float) -> float:
    def integrand(theta: float) -> float:
        s2 = math.sin(theta) ** 2
        return 1.0 / ((1.0 - n * s2) * math.sqrt(1.0 - k2 * s2))

    value, _ = quad_sqrt_endpoint(integrand, 0.0, phi, SingularEnd.NONE)
    return value


def verify_special_functions() -> VerificationSection:
    """Jacobi identities, derivative and period checks, F and Pi against direct quadrature."""
    k2_values = [0.1 * i for i in range(10)] + [0.99, 1.0]
    u = np.linspace(-20.0, 20.0, 834)
    identity = 0.0
    derivative = 0.0
    period = 0.0
    h = 1e-6
    for k2 in k2_values:
        sn, cn, dn = jacobi_sn_cn_dn(u, k2)
        identity = max(identity, float(np.max(np.abs(sn**2 + cn**2 - 1.0))), float(np.max(np.abs(dn**2 + k2 * sn**2 - 1.0))))
        sp, _, _ = jacobi_sn_cn_dn(u + h, k2)
        sm, _, _ = jacobi_sn_cn_dn(u - h, k2)
        fd = (sp - sm) / (2.0 * h)
        derivative = max(derivative, float(np.max(np.abs(fd - cn * dn) / np.maximum(1.0, np.abs(cn * dn)))))
        if k2 <= 0.99:
            K = elliptic_K(k2)
            shifted, _, _ = jacobi_sn_cn_dn(u + 4.0 * K, k2)
            period = max(period, float(np.max(np.abs(shifted - sn))))

    integral = 0.0
    for phi in (0.3, 0.9, 1.4, 2.5, -1.1):
        for k2 in (0.0, 0.3, 0.5, 0.9):
            ref = _defining_integral(phi, 0.0, k2)
            integral = max(integral, abs(elliptic_F(phi, k2) - ref) / max(1.0, abs(ref)))
            for n in (-2.0, -0.5, 0.3, 0.6):
                ref = _defining_integral(phi, n, k2)
                integral = max(integral, abs(elliptic_Pi(phi, n, k2) - ref) / max(1.0, abs(ref)))

    # independent AGM value of the complete integral
    agm = 0.0
    for k2 in (0.1, 0.5, 0.9):
        reference = math.pi / (2.0 * float(special.agm(1.0, math.sqrt(1.0 - k2))))
        agm = max(agm, abs(elliptic_F(0.5 * math.pi, k2) - reference))

    tol = VERIFY_TOLERANCES
    return _section(
        "special",
        [
            _check("jacobi_identities", identity, tol["special"]),
            _check("sn_derivative", derivative, 1e-7),
            _check("sn_period", period, 1e-10),
            _check("F_Pi_vs_quadrature", integral, tol["special_quad"]),
            _check("K_vs_agm", agm, 1e-13),
        ],
    )


def _random_eh_levels(rng: np.random.Generator) -> EHLevels:
    return EHLevels(
        e=float(rng.uniform(0.1, 5.0)),
        m3=float(rng.choice((-1.0, 1.0)) * rng.uniform(0.1, 3.0)),
        mu2=float(rng.uniform(0.01, 9.0)),
        gamma2=float(rng.uniform(0.1, 4.0)),
    )


def verify_eguchi_hanson(seed: int = DEFAULT_SEED) -> VerificationSection:
    """Root interlacing, discriminant sign, closed-form tau and the t1 = t2 limit of the reduced flow."""
    rng = make_rng(seed)
    interlacing_failures = 0
    min_disc = math.inf
    for _ in range(EH_ROOT_SWEEP):
        levels = _random_eh_levels(rng)
        gamma = math.sqrt(levels.gamma2)
        min_disc = min(min_disc, eh.eh_discriminant(levels))
        r1, r2, r3 = eh.eh_roots(levels)
        if not (-gamma < r1 < 0.0 < r2 < gamma < r3):
            interlacing_failures += 1

    tau_err = 0.0
    for _ in range(EH_TAU_PAIRS):
        levels = eh.make_eh_levels(**_random_eh_levels(rng).model_dump(exclude={"roots"}))
        rho3 = levels.roots[2]
        rho_a, rho_b = sorted(rho3 + rng.uniform(0.0, 10.0, size=2))
        quad = eh.eh_tau_quadrature(levels, rho_a, rho_b)
        closed = eh.eh_tau_closed(levels, rho_b) - eh.eh_tau_closed(levels, rho_a)
        tau_err = max(tau_err, abs(closed - quad) / max(abs(quad), 1e-300))

    gamma2 = 1.3
    gamma = math.sqrt(gamma2)
    e = 0.8
    degenerate = EHLevels(e=e, m3=0.0, mu2=2.0 * e * gamma, gamma2=gamma2)
    quad = eh.eh_tau_quadrature(degenerate, 2.0 * gamma, 3.0 * gamma)
    closed = eh.eh_tau_degenerate(degenerate, 3.0 * gamma) - eh.eh_tau_degenerate(degenerate, 2.0 * gamma)
    degenerate_err = abs(closed - quad) / abs(quad)

    # eh_rhs against the chain-rule image of the reduced flow on (T, T, T - gamma^2)
    limit_err = 0.0
    for _ in range(EH_LIMIT_SAMPLES):
        g2 = float(rng.uniform(0.2, 3.0))
        low = float(rng.uniform(0.0, 2.0))
        params = validate_params(low + g2, low + g2, low)
        s = random_reduced_state(rng, params)
        eh_state, limit = eh.reduced_to_eh(s, params)
        expected = eh.reduced_rate_to_eh(s, rhs_reduced(s, params), limit)
        found = eh.eh_rhs(eh_state, limit.gamma2)
        limit_err = max(limit_err, float(np.max(np.abs(found - expected) / np.maximum(1.0, np.abs(expected)))))

    tol = VERIFY_TOLERANCES
    return _section(
        "eh",
        [
            _check("root_interlacing_failures", float(interlacing_failures), 0.0, {"sweep": float(EH_ROOT_SWEEP)}),
            _check("discriminant_positive", min_disc, 0.0, at_least=True),
            _check("closed_tau_vs_quadrature", tau_err, tol["eh_tau"]),
            _check("degenerate_tau_vs_quadrature", degenerate_err, tol["eh_tau"]),
            _check("limit_of_reduced_flow", limit_err, tol["eh_limit"]),
        ],
    )


def verify_reversibility(
    params: MetricParams,
    n_samples: int = REVERSIBILITY_SAMPLES,
    seed: int = DEFAULT_SEED,
    span: Tuple[float, float] = REVERSIBILITY_SPAN,
    cfg: Optional[IntegratorConfig] = None,
) -> VerificationSection:
    """Forward then backward integration returns to the initial state."""
    cfg = cfg or IntegratorConfig(rel_tol=REL_TOL)
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        s = random_reduced_state(rng, params)
        forward = integrate(FlowKind.REDUCED, s, params=params, span=span, cfg=cfg)
        end = np.array(forward.samples[-1].state)
        backward = integrate(FlowKind.REDUCED, end, params=params, span=(span[1], span[0]), cfg=cfg)
        x0 = s.as_array()
        back = np.array(backward.samples[-1].state)
        worst = max(worst, float(np.max(np.abs(back - x0))) / max(1.0, float(np.max(np.abs(x0)))))
    return _section("reversibility", [_check("forward_backward", worst, VERIFY_TOLERANCES["reversibility"])])


def run_verification(
    params: MetricParams,
    seed: int = DEFAULT_SEED,
    n_samples: int = DEFAULT_SAMPLES,
    checks: Optional[Iterable[str]] = None,
    cfg: Optional[IntegratorConfig] = None,
) -> VerificationReport:
    """Run the selected verification sections (all by default) and collect a report."""
    selected = list(checks) if checks else list(CHECK_NAMES)
    unknown = [c for c in selected if c not in CHECK_NAMES]
    if unknown:
        raise ValueError(f"Unknown checks {unknown}; choose from {CHECK_NAMES}")

    runners = {
        "brackets": lambda: verify_bracket_suite(params, n_samples, seed),
        "conservation": lambda: verify_conservation(params, seed=seed, cfg=cfg),
        "analytic": lambda: verify_analytic_suite(params, cfg),
        "multicentre": lambda: verify_multicentre(params, seed=seed),
        "special": verify_special_functions,
        "eh": lambda: verify_eguchi_hanson(seed),
        "reversibility": lambda: verify_reversibility(params, seed=seed, cfg=cfg),
    }
    sections = []
    for name in CHECK_NAMES:
        if name not in selected:
            continue
        with timer(f"verify:{name}"):
            sections.append(runners[name]())
    report = VerificationReport(seed=seed, sections=sections, passed=all(s.passed for s in sections))
    logger.info(f"Verification {'passed' if report.passed else 'FAILED'} (seed={seed})")
    return report
