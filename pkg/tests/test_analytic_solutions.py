import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bgpp_flow.core.exceptions import InconsistentInitialData, UnattainableLevel, ZeroCasimir
from bgpp_flow.models.schemas import EulerCaseId, LevelSet
from bgpp_flow.services.analytic_solutions import build_solution, classify_case, eval_solution, permutation_parity
from bgpp_flow.services.metric_core import validate_params


def _levels(params, M):
    M = np.asarray(M, dtype=float)
    return LevelSet(e=0.0, m2=float(M @ M), n2=float(params.as_array() @ (M * M)))


def _euler_rate(params, M):
    t1, t2, t3 = params.t1, params.t2, params.t3
    M1, M2, M3 = M
    return np.array([(t3 - t2) * M2 * M3, (t1 - t3) * M3 * M1, (t2 - t1) * M1 * M2])


@pytest.mark.parametrize("n2, expected", [(1.5, EulerCaseId.I), (0.5, EulerCaseId.II), (1.0, EulerCaseId.III)])
def test_classify_case(generic_params, n2, expected):
    assert classify_case(LevelSet(e=0.0, m2=1.0, n2=n2), generic_params) is expected


def test_classify_case_rejects(generic_params):
    with pytest.raises(ZeroCasimir):
        classify_case(LevelSet(e=0.0, m2=0.0, n2=0.0), generic_params)
    with pytest.raises(UnattainableLevel):
        classify_case(LevelSet(e=0.0, m2=1.0, n2=3.0), generic_params)


def test_axial_family_for_repeated_parameters(eh_params, isotropic_params):
    assert classify_case(LevelSet(e=0.0, m2=1.0, n2=0.5), eh_params) is EulerCaseId.AXIAL
    assert classify_case(LevelSet(e=0.0, m2=1.0, n2=0.0), isotropic_params) is EulerCaseId.AXIAL


def test_permutation_parity():
    assert permutation_parity((0, 1, 2)) == 1
    assert permutation_parity((1, 2, 0)) == 1
    assert permutation_parity((1, 0, 2)) == -1
    assert permutation_parity((2, 1, 0)) == -1


def test_case_i_modulus_and_amplitudes(generic_params):
    M = (0.5, 0.0, math.sqrt(0.75))
    sol = build_solution(_levels(generic_params, M), generic_params, M)
    assert sol.case_id is EulerCaseId.I
    assert_allclose(sol.k2, 1.0 / 3.0, rtol=1e-14)
    assert_allclose(sol.amplitudes, (0.5, math.sqrt(0.5), math.sqrt(0.75)), rtol=1e-14)
    assert_allclose(sol.sigma_rate, math.sqrt(1.5), rtol=1e-14)


def test_case_iii_separatrix(generic_params):
    M = (math.sqrt(0.5), 0.0, -math.sqrt(0.5))
    sol = build_solution(_levels(generic_params, M), generic_params, M)
    assert sol.case_id is EulerCaseId.III
    assert_allclose(sol.amplitudes, (math.sqrt(0.5), 1.0, math.sqrt(0.5)), rtol=1e-14)
    assert_allclose(sol.sigma_rate, 1.0, rtol=1e-14)
    # approaches the unstable equilibrium (0, m, 0)
    assert_allclose(eval_solution(sol, 40.0), (0.0, 1.0, 0.0), atol=1e-15)
    assert_allclose(eval_solution(sol, -40.0), (0.0, -1.0, 0.0), atol=1e-15)


def test_case_iii_equilibrium(generic_params):
    M = (0.0, -2.0, 0.0)
    sol = build_solution(_levels(generic_params, M), generic_params, M)
    assert_allclose(eval_solution(sol, np.linspace(0.0, 5.0, 6)), np.tile(np.array(M)[:, None], 6), atol=0.0)


def test_inconsistent_initial_data(generic_params):
    with pytest.raises(InconsistentInitialData):
        build_solution(LevelSet(e=0.0, m2=1.0, n2=1.5), generic_params, (1.0, 0.0, 0.0))


@pytest.mark.parametrize("fixture_name", ["case_i_state", "case_ii_state", "case_iii_state"])
def test_solution_reproduces_initial_and_solves_euler(request, generic_params, fixture_name):
    s = request.getfixturevalue(fixture_name)
    M = (s.M1, s.M2, s.M3)
    sol = build_solution(_levels(generic_params, M), generic_params, M)
    assert_allclose(eval_solution(sol, 0.0), M, atol=1e-12)

    h = 1e-5
    for tau in (-1.3, 0.4, 2.7):
        plus = np.array(eval_solution(sol, tau + h))
        minus = np.array(eval_solution(sol, tau - h))
        here = np.array(eval_solution(sol, tau))
        assert_allclose((plus - minus) / (2.0 * h), _euler_rate(generic_params, here), atol=1e-7)
        # the orbit stays on both level sets
        assert_allclose(here @ here, sol.m**2, rtol=1e-12)


def test_unsorted_parameters_keep_positional_components():
    params = validate_params(2.0, 0.0, 1.0)
    M = (0.3, -0.8, 0.5)
    sol = build_solution(_levels(params, M), params, M)
    assert sol.parity == 1
    assert_allclose(eval_solution(sol, 0.0), M, atol=1e-12)
    h = 1e-5
    here = np.array(eval_solution(sol, 0.9))
    rate = (np.array(eval_solution(sol, 0.9 + h)) - np.array(eval_solution(sol, 0.9 - h))) / (2.0 * h)
    assert_allclose(rate, _euler_rate(params, here), atol=1e-7)

    odd = validate_params(1.0, 0.0, 2.0)
    sol = build_solution(_levels(odd, M), odd, M)
    assert sol.parity == -1
    assert_allclose(eval_solution(sol, 0.0), M, atol=1e-12)
    here = np.array(eval_solution(sol, 0.9))
    rate = (np.array(eval_solution(sol, 0.9 + h)) - np.array(eval_solution(sol, 0.9 - h))) / (2.0 * h)
    assert_allclose(rate, _euler_rate(odd, here), atol=1e-7)


def test_axial_solution_rotates_about_distinct_axis(eh_params):
    M = (0.5, 0.3, 0.4)
    sol = build_solution(_levels(eh_params, M), eh_params, M)
    assert sol.case_id is EulerCaseId.AXIAL
    assert sol.axis == 0
    assert_allclose(sol.amplitudes, (0.5, 0.5, 0.5), rtol=1e-14)
    assert_allclose(sol.sigma_rate, 0.5)
    tau = 1.7
    M1, M2, M3 = eval_solution(sol, tau)
    assert M1 == 0.5
    assert_allclose([M2, M3], [0.5 * math.cos(0.5 * tau + math.atan2(0.4, 0.3)), 0.5 * math.sin(0.5 * tau + math.atan2(0.4, 0.3))])


def test_isotropic_solution_is_constant(isotropic_params):
    M = (0.3, -0.2, 0.9)
    sol = build_solution(_levels(isotropic_params, M), isotropic_params, M)
    assert sol.sigma_rate == 0.0
    assert_allclose(eval_solution(sol, 12.0), M, atol=1e-15)


@pytest.mark.parametrize("ts", [(0.0, 1.0, 2.0), (1.0, 2.0, 4.0)])
def test_reflection_swaps_case_i_and_ii(ts):
    # t_i -> c - t_(4-i) with M reversed maps the Euler equations onto themselves
    params = validate_params(*ts)
    shift = max(ts) + min(ts)
    reflected = validate_params(*(shift - t for t in reversed(ts)))
    M = (0.3, 0.4, 1.2)
    M_reflected = M[::-1]
    sol = build_solution(_levels(params, M), params, M)
    dual = build_solution(_levels(reflected, M_reflected), reflected, M_reflected)
    assert (sol.case_id, dual.case_id) == (EulerCaseId.I, EulerCaseId.II)
    assert_allclose(dual.k2, sol.k2, rtol=1e-12)
    assert_allclose(dual.sigma_rate, sol.sigma_rate, rtol=1e-12)

    tau = np.linspace(0.0, 6.0, 61)
    M1, M2, M3 = eval_solution(sol, tau)
    R1, R2, R3 = eval_solution(dual, tau)
    assert_allclose(np.vstack([R3, R2, R1]), np.vstack([M1, M2, M3]), atol=1e-10)
    # dn component: third axis in case I, first axis in case II
    assert np.min(M3) > 0.0 and np.min(R1) > 0.0
    assert np.min(M1) < 0.0 < np.max(M1)
    assert np.min(R3) < 0.0 < np.max(R3)
