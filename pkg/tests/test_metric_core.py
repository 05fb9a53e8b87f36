import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bgpp_flow.core.exceptions import DomainError, NegativeParameter, NonFinite, NotEHLimit, SingularPoint
from bgpp_flow.models.schemas import Degeneracy
from bgpp_flow.services.metric_core import (
    bgpp_metric_matrix,
    check_domain,
    eh_limit,
    multicentre_check,
    profile,
    rho_of_t,
    t_of_rho,
    validate_params,
)


@pytest.mark.parametrize(
    "ts, expected",
    [
        ((0.0, 1.0, 2.0), Degeneracy.GENERIC),
        ((1.0, 1.0, 5.0), Degeneracy.EH_II),
        ((0.0, 2.0, 2.0), Degeneracy.EH_I),
        ((2.0, 0.5, 2.0), Degeneracy.PAIR_13),
        ((3.0, 3.0, 3.0), Degeneracy.ISOTROPIC),
    ],
)
def test_validate_params_degeneracy(ts, expected):
    params = validate_params(*ts, tol=1e-12)
    assert params.degeneracy is expected
    assert params.t_max == max(ts)
    assert params.t_min == min(ts)


def test_validate_params_order_sorts_ascending():
    params = validate_params(2.0, 0.0, 1.0)
    assert params.order == (1, 2, 0)
    assert params.sorted_values == (0.0, 1.0, 2.0)


def test_validate_params_rejects_bad_input():
    with pytest.raises(NegativeParameter):
        validate_params(-0.1, 1.0, 2.0)
    with pytest.raises(NonFinite):
        validate_params(0.0, math.nan, 2.0)


def test_profile_isotropic_at_one():
    prof = profile(validate_params(0.0, 0.0, 0.0), 1.0)
    assert_allclose([prof.A, prof.B, prof.C, prof.a2, prof.b2, prof.c2], 1.0)
    assert_allclose(prof.f2, 0.25)


def test_profile_generic_values(generic_params):
    prof = profile(generic_params, 3.0)
    assert_allclose([prof.A, prof.B, prof.C], [math.sqrt(3.0), math.sqrt(2.0), 1.0], rtol=1e-15)
    assert_allclose(prof.a2, math.sqrt(2.0 / 3.0), rtol=1e-14)
    assert_allclose(prof.b2, math.sqrt(1.5), rtol=1e-14)
    assert_allclose(prof.c2, math.sqrt(6.0), rtol=1e-14)
    assert_allclose(prof.f2, 1.0 / (4.0 * math.sqrt(6.0)), rtol=1e-14)


def test_profile_rejects_boundary(generic_params):
    with pytest.raises(DomainError):
        profile(generic_params, 2.0)
    with pytest.raises(DomainError):
        check_domain(generic_params, 1.5)


def test_metric_matrix_is_symmetric_positive(generic_params):
    g = bgpp_metric_matrix(generic_params, 3.5, 0.9, 0.3)
    assert_allclose(g, g.T, atol=1e-15)
    assert np.all(np.linalg.eigvalsh(g) > 0.0)


@pytest.mark.parametrize(
    "ts, t, theta, psi",
    [
        ((0.0, 1.0, 2.0), 3.0, math.pi / 3, math.pi / 5),
        ((0.0, 0.0, 0.0), 2.0, math.pi / 2, 0.0),
        ((0.5, 3.0, 1.0), 4.2, 2.0, 4.0),
    ],
)
def test_multicentre_matches_bgpp_metric(ts, t, theta, psi):
    assert multicentre_check(validate_params(*ts), t, theta, psi, h=1e-5) < 1e-6


def test_multicentre_converges_at_second_order(generic_params):
    residuals = [multicentre_check(generic_params, 3.0, math.pi / 3, math.pi / 5, h) for h in (1e-2, 5e-3, 2.5e-3)]
    orders = [math.log2(residuals[i] / residuals[i + 1]) for i in range(2)]
    assert min(orders) >= 1.8


def test_multicentre_singular_angle(generic_params):
    with pytest.raises(SingularPoint):
        multicentre_check(generic_params, 3.0, 0.0, 0.1)


def test_eh_limit():
    limit = eh_limit(validate_params(0.0, 1.0, 1.0))
    assert limit.gamma2 == 1.0
    assert limit.t_distinct == 0.0
    assert limit.axis == 0
    assert_allclose(rho_of_t(limit, 4.0), 2.0)
    assert_allclose(t_of_rho(limit, 2.0), 4.0)

    assert eh_limit(validate_params(0.0, 2.0, 2.0)).gamma2 == 2.0
    assert eh_limit(validate_params(2.0, 2.0, 0.5)).axis == 2


@pytest.mark.parametrize("ts", [(0.0, 1.0, 2.0), (1.0, 1.0, 5.0), (3.0, 3.0, 3.0)])
def test_eh_limit_rejects_other_patterns(ts):
    with pytest.raises(NotEHLimit):
        eh_limit(validate_params(*ts))
