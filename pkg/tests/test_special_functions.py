import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError
from scipy import integrate as sp_integrate
from scipy import special

from bgpp_flow.core.exceptions import CharacteristicPole, ModulusOutOfRange, TurningPointCrossed
from bgpp_flow.models.schemas import EllipticModulus, SingularEnd
from bgpp_flow.services.special_functions import (
    elliptic_F,
    elliptic_K,
    elliptic_Pi,
    elliptic_Pi_complete,
    jacobi_sn_cn_dn,
    positive_branch,
    quad_sqrt_endpoint,
)


def _agm_K(k2):
    return math.pi / (2.0 * special.agm(1.0, math.sqrt(1.0 - k2)))


@pytest.mark.parametrize("k2", [0.0, 0.3, 0.9, 1.0])
def test_jacobi_at_zero(k2):
    assert_allclose(jacobi_sn_cn_dn(0.0, k2), (0.0, 1.0, 1.0), atol=1e-16)


def test_jacobi_limits():
    u = np.linspace(-5.0, 5.0, 101)
    sn, cn, dn = jacobi_sn_cn_dn(u, 0.0)
    assert_allclose(sn, np.sin(u))
    assert_allclose(cn, np.cos(u))
    assert_allclose(dn, 1.0)
    sn, cn, dn = jacobi_sn_cn_dn(u, 1.0)
    assert_allclose(sn, np.tanh(u))
    assert_allclose(cn, 1.0 / np.cosh(u))
    assert_allclose(dn, 1.0 / np.cosh(u))


def test_jacobi_against_amplitude_oracle():
    # sn(u) = sin(am u) with am the inverse of F
    k2 = 0.5
    phi = 0.9
    u = elliptic_F(phi, k2)
    sn, cn, dn = jacobi_sn_cn_dn(u, k2)
    assert_allclose([sn, cn, dn], [math.sin(phi), math.cos(phi), math.sqrt(1.0 - k2 * math.sin(phi) ** 2)], atol=1e-13)


def test_jacobi_identities_on_grid():
    u = np.linspace(-30.0, 30.0, 2001)
    for k2 in (0.05, 0.5, 0.95, 0.999):
        sn, cn, dn = jacobi_sn_cn_dn(u, k2)
        assert_allclose(sn**2 + cn**2, 1.0, atol=1e-11)
        assert_allclose(dn**2 + k2 * sn**2, 1.0, atol=1e-11)


def test_elliptic_modulus_model():
    modulus = EllipticModulus.from_k2(0.25)
    assert (modulus.k, modulus.k2) == (0.5, 0.25)
    with pytest.raises(ValidationError):
        EllipticModulus.from_k2(1.5)
    with pytest.raises(ValidationError):
        EllipticModulus.from_k2(-0.1)


def test_modulus_range():
    with pytest.raises(ModulusOutOfRange):
        jacobi_sn_cn_dn(0.3, 1.5)
    with pytest.raises(ModulusOutOfRange):
        elliptic_F(0.3, 1.0)
    with pytest.raises(ModulusOutOfRange):
        elliptic_K(-0.1)


def test_elliptic_F_basic():
    assert elliptic_F(0.0, 0.4) == 0.0
    assert elliptic_F(1.234, 0.0) == 1.234
    assert_allclose(elliptic_F(math.pi / 2, 0.5), _agm_K(0.5), rtol=1e-13)
    assert_allclose(elliptic_K(0.5), _agm_K(0.5), rtol=1e-13)


def test_elliptic_F_is_odd_and_quasi_periodic():
    k2 = 0.7
    K = elliptic_K(k2)
    for phi in (0.2, 1.3, 2.9, 7.5):
        assert_allclose(elliptic_F(-phi, k2), -elliptic_F(phi, k2), rtol=1e-14)
        assert_allclose(elliptic_F(phi + math.pi, k2), elliptic_F(phi, k2) + 2.0 * K, rtol=1e-13)


def _pi_quadrature(phi, n, k2):
    value, _ = sp_integrate.quad(
        lambda th: 1.0 / ((1.0 - n * math.sin(th) ** 2) * math.sqrt(1.0 - k2 * math.sin(th) ** 2)),
        0.0,
        phi,
        epsabs=1e-14,
        epsrel=1e-14,
    )
    return value


def test_elliptic_Pi_reductions_and_oracle():
    assert_allclose(elliptic_Pi(0.8, 0.0, 0.6), elliptic_F(0.8, 0.6), rtol=1e-13)
    assert_allclose(elliptic_Pi(0.8, 0.0, 0.0), 0.8, rtol=1e-15)
    assert_allclose(elliptic_Pi(math.pi / 3, -0.5, 0.3), _pi_quadrature(math.pi / 3, -0.5, 0.3), rtol=1e-11)
    assert_allclose(elliptic_Pi(2.4, 0.5, 0.8), _pi_quadrature(2.4, 0.5, 0.8), rtol=1e-11)
    assert_allclose(elliptic_Pi_complete(0.4, 0.3), _pi_quadrature(math.pi / 2, 0.4, 0.3), rtol=1e-11)


def test_elliptic_Pi_pole():
    with pytest.raises(CharacteristicPole):
        elliptic_Pi(1.2, 1.5, 0.3)
    with pytest.raises(CharacteristicPole):
        elliptic_Pi_complete(1.0, 0.3)
    # 1 - n sin^2 stays positive before the pole is reached
    phi = 0.5
    n = 1.5
    assert_allclose(elliptic_Pi(phi, n, 0.3), _pi_quadrature(phi, n, 0.3), rtol=1e-11)


def test_quad_sqrt_endpoint_closed_forms():
    value, _ = quad_sqrt_endpoint(lambda x: 1.0 / math.sqrt(x), 0.0, 1.0, SingularEnd.LEFT)
    assert_allclose(value, 2.0, rtol=1e-12)
    value, _ = quad_sqrt_endpoint(math.sin, 0.0, math.pi, SingularEnd.NONE)
    assert_allclose(value, 2.0, rtol=1e-13)
    value, _ = quad_sqrt_endpoint(lambda x: 1.0 / math.sqrt(x * (1.0 - x)), 0.0, 1.0, SingularEnd.BOTH)
    assert_allclose(value, math.pi, rtol=1e-11)
    value, _ = quad_sqrt_endpoint(lambda x: 1.0 / math.sqrt(1.0 - x), 0.0, 1.0, SingularEnd.RIGHT)
    assert_allclose(value, 2.0, rtol=1e-12)


def test_quad_sqrt_endpoint_reversed_limits():
    value, _ = quad_sqrt_endpoint(lambda x: 1.0 / math.sqrt(x), 1.0, 0.0, SingularEnd.RIGHT)
    assert_allclose(value, -2.0, rtol=1e-12)
    assert quad_sqrt_endpoint(math.sin, 0.5, 0.5) == (0.0, 0.0)


def test_positive_branch_finds_narrow_dip():
    # negative only on (1 - 1e-4, 1 + 1e-4)
    def f(x):
        return (x - 1.0) ** 2 - 1e-8

    with pytest.raises(TurningPointCrossed):
        positive_branch(f, 0.0, 3.0, [1.0], lambda x: 0.0)
    assert positive_branch(f, 1.5, 3.0, [1.0], lambda x: 0.0) == (1.5, 3.0)


def test_positive_branch_moves_end_onto_root():
    def f(x):
        return x - 1.0

    lo, hi = positive_branch(f, 1.0 - 1e-9, 2.0, [], lambda x: 1e-6)
    assert lo == pytest.approx(1.0, abs=1e-14)
    assert hi == 2.0
    with pytest.raises(TurningPointCrossed):
        positive_branch(f, 0.5, 2.0, [], lambda x: 1e-6)
    with pytest.raises(TurningPointCrossed):
        positive_branch(lambda x: -1e-9, 0.0, 1.0, [], lambda x: 1e-6)
