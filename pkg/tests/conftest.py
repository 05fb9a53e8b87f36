import math

import numpy as np
import pytest

from bgpp_flow.models.schemas import EHState, IntegratorConfig, MixedState, ReducedState
from bgpp_flow.services.metric_core import validate_params


@pytest.fixture
def generic_params():
    return validate_params(0.0, 1.0, 2.0)


@pytest.fixture
def isotropic_params():
    return validate_params(0.0, 0.0, 0.0)


@pytest.fixture
def eh_params():
    # two largest equal: gamma^2 = 1, conserved component on axis 0
    return validate_params(0.0, 1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def mixed_state():
    return MixedState(t=3.0, P_t=0.2, M1=0.3, M2=-0.4, M3=1.2, phi=0.7, theta=1.1, psi=0.4)


@pytest.fixture
def case_i_state():
    # m^2 = 1.69, n^2 = 3.04 on (0, 1, 2): ratio above t2
    return ReducedState(t=3.0, P_t=0.2, M1=0.3, M2=0.4, M3=1.2)


@pytest.fixture
def case_ii_state():
    return ReducedState(t=3.0, P_t=0.2, M1=1.2, M2=0.4, M3=0.3)


@pytest.fixture
def case_iii_state():
    # n^2 / m^2 = t2 = 1 exactly
    return ReducedState(t=3.0, P_t=0.2, M1=0.6, M2=math.sqrt(0.28), M3=-0.6)


@pytest.fixture
def eh_state():
    return EHState(rho=2.0, P_rho=-0.3, M1=0.5, M2=0.2, M3=0.7)


@pytest.fixture
def tight_cfg():
    return IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, sample_stride=0.1)
