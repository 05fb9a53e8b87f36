import math

import numpy as np
import pytest

from bgpp_flow.models.schemas import FlowKind
from bgpp_flow.services.full_flow import p_phi_array
from bgpp_flow.services.integrator import integrate
from bgpp_flow.services.metric_core import validate_params
from bgpp_flow.utils.sampling import dominant_axis, make_rng, pinned_axis_state


@pytest.mark.parametrize(
    "ts, axis",
    [
        ((0.0, 1.0, 2.0), 2),
        ((2.0, 0.0, 1.0), 0),
        ((0.0, 2.0, 1.0), 1),
        ((0.0, 1.0, 1.0), 0),
        ((1.0, 1.0, 0.0), 2),
        ((0.0, 1.9, 2.0), 0),
    ],
)
def test_dominant_axis(ts, axis):
    assert dominant_axis(validate_params(*ts)) == axis


@pytest.mark.parametrize("ts", [(0.0, 1.0, 2.0), (2.0, 0.0, 1.0), (0.0, 2.0, 1.0)])
def test_pinned_state_momentum_direction(ts):
    params = validate_params(*ts)
    rng = make_rng(9)
    for _ in range(20):
        s = pinned_axis_state(rng, params)
        x = s.as_array()
        m = math.sqrt(s.M1**2 + s.M2**2 + s.M3**2)
        expected = 0.0 if dominant_axis(params) == 2 else m
        assert abs(p_phi_array(x) - expected) < 1e-12
        assert 0.2 < s.theta < math.pi - 0.2


def test_pinned_state_stays_off_the_singular_axis():
    params = validate_params(2.0, 0.0, 1.0)
    s = pinned_axis_state(make_rng(4), params)
    traj = integrate(FlowKind.FULL, s, params, span=(0.0, 2.0))
    theta = traj.states()[:, 6]
    # |M1|^2 >= n^2 - m^2 on this level set keeps sin(theta) away from zero
    assert np.min(np.abs(np.sin(theta))) > 0.4
    assert traj.drift_report["P_phi"] < 1e-8
