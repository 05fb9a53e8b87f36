import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bgpp_flow.core.exceptions import ComputationError, DomainError, SingularPoint, StepFailure
from bgpp_flow.models.schemas import EHState, FlowKind, IntegratorConfig, ReducedState
from bgpp_flow.services.integrator import integrate, integrate_fixed, validate_initial
from bgpp_flow.services.reduced_flow import levels_from_state, tau_of_t


def test_state_at_rest_stays_put(generic_params):
    rest = ReducedState(t=3.0, P_t=0.0, M1=0.0, M2=0.0, M3=0.0)
    traj = integrate(FlowKind.REDUCED, rest, generic_params, span=(0.0, 5.0))
    assert_allclose(traj.states(), np.tile(rest.as_array(), (len(traj.samples), 1)), atol=0.0)


def test_samples_land_on_stride(generic_params, case_i_state):
    traj = integrate(FlowKind.REDUCED, case_i_state, generic_params, span=(0.0, 1.0))
    assert len(traj.samples) == 11
    assert_allclose(traj.lambdas(), np.linspace(0.0, 1.0, 11), atol=1e-15)
    assert traj.samples[-1].lam == 1.0
    assert traj.state_names == ("t", "P_t", "M1", "M2", "M3")


def test_zero_span_returns_initial_sample(generic_params, case_i_state):
    traj = integrate(FlowKind.REDUCED, case_i_state, generic_params, span=(2.0, 2.0))
    assert len(traj.samples) == 1
    assert traj.n_steps == 0
    assert traj.samples[0].state == tuple(case_i_state.as_array())


def test_reduced_flow_conserves_integrals(generic_params, case_i_state, tight_cfg):
    traj = integrate(FlowKind.REDUCED, case_i_state, generic_params, span=(0.0, 10.0), cfg=tight_cfg)
    assert set(traj.drift_report) == {"H", "C", "I"}
    for name, drift in traj.drift_report.items():
        assert drift <= 1e-8, name


def test_full_flow_conserves_integrals(generic_params, mixed_state, tight_cfg):
    traj = integrate(FlowKind.FULL, mixed_state, generic_params, span=(0.0, 2.0), cfg=tight_cfg)
    assert set(traj.drift_report) == {"H", "P_phi", "C", "I"}
    assert max(traj.drift_report.values()) <= 1e-8


def test_backward_span_retraces_trajectory(generic_params, case_ii_state, tight_cfg):
    forward = integrate(FlowKind.REDUCED, case_ii_state, generic_params, span=(0.0, 2.0), cfg=tight_cfg)
    end = forward.samples[-1].state
    backward = integrate(FlowKind.REDUCED, end, generic_params, span=(2.0, 0.0), cfg=tight_cfg)
    assert backward.samples[-1].lam == 0.0
    assert_allclose(backward.samples[-1].state, case_ii_state.as_array(), rtol=1e-8, atol=1e-9)


def test_tracked_tau_matches_quadrature(generic_params, case_i_state, tight_cfg):
    traj = integrate(FlowKind.REDUCED, case_i_state, generic_params, span=(0.0, 1.0), cfg=tight_cfg, track_tau=True)
    assert traj.samples[0].tau == 0.0
    last = traj.samples[-1]
    assert all(s.state[1] > 0.0 for s in traj.samples)
    levels = levels_from_state(case_i_state, generic_params)
    assert_allclose(last.tau, tau_of_t(levels, generic_params, case_i_state.t, last.state[0]), rtol=1e-7)


def test_eh_radial_infall_cannot_cross_bolt():
    infall = EHState(rho=2.0, P_rho=-1.0, M1=0.0, M2=0.0, M3=0.0)
    with pytest.raises(ComputationError):
        integrate(FlowKind.EH, infall, gamma2=1.0, span=(0.0, 50.0))


def test_eh_flow_conserves_m3(eh_state, tight_cfg):
    traj = integrate(FlowKind.EH, eh_state, gamma2=1.0, span=(0.0, 3.0), cfg=tight_cfg)
    assert all(s.state[4] == eh_state.M3 for s in traj.samples)
    assert max(traj.drift_report.values()) <= 1e-8


def test_step_budget(generic_params, case_i_state):
    with pytest.raises(StepFailure) as info:
        integrate(FlowKind.REDUCED, case_i_state, generic_params, span=(0.0, 10.0), cfg=IntegratorConfig(max_steps=1))
    assert info.value.lam > 0.0


def test_fixed_step_order(generic_params, case_i_state):
    span = (0.0, 2.0)
    reference = integrate_fixed(FlowKind.REDUCED, case_i_state, generic_params, span=span, n_steps=2000)
    errors = [
        np.max(np.abs(integrate_fixed(FlowKind.REDUCED, case_i_state, generic_params, span=span, n_steps=n) - reference))
        for n in (20, 40)
    ]
    assert math.log2(errors[0] / errors[1]) >= 4.5
    with pytest.raises(DomainError):
        integrate_fixed(FlowKind.REDUCED, case_i_state, generic_params, span=span, n_steps=0)


def test_validate_initial(generic_params, mixed_state):
    assert_allclose(validate_initial(FlowKind.FULL, mixed_state, generic_params), mixed_state.as_array())
    with pytest.raises(DomainError):
        validate_initial(FlowKind.REDUCED, [3.0, 0.0, 0.0, 0.0], generic_params)
    with pytest.raises(DomainError):
        validate_initial(FlowKind.REDUCED, [1.5, 0.0, 0.0, 0.0, 0.0], generic_params)
    with pytest.raises(SingularPoint):
        validate_initial(FlowKind.FULL, mixed_state.model_copy(update={"theta": 0.0}), generic_params)
    with pytest.raises(DomainError):
        validate_initial(FlowKind.EH, [0.5, 0.0, 0.0, 0.0, 0.0], gamma2=1.0)
    with pytest.raises(DomainError):
        validate_initial(FlowKind.REDUCED, [3.0, 0.0, 0.0, 0.0, 0.0])
