import numpy as np
import pytest

from src.core.errors import ScenarioError
from src.dynamics.friction import FrictionParams, friction_damping, friction_torque, step_friction
from src.dynamics.newton_euler import inverse_dynamics
from src.robot.kinematics import forward_kinematics, jacobian
from src.robot.model import JointState
from src.sim.plant import forward_dynamics, perturbation_torque
from src.sim.scenario import PerturbationEvent
from tests.helpers import random_configurations


def push(start=0.1, duration=0.05, force=(0.0, 1.0, 0.0), point=(1.0, 0.0, 0.0), link=0):
    return PerturbationEvent(link_index=link, application_point=point, force=force, start=start, duration=duration)


def test_no_active_event_gives_zero_torque(flat_link):
    np.testing.assert_array_equal(perturbation_torque(flat_link, [0.0], [push()], 0.0), [0.0])
    np.testing.assert_array_equal(perturbation_torque(flat_link, [0.0], [], 0.1), [0.0])


def test_pulse_window_is_half_open(flat_link):
    event = push(start=0.1, duration=0.05)
    assert perturbation_torque(flat_link, [0.0], [event], 0.1)[0] == pytest.approx(1.0)
    assert perturbation_torque(flat_link, [0.0], [event], 0.149)[0] == pytest.approx(1.0)
    assert perturbation_torque(flat_link, [0.0], [event], 0.15)[0] == 0.0


def test_force_at_tip_gives_lever_arm_torque(flat_link):
    # 2 N sideways at 0.5 m along the link
    event = push(start=0.0, force=(0.0, 2.0, 0.0), point=(0.5, 0.0, 0.0))
    assert perturbation_torque(flat_link, [0.0], [event], 0.01)[0] == pytest.approx(1.0)
    # rotated link, force along world y now has a shorter lever arm
    assert perturbation_torque(flat_link, [np.pi / 3], [event], 0.01)[0] == pytest.approx(0.5)


def test_event_on_missing_link(flat_link):
    with pytest.raises(ScenarioError):
        perturbation_torque(flat_link, [0.0], [push(link=3, start=0.0)], 0.0)


def test_single_link_forward_dynamics(flat_link):
    qdd = forward_dynamics(flat_link, None, JointState(np.array([0.2]), np.array([0.0])), [0.6], [0.0])
    assert qdd[0] == pytest.approx(1.0)
    qdd = forward_dynamics(flat_link, None, JointState(np.array([0.2]), np.array([0.0])), [0.0], [1.2])
    assert qdd[0] == pytest.approx(2.0)


def test_forward_inverts_inverse_dynamics(arm_model, rng):
    for q in random_configurations(rng, 5):
        qd, qdd = rng.normal(size=7), rng.normal(size=7)
        tau = inverse_dynamics(arm_model, q, qd, qdd)
        np.testing.assert_allclose(forward_dynamics(arm_model, None, JointState(q, qd), tau, np.zeros(7)), qdd, atol=1e-8)


def test_friction_opposes_motion():
    params = FrictionParams.uniform(3)
    for v in np.linspace(-2.0, 2.0, 41):
        if abs(v) > params.smoothing_velocity:
            assert np.all(np.sign(friction_torque(params, [v, v, v])) == np.sign(v))
    np.testing.assert_array_equal(friction_torque(params, np.zeros(3)), 0.0)
    np.testing.assert_array_equal(friction_torque(FrictionParams.off(3), [1.0, -1.0, 2.0]), 0.0)


def test_friction_enters_forward_dynamics(flat_link):
    friction = FrictionParams.uniform(1, coulomb=0.0, viscous=0.3)
    qdd = forward_dynamics(flat_link, friction, JointState(np.array([0.0]), np.array([2.0])), [0.0], [0.0])
    assert qdd[0] == pytest.approx(-0.6 / 0.6)


@pytest.mark.parametrize("link", range(7))
def test_push_never_reaches_joints_beyond_its_link(arm_model, rng, link):
    event = push(start=0.0, force=rng.normal(size=3) * 10.0, point=(0.01, -0.02, 0.05), link=link)
    for q in random_configurations(rng, 3):
        tau = perturbation_torque(arm_model, q, [event], 0.0)
        np.testing.assert_array_equal(tau[link + 1:], 0.0)
        assert np.any(tau[: link + 1] != 0.0)


def test_push_at_end_effector_is_jacobian_transpose(arm_model, rng):
    force = np.array([3.0, -1.5, 7.0])
    tip = (0.0, 0.0, arm_model.links[-1].length)
    event = push(start=0.0, force=force, point=tip, link=6)
    for q in random_configurations(rng, 5):
        np.testing.assert_allclose(perturbation_torque(arm_model, q, [event], 0.0), jacobian(arm_model, q).T @ force, atol=1e-12)
    frames = forward_kinematics(arm_model, q)
    np.testing.assert_allclose(frames.origins[-1], frames.origins[-2] + frames.rotations[-1] @ tip, atol=1e-12)


def test_implicit_friction_damps_within_one_step(flat_link):
    friction = FrictionParams.uniform(1, coulomb=0.0, viscous=3.0, implicit=True)
    state = JointState(np.array([0.0]), np.array([2.0]))
    qdd = forward_dynamics(flat_link, friction, state, [0.0], [0.0], dt=1.0)
    # (0.6 + 3) qdd = -6
    assert qdd[0] == pytest.approx(-6.0 / 3.6)
    assert 2.0 + qdd[0] * 1.0 > 0.0
    # without a step length the friction stays explicit
    assert forward_dynamics(flat_link, friction, state, [0.0], [0.0])[0] == pytest.approx(-10.0)
    with pytest.raises(ValueError):
        forward_dynamics(flat_link, friction, state, [0.0], [0.0], dt=0.0)


def test_friction_damping_is_the_velocity_derivative():
    params = FrictionParams.uniform(2, coulomb=0.7, viscous=0.2, smoothing_velocity=0.05)
    qd, h = np.array([0.03, -0.4]), 1e-7
    numeric = (friction_torque(params, qd + h) - friction_torque(params, qd - h)) / (2 * h)
    np.testing.assert_allclose(friction_damping(params, qd), numeric, rtol=1e-6)
    np.testing.assert_allclose(step_friction(params, qd, [1.0, 1.0], 1e-3), friction_torque(params, qd))
