import math

import numpy as np
import pytest

from src.control.reaching import (
    MuscleFilter,
    ReachingParams,
    phase_argument,
    reaching_command,
    reaching_gains,
)
from src.control.regulation import PDGains, compose_torque, gains_from_config, pd_task_command
from src.core.errors import DegenerateReachError, DimensionError
from src.dynamics.task_space import arm_snapshot
from src.robot.model import JointState, TaskState
from tests.helpers import random_configurations

DT = 1e-3


def test_pd_command_is_zero_at_reference():
    task = TaskState(x=np.array([0.31, -0.4, 0.14]), xd=np.zeros(3), xdd=np.zeros(3))
    np.testing.assert_array_equal(pd_task_command(PDGains(), task.x, task), 0.0)


def test_pd_command_spring_and_damper():
    gains = PDGains.uniform(4.0, 0.5)
    task = TaskState(x=np.array([0.01, 0.0, 0.0]), xd=np.array([0.0, 2.0, 0.0]), xdd=np.zeros(3))
    np.testing.assert_allclose(pd_task_command(gains, np.zeros(3), task), [-0.04, -1.0, 0.0])


def test_compose_torque_subtracts_estimate(arm_model, hold_pose, rng):
    snap = arm_snapshot(arm_model, hold_pose, np.zeros(7))
    f_cmd, f_hat, tau0 = rng.normal(size=3), rng.normal(size=3), rng.normal(size=7)
    out = compose_torque(snap.J, f_cmd, f_hat, snap.P, tau0)
    np.testing.assert_allclose(out.joint_torque, snap.J.T @ (f_cmd - f_hat) + snap.P @ tau0)
    # the null-space part produces no task force
    np.testing.assert_allclose(snap.task.jm_pinv.T @ out.null_torque, 0.0, atol=1e-9)


def test_compose_torque_zero_inputs(arm_model, hold_pose):
    snap = arm_snapshot(arm_model, hold_pose, np.zeros(7))
    out = compose_torque(snap.J, np.zeros(3), np.zeros(3), snap.P, np.zeros(7))
    np.testing.assert_array_equal(out.joint_torque, 0.0)


def test_compose_torque_shape_check(arm_model, hold_pose):
    snap = arm_snapshot(arm_model, hold_pose, np.zeros(7))
    with pytest.raises(DimensionError):
        compose_torque(snap.J, np.zeros(3), np.zeros(3), np.eye(6), np.zeros(7))


def test_gains_validation():
    with pytest.raises(ValueError):
        PDGains(k=(0.0, 4.0, 4.0))
    with pytest.raises(ValueError):
        PDGains(b=(-1.0, 0.0, 0.0))
    assert gains_from_config(4.0, 0.001) == PDGains()


def test_phase_argument_endpoints():
    assert phase_argument(0.2, 0.2) == 0.0
    assert phase_argument(0.2, 0.0) == pytest.approx(math.pi / 2)
    assert phase_argument(0.2, 0.1) == pytest.approx(math.pi / 4)
    # overshoot past the start distance clamps to the start phase
    assert phase_argument(0.2, 0.5) == 0.0
    with pytest.raises(DegenerateReachError):
        phase_argument(0.0, 0.1)


def test_gains_blend_from_spring_to_damper():
    params = ReachingParams.uniform(7, target=(0.0, 0.0, 0.1), start=(0.0, 0.0, 0.0))
    kv, f_mus = reaching_gains(params, 0.1)
    np.testing.assert_allclose(kv, 0.0, atol=1e-15)
    np.testing.assert_allclose(f_mus, 1.0)
    kv, f_mus = reaching_gains(params, 0.0)
    np.testing.assert_allclose(kv, 2.0)
    np.testing.assert_allclose(f_mus, 0.0, atol=1e-15)


def test_start_on_target_is_degenerate():
    with pytest.raises(DegenerateReachError):
        ReachingParams.uniform(7, target=(0.1, 0.2, 0.3), start=(0.1, 0.2, 0.3))


def test_muscle_filter_step():
    muscle = MuscleFilter((0.05,) * 2, DT)
    out = muscle.step(np.zeros(2), np.array([1.0, -2.0]))
    np.testing.assert_allclose(out, (1.0 - math.exp(-DT / 0.05)) * np.array([1.0, -2.0]))


def test_reaching_command_at_rest_on_target(arm_model, hold_pose):
    snap = arm_snapshot(arm_model, hold_pose, np.zeros(7))
    x = snap.frames.end_effector
    params = ReachingParams.uniform(7, target=x, start=x + np.array([0.0, 0.0, 0.1]))
    task = TaskState(x=x.copy(), xd=np.zeros(3), xdd=np.zeros(3))
    f_hat = np.array([0.0, 0.0, -3.0])
    torque, states = reaching_command(params, JointState(hold_pose, np.zeros(7)), task, snap.J, f_hat, np.zeros(7), DT)
    np.testing.assert_allclose(states, 0.0, atol=1e-15)
    np.testing.assert_allclose(torque, -snap.J.T @ f_hat, atol=1e-12)


def test_reaching_command_pulls_toward_target(arm_model, hold_pose):
    snap = arm_snapshot(arm_model, hold_pose, np.zeros(7))
    x = snap.frames.end_effector
    target = x + np.array([0.05, 0.0, 0.0])
    params = ReachingParams.uniform(7, target=target, start=x)
    task = TaskState(x=x.copy(), xd=np.zeros(3), xdd=np.zeros(3))
    torque, _ = reaching_command(params, JointState(hold_pose, np.zeros(7)), task, snap.J, np.zeros(3), np.zeros(7), DT)
    # the commanded torque does positive work toward the target
    assert (snap.task.jm_pinv.T @ torque) @ (target - x) > 0


def test_null_torque_alone_makes_no_task_force(arm_model, rng):
    for q in random_configurations(rng, 10):
        snap = arm_snapshot(arm_model, q, np.zeros(7))
        out = compose_torque(snap.J, np.zeros(3), np.zeros(3), snap.P, rng.normal(size=7) * 5.0)
        np.testing.assert_allclose(snap.task.jm_pinv.T @ out.joint_torque, 0.0, atol=1e-9)


def test_muscle_filter_reaches_one_time_constant_level():
    taus = (0.05, 0.02, 0.01)
    muscle = MuscleFilter(taus, DT)
    w = np.array([2.0, -1.0, 0.5])
    states = np.zeros(3)
    reached = np.zeros(3)
    for k in range(1, 51):
        states = muscle.step(states, w)
        for i, tau in enumerate(taus):
            if k == round(tau / DT):
                reached[i] = states[i]
    np.testing.assert_allclose(reached, (1.0 - math.exp(-1.0)) * w, rtol=1e-12)


def test_per_joint_reaching_parameters():
    params = ReachingParams.per_joint(
        7, target=(0.0, 0.0, 0.1), start=(0.0, 0.0, 0.0),
        c_base=(12, 8, 4, 4, 0.1, 0.2, 0.05), f_base=1.0, k_spring=800.0, tau_muscle=0.01,
    )
    assert params.c_base[4] == 0.1
    assert params.f_base == (1.0,) * 7
    assert params.tau_muscle == (0.01,) * 7
    assert params.x0_error_norm == pytest.approx(0.1)
    with pytest.raises(DimensionError):
        ReachingParams.per_joint(7, (0, 0, 0.1), (0, 0, 0), c_base=(1.0, 2.0), f_base=1.0, k_spring=1.0, tau_muscle=0.05)


def test_reaching_command_adds_null_torque(arm_model, hold_pose, rng):
    snap = arm_snapshot(arm_model, hold_pose, np.zeros(7))
    x = snap.frames.end_effector
    params = ReachingParams.uniform(7, target=x + np.array([0.0, 0.05, 0.0]), start=x)
    task = TaskState(x=x.copy(), xd=np.zeros(3), xdd=np.zeros(3))
    state = JointState(hold_pose, rng.normal(size=7) * 0.1)
    f_hat, tau0 = rng.normal(size=3), rng.normal(size=7)
    bare, states = reaching_command(params, state, task, snap.J, f_hat, np.zeros(7), DT)
    full, same_states = reaching_command(params, state, task, snap.J, f_hat, np.zeros(7), DT, P=snap.P, tau0=tau0)
    np.testing.assert_allclose(full - bare, snap.P @ tau0, atol=1e-12)
    np.testing.assert_array_equal(states, same_states)
    # a shared filter gives the same step as a fresh one
    shared, _ = reaching_command(
        params, state, task, snap.J, f_hat, np.zeros(7), P=snap.P, tau0=tau0, muscle=MuscleFilter(params.tau_muscle, DT),
    )
    np.testing.assert_allclose(shared, full, atol=1e-12)
    with pytest.raises(DimensionError):
        reaching_command(params, state, task, snap.J, f_hat, np.zeros(7), DT, P=snap.P)
    with pytest.raises(DimensionError):
        reaching_command(params, state, task, snap.J, f_hat, np.zeros(7), DT, P=np.eye(6), tau0=tau0)
