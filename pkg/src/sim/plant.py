"""Plant side of the simulation: external perturbation torques and forward dynamics."""

from typing import Iterable, Optional

import numpy as np
from scipy import linalg

from src.core.errors import DimensionError, ScenarioError
from src.dynamics.friction import FrictionParams, friction_damping, friction_torque
from src.dynamics.newton_euler import mass_matrix_from_frames, modified_rnea, world_inertias
from src.robot.kinematics import ChainFrames, forward_kinematics, point_jacobian
from src.robot.model import JointState, RobotModel, as_vector
from src.sim.scenario import PerturbationEvent


def application_point_world(frames: ChainFrames, event: PerturbationEvent) -> np.ndarray:
    i = event.link_index
    return frames.origins[i] + frames.rotations[i] @ np.asarray(event.application_point)


def perturbation_torque_from_frames(
    frames: ChainFrames, events: Iterable[PerturbationEvent], t: float
) -> np.ndarray:
    n = frames.axes.shape[0]
    tau = np.zeros(n)
    for event in events:
        if event.link_index >= n:
            raise ScenarioError(f"perturbation link_index {event.link_index} out of range for {n} links")
        if event.active(t):
            J_point = point_jacobian(frames, event.link_index, application_point_world(frames, event))
            tau += J_point.T @ np.asarray(event.force)
    return tau


def perturbation_torque(model: RobotModel, q, events: Iterable[PerturbationEvent], t: float) -> np.ndarray:
    """Generalized force J_point^T F of every pulse active at t (zero if none)."""
    return perturbation_torque_from_frames(forward_kinematics(model, q), events, t)


def forward_dynamics(
    model: RobotModel,
    friction: Optional[FrictionParams],
    state: JointState,
    tau_applied,
    tau_external,
    frames: Optional[ChainFrames] = None,
    M: Optional[np.ndarray] = None,
    bias: Optional[np.ndarray] = None,
    dt: Optional[float] = None,
) -> np.ndarray:
    """
    qdd = M^-1 (tau_applied + tau_external - C qd - g - f). `bias` may carry a precomputed C qd + g.

    With implicit friction and a step dt the friction is linearized at qd + qdd dt, which solves
    (M + dt D) qdd = rhs with D the friction damping at qd.
    """
    n = model.dof
    q = as_vector(state.q, n, "q")
    qd = as_vector(state.qd, n, "qd")
    tau_applied = as_vector(tau_applied, n, "tau_applied")
    tau_external = as_vector(tau_external, n, "tau_external")
    if frames is None:
        frames = forward_kinematics(model, q)
    if M is None or bias is None:
        inertias = world_inertias(model, frames)
        if M is None:
            M = mass_matrix_from_frames(model, frames, inertias)
        if bias is None:
            bias = modified_rnea(model, frames, qd, qd, np.zeros(n), True, inertias)
    rhs = tau_applied + tau_external - bias
    if friction is not None:
        rhs = rhs - friction_torque(friction, qd)
        if friction.implicit and dt is not None:
            if not dt > 0:
                raise ValueError(f"dt must be positive, got {dt}")
            M = M + dt * np.diag(friction_damping(friction, qd))
    qdd = linalg.solve(M, rhs, assume_a="pos")
    if not np.all(np.isfinite(qdd)):
        raise DimensionError("forward dynamics produced non-finite accelerations")
    return qdd
