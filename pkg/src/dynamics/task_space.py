"""
Task-space (operational-space) projection of the joint dynamics.

    J_M+  = M^-1 J^T (J M^-1 J^T)^-1        inertia-weighted pseudo-inverse
    Lambda = J_M+^T M J_M+
    Gamma  = J_M+^T (C - M J_M+ Jdot) J_M+
    eta    = J_M+^T g
    P      = I - J^T J_M+^T                  null-space torque projector
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from src.core.config import DAMPING, RANK_TOL, SINGULAR_CONDITION
from src.core.errors import DimensionError, SingularTaskError
from src.dynamics.newton_euler import (
    coriolis_matrix_from_frames,
    mass_matrix_from_frames,
    modified_rnea,
    world_inertias,
)
from src.robot.kinematics import (
    ChainFrames,
    forward_kinematics,
    jacobian_dot_from_frames,
    jacobian_from_frames,
)
from src.robot.model import TASK_DIM, RobotModel, as_vector

logger = logging.getLogger(__name__)


@dataclass
class TaskSpaceDynamics:
    lam: np.ndarray       # 3x3, kg
    gamma: np.ndarray     # 3x3, kg/s
    eta: np.ndarray       # 3, N
    jm_pinv: np.ndarray   # dof x 3
    damped: bool = False  # damped fallback used for (J M^-1 J^T)^-1


@dataclass
class ArmSnapshot:
    """Everything the simulator needs about the arm at one state, computed once per step."""

    frames: ChainFrames
    J: np.ndarray
    Jd: np.ndarray
    M: np.ndarray
    C: np.ndarray
    g: np.ndarray
    task: Optional[TaskSpaceDynamics]
    P: Optional[np.ndarray]


def _check_task_shapes(J: np.ndarray, M: np.ndarray) -> None:
    if J.ndim != 2 or J.shape[0] != TASK_DIM:
        raise DimensionError(f"J must be 3 x dof, got {J.shape}")
    if M.shape != (J.shape[1], J.shape[1]):
        raise DimensionError(f"M must be {J.shape[1]} x {J.shape[1]}, got {M.shape}")
    if J.shape[1] < TASK_DIM:
        raise SingularTaskError(f"a {J.shape[1]}-joint chain cannot span the 3D task space")
    if not (np.all(np.isfinite(J)) and np.all(np.isfinite(M))):
        raise DimensionError("J and M must be finite")


def weighted_pinv_flagged(
    J: np.ndarray,
    M: np.ndarray,
    condition_limit: float = SINGULAR_CONDITION,
    damping: float = DAMPING,
) -> Tuple[np.ndarray, bool]:
    """
    Inertia-weighted pseudo-inverse with a damped fallback.

    Returns:
        (J_M+, damped) where damped is True when cond(J M^-1 J^T) exceeded the limit
        and Tikhonov damping was added to the inverted block
    """
    J = np.asarray(J, dtype=float)
    M = np.asarray(M, dtype=float)
    _check_task_shapes(J, M)

    Minv_Jt = linalg.solve(M, J.T, assume_a="pos")
    A = J @ Minv_Jt
    damped = bool(np.linalg.cond(A) > condition_limit)
    if damped:
        A = A + damping * np.eye(TASK_DIM)
    return Minv_Jt @ linalg.inv(A), damped


def weighted_pinv(J: np.ndarray, M: np.ndarray) -> np.ndarray:
    return weighted_pinv_flagged(J, M)[0]


def nullspace_projector(J: np.ndarray, M: np.ndarray, jm_pinv: Optional[np.ndarray] = None) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if jm_pinv is None:
        jm_pinv = weighted_pinv(J, M)
    return np.eye(J.shape[1]) - J.T @ jm_pinv.T


def projector_pinv_svd(P: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse by SVD; singular values below rank_tol * sigma_max are dropped."""
    P = np.asarray(P, dtype=float)
    U, s, Vt = np.linalg.svd(P)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(P.T.shape)
    keep = s > rank_tol * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def numerical_rank(P: np.ndarray, tol: float = 1e-8) -> int:
    return int(np.sum(np.linalg.svd(P, compute_uv=False) > tol))


def project_task_dynamics(J: np.ndarray, Jd: np.ndarray, M: np.ndarray, C: np.ndarray, g: np.ndarray) -> TaskSpaceDynamics:
    jm_pinv, damped = weighted_pinv_flagged(J, M)
    lam = jm_pinv.T @ M @ jm_pinv
    gamma = jm_pinv.T @ (C - M @ jm_pinv @ Jd) @ jm_pinv
    eta = jm_pinv.T @ g
    return TaskSpaceDynamics(lam=0.5 * (lam + lam.T), gamma=gamma, eta=eta, jm_pinv=jm_pinv, damped=damped)


def arm_snapshot(model: RobotModel, q, qd, with_task: bool = True) -> ArmSnapshot:
    """Kinematics and dynamics at one state; with_task=False skips the task-space projection."""
    qd = as_vector(qd, model.dof, "qd")
    if with_task and model.dof < TASK_DIM:
        raise SingularTaskError(f"model {model.name!r} has {model.dof} joints, task space needs {TASK_DIM}")
    frames = forward_kinematics(model, q)
    inertias = world_inertias(model, frames)
    zeros = np.zeros(model.dof)
    J = jacobian_from_frames(frames)
    Jd = jacobian_dot_from_frames(frames, qd)
    M = mass_matrix_from_frames(model, frames, inertias)
    C = coriolis_matrix_from_frames(model, frames, qd, inertias)
    g = modified_rnea(model, frames, zeros, zeros, zeros, True, inertias)
    if not with_task:
        return ArmSnapshot(frames=frames, J=J, Jd=Jd, M=M, C=C, g=g, task=None, P=None)
    task = project_task_dynamics(J, Jd, M, C, g)
    if task.damped:
        logger.debug("[TaskSpace] damped pseudo-inverse at q=%s", np.array2string(np.asarray(q), precision=3))
    P = nullspace_projector(J, M, task.jm_pinv)
    return ArmSnapshot(frames=frames, J=J, Jd=Jd, M=M, C=C, g=g, task=task, P=P)


def task_space_dynamics(model: RobotModel, q, qd) -> TaskSpaceDynamics:
    return arm_snapshot(model, q, qd).task
