"""
Forward kinematics and Jacobians of a serial revolute chain.

Convention: joint i rotates about model.axes[i], expressed in the frame of link i-1
(the mount rotation for the base). After the rotation the chain translates by
length_i * direction_i in the rotated frame. All returned vectors are in the world frame.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from src.robot.model import RobotModel, as_vector


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.cross is slow on single 3-vectors
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


@dataclass
class ChainFrames:
    rotations: np.ndarray  # (dof, 3, 3) world orientation of each link frame
    origins: np.ndarray    # (dof + 1, 3) joint origins, last row is the end-effector
    axes: np.ndarray       # (dof, 3) world joint axes
    coms: np.ndarray       # (dof, 3) world link centers of mass

    @property
    def end_effector(self) -> np.ndarray:
        return self.origins[-1]

    def link_vector(self, i: int) -> np.ndarray:
        return self.origins[i + 1] - self.origins[i]


def forward_kinematics(model: RobotModel, q) -> ChainFrames:
    q = as_vector(q, model.dof, "q")
    n = model.dof
    rotations = np.empty((n, 3, 3))
    origins = np.zeros((n + 1, 3))
    axes = np.empty((n, 3))
    coms = np.empty((n, 3))

    R = model.mount
    for i in range(n):
        axes[i] = R @ model.axes[i]
        R = R @ Rotation.from_rotvec(model.axes[i] * q[i]).as_matrix()
        rotations[i] = R
        r = R @ model.offsets[i]
        origins[i + 1] = origins[i] + r
        coms[i] = origins[i] + model.com_offsets[i] * r
    return ChainFrames(rotations=rotations, origins=origins, axes=axes, coms=coms)


def end_effector_position(model: RobotModel, q) -> np.ndarray:
    return forward_kinematics(model, q).end_effector.copy()


def com_positions(model: RobotModel, q) -> List[np.ndarray]:
    frames = forward_kinematics(model, q)
    return [c.copy() for c in frames.coms]


def point_jacobian(frames: ChainFrames, link_index: int, point: np.ndarray) -> np.ndarray:
    """Translational Jacobian of a world point rigidly attached to link `link_index`."""
    n = frames.axes.shape[0]
    J = np.zeros((3, n))
    for j in range(link_index + 1):
        J[:, j] = cross(frames.axes[j], point - frames.origins[j])
    return J


def jacobian_from_frames(frames: ChainFrames) -> np.ndarray:
    n = frames.axes.shape[0]
    return point_jacobian(frames, n - 1, frames.end_effector)


def jacobian(model: RobotModel, q) -> np.ndarray:
    return jacobian_from_frames(forward_kinematics(model, q))


def chain_velocities(frames: ChainFrames, qd: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Angular velocity of each link and linear velocity of each joint origin (incl. end-effector)."""
    n = frames.axes.shape[0]
    omegas = np.empty((n, 3))
    v_origins = np.zeros((n + 1, 3))
    w = np.zeros(3)
    for i in range(n):
        w = w + frames.axes[i] * qd[i]
        omegas[i] = w
        v_origins[i + 1] = v_origins[i] + cross(w, frames.link_vector(i))
    return omegas, v_origins


def jacobian_dot_from_frames(frames: ChainFrames, qd: np.ndarray) -> np.ndarray:
    n = frames.axes.shape[0]
    omegas, v_origins = chain_velocities(frames, qd)
    ee = frames.end_effector
    v_ee = v_origins[-1]
    Jd = np.zeros((3, n))
    for j in range(n):
        # the axis of joint j is carried by link j-1
        w_parent = omegas[j - 1] if j > 0 else np.zeros(3)
        axis_rate = cross(w_parent, frames.axes[j])
        Jd[:, j] = cross(axis_rate, ee - frames.origins[j]) + cross(frames.axes[j], v_ee - v_origins[j])
    return Jd


def jacobian_dot(model: RobotModel, q, qd) -> np.ndarray:
    qd = as_vector(qd, model.dof, "qd")
    return jacobian_dot_from_frames(forward_kinematics(model, q), qd)


def link_jacobians(model: RobotModel, q) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """
    COM Jacobians of every link.

    Returns:
        (Jv, Jw): lists of 3 x dof translational (at the COM) and rotational Jacobians
    """
    frames = forward_kinematics(model, q)
    n = model.dof
    Jv, Jw = [], []
    for i in range(n):
        Jv.append(point_jacobian(frames, i, frames.coms[i]))
        w = np.zeros((3, n))
        w[:, : i + 1] = frames.axes[: i + 1].T
        Jw.append(w)
    return Jv, Jw
