"""
Joint-space rigid-body dynamics by a modified recursive Newton-Euler algorithm.

The recursion carries two joint-rate vectors: the actual rate qd, which sets every
velocity-dependent coefficient, and a reference rate qd_ref, which is the vector the
Coriolis matrix multiplies. It evaluates

    tau = M(q) qdd + C(q, qd) qd_ref + g(q)

with a factorization C that satisfies the skew-symmetry of (dM/dt - 2C). With
qd_ref = qd it is the ordinary inverse dynamics; unit qd_ref / qdd vectors extract the
columns of C and M.

The Lagrangian and Christoffel routes at the bottom are independent oracles used by the
tests.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.robot.kinematics import ChainFrames, cross, forward_kinematics, link_jacobians
from src.robot.model import RobotModel, as_vector


@dataclass
class JointSpaceDynamics:
    M: np.ndarray
    C: np.ndarray
    g: np.ndarray


def world_inertias(model: RobotModel, frames: ChainFrames) -> np.ndarray:
    """COM inertia tensors of every link rotated into the world frame."""
    return np.einsum("nij,nj,nkj->nik", frames.rotations, model.inertias, frames.rotations)


def modified_rnea(
    model: RobotModel,
    frames: ChainFrames,
    qd: np.ndarray,
    qd_ref: np.ndarray,
    qdd: np.ndarray,
    gravity_on: bool,
    inertias: Optional[np.ndarray] = None,
) -> np.ndarray:
    n = model.dof
    if inertias is None:
        inertias = world_inertias(model, frames)

    forces = np.empty((n, 3))
    moments = np.empty((n, 3))
    w = np.zeros(3)
    w_ref = np.zeros(3)
    alpha = np.zeros(3)
    # acceleration of the current joint origin; gravity enters as a base acceleration
    acc = -model.gravity_vector if gravity_on else np.zeros(3)

    # 1. Outward pass: link velocities and accelerations
    for i in range(n):
        a = frames.axes[i]
        w_parent = w
        w = w_parent + a * qd[i]
        w_ref = w_ref + a * qd_ref[i]
        alpha = alpha + a * qdd[i] + cross(w_parent, a) * qd_ref[i]

        d = frames.coms[i] - frames.origins[i]
        acc_com = acc + cross(alpha, d) + cross(w_ref, cross(w, d))
        forces[i] = model.masses[i] * acc_com
        moments[i] = inertias[i] @ alpha + cross(w, inertias[i] @ w_ref)

        r = frames.link_vector(i)
        acc = acc + cross(alpha, r) + cross(w_ref, cross(w, r))

    # 2. Inward pass: wrench balance about each joint origin
    tau = np.empty(n)
    f_next = np.zeros(3)
    n_next = np.zeros(3)
    for i in range(n - 1, -1, -1):
        d = frames.coms[i] - frames.origins[i]
        f_i = forces[i] + f_next
        n_i = moments[i] + cross(d, forces[i]) + n_next + cross(frames.link_vector(i), f_next)
        tau[i] = frames.axes[i] @ n_i
        f_next, n_next = f_i, n_i
    return tau


def inverse_dynamics(model: RobotModel, q, qd, qdd, gravity_on: bool = True) -> np.ndarray:
    """tau = M q'' + C q' + g, friction and external torques excluded."""
    qd = as_vector(qd, model.dof, "qd")
    qdd = as_vector(qdd, model.dof, "qdd")
    frames = forward_kinematics(model, q)
    return modified_rnea(model, frames, qd, qd, qdd, gravity_on)


def mass_matrix_from_frames(model: RobotModel, frames: ChainFrames, inertias: Optional[np.ndarray] = None) -> np.ndarray:
    n = model.dof
    if inertias is None:
        inertias = world_inertias(model, frames)
    zeros = np.zeros(n)
    M = np.empty((n, n))
    for j in range(n):
        M[:, j] = modified_rnea(model, frames, zeros, zeros, np.eye(n)[j], False, inertias)
    return 0.5 * (M + M.T)


def coriolis_matrix_from_frames(
    model: RobotModel, frames: ChainFrames, qd: np.ndarray, inertias: Optional[np.ndarray] = None
) -> np.ndarray:
    n = model.dof
    if inertias is None:
        inertias = world_inertias(model, frames)
    zeros = np.zeros(n)
    C = np.empty((n, n))
    for j in range(n):
        C[:, j] = modified_rnea(model, frames, qd, np.eye(n)[j], zeros, False, inertias)
    return C


def mass_matrix(model: RobotModel, q) -> np.ndarray:
    return mass_matrix_from_frames(model, forward_kinematics(model, q))


def coriolis_matrix(model: RobotModel, q, qd) -> np.ndarray:
    qd = as_vector(qd, model.dof, "qd")
    return coriolis_matrix_from_frames(model, forward_kinematics(model, q), qd)


def gravity_vector(model: RobotModel, q) -> np.ndarray:
    zeros = np.zeros(model.dof)
    return modified_rnea(model, forward_kinematics(model, q), zeros, zeros, zeros, True)


def joint_space_dynamics(model: RobotModel, q, qd) -> JointSpaceDynamics:
    qd = as_vector(qd, model.dof, "qd")
    frames = forward_kinematics(model, q)
    inertias = world_inertias(model, frames)
    zeros = np.zeros(model.dof)
    return JointSpaceDynamics(
        M=mass_matrix_from_frames(model, frames, inertias),
        C=coriolis_matrix_from_frames(model, frames, qd, inertias),
        g=modified_rnea(model, frames, zeros, zeros, zeros, True, inertias),
    )


# =========================
# Energies
# =========================

def potential_energy(model: RobotModel, q) -> float:
    coms = forward_kinematics(model, q).coms
    return float(-np.sum(model.masses * (coms @ model.gravity_vector)))


def kinetic_energy(model: RobotModel, q, qd) -> float:
    qd = as_vector(qd, model.dof, "qd")
    return float(0.5 * qd @ mass_matrix(model, q) @ qd)


# =========================
# Independent oracles
# =========================

def mass_matrix_lagrangian(model: RobotModel, q) -> np.ndarray:
    """M = sum_i Jv_i^T m_i Jv_i + Jw_i^T I_i Jw_i over the link COM Jacobians."""
    frames = forward_kinematics(model, q)
    inertias = world_inertias(model, frames)
    Jv, Jw = link_jacobians(model, q)
    M = np.zeros((model.dof, model.dof))
    for i in range(model.dof):
        M += model.masses[i] * Jv[i].T @ Jv[i] + Jw[i].T @ inertias[i] @ Jw[i]
    return M


def christoffel_coriolis_matrix(model: RobotModel, q, qd, h: float = 1e-6) -> np.ndarray:
    """C_ij = sum_k c_ijk qd_k with Christoffel symbols from central differences of M."""
    q = as_vector(q, model.dof, "q")
    qd = as_vector(qd, model.dof, "qd")
    n = model.dof
    dM = np.empty((n, n, n))  # dM[k] = dM/dq_k
    for k in range(n):
        step = np.zeros(n)
        step[k] = h
        dM[k] = (mass_matrix(model, q + step) - mass_matrix(model, q - step)) / (2 * h)
    # c_ijk = 1/2 (dM_ij/dq_k + dM_ik/dq_j - dM_jk/dq_i)
    c = 0.5 * (
        np.einsum("kij->ijk", dM)
        + np.einsum("jik->ijk", dM)
        - np.einsum("ijk->ijk", dM)
    )
    return c @ qd
