"""
Task-space PD regulation with disturbance compensation and a null-space torque.

    f_cmd = K (x_ref - x) - B xd
    tau   = J^T (f_cmd - f_hat) + P tau0
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.core.errors import DimensionError
from src.dynamics.task_space import projector_pinv_svd
from src.robot.model import TASK_DIM, TaskState, as_vector


@dataclass(frozen=True)
class PDGains:
    k: tuple = (4.0, 4.0, 4.0)
    b: tuple = (0.001, 0.001, 0.001)

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(float(v) for v in self.k))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if len(self.k) != TASK_DIM or len(self.b) != TASK_DIM:
            raise ValueError("PD gains need one value per task axis")
        if any(v <= 0 for v in self.k) or any(v < 0 for v in self.b):
            raise ValueError(f"PD gains must satisfy k > 0 and b >= 0, got k={self.k}, b={self.b}")

    @classmethod
    def uniform(cls, k: float, b: float) -> "PDGains":
        return cls((k,) * TASK_DIM, (b,) * TASK_DIM)


@dataclass
class ControlOutput:
    joint_torque: np.ndarray
    task_force_cmd: np.ndarray
    null_torque: np.ndarray


def pd_task_command(gains: PDGains, x_ref, task: TaskState) -> np.ndarray:
    x_ref = as_vector(x_ref, TASK_DIM, "x_ref")
    return np.asarray(gains.k) * (x_ref - task.x) - np.asarray(gains.b) * task.xd


def compose_torque(J: np.ndarray, f_cmd, f_hat_d, P: np.ndarray, tau0) -> ControlOutput:
    J = np.asarray(J, dtype=float)
    n = J.shape[1]
    if J.shape[0] != TASK_DIM or np.shape(P) != (n, n):
        raise DimensionError(f"J must be 3 x {n} and P {n} x {n}, got {J.shape} and {np.shape(P)}")
    f_cmd = as_vector(f_cmd, TASK_DIM, "f_cmd")
    f_hat_d = as_vector(f_hat_d, TASK_DIM, "f_hat_d")
    null_torque = np.asarray(P) @ as_vector(tau0, n, "tau0")
    return ControlOutput(
        joint_torque=J.T @ (f_cmd - f_hat_d) + null_torque,
        task_force_cmd=f_cmd,
        null_torque=null_torque,
    )


def recover_null_command(P: np.ndarray, tau, J: np.ndarray, x_model_force) -> np.ndarray:
    """
    Least-squares tau0 behind the null-space part of a joint torque.

    Args:
        P: null-space projector I - J^T J_M+^T
        tau: joint torque that was applied
        J: task Jacobian
        x_model_force: task force accounted for by the task term (e.g. M' xdd + B' xd)
    """
    J = np.asarray(J, dtype=float)
    tau = as_vector(tau, J.shape[1], "tau")
    residual = tau - J.T @ as_vector(x_model_force, TASK_DIM, "x_model_force")
    return projector_pinv_svd(P) @ residual


def gains_from_config(k: Sequence[float], b: Sequence[float]) -> PDGains:
    k = [k] * TASK_DIM if np.isscalar(k) else list(k)
    b = [b] * TASK_DIM if np.isscalar(b) else list(b)
    return PDGains(tuple(k), tuple(b))
