"""
Human-like reaching controller.

    u = -W_f [ K_V qd + k F_mus J^T dx ] - J^T f_hat

K_V = diag(C_i sin(phi)), F_mus = diag(f_i cos(phi)) with the phase
phi = pi (|dx0| - |dx|) / (2 |dx0|), clamped to [0, pi/2]. W_f is a first-order
low-pass per joint with time constant tau_i (muscle dynamics). The observer
compensation is applied after the filter.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.core.errors import DegenerateReachError, DimensionError
from src.robot.model import TASK_DIM, JointState, TaskState, as_vector


@dataclass(frozen=True)
class ReachingParams:
    c_base: tuple
    f_base: tuple
    k_spring: float
    tau_muscle: tuple
    target: tuple
    x0_error_norm: float

    def __post_init__(self):
        for name in ("c_base", "f_base", "tau_muscle", "target"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        n = len(self.c_base)
        if len(self.f_base) != n or len(self.tau_muscle) != n:
            raise DimensionError("c_base, f_base and tau_muscle need one entry per joint")
        if len(self.target) != TASK_DIM:
            raise DimensionError("target must be a 3-vector")
        if min(self.c_base + self.f_base) < 0 or self.k_spring < 0:
            raise ValueError("reaching coefficients must be nonnegative")
        if min(self.tau_muscle) <= 0:
            raise ValueError("muscle time constants must be positive")
        if not self.x0_error_norm > 0:
            raise DegenerateReachError("initial distance to target must be positive")

    @property
    def dof(self) -> int:
        return len(self.c_base)

    @classmethod
    def uniform(
        cls,
        dof: int,
        target,
        start,
        c_base: float = 2.0,
        f_base: float = 1.0,
        k_spring: float = 50.0,
        tau_muscle: float = 0.05,
    ) -> "ReachingParams":
        return cls.per_joint(dof, target, start, c_base, f_base, k_spring, tau_muscle)

    @classmethod
    def per_joint(cls, dof: int, target, start, c_base, f_base, k_spring: float, tau_muscle) -> "ReachingParams":
        """Like `uniform`, but c_base, f_base and tau_muscle may also be one value per joint."""

        def spread(value, name):
            values = [float(value)] * dof if np.isscalar(value) else [float(v) for v in value]
            if len(values) != dof:
                raise DimensionError(f"{name} needs {dof} entries, got {len(values)}")
            return tuple(values)

        x0 = float(np.linalg.norm(np.asarray(start, dtype=float) - np.asarray(target, dtype=float)))
        return cls(
            spread(c_base, "c_base"), spread(f_base, "f_base"), float(k_spring),
            spread(tau_muscle, "tau_muscle"), tuple(target), x0,
        )


def phase_argument(x0_norm: float, x_norm: float) -> float:
    if not x0_norm > 0:
        raise DegenerateReachError(f"x0_norm must be positive, got {x0_norm}")
    clamped = min(max(x_norm, 0.0), x0_norm)
    return min(max(math.pi * (x0_norm - clamped) / (2.0 * x0_norm), 0.0), math.pi / 2.0)


class MuscleFilter:
    """First-order low-pass 1/(tau s + 1) per joint, exact discretization."""

    def __init__(self, tau_muscle, dt: float):
        self.decay = np.exp(-dt / np.asarray(tau_muscle, dtype=float))

    def step(self, states: np.ndarray, w: np.ndarray) -> np.ndarray:
        return self.decay * states + (1.0 - self.decay) * w


def reaching_gains(params: ReachingParams, x_error_norm: float) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonals of K_V and F_mus at the given distance to target."""
    phi = phase_argument(params.x0_error_norm, x_error_norm)
    return np.asarray(params.c_base) * math.sin(phi), np.asarray(params.f_base) * math.cos(phi)


def reaching_bracket(params: ReachingParams, state: JointState, task: TaskState, J: np.ndarray) -> np.ndarray:
    """Unfiltered K_V qd + k F_mus J^T dx."""
    dx = task.x - np.asarray(params.target)
    kv, f_mus = reaching_gains(params, float(np.linalg.norm(dx)))
    return kv * state.qd + params.k_spring * f_mus * (J.T @ dx)


def reaching_command(
    params: ReachingParams,
    state: JointState,
    task: TaskState,
    J: np.ndarray,
    f_hat_d,
    filter_states,
    dt: float = 1e-3,
    P: Optional[np.ndarray] = None,
    tau0=None,
    muscle: Optional[MuscleFilter] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    u = -W_f[...] - J^T f_hat + P tau0

    Args:
        P, tau0: null-space projector and the torque it filters; both or neither
        muscle: filter to reuse across steps, built from `params` and `dt` when omitted

    Returns:
        (joint torque, updated filter states); the filter states are the W_f outputs
    """
    n = params.dof
    J = np.asarray(J, dtype=float)
    if J.shape != (TASK_DIM, n):
        raise DimensionError(f"J must be 3 x {n}, got {J.shape}")
    as_vector(state.qd, n, "qd")
    f_hat_d = as_vector(f_hat_d, TASK_DIM, "f_hat_d")
    filter_states = as_vector(filter_states, n, "filter_states")
    if (P is None) != (tau0 is None):
        raise DimensionError("P and tau0 must be given together")

    muscle = muscle or MuscleFilter(params.tau_muscle, dt)
    filtered = muscle.step(filter_states, reaching_bracket(params, state, task, J))
    torque = -filtered - J.T @ f_hat_d
    if P is not None:
        if np.shape(P) != (n, n):
            raise DimensionError(f"P must be {n} x {n}, got {np.shape(P)}")
        torque = torque + np.asarray(P) @ as_vector(tau0, n, "tau0")
    return torque, filtered
