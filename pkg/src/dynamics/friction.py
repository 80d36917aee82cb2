"""Joint friction: viscous plus tanh-smoothed Coulomb."""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from src.core.errors import ModelError
from src.robot.model import as_vector


@dataclass(frozen=True)
class FrictionParams:
    coulomb: tuple
    viscous: tuple
    smoothing_velocity: float = 0.01
    # linearize friction at the end of each step instead of evaluating it at the start
    implicit: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coulomb", tuple(float(c) for c in self.coulomb))
        object.__setattr__(self, "viscous", tuple(float(v) for v in self.viscous))
        if len(self.coulomb) != len(self.viscous):
            raise ModelError("coulomb and viscous coefficient counts differ")
        if any(c < 0 for c in self.coulomb) or any(v < 0 for v in self.viscous):
            raise ModelError("friction coefficients must be nonnegative")
        if self.smoothing_velocity <= 0:
            raise ModelError("smoothing_velocity must be positive")

    @property
    def dof(self) -> int:
        return len(self.coulomb)

    @classmethod
    def uniform(
        cls,
        dof: int,
        coulomb: float = 1.0,
        viscous: float = 1.0,
        smoothing_velocity: float = 0.01,
        implicit: bool = False,
    ) -> "FrictionParams":
        return cls((coulomb,) * dof, (viscous,) * dof, smoothing_velocity, implicit)

    @classmethod
    def off(cls, dof: int) -> "FrictionParams":
        return cls.uniform(dof, 0.0, 0.0)

    @classmethod
    def from_config(cls, dof: int, block: dict) -> "FrictionParams":
        def per_joint(value: Union[float, Sequence[float]]) -> tuple:
            if isinstance(value, (int, float)):
                return (float(value),) * dof
            return tuple(float(v) for v in value)

        return cls(
            per_joint(block.get("coulomb_nm", 1.0)),
            per_joint(block.get("viscous_nms_per_rad", 1.0)),
            float(block.get("smoothing_velocity_radps", 0.01)),
            bool(block.get("implicit", False)),
        )


def friction_torque(params: FrictionParams, qd) -> np.ndarray:
    """Friction torque with the sign of the joint velocity; the plant subtracts it."""
    qd = as_vector(qd, params.dof, "qd")
    return np.asarray(params.viscous) * qd + np.asarray(params.coulomb) * np.tanh(qd / params.smoothing_velocity)


def friction_damping(params: FrictionParams, qd) -> np.ndarray:
    """Diagonal of d(friction)/d(qd)."""
    qd = as_vector(qd, params.dof, "qd")
    sech2 = 1.0 - np.tanh(qd / params.smoothing_velocity) ** 2
    return np.asarray(params.viscous) + np.asarray(params.coulomb) * sech2 / params.smoothing_velocity


def step_friction(params: FrictionParams, qd, qdd, dt: float) -> np.ndarray:
    """Friction torque the plant applies over one step of length dt that starts at qd."""
    tau = friction_torque(params, qd)
    if params.implicit:
        tau = tau + friction_damping(params, qd) * np.asarray(qdd, dtype=float) * dt
    return tau
