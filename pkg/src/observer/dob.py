"""
Task-space disturbance observer.

The estimate f_hat is the task-space force acting on the arm that the nominal model
does not explain. Given the force actually applied in the previous step,
u = f_cmd - f_hat_prev, and the motion it produced, the nominal model predicts
r_N = M' xdd + B' xd (mass-damper) or Lambda xdd + Gamma xd (nonlinear), and

    f_hat <- Q_d[ r_N - u ]          per axis, Q_d the discrete Q-filter

Controllers subtract f_hat from their command before mapping it through J^T.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from src.core.errors import DimensionError, ObserverStateError
from src.dynamics.friction import FrictionParams, friction_torque
from src.dynamics.newton_euler import inverse_dynamics
from src.dynamics.task_space import TaskSpaceDynamics
from src.observer.qfilter import DiscreteQFilter, QFilterSpec
from src.robot.model import TASK_DIM, RobotModel, TaskState, as_vector

logger = logging.getLogger(__name__)

VARIANTS = ("mass_damper", "nonlinear", "none")


# 1. Nominal models
@dataclass(frozen=True)
class MassDamperNominal:
    ms_prime: tuple = (2.5, 2.2, 2.2)
    bs_prime: tuple = (1.0, 1e-5, 1e-5)
    variant: str = field(default="mass_damper", init=False)

    def __post_init__(self):
        object.__setattr__(self, "ms_prime", tuple(float(m) for m in self.ms_prime))
        object.__setattr__(self, "bs_prime", tuple(float(b) for b in self.bs_prime))
        if len(self.ms_prime) != TASK_DIM or len(self.bs_prime) != TASK_DIM:
            raise ValueError("mass-damper nominal needs one mass and one damping per task axis")
        if any(m <= 0 for m in self.ms_prime) or any(b < 0 for b in self.bs_prime):
            raise ValueError("nominal masses must be positive and dampings nonnegative")

    def force(self, task: TaskState, dyn: Optional[TaskSpaceDynamics]) -> np.ndarray:
        return np.asarray(self.ms_prime) * task.xdd + np.asarray(self.bs_prime) * task.xd


@dataclass(frozen=True)
class NonlinearNominal:
    """Lambda(q) and Gamma(q, qd) frozen at the state of the measurement."""

    variant: str = field(default="nonlinear", init=False)

    def force(self, task: TaskState, dyn: Optional[TaskSpaceDynamics]) -> np.ndarray:
        if dyn is None:
            raise ValueError("nonlinear nominal model needs the task-space dynamics of the step")
        return dyn.lam @ task.xdd + dyn.gamma @ task.xd


NominalModel = Union[MassDamperNominal, NonlinearNominal]


# 2. Observer state and the update rule
@dataclass
class ObserverState:
    filter_states: np.ndarray = field(default_factory=lambda: np.zeros((TASK_DIM, 3)))
    f_hat_d: np.ndarray = field(default_factory=lambda: np.zeros(TASK_DIM))
    run_id: Optional[str] = None
    steps: int = 0

    def reset(self) -> None:
        self.filter_states = np.zeros_like(self.filter_states)
        self.f_hat_d = np.zeros(TASK_DIM)
        self.run_id = None
        self.steps = 0


def observer_step(
    state: ObserverState,
    qfilter: DiscreteQFilter,
    nominal: NominalModel,
    f_cmd,
    task: TaskState,
    dyn: Optional[TaskSpaceDynamics],
) -> ObserverState:
    """
    One observer update. `f_cmd` is the uncompensated command of the step whose
    outcome `task` describes; `state.f_hat_d` is the estimate that was applied with it.
    Only the filter's matrices are used; its own `states` are left alone.
    """
    f_cmd = as_vector(f_cmd, TASK_DIM, "f_cmd")
    for name in ("x", "xd", "xdd"):
        as_vector(getattr(task, name), TASK_DIM, f"task.{name}")

    applied = f_cmd - state.f_hat_d
    w = nominal.force(task, dyn) - applied
    f_hat = qfilter.output(state.filter_states, w)
    states = qfilter.advance(state.filter_states, w)
    if not (np.all(np.isfinite(f_hat)) and np.all(np.isfinite(states))):
        raise DimensionError("observer produced non-finite values")
    return ObserverState(filter_states=states, f_hat_d=f_hat, run_id=state.run_id, steps=state.steps + 1)


class TaskSpaceObserver:
    """
    Single-owner observer for one simulated arm.

    Args:
        spec: Q-filter design
        nominal: nominal model, or None for the uncompensated baseline
        dt: sample time in seconds
    """

    def __init__(self, spec: QFilterSpec, nominal: Optional[NominalModel], dt: float):
        self.spec = spec
        self.nominal = nominal
        self.dt = dt
        self.qfilter = DiscreteQFilter(spec, dt, axes=TASK_DIM)
        self.state = ObserverState()

    @property
    def variant(self) -> str:
        return self.nominal.variant if self.nominal is not None else "none"

    @property
    def estimate(self) -> np.ndarray:
        return self.state.f_hat_d

    def start(self, run_id: str) -> None:
        if self.state.steps > 0 and self.state.run_id != run_id:
            raise ObserverStateError(
                f"observer state belongs to run {self.state.run_id!r}; reset it before starting {run_id!r}"
            )
        self.state.run_id = run_id

    def reset(self) -> None:
        self.state.reset()

    def prime(self, f_hat) -> None:
        """Start from a settled estimate, e.g. the static gravity load of the initial pose."""
        if self.nominal is None:
            return
        f_hat = as_vector(f_hat, TASK_DIM, "f_hat")
        self.state.filter_states = self.qfilter.steady_state(f_hat)
        self.state.f_hat_d = f_hat.copy()
        logger.debug("[Observer] primed with f_hat=%s", np.array2string(f_hat, precision=4))

    def update(self, f_cmd, task: TaskState, dyn: Optional[TaskSpaceDynamics]) -> np.ndarray:
        if self.nominal is None:
            return self.state.f_hat_d
        self.state = observer_step(self.state, self.qfilter, self.nominal, f_cmd, task, dyn)
        return self.state.f_hat_d


class AccelerationEstimator:
    """Task acceleration from differentiated velocity, low-passed at `cutoff_hz`."""

    def __init__(self, dt: float, cutoff_hz: float = 200.0):
        self.dt = dt
        self.alpha = float(np.exp(-2.0 * np.pi * cutoff_hz * dt))
        self._previous: Optional[np.ndarray] = None
        self._value = np.zeros(TASK_DIM)

    def update(self, xd: np.ndarray) -> np.ndarray:
        xd = np.asarray(xd, dtype=float)
        if self._previous is not None:
            raw = (xd - self._previous) / self.dt
            self._value = self.alpha * self._value + (1.0 - self.alpha) * raw
        self._previous = xd.copy()
        return self._value.copy()


# 3. Joint-space lump (reference computation only)
@dataclass(frozen=True)
class MassDamperJointModel:
    ms: tuple
    bs: tuple

    def __post_init__(self):
        object.__setattr__(self, "ms", tuple(float(m) for m in self.ms))
        object.__setattr__(self, "bs", tuple(float(b) for b in self.bs))
        if len(self.ms) != len(self.bs):
            raise DimensionError("ms and bs must have one entry per joint")
        if any(m <= 0 for m in self.ms):
            raise ValueError("joint nominal masses must be positive")


def joint_space_disturbance(
    model: RobotModel,
    joint_model: MassDamperJointModel,
    q,
    qd,
    qdd,
    tau_e,
    friction: Optional[FrictionParams] = None,
) -> np.ndarray:
    """tau_d = (M - M_s) qdd + (C - B_s) qd + g + f + tau_e with tau_e a load torque."""
    n = model.dof
    if len(joint_model.ms) != n:
        raise DimensionError(f"joint model has {len(joint_model.ms)} entries, model has {n} joints")
    qd = as_vector(qd, n, "qd")
    qdd = as_vector(qdd, n, "qdd")
    tau_e = as_vector(tau_e, n, "tau_e")
    tau = inverse_dynamics(model, q, qd, qdd, gravity_on=True)
    if friction is not None:
        tau = tau + friction_torque(friction, qd)
    return tau + tau_e - (np.asarray(joint_model.ms) * qdd + np.asarray(joint_model.bs) * qd)


def make_nominal(variant: str, ms_prime: Sequence[float] = (2.5, 2.2, 2.2), bs_prime: Sequence[float] = (1.0, 1e-5, 1e-5)) -> Optional[NominalModel]:
    if variant == "mass_damper":
        return MassDamperNominal(tuple(ms_prime), tuple(bs_prime))
    if variant == "nonlinear":
        return NonlinearNominal()
    if variant == "none":
        return None
    raise ValueError(f"unknown observer variant {variant!r}; use one of {VARIANTS}")
