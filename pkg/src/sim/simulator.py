"""
Fixed-step simulation of one arm under one scenario.

Every step runs sense -> observe -> control -> actuate -> integrate, with semi-implicit
Euler (qd <- qd + qdd dt, then q <- q + qd dt). A run of duration T at step dt records
T/dt + 1 rows; the last row is sensed and controlled but not integrated.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from src.control.reaching import MuscleFilter, ReachingParams, reaching_command
from src.control.regulation import compose_torque, gains_from_config, pd_task_command
from src.core.config import DIVERGENCE_LIMIT
from src.core.errors import SimulationDiverged
from src.core.run_logger import RunLogger
from src.dynamics.friction import step_friction
from src.dynamics.task_space import ArmSnapshot, TaskSpaceDynamics, arm_snapshot
from src.observer.dob import AccelerationEstimator, TaskSpaceObserver, make_nominal
from src.observer.qfilter import qfilter_from_cutoff
from src.robot.model import TASK_DIM, JointState, TaskState
from src.sim.plant import forward_dynamics, perturbation_torque_from_frames
from src.sim.scenario import Scenario, scenario_hash

logger = logging.getLogger(__name__)


@dataclass
class Trace:
    t: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    x: np.ndarray
    xd: np.ndarray
    f_hat: np.ndarray
    tau: np.ndarray
    tau_ext: np.ndarray
    active: np.ndarray         # (rows, events) bool
    kinetic: np.ndarray        # J
    potential: np.ndarray      # J, absolute
    work_in: np.ndarray        # cumulative work of applied + external torques, J
    friction_loss: np.ndarray  # cumulative friction dissipation, J
    damped: np.ndarray         # damped pseudo-inverse used at this row
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def rows(self) -> int:
        return int(self.t.shape[0])

    @property
    def dof(self) -> int:
        return int(self.q.shape[1])


@dataclass
class _Measurement:
    """What the observer sees about the step that was just actuated."""

    f_cmd: np.ndarray
    task: TaskState
    dyn: Optional[TaskSpaceDynamics]


class Simulator:
    """
    Runtime for one scenario. Single owner; create one per run.

    Args:
        scenario: fully resolved scenario
        run_log: optional RunLogger receiving perturbation and singularity events
    """

    def __init__(self, scenario: Scenario, run_log: Optional[RunLogger] = None,
                 divergence_limit: float = DIVERGENCE_LIMIT):
        self.scenario = scenario
        self.model = scenario.model
        self.dt = scenario.dt
        self.run_log = run_log
        self.divergence_limit = divergence_limit
        self.run_id = f"{scenario.name}:{scenario_hash(scenario)[:12]}"

        ctrl = scenario.controller
        obs = scenario.observer
        self.passive = ctrl.type == "passive"
        nominal = None if self.passive else make_nominal(obs.variant, obs.ms_prime, obs.bs_prime)
        self.observer = TaskSpaceObserver(qfilter_from_cutoff(obs.cutoff_hz), nominal, self.dt)
        self.observer.start(self.run_id)
        self.accel = AccelerationEstimator(self.dt, obs.accel_filter_hz) if obs.acceleration_source == "differentiated" else None
        self.rng = np.random.default_rng(scenario.seed)

        # 1. Joint state
        self.k = 0
        self.q = np.array(scenario.q0, dtype=float)
        self.qd = np.array(scenario.qd0, dtype=float)
        self.work_in = 0.0
        self.friction_loss = 0.0
        self._pending: Optional[_Measurement] = None
        self._active = [False] * len(scenario.perturbations)
        self._damped_reported = False

        # 2. References captured at the initial pose
        snap = arm_snapshot(self.model, self.q, self.qd, with_task=not self.passive)
        self.x_ref = snap.frames.end_effector.copy()
        self.gains = gains_from_config(ctrl.k, ctrl.b)
        self.reach: Optional[ReachingParams] = None
        self.muscle_states = np.zeros(self.model.dof)
        if ctrl.type == "reaching":
            self.reach = ReachingParams.per_joint(
                self.model.dof, ctrl.target, self.x_ref,
                c_base=ctrl.c_base, f_base=ctrl.f_base, k_spring=ctrl.k_spring, tau_muscle=ctrl.tau_muscle,
            )
            self.muscle = MuscleFilter(self.reach.tau_muscle, self.dt)
        if obs.prime and nominal is not None:
            # static balance at rest: the arm needs u = eta, so the estimate starts at -eta
            self.observer.prime(-snap.task.eta)

    @property
    def t(self) -> float:
        return self.k * self.dt

    def _null_torque(self, snap: ArmSnapshot) -> np.ndarray:
        if self.scenario.controller.null_objective == "gravity":
            return snap.g
        return np.zeros(self.model.dof)

    def _control(self, snap: ArmSnapshot, x_meas: np.ndarray, xd: np.ndarray, f_hat: np.ndarray):
        """Returns (joint torque, uncompensated task command)."""
        n = self.model.dof
        if self.passive:
            return np.zeros(n), np.zeros(TASK_DIM)

        sensed = TaskState(x=x_meas, xd=xd, xdd=np.zeros(TASK_DIM))
        tau0 = self._null_torque(snap)
        if self.reach is None:
            f_cmd = pd_task_command(self.gains, self.x_ref, sensed)
            return compose_torque(snap.J, f_cmd, f_hat, snap.P, tau0).joint_torque, f_cmd

        tau, self.muscle_states = reaching_command(
            self.reach, JointState(self.q, self.qd), sensed, snap.J, f_hat, self.muscle_states,
            P=snap.P, tau0=tau0, muscle=self.muscle,
        )
        # task-space image of the filtered reaching torque feeds the observer
        return tau, snap.task.jm_pinv.T @ -self.muscle_states

    def _log_transitions(self, t: float) -> None:
        for i, event in enumerate(self.scenario.perturbations):
            now = event.active(t)
            if now != self._active[i] and self.run_log is not None:
                self.run_log.log_event(
                    t, "PERTURBATION_ON" if now else "PERTURBATION_OFF",
                    {"index": i, "link_index": event.link_index, "force_n": list(event.force)},
                )
            self._active[i] = now

    def step(self, integrate: bool = True) -> Dict[str, Any]:
        t = self.t
        n = self.model.dof

        # 1. Sense
        snap = arm_snapshot(self.model, self.q, self.qd, with_task=not self.passive)
        x = snap.frames.end_effector.copy()
        xd = snap.J @ self.qd
        x_meas = x
        if self.scenario.noise_std > 0:
            x_meas = x + self.rng.normal(0.0, self.scenario.noise_std, TASK_DIM)
        damped = bool(snap.task is not None and snap.task.damped)
        if damped and not self._damped_reported:
            logger.warning("[Simulator] %s: damped task-space inverse first used at t=%.3f s", self.run_id, t)
            if self.run_log is not None:
                self.run_log.log_event(t, "SINGULAR_TASK", {"q_rad": self.q.tolist()})
            self._damped_reported = True

        # 2. Observe the outcome of the previous actuation
        if self.accel is not None:
            xdd_est = self.accel.update(xd)
            if self._pending is not None:
                self._pending.task.xdd = xdd_est
        if self._pending is not None:
            self.observer.update(self._pending.f_cmd, self._pending.task, self._pending.dyn)
        f_hat = self.observer.estimate.copy()

        # 3. Control
        tau, f_cmd = self._control(snap, x_meas, xd, f_hat)

        # 4. Actuate
        self._log_transitions(t)
        tau_ext = perturbation_torque_from_frames(snap.frames, self.scenario.perturbations, t)
        qdd = forward_dynamics(
            self.model, self.scenario.friction, JointState(self.q, self.qd), tau, tau_ext,
            frames=snap.frames, M=snap.M, bias=snap.C @ self.qd + snap.g, dt=self.dt,
        )
        self._pending = _Measurement(
            f_cmd=f_cmd,
            task=TaskState(x=x, xd=xd, xdd=snap.J @ qdd + snap.Jd @ self.qd),
            dyn=snap.task,
        )

        row = {
            "t": t,
            "q": self.q.copy(),
            "qd": self.qd.copy(),
            "x": x,
            "xd": xd,
            "f_hat": f_hat,
            "tau": tau,
            "tau_ext": tau_ext,
            "active": list(self._active),
            "kinetic": float(0.5 * self.qd @ snap.M @ self.qd),
            "potential": float(-np.sum(self.model.masses * (snap.frames.coms @ self.model.gravity_vector))),
            "work_in": self.work_in,
            "friction_loss": self.friction_loss,
            "damped": damped,
        }

        # 5. Integrate
        if integrate:
            qd_next = self.qd + qdd * self.dt
            if not np.all(np.isfinite(qd_next)) or np.max(np.abs(qd_next)) > self.divergence_limit:
                if self.run_log is not None:
                    self.run_log.log_event(t + self.dt, "DIVERGED", {"qd_radps": qd_next.tolist()})
                logger.error("[Simulator] %s diverged at t=%.4f s", self.run_id, t + self.dt)
                raise SimulationDiverged(t + self.dt, qd_next.tolist(), self.divergence_limit)
            qd_mid = 0.5 * (self.qd + qd_next)
            self.work_in += float((tau + tau_ext) @ qd_mid) * self.dt
            friction = step_friction(self.scenario.friction, self.qd, qdd, self.dt)
            self.friction_loss += float(friction @ qd_mid) * self.dt
            self.qd = qd_next
            self.q = self.q + self.qd * self.dt
            self.k += 1
        return row

    def run(self) -> Trace:
        steps = self.scenario.steps
        rows: List[Dict[str, Any]] = []
        logger.info("[Simulator] %s: %d steps, observer=%s", self.run_id, steps, self.observer.variant)
        for k in range(steps + 1):
            rows.append(self.step(integrate=k < steps))
        return self._assemble(rows)

    def _assemble(self, rows: List[Dict[str, Any]]) -> Trace:
        def stack(key, dtype=float):
            return np.array([r[key] for r in rows], dtype=dtype)

        events = len(self.scenario.perturbations)
        active = stack("active", bool).reshape(len(rows), events)
        return Trace(
            t=np.arange(len(rows)) * self.dt,
            q=stack("q"), qd=stack("qd"), x=stack("x"), xd=stack("xd"),
            f_hat=stack("f_hat"), tau=stack("tau"), tau_ext=stack("tau_ext"),
            active=active,
            kinetic=stack("kinetic"), potential=stack("potential"),
            work_in=stack("work_in"), friction_loss=stack("friction_loss"),
            damped=stack("damped", bool),
            meta={
                "scenario": self.scenario.name,
                "scenario_hash": scenario_hash(self.scenario),
                "variant": self.observer.variant,
                "controller": self.scenario.controller.type,
                "dt_s": self.dt,
                "dof": self.model.dof,
                "x_ref_m": self.x_ref.tolist(),
                "target_m": list(self.scenario.controller.target) if self.scenario.controller.target else None,
            },
        )


def run(scenario: Scenario, run_log: Optional[RunLogger] = None) -> Trace:
    """Fresh runtime, full trace."""
    return Simulator(scenario, run_log).run()
