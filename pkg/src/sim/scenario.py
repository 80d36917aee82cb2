"""
Scenario documents: everything that determines a run, seeds included.

Scenarios are JSON; the grammar is documented in docs/FORMATS.md. Comparison runs are
built from one scenario plus an override (observer variant, or an emptied perturbation
list), never from two independently written files.
"""

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.core.config import DEFAULT_DT
from src.core.errors import ArmHoldError, ScenarioError
from src.dynamics.friction import FrictionParams
from src.observer.dob import VARIANTS
from src.robot.model import TASK_DIM, RobotModel, load_model

CONTROLLERS = ("pd_regulation", "reaching", "passive")
NULL_OBJECTIVES = ("none", "gravity")
ACCELERATION_SOURCES = ("plant", "differentiated")
# Boundary slack for pulse windows sampled on the dt grid
TIME_EPS = 1e-9


@dataclass(frozen=True)
class PerturbationEvent:
    link_index: int
    application_point: Tuple[float, float, float]
    force: Tuple[float, float, float]
    start: float
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "application_point", tuple(float(v) for v in self.application_point))
        object.__setattr__(self, "force", tuple(float(v) for v in self.force))
        if len(self.application_point) != 3 or len(self.force) != 3:
            raise ScenarioError("perturbation point and force must be 3-vectors")
        if self.link_index < 0:
            raise ScenarioError(f"link_index must be >= 0, got {self.link_index}")
        if not self.duration > 0 or self.start < 0:
            raise ScenarioError(f"perturbation needs start >= 0 and duration > 0, got {self.start}, {self.duration}")

    @property
    def end(self) -> float:
        return self.start + self.duration

    def active(self, t: float) -> bool:
        return self.start - TIME_EPS <= t < self.end - TIME_EPS


@dataclass(frozen=True)
class ObserverConfig:
    variant: str = "nonlinear"
    cutoff_hz: float = 20.0
    ms_prime: Tuple[float, float, float] = (2.5, 2.2, 2.2)
    bs_prime: Tuple[float, float, float] = (1.0, 1e-5, 1e-5)
    prime: bool = True
    acceleration_source: str = "plant"
    accel_filter_hz: float = 200.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ScenarioError(f"unknown observer variant {self.variant!r}; use one of {VARIANTS}")
        if self.acceleration_source not in ACCELERATION_SOURCES:
            raise ScenarioError(f"unknown acceleration_source {self.acceleration_source!r}")
        if not self.cutoff_hz > 0:
            raise ScenarioError("observer cutoff_hz must be positive")


@dataclass(frozen=True)
class ControllerConfig:
    type: str = "pd_regulation"
    null_objective: str = "none"
    # pd_regulation
    k: Tuple[float, float, float] = (4.0, 4.0, 4.0)
    b: Tuple[float, float, float] = (0.001, 0.001, 0.001)
    # reaching
    target: Optional[Tuple[float, float, float]] = None
    # scalar or one value per joint
    c_base: Union[float, Tuple[float, ...]] = 2.0
    f_base: Union[float, Tuple[float, ...]] = 1.0
    k_spring: float = 50.0
    tau_muscle: Union[float, Tuple[float, ...]] = 0.05

    def __post_init__(self):
        if self.type not in CONTROLLERS:
            raise ScenarioError(f"unknown controller type {self.type!r}; use one of {CONTROLLERS}")
        if self.null_objective not in NULL_OBJECTIVES:
            raise ScenarioError(f"unknown null_objective {self.null_objective!r}; use one of {NULL_OBJECTIVES}")
        if self.type == "reaching" and (self.target is None or len(self.target) != TASK_DIM):
            raise ScenarioError("reaching controller needs a 3D target_m")


@dataclass(frozen=True)
class Scenario:
    name: str
    model: RobotModel
    q0: Tuple[float, ...]
    duration: float
    dt: float = DEFAULT_DT
    qd0: Optional[Tuple[float, ...]] = None
    friction: Optional[FrictionParams] = None
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    observer: ObserverConfig = field(default_factory=ObserverConfig)
    perturbations: Tuple[PerturbationEvent, ...] = ()
    noise_std: float = 0.0
    seed: int = 0
    output: Optional[str] = None

    def __post_init__(self):
        n = self.model.dof
        object.__setattr__(self, "q0", tuple(float(v) for v in self.q0))
        object.__setattr__(self, "qd0", tuple(float(v) for v in (self.qd0 or (0.0,) * n)))
        object.__setattr__(self, "perturbations", tuple(self.perturbations))
        if self.friction is None:
            object.__setattr__(self, "friction", FrictionParams.uniform(n))
        if len(self.q0) != n or len(self.qd0) != n:
            raise ScenarioError(f"q0/qd0 need {n} entries for model {self.model.name!r}")
        if self.friction.dof != n:
            raise ScenarioError(f"friction has {self.friction.dof} joints, model has {n}")
        if not self.dt > 0:
            raise ScenarioError(f"dt must be positive, got {self.dt}")
        if self.duration < 0 or (0 < self.duration < self.dt):
            raise ScenarioError(f"duration must be 0 or at least dt, got {self.duration}")
        if self.noise_std < 0:
            raise ScenarioError("noise_std must be nonnegative")
        for event in self.perturbations:
            if event.link_index >= n:
                raise ScenarioError(f"perturbation link_index {event.link_index} out of range for {n} links")
        for key in ("c_base", "f_base", "tau_muscle"):
            value = getattr(self.controller, key)
            if not np.isscalar(value) and len(value) != n:
                raise ScenarioError(f"controller {key} needs 1 or {n} entries, got {len(value)}")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))

    def to_dict(self) -> Dict[str, Any]:
        doc = asdict(self)
        doc["model"] = {"name": self.model.name, "gravity": list(self.model.gravity),
                        "mount_rpy_deg": list(self.model.mount_rpy),
                        "links": [asdict(link) for link in self.model.links]}
        return doc


# =========================
# Parsing
# =========================

def _vector(block: Dict[str, Any], key: str, size: int, default=None) -> Optional[Tuple[float, ...]]:
    value = block.get(key, default)
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return (float(value),) * size
    value = tuple(float(v) for v in value)
    if len(value) != size:
        raise ScenarioError(f"{key} needs {size} entries, got {len(value)}")
    return value


def _resolve_model(ref: Any, base_dir: Optional[Path]) -> RobotModel:
    if isinstance(ref, dict):
        return load_model(ref)
    ref = str(ref)
    if base_dir is not None and (base_dir / ref).exists():
        return load_model(base_dir / ref)
    return load_model(ref)


def scenario_from_dict(doc: Dict[str, Any], base_dir: Optional[Path] = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    try:
        model = _resolve_model(doc.get("model", "paper7dof"), base_dir)
        if "mount_rpy_deg" in doc:
            model = dataclasses.replace(model, mount_rpy=_vector(doc, "mount_rpy_deg", 3))
        n = model.dof
        if "q0_deg" in doc:
            q0 = tuple(math.radians(float(v)) for v in doc["q0_deg"])
        elif "q0_rad" in doc:
            q0 = tuple(float(v) for v in doc["q0_rad"])
        else:
            raise ScenarioError("scenario needs q0_deg or q0_rad")

        ctrl = dict(doc.get("controller", {}))
        controller = ControllerConfig(
            type=ctrl.get("type", "pd_regulation"),
            null_objective=ctrl.get("null_objective", "none"),
            k=_vector(ctrl, "k_npm", TASK_DIM, 4.0),
            b=_vector(ctrl, "b_nspm", TASK_DIM, 0.001),
            target=_vector(ctrl, "target_m", TASK_DIM),
            c_base=_vector(ctrl, "c_base_nms", n, 2.0),
            f_base=_vector(ctrl, "f_base", n, 1.0),
            k_spring=float(ctrl.get("k_spring_npm", 50.0)),
            tau_muscle=_vector(ctrl, "tau_muscle_s", n, 0.05),
        )

        obs = dict(doc.get("observer", {}))
        observer = ObserverConfig(
            variant=obs.get("variant", "nonlinear"),
            cutoff_hz=float(obs.get("cutoff_hz", 20.0)),
            ms_prime=_vector(obs, "ms_kg", TASK_DIM, (2.5, 2.2, 2.2)),
            bs_prime=_vector(obs, "bs_kgps", TASK_DIM, (1.0, 1e-5, 1e-5)),
            prime=bool(obs.get("prime", True)),
            acceleration_source=obs.get("acceleration_source", "plant"),
            accel_filter_hz=float(obs.get("accel_filter_hz", 200.0)),
        )

        events = tuple(
            PerturbationEvent(
                link_index=int(e["link_index"]),
                application_point=tuple(e.get("point_m", (0.0, 0.0, 0.0))),
                force=tuple(e["force_n"]),
                start=float(e["start_s"]),
                duration=float(e["duration_s"]),
            )
            for e in doc.get("perturbations", [])
        )

        return Scenario(
            name=str(doc.get("name", "scenario")),
            model=model,
            q0=q0,
            qd0=_vector(doc, "qd0_radps", n),
            duration=float(doc.get("duration_s", 0.8)),
            dt=float(doc.get("dt_s", DEFAULT_DT)),
            friction=FrictionParams.from_config(n, doc.get("friction", {})),
            controller=controller,
            observer=observer,
            perturbations=events,
            noise_std=float(doc.get("noise_std_m", 0.0)),
            seed=int(doc.get("seed", 0)),
            output=doc.get("output"),
        )
    except ScenarioError:
        raise
    except ArmHoldError as e:
        raise ScenarioError(str(e)) from e
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(f"invalid scenario field: {e}") from e


def load_scenario(source: Union[str, os.PathLike, Dict[str, Any]]) -> Scenario:
    if isinstance(source, dict):
        return scenario_from_dict(source)
    path = Path(source)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"cannot parse scenario file {path}: {e}") from e
    return scenario_from_dict(doc, base_dir=path.parent)


# =========================
# Provenance and overrides
# =========================

def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def scenario_hash(scenario: Scenario) -> str:
    canonical = json.dumps(_jsonable(scenario.to_dict()), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def with_observer_variant(scenario: Scenario, variant: str) -> Scenario:
    observer = dataclasses.replace(scenario.observer, variant=variant)
    return dataclasses.replace(scenario, observer=observer, name=f"{scenario.name}[{variant}]")


def without_perturbations(scenario: Scenario) -> Scenario:
    return dataclasses.replace(scenario, perturbations=(), name=f"{scenario.name}[unperturbed]")


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    return dataclasses.replace(scenario, seed=int(seed))
