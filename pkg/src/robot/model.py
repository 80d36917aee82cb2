"""
Robot description: link parameters, the serial-chain model and joint/task state records.

Model documents are JSON with explicit units in the field names; see docs/FORMATS.md.
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from src.core.config import DEFAULT_GRAVITY
from src.core.errors import DimensionError, ModelError

PRESET_DIR = Path(__file__).parent / "presets"
TASK_DIM = 3
AXIS_TOL = 1e-12


@dataclass(frozen=True)
class LinkParams:
    length: float
    mass: float
    inertia_diag: Tuple[float, float, float]
    com_offset: float = 0.5
    axis: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    direction: Tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.mass < 0 or self.length < 0:
            raise ModelError(f"link mass and length must be >= 0 (mass={self.mass}, length={self.length})")
        if len(self.inertia_diag) != 3 or any(i < 0 for i in self.inertia_diag):
            raise ModelError(f"inertia_diag must be three nonnegative values, got {self.inertia_diag}")
        if not 0.0 <= self.com_offset <= 1.0:
            raise ModelError(f"com_offset must lie in [0, 1], got {self.com_offset}")
        for name in ("axis", "direction"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (3,) or abs(np.linalg.norm(vec) - 1.0) > AXIS_TOL:
                raise ModelError(f"{name} must be a unit 3-vector, got {getattr(self, name)}")


@dataclass(frozen=True)
class RobotModel:
    """Immutable serial chain of revolute joints. Safe to share between threads."""

    links: Tuple[LinkParams, ...]
    gravity: Tuple[float, float, float] = DEFAULT_GRAVITY
    name: str = "custom"
    # Fixed base orientation in the world, roll-pitch-yaw in degrees (extrinsic x, y, z)
    mount_rpy: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    # Cached arrays, filled in __post_init__
    mount: np.ndarray = field(init=False, repr=False, compare=False)
    axes: np.ndarray = field(init=False, repr=False, compare=False)
    offsets: np.ndarray = field(init=False, repr=False, compare=False)
    masses: np.ndarray = field(init=False, repr=False, compare=False)
    inertias: np.ndarray = field(init=False, repr=False, compare=False)
    com_offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.links) == 0:
            raise ModelError("a robot model needs at least one link")
        if len(self.gravity) != 3:
            raise ModelError(f"gravity must be a 3-vector, got {self.gravity}")
        if len(self.mount_rpy) != 3 or not np.all(np.isfinite(self.mount_rpy)):
            raise ModelError(f"mount_rpy must be three finite angles, got {self.mount_rpy}")
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "mount_rpy", tuple(float(v) for v in self.mount_rpy))
        object.__setattr__(self, "mount", Rotation.from_euler("xyz", self.mount_rpy, degrees=True).as_matrix())
        object.__setattr__(self, "axes", np.array([l.axis for l in self.links], dtype=float))
        object.__setattr__(
            self, "offsets", np.array([l.length * np.asarray(l.direction) for l in self.links], dtype=float)
        )
        object.__setattr__(self, "masses", np.array([l.mass for l in self.links], dtype=float))
        object.__setattr__(self, "inertias", np.array([l.inertia_diag for l in self.links], dtype=float))
        object.__setattr__(self, "com_offsets", np.array([l.com_offset for l in self.links], dtype=float))
        for arr in (self.mount, self.axes, self.offsets, self.masses, self.inertias, self.com_offsets):
            arr.setflags(write=False)

    @property
    def dof(self) -> int:
        return len(self.links)

    @property
    def joint_axes(self) -> np.ndarray:
        return self.axes

    @property
    def redundancy(self) -> int:
        return self.dof - TASK_DIM

    @property
    def gravity_vector(self) -> np.ndarray:
        return np.asarray(self.gravity, dtype=float)


@dataclass
class JointState:
    q: np.ndarray
    qd: np.ndarray
    qdd: Optional[np.ndarray] = None


@dataclass
class TaskState:
    x: np.ndarray
    xd: np.ndarray
    xdd: np.ndarray


def as_vector(value: Any, size: int, name: str) -> np.ndarray:
    """Convert to a finite float vector of the given size or raise DimensionError."""
    vec = np.asarray(value, dtype=float)
    if vec.shape != (size,):
        raise DimensionError(f"{name} must have shape ({size},), got {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise DimensionError(f"{name} contains non-finite values")
    return vec


def _link_from_dict(block: Dict[str, Any], index: int) -> LinkParams:
    try:
        return LinkParams(
            length=float(block["length_m"]),
            mass=float(block["mass_kg"]),
            inertia_diag=(float(block["ixx_kgm2"]), float(block["iyy_kgm2"]), float(block["izz_kgm2"])),
            com_offset=float(block.get("com_offset", 0.5)),
            axis=tuple(float(v) for v in block.get("axis", (0.0, 0.0, 1.0))),
            direction=tuple(float(v) for v in block.get("direction", (0.0, 0.0, 1.0))),
        )
    except KeyError as e:
        raise ModelError(f"link {index}: missing field {e.args[0]!r}")
    except (TypeError, ValueError) as e:
        if isinstance(e, ModelError):
            raise
        raise ModelError(f"link {index}: {e}")


def model_from_dict(doc: Dict[str, Any]) -> RobotModel:
    if not isinstance(doc, dict) or not isinstance(doc.get("links"), list):
        raise ModelError("model document must be an object with a 'links' array")
    links = [_link_from_dict(block, i) for i, block in enumerate(doc["links"])]
    gravity = tuple(float(v) for v in doc.get("gravity_mps2", DEFAULT_GRAVITY))
    mount_rpy = tuple(float(v) for v in doc.get("mount_rpy_deg", (0.0, 0.0, 0.0)))
    return RobotModel(links=tuple(links), gravity=gravity, name=str(doc.get("name", "custom")), mount_rpy=mount_rpy)


def load_model(config: Union[str, os.PathLike, Dict[str, Any]]) -> RobotModel:
    """
    Build a RobotModel from a preset name, a JSON file path or an already parsed document.

    Args:
        config: "paper7dof" (or any preset under robot/presets), a path, or a dict

    Returns:
        RobotModel with all link invariants checked
    """
    if isinstance(config, dict):
        return model_from_dict(config)

    path = Path(config)
    if not path.suffix and (PRESET_DIR / f"{path.name}.json").exists():
        path = PRESET_DIR / f"{path.name}.json"
    if not path.exists():
        raise ModelError(f"model file not found: {config}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ModelError(f"cannot parse model file {path}: {e}")
    return model_from_dict(doc)


def single_link(
    length: float = 1.0,
    mass: float = 1.0,
    inertia_diag: Sequence[float] = (0.0, 0.0, 0.0),
    axis: Sequence[float] = (0.0, 0.0, 1.0),
    direction: Sequence[float] = (1.0, 0.0, 0.0),
    com_offset: float = 0.5,
    gravity: Sequence[float] = DEFAULT_GRAVITY,
) -> RobotModel:
    """One revolute link, by default spinning about z with the link laid along x."""
    link = LinkParams(
        length=length,
        mass=mass,
        inertia_diag=tuple(inertia_diag),
        com_offset=com_offset,
        axis=tuple(axis),
        direction=tuple(direction),
    )
    return RobotModel(links=(link,), gravity=tuple(gravity), name="single_link")
