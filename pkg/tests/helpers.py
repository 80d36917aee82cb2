import json
import os

import numpy as np

from src.robot.model import PRESET_DIR
from src.sim.simulator import Trace

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
SCENARIO_DIR = os.path.join(REPO_ROOT, "data", "scenarios")
REGULATION_FIXTURE = os.path.join(SCENARIO_DIR, "regulation_pulses.json")
REACHING_FIXTURE = os.path.join(SCENARIO_DIR, "reaching_pulses.json")

HOLD_POSE_DEG = (0, 90, 90, -90, 90, 0, 90)


def random_configurations(rng, count, spread=0.6):
    """Configurations around the regulation pose, away from the singular stretched arm."""
    base = np.radians(HOLD_POSE_DEG)
    return [base + rng.uniform(-spread, spread, size=7) for _ in range(count)]


def regulation_doc(**overrides):
    """Short regulation scenario document on the 7-DOF preset."""
    doc = {
        "name": "short_regulation",
        "model": "paper7dof",
        "q0_deg": list(HOLD_POSE_DEG),
        "duration_s": 0.05,
        "dt_s": 0.001,
        "seed": 3,
        "friction": {"coulomb_nm": 0.0, "viscous_nms_per_rad": 0.1},
        "controller": {"type": "pd_regulation", "null_objective": "gravity", "k_npm": 4, "b_nspm": 0.001},
        "observer": {"variant": "nonlinear", "cutoff_hz": 20, "prime": True},
        "perturbations": [
            {"link_index": 3, "point_m": [0, 0, 0.06], "force_n": [5, 0, 0], "start_s": 0.01, "duration_s": 0.02}
        ],
    }
    doc.update(overrides)
    return doc


def reaching_doc(**overrides):
    """Short reaching scenario toward a point 5 cm away from the regulation pose."""
    doc = regulation_doc(
        name="short_reaching",
        duration_s=0.1,
        controller={
            "type": "reaching",
            "null_objective": "gravity",
            "target_m": [0.31, -0.37, 0.18],
        },
    )
    doc.update(overrides)
    return doc


def preset_doc(name="paper7dof"):
    """Parsed preset JSON, for tests that tweak a model before loading it."""

    with open(PRESET_DIR / f"{name}.json", "r", encoding="utf-8") as f:
        return json.load(f)


def make_trace(x, q=None, dt=1e-3):
    """Trace with the given end-effector path and otherwise quiet channels."""
    x = np.asarray(x, dtype=float)
    rows = x.shape[0]
    q = np.zeros((rows, 7)) if q is None else np.asarray(q, dtype=float)
    zeros = np.zeros(rows)
    return Trace(
        t=np.arange(rows) * dt, q=q, qd=np.zeros_like(q), x=x, xd=np.zeros_like(x), f_hat=np.zeros_like(x),
        tau=np.zeros_like(q), tau_ext=np.zeros_like(q), active=np.zeros((rows, 0), dtype=bool),
        kinetic=zeros, potential=zeros.copy(), work_in=zeros.copy(), friction_loss=zeros.copy(),
        damped=np.zeros(rows, dtype=bool), meta={"scenario": "synthetic"},
    )
