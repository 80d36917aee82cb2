"""
Run metrics: movement deviation, path straightness, paired-run comparisons and the
energy audit.

"Movement deviation" is the per-axis RMS displacement of the end-effector from its
initial position over the run.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from src.core.errors import DegenerateChordError, DimensionError
from src.sim.simulator import Trace


@dataclass
class DeviationMetrics:
    per_axis_m: np.ndarray                  # RMS deviation from x(0), per axis
    max_joint_deviation_rad: Optional[float] = None
    straightness_m: Optional[float] = None
    chord_length_m: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "per_axis_m": [float(v) for v in self.per_axis_m],
            "max_joint_deviation_rad": self.max_joint_deviation_rad,
            "straightness_m": self.straightness_m,
            "chord_length_m": self.chord_length_m,
        }


def _require_rows(trace: Trace) -> None:
    if trace.rows == 0:
        raise DimensionError("trace is empty")


def rms_deviation(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] == 0:
        raise DimensionError("trace is empty")
    return np.sqrt(np.mean((x - x[0]) ** 2, axis=0))


def max_joint_deviation(trace: Trace, reference: Trace) -> float:
    """Largest |q - q_ref| over joints and common samples."""
    rows = min(trace.rows, reference.rows)
    if rows == 0:
        raise DimensionError("trace is empty")
    return float(np.max(np.abs(trace.q[:rows] - reference.q[:rows])))


def path_straightness(path: np.ndarray, start, target) -> float:
    start = np.asarray(start, dtype=float)
    target = np.asarray(target, dtype=float)
    chord = target - start
    length_sq = float(chord @ chord)
    if length_sq <= 1e-24:
        raise DegenerateChordError(f"start {start.tolist()} coincides with target {target.tolist()}")
    rel = np.asarray(path, dtype=float) - start
    s = np.clip(rel @ chord / length_sq, 0.0, 1.0)
    return float(np.max(np.linalg.norm(rel - np.outer(s, chord), axis=1)))


def straightness(trace: Trace, start, target) -> float:
    """Max distance of the end-effector path from the segment [start, target]."""
    _require_rows(trace)
    return path_straightness(trace.x, start, target)


def path_distance(path_a: np.ndarray, path_b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two sampled paths."""
    return float(max(directed_hausdorff(path_a, path_b)[0], directed_hausdorff(path_b, path_a)[0]))


def movement_deviation(
    trace: Trace,
    reference: Optional[Trace] = None,
    start=None,
    target=None,
) -> DeviationMetrics:
    _require_rows(trace)
    metrics = DeviationMetrics(per_axis_m=rms_deviation(trace.x))
    if reference is not None:
        metrics.max_joint_deviation_rad = max_joint_deviation(trace, reference)
    if target is not None:
        start = trace.x[0] if start is None else start
        metrics.straightness_m = straightness(trace, start, target)
        metrics.chord_length_m = float(np.linalg.norm(np.asarray(target, dtype=float) - np.asarray(start, dtype=float)))
    return metrics


def reduction_percentages(dev_improved, dev_baseline) -> np.ndarray:
    """100 (1 - improved / baseline) per axis; 0 where the baseline is 0."""
    improved = np.asarray(dev_improved, dtype=float)
    baseline = np.asarray(dev_baseline, dtype=float)
    out = np.zeros_like(baseline)
    nonzero = baseline > 0
    out[nonzero] = 100.0 * (1.0 - improved[nonzero] / baseline[nonzero])
    return out


def joint_excursion(trace: Trace) -> float:
    return float(np.max(np.abs(trace.q - trace.q[0])))


def joint_comparability(trace_a: Trace, trace_b: Trace) -> float:
    """Ratio of the smaller to the larger joint excursion; 1 when both runs move alike."""
    a, b = joint_excursion(trace_a), joint_excursion(trace_b)
    if max(a, b) == 0.0:
        return 1.0
    return min(a, b) / max(a, b)


@dataclass
class EnergyAudit:
    residual_j: float       # work in - friction loss - change of mechanical energy, at the last row
    max_residual_j: float   # largest |residual| over the run
    scale_j: float
    normalized: float       # max_residual_j / scale_j

    def passes(self, tolerance: float = 2e-2) -> bool:
        return self.normalized <= tolerance


def energy_audit(trace: Trace, floor_j: float = 1e-9) -> EnergyAudit:
    _require_rows(trace)
    mechanical = trace.kinetic + trace.potential
    delta = mechanical - mechanical[0]
    residual = trace.work_in - trace.friction_loss - delta
    scale = max(float(np.max(np.abs(delta))), float(np.max(trace.kinetic)), floor_j)
    max_residual = float(np.max(np.abs(residual)))
    return EnergyAudit(
        residual_j=float(residual[-1]),
        max_residual_j=max_residual,
        scale_j=scale,
        normalized=max_residual / scale,
    )


def energy_drift(trace: Trace) -> float:
    """Max |E - E(0)| relative to peak kinetic energy, for unforced runs."""
    mechanical = trace.kinetic + trace.potential
    peak = max(float(np.max(trace.kinetic)), 1e-12)
    return float(np.max(np.abs(mechanical - mechanical[0]))) / peak
