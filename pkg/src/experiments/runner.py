"""
Experiment runners behind the CLI verbs: single runs, the regulation comparison of the
two observer variants, the perturbed-vs-normal reaching comparison, and plot-data export.

Paired runs are always derived from one scenario plus an override, so both sides share
the same perturbation schedule by construction.
"""

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.config import OUTPUT_DIR, WORKERS
from src.core.errors import ComparisonError, PlotSelectionError
from src.core.run_logger import RunLogData, RunLogger
from src.robot.kinematics import end_effector_position
from src.sim import metrics
from src.sim.scenario import (
    Scenario,
    load_scenario,
    scenario_hash,
    with_observer_variant,
    with_seed,
    without_perturbations,
)
from src.sim.simulator import Trace, Simulator
from src.sim.trace_io import AXES, write_series, write_trace_csv, write_trace_json

logger = logging.getLogger(__name__)

KINDS = ("single_run", "regulation_comparison", "reaching_comparison")
FORMATS = ("csv", "json")
# Reach counts as completed when the final error is within this share of the chord
REACH_TOLERANCE = 0.05


@dataclass
class ExperimentSpec:
    kind: str
    scenario_path: str
    output_dir: Optional[str] = None
    formats: Tuple[str, ...] = ("csv",)
    variant: Optional[str] = None
    seed: Optional[int] = None
    against: Optional[str] = None
    variants: Tuple[str, str] = ("mass_damper", "nonlinear")
    figures: bool = False
    workers: int = WORKERS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; use one of {KINDS}")
        unknown = [f for f in self.formats if f not in FORMATS]
        if unknown:
            raise ValueError(f"unknown report format(s) {unknown}; use {FORMATS}")


@dataclass
class RunResult:
    scenario: Scenario
    trace: Trace
    log: RunLogData
    files: List[str] = field(default_factory=list)
    out_dir: str = ""


@dataclass
class ComparisonReport:
    scenario: str
    scenario_hash: str
    baseline: str
    improved: str
    deviations_m: Dict[str, List[float]]
    reductions_percent: List[float]
    joint_comparability: float
    max_joint_excursion_rad: Dict[str, float]
    energy_audit: Dict[str, float]
    runtime_s: float = 0.0
    metric: str = "per-axis RMS displacement of the end-effector from its initial position"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ReachingReport:
    scenario: str
    scenario_hash: str
    chord_length_m: float
    max_joint_deviation_rad: float
    straightness_m: Dict[str, float]
    straightness_ratio: Dict[str, float]
    path_distance_m: float
    final_error_m: Dict[str, float]
    reached: Dict[str, bool]
    energy_audit: Dict[str, float]
    runtime_s: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# =========================
# Running scenarios
# =========================

def _load(spec: ExperimentSpec) -> Scenario:
    scenario = load_scenario(spec.scenario_path)
    if spec.seed is not None:
        scenario = with_seed(scenario, spec.seed)
    return scenario


def _output_dir(spec: ExperimentSpec, scenario: Scenario) -> str:
    return spec.output_dir or scenario.output or os.path.join(OUTPUT_DIR, scenario.name)


def simulate(scenario: Scenario) -> Tuple[Trace, RunLogData]:
    """Run one scenario with an in-memory run log. Top level so worker processes can pickle it."""
    run_log = RunLogger(
        run_id=scenario.name, scenario=scenario.name,
        scenario_hash=scenario_hash(scenario), variant=scenario.observer.variant,
    )
    trace = Simulator(scenario, run_log).run()
    return trace, run_log.data


def simulate_all(scenarios: Sequence[Scenario], workers: int = WORKERS) -> List[Tuple[Trace, RunLogData]]:
    if workers <= 1 or len(scenarios) <= 1:
        return [simulate(s) for s in scenarios]
    with ProcessPoolExecutor(max_workers=min(workers, len(scenarios))) as pool:
        return list(pool.map(simulate, scenarios))


def _write_trace(trace: Trace, out_dir: str, stem: str, formats: Sequence[str]) -> List[str]:
    files = []
    if "csv" in formats:
        files.append(write_trace_csv(trace, os.path.join(out_dir, f"{stem}.csv")))
    if "json" in formats:
        files.append(write_trace_json(trace, os.path.join(out_dir, f"{stem}.json")))
    return files


def _write_report(report: Dict[str, Any], path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _run_logger(log_data: RunLogData) -> RunLogger:
    """Fresh logger seeded with the events a (possibly remote) run recorded."""
    run_log = RunLogger(log_data.run_id, log_data.scenario, log_data.scenario_hash, log_data.variant)
    run_log.data.events = list(log_data.events)
    return run_log


def _audit_dict(trace: Trace) -> Dict[str, float]:
    audit = metrics.energy_audit(trace)
    return {"normalized": audit.normalized, "max_residual_j": audit.max_residual_j, "scale_j": audit.scale_j}


# =========================
# Operations
# =========================

def run_single(spec: ExperimentSpec) -> RunResult:
    scenario = _load(spec)
    if spec.variant:
        scenario = with_observer_variant(scenario, spec.variant)
    out_dir = _output_dir(spec, scenario)

    started = time.perf_counter()
    trace, log_data = simulate(scenario)
    runtime = time.perf_counter() - started

    deviation = metrics.movement_deviation(trace, target=scenario.controller.target)
    run_log = _run_logger(log_data)
    run_log.finish(
        {"deviation": deviation.to_dict(), "energy_audit": _audit_dict(trace), "rows": trace.rows},
        runtime_s=runtime,
    )
    metrics_path = os.path.join(out_dir, "metrics.json")
    run_log.save_to(metrics_path)

    files = _write_trace(trace, out_dir, f"trace_{scenario.observer.variant}", spec.formats) + [metrics_path]
    if spec.figures:
        from src.experiments.figures import write_single_figures

        files += write_single_figures(trace, out_dir)
    print(f"[Run] {scenario.name}: {trace.rows} rows, deviation (m) = "
          f"{np.array2string(deviation.per_axis_m, precision=6)}")
    return RunResult(scenario=scenario, trace=trace, log=run_log.data, files=files, out_dir=out_dir)


def run_regulation_comparison(spec: ExperimentSpec) -> Tuple[ComparisonReport, Dict[str, Trace]]:
    base = _load(spec)
    if spec.against:
        other = load_scenario(spec.against)
        if other.perturbations != base.perturbations:
            raise ComparisonError(
                f"perturbation schedules differ between {spec.scenario_path} and {spec.against}"
            )
    baseline_name, improved_name = spec.variants
    pair = [with_observer_variant(base, baseline_name), with_observer_variant(base, improved_name)]
    if pair[0].perturbations != pair[1].perturbations:
        raise ComparisonError("paired scenarios must share one perturbation schedule")

    started = time.perf_counter()
    (baseline, _), (improved, _) = simulate_all(pair, spec.workers)
    runtime = time.perf_counter() - started

    dev_baseline = metrics.movement_deviation(baseline).per_axis_m
    dev_improved = metrics.movement_deviation(improved).per_axis_m
    labels = (f"{baseline_name}", f"{improved_name}" if improved_name != baseline_name else f"{improved_name}_b")
    report = ComparisonReport(
        scenario=base.name,
        scenario_hash=scenario_hash(base),
        baseline=labels[0],
        improved=labels[1],
        deviations_m={labels[0]: dev_baseline.tolist(), labels[1]: dev_improved.tolist()},
        reductions_percent=metrics.reduction_percentages(dev_improved, dev_baseline).tolist(),
        joint_comparability=metrics.joint_comparability(baseline, improved),
        max_joint_excursion_rad={labels[0]: metrics.joint_excursion(baseline), labels[1]: metrics.joint_excursion(improved)},
        energy_audit={labels[0]: _audit_dict(baseline)["normalized"], labels[1]: _audit_dict(improved)["normalized"]},
        runtime_s=round(runtime, 3),
    )

    out_dir = _output_dir(spec, base)
    traces = {labels[0]: baseline, labels[1]: improved}
    for label, trace in traces.items():
        _write_trace(trace, out_dir, f"trace_{label}", spec.formats)
    _write_report(report.to_dict(), os.path.join(out_dir, "regulation_report.json"))
    if spec.figures:
        from src.experiments.figures import write_comparison_figures

        write_comparison_figures(traces, out_dir)

    print("[Compare] deviation (m):")
    for label in labels:
        print(f"  {label:>12}: {np.array2string(np.asarray(report.deviations_m[label]), precision=6)}")
    print(f"  reduction (%): {np.array2string(np.asarray(report.reductions_percent), precision=2)}")
    return report, traces


def run_reaching_comparison(spec: ExperimentSpec) -> Tuple[ReachingReport, Dict[str, Trace]]:
    base = _load(spec)
    if spec.variant:
        base = with_observer_variant(base, spec.variant)
    if base.controller.type != "reaching" or base.controller.target is None:
        raise ComparisonError("reaching comparison needs a scenario with a reaching controller and a target")
    start = end_effector_position(base.model, base.q0)
    target = np.asarray(base.controller.target)
    # degenerate chord fails here, before any simulation
    metrics.path_straightness(start[None, :], start, target)
    chord = float(np.linalg.norm(target - start))

    started = time.perf_counter()
    (perturbed, perturbed_log), (normal, normal_log) = simulate_all([base, without_perturbations(base)], spec.workers)
    runtime = time.perf_counter() - started

    traces = {"perturbed": perturbed, "normal": normal}
    straight = {k: metrics.straightness(tr, start, target) for k, tr in traces.items()}
    final_error = {k: float(np.linalg.norm(tr.x[-1] - target)) for k, tr in traces.items()}
    reached = {k: err <= REACH_TOLERANCE * chord for k, err in final_error.items()}
    run_logs = {"perturbed": _run_logger(perturbed_log), "normal": _run_logger(normal_log)}
    for k, ok in reached.items():
        if not ok:
            logger.warning("[Reaching] %s run ended %.4f m from the target", k, final_error[k])
            run_logs[k].log_event(float(traces[k].t[-1]), "UNREACHED_TARGET", {"final_error_m": final_error[k]})

    report = ReachingReport(
        scenario=base.name,
        scenario_hash=scenario_hash(base),
        chord_length_m=chord,
        max_joint_deviation_rad=metrics.max_joint_deviation(perturbed, normal),
        straightness_m=straight,
        straightness_ratio={k: v / chord for k, v in straight.items()},
        path_distance_m=metrics.path_distance(perturbed.x, normal.x),
        final_error_m=final_error,
        reached=reached,
        energy_audit={k: _audit_dict(tr)["normalized"] for k, tr in traces.items()},
        runtime_s=round(runtime, 3),
    )

    out_dir = _output_dir(spec, base)
    for label, trace in traces.items():
        _write_trace(trace, out_dir, f"trace_{label}", spec.formats)
        run_logs[label].finish({"final_error_m": final_error[label], "reached": reached[label]})
        run_logs[label].save_to(os.path.join(out_dir, f"metrics_{label}.json"))
    _write_report(report.to_dict(), os.path.join(out_dir, "reaching_report.json"))
    if spec.figures:
        from src.experiments.figures import write_comparison_figures

        write_comparison_figures(traces, out_dir)

    print(f"[Reaching] max joint deviation {report.max_joint_deviation_rad:.4f} rad, "
          f"path distance {report.path_distance_m:.5f} m over a {chord:.4f} m chord")
    return report, traces


# =========================
# Plot data
# =========================

PLOT_KINDS = ("joint", "tau", "ee", "fhat")


def validate_selection(selection: Sequence[str], dof: int = 7) -> None:
    """Raise PlotSelectionError for keys that no trace of a `dof`-joint arm can serve."""
    for key in selection:
        kind, _, arg = key.partition(":")
        ok = (
            (kind in ("joint", "tau") and arg.isdigit() and 1 <= int(arg) <= dof)
            or (kind == "ee" and arg in AXES + ("path3d",))
            or (kind == "fhat" and arg in AXES)
        )
        if not ok:
            raise PlotSelectionError(
                f"unknown plot selection {key!r}; use joint:<1..{dof}>, tau:<i>, ee:x|y|z|path3d, fhat:x|y|z"
            )


def _series_for(trace: Trace, key: str) -> Tuple[Dict[str, np.ndarray], List[str]]:
    kind, _, arg = key.partition(":")
    if kind in ("joint", "tau") and arg.isdigit() and 1 <= int(arg) <= trace.dof:
        i = int(arg) - 1
        if kind == "joint":
            return {"t_s": trace.t, f"q{arg}_rad": trace.q[:, i]}, ["s", "rad"]
        return {"t_s": trace.t, f"tau{arg}_nm": trace.tau[:, i]}, ["s", "N*m"]
    if kind == "ee" and arg in AXES:
        return {"t_s": trace.t, f"{arg}_m": trace.x[:, AXES.index(arg)]}, ["s", "m"]
    if kind == "ee" and arg == "path3d":
        return {"x_m": trace.x[:, 0], "y_m": trace.x[:, 1], "z_m": trace.x[:, 2]}, ["m", "m", "m"]
    if kind == "fhat" and arg in AXES:
        return {"t_s": trace.t, f"fhat_{arg}_n": trace.f_hat[:, AXES.index(arg)]}, ["s", "N"]
    raise PlotSelectionError(
        f"unknown plot selection {key!r}; use joint:<1..{trace.dof}>, tau:<i>, ee:x|y|z|path3d, fhat:x|y|z"
    )


def emit_plot_data(trace: Trace, selection: Sequence[str], out_dir: str, prefix: str = "") -> List[str]:
    """One series file per selected quantity. All keys are checked before anything is written."""
    validate_selection(selection, trace.dof)
    series = [(key, _series_for(trace, key)) for key in selection]
    files = []
    for key, (columns, units) in series:
        name = f"{prefix}{key.replace(':', '_')}.csv"
        files.append(write_series(columns, units, os.path.join(out_dir, name)))
    return files
