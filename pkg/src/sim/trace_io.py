"""
Trace export/import.

CSV files start with a `# units:` comment line followed by the column header; JSON files
carry a `meta` block (units, dt, scenario hash) and one array per column.
"""

import json
import os
from typing import Dict, List

import numpy as np
import pandas as pd

from src.sim.simulator import Trace

AXES = ("x", "y", "z")


def trace_columns(trace: Trace) -> Dict[str, str]:
    """Column name -> unit, in export order."""
    units = {"t_s": "s"}
    for i in range(1, trace.dof + 1):
        units[f"q{i}_rad"] = "rad"
    for i in range(1, trace.dof + 1):
        units[f"qd{i}_radps"] = "rad/s"
    for a in AXES:
        units[f"{a}_m"] = "m"
    for a in AXES:
        units[f"{a}d_mps"] = "m/s"
    for a in AXES:
        units[f"fhat_{a}_n"] = "N"
    for i in range(1, trace.dof + 1):
        units[f"tau{i}_nm"] = "N*m"
    for i in range(1, trace.dof + 1):
        units[f"tauext{i}_nm"] = "N*m"
    for j in range(trace.active.shape[1]):
        units[f"pert{j + 1}_active"] = "flag"
    units.update({"kinetic_j": "J", "potential_j": "J", "work_in_j": "J", "friction_loss_j": "J", "damped": "flag"})
    return units


def trace_to_frame(trace: Trace) -> pd.DataFrame:
    blocks = [
        trace.t[:, None], trace.q, trace.qd, trace.x, trace.xd, trace.f_hat, trace.tau, trace.tau_ext,
        trace.active.astype(int),
        trace.kinetic[:, None], trace.potential[:, None], trace.work_in[:, None], trace.friction_loss[:, None],
        trace.damped.astype(int)[:, None],
    ]
    return pd.DataFrame(np.hstack(blocks), columns=list(trace_columns(trace)))


def write_trace_csv(trace: Trace, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    units = trace_columns(trace)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("# units: " + ",".join(units.values()) + "\n")
        trace_to_frame(trace).to_csv(f, index=False, float_format="%.17g")
    return path


def write_trace_json(trace: Trace, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame = trace_to_frame(trace)
    doc = {
        "meta": {**trace.meta, "rows": trace.rows, "units": trace_columns(trace)},
        "columns": {name: frame[name].tolist() for name in frame.columns},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")
    return path


def read_trace_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", float_precision="round_trip")


def write_series(columns: Dict[str, np.ndarray], units: List[str], path: str) -> str:
    """Column-oriented series file with a units comment line."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("# units: " + ",".join(units) + "\n")
        pd.DataFrame(columns).to_csv(f, index=False, float_format="%.17g")
    return path
