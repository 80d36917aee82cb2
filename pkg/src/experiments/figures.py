"""
Static HTML figures for runs and comparisons (plotly, no server).
"""

import os
from typing import Dict, List

import plotly.graph_objects as go
from plotly.subplots import make_subplots

from src.sim.simulator import Trace
from src.sim.trace_io import AXES

# Baseline first, improved / perturbed second
PALETTE = ["#9ca3af", "#3b82f6", "#f97316", "#10b981"]


def _save(fig: go.Figure, out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    fig.write_html(path, include_plotlyjs="cdn", full_html=True)
    return path


def end_effector_figure(traces: Dict[str, Trace]) -> go.Figure:
    """One row per task axis, end-effector displacement from its start."""
    fig = make_subplots(rows=3, cols=1, shared_xaxes=True, subplot_titles=[f"{a} (m)" for a in AXES])
    for color, (label, trace) in zip(PALETTE, traces.items()):
        for row, axis in enumerate(AXES, start=1):
            fig.add_trace(
                go.Scatter(x=trace.t, y=trace.x[:, row - 1] - trace.x[0, row - 1], name=label,
                           legendgroup=label, showlegend=row == 1, line=dict(color=color)),
                row=row, col=1,
            )
    fig.update_xaxes(title_text="Time (s)", row=3, col=1)
    fig.update_layout(title="End-effector deviation", height=700)
    return fig


def joint_figure(traces: Dict[str, Trace]) -> go.Figure:
    dof = next(iter(traces.values())).dof
    fig = make_subplots(rows=dof, cols=1, shared_xaxes=True, subplot_titles=[f"q{i} (rad)" for i in range(1, dof + 1)])
    for color, (label, trace) in zip(PALETTE, traces.items()):
        for i in range(dof):
            fig.add_trace(
                go.Scatter(x=trace.t, y=trace.q[:, i], name=label, legendgroup=label,
                           showlegend=i == 0, line=dict(color=color)),
                row=i + 1, col=1,
            )
    fig.update_xaxes(title_text="Time (s)", row=dof, col=1)
    fig.update_layout(title="Joint angles", height=180 * dof)
    return fig


def path3d_figure(traces: Dict[str, Trace]) -> go.Figure:
    fig = go.Figure()
    for color, (label, trace) in zip(PALETTE, traces.items()):
        fig.add_trace(go.Scatter3d(x=trace.x[:, 0], y=trace.x[:, 1], z=trace.x[:, 2],
                                   mode="lines", name=label, line=dict(color=color, width=4)))
        target = trace.meta.get("target_m")
        if target:
            fig.add_trace(go.Scatter3d(x=[trace.x[0, 0], target[0]], y=[trace.x[0, 1], target[1]],
                                       z=[trace.x[0, 2], target[2]], mode="lines+markers",
                                       name="chord", line=dict(color="#111827", dash="dash"),
                                       showlegend=label == next(iter(traces))))
    fig.update_layout(title="End-effector path", scene=dict(xaxis_title="x (m)", yaxis_title="y (m)", zaxis_title="z (m)"))
    return fig


def estimate_figure(trace: Trace) -> go.Figure:
    fig = go.Figure()
    for i, axis in enumerate(AXES):
        fig.add_trace(go.Scatter(x=trace.t, y=trace.f_hat[:, i], name=f"f_hat {axis}", line=dict(color=PALETTE[i + 1])))
    fig.update_layout(title="Disturbance estimate (N)", xaxis_title="Time (s)")
    return fig


def write_single_figures(trace: Trace, out_dir: str) -> List[str]:
    label = trace.meta.get("variant", "run")
    return [
        _save(end_effector_figure({label: trace}), out_dir, "end_effector.html"),
        _save(joint_figure({label: trace}), out_dir, "joints.html"),
        _save(estimate_figure(trace), out_dir, "estimate.html"),
    ]


def write_comparison_figures(traces: Dict[str, Trace], out_dir: str) -> List[str]:
    return [
        _save(end_effector_figure(traces), out_dir, "end_effector.html"),
        _save(joint_figure(traces), out_dir, "joints.html"),
        _save(path3d_figure(traces), out_dir, "path3d.html"),
    ]
