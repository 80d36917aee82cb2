import json

import numpy as np

from src.sim.scenario import load_scenario
from src.sim.simulator import run
from src.sim.trace_io import read_trace_csv, trace_columns, write_trace_csv, write_trace_json
from tests.helpers import regulation_doc


def short_trace():
    return run(load_scenario(regulation_doc(duration_s=0.02)))


def test_csv_has_units_header_and_named_columns(tmp_path):
    trace = short_trace()
    path = write_trace_csv(trace, str(tmp_path / "out" / "trace.csv"))
    with open(path, encoding="utf-8") as f:
        units_line = f.readline().strip()
        header = f.readline().strip().split(",")
    assert units_line.startswith("# units: s,rad")
    assert header[:3] == ["t_s", "q1_rad", "q2_rad"]
    assert "fhat_z_n" in header and "pert1_active" in header
    assert len(header) == len(units_line[len("# units: "):].split(","))


def test_csv_values_survive_reading(tmp_path):
    trace = short_trace()
    frame = read_trace_csv(write_trace_csv(trace, str(tmp_path / "trace.csv")))
    assert len(frame) == trace.rows == 21
    np.testing.assert_array_equal(frame["q4_rad"].to_numpy(), trace.q[:, 3])
    np.testing.assert_array_equal(frame["z_m"].to_numpy(), trace.x[:, 2])
    assert list(frame.columns) == list(trace_columns(trace))


def test_json_carries_meta(tmp_path):
    trace = short_trace()
    with open(write_trace_json(trace, str(tmp_path / "trace.json")), encoding="utf-8") as f:
        doc = json.load(f)
    assert doc["meta"]["rows"] == 21
    assert doc["meta"]["units"]["x_m"] == "m"
    assert doc["meta"]["scenario_hash"] == trace.meta["scenario_hash"]
    assert len(doc["columns"]["t_s"]) == 21


def test_identical_runs_write_identical_files(tmp_path):
    a = write_trace_csv(short_trace(), str(tmp_path / "a.csv"))
    b = write_trace_csv(short_trace(), str(tmp_path / "b.csv"))
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() == fb.read()
