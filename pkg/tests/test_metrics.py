import numpy as np
import pytest

from src.core.errors import DegenerateChordError, DimensionError
from src.sim import metrics
from tests.helpers import make_trace


def line(start, end, rows=11):
    s = np.linspace(0.0, 1.0, rows)[:, None]
    return np.asarray(start, dtype=float) + s * (np.asarray(end, dtype=float) - np.asarray(start, dtype=float))


def test_rms_deviation_per_axis():
    x = np.zeros((4, 3))
    x[1:, 0] = 0.002
    x[:, 2] = [0.0, 0.0, 0.0, 0.004]
    np.testing.assert_allclose(metrics.rms_deviation(x), [np.sqrt(3 * 0.002**2 / 4), 0.0, 0.002])


def test_stationary_run_has_no_deviation():
    trace = make_trace(np.tile([0.31, -0.4, 0.14], (20, 1)))
    np.testing.assert_array_equal(metrics.movement_deviation(trace).per_axis_m, 0.0)


def test_straight_path_has_zero_straightness():
    path = line([0, 0, 0], [0.1, 0.2, 0.0])
    assert metrics.path_straightness(path, path[0], path[-1]) == pytest.approx(0.0, abs=1e-15)


def test_straightness_is_max_distance_from_chord():
    path = np.array([[0.0, 0.0, 0.0], [0.05, 0.01, 0.0], [0.1, 0.0, 0.0]])
    assert metrics.path_straightness(path, [0, 0, 0], [0.1, 0, 0]) == pytest.approx(0.01)
    # overshoot beyond the target is measured from the end point
    overshoot = np.array([[0.0, 0.0, 0.0], [0.13, 0.0, 0.04]])
    assert metrics.path_straightness(overshoot, [0, 0, 0], [0.1, 0, 0]) == pytest.approx(0.05)


def test_degenerate_chord():
    with pytest.raises(DegenerateChordError):
        metrics.path_straightness(np.zeros((3, 3)), [0.1, 0.1, 0.1], [0.1, 0.1, 0.1])


def test_deviation_with_reference_and_target():
    x = line([0, 0, 0], [0.1, 0, 0])
    q = np.zeros((11, 7))
    q[5, 2] = 0.3
    trace = make_trace(x, q=q)
    reference = make_trace(x)
    result = metrics.movement_deviation(trace, reference=reference, target=[0.1, 0, 0])
    assert result.max_joint_deviation_rad == pytest.approx(0.3)
    assert result.straightness_m == pytest.approx(0.0, abs=1e-15)
    assert result.chord_length_m == pytest.approx(0.1)
    assert result.to_dict()["per_axis_m"][1] == 0.0


def test_reduction_percentages():
    np.testing.assert_allclose(metrics.reduction_percentages([1.0, 2.0, 3.0], [2.0, 2.0, 0.0]), [50.0, 0.0, 0.0])
    np.testing.assert_allclose(metrics.reduction_percentages([0.004, 0.002], [0.002, 0.004]), [-100.0, 50.0])


def test_path_distance():
    path = line([0, 0, 0], [0.1, 0, 0])
    assert metrics.path_distance(path, path) == 0.0
    assert metrics.path_distance(path, path + [0, 0.01, 0]) == pytest.approx(0.01)
    # time shifts along the same curve do not count
    assert metrics.path_distance(path, path[::-1]) == 0.0


def test_joint_comparability():
    q = np.zeros((5, 7))
    q[-1, 0] = 0.2
    half = q / 2
    assert metrics.joint_comparability(make_trace(np.zeros((5, 3)), q=q), make_trace(np.zeros((5, 3)), q=q)) == 1.0
    assert metrics.joint_comparability(make_trace(np.zeros((5, 3)), q=q), make_trace(np.zeros((5, 3)), q=half)) == pytest.approx(0.5)
    assert metrics.joint_comparability(make_trace(np.zeros((5, 3))), make_trace(np.zeros((5, 3)))) == 1.0


def test_energy_audit_of_balanced_trace():
    trace = make_trace(np.zeros((4, 3)))
    trace.kinetic = np.array([0.0, 1.0, 2.0, 2.0])
    trace.work_in = np.array([0.0, 1.0, 2.5, 2.5])
    trace.friction_loss = np.array([0.0, 0.0, 0.5, 0.5])
    audit = metrics.energy_audit(trace)
    assert audit.max_residual_j == pytest.approx(0.0)
    assert audit.passes()
    trace.work_in = trace.work_in * 1.1
    assert not metrics.energy_audit(trace).passes()


def test_empty_trace():
    with pytest.raises(DimensionError):
        metrics.rms_deviation(np.zeros((0, 3)))


def test_semicircle_straightness_is_its_radius():
    radius = 0.07
    angle = np.linspace(0.0, np.pi, 181)
    arc = np.column_stack([radius * (1.0 - np.cos(angle)), radius * np.sin(angle), np.zeros_like(angle)])
    assert metrics.path_straightness(arc, arc[0], arc[-1]) == pytest.approx(radius)
