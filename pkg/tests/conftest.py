import numpy as np
import pytest

from src.robot.model import load_model, single_link
from tests.helpers import HOLD_POSE_DEG


@pytest.fixture(scope="session")
def arm_model():
    return load_model("paper7dof")


@pytest.fixture
def hold_pose():
    return np.radians(HOLD_POSE_DEG)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def flat_link():
    """Link of length 1 m and mass 2 kg spinning about z, laid along x; gravity does no work."""
    return single_link(length=1.0, mass=2.0, inertia_diag=(0.0, 0.0, 0.1))


@pytest.fixture
def pendulum():
    """Point mass of 1 kg on a 1 m rod swinging about y under gravity."""
    return single_link(length=1.0, mass=1.0, axis=(0.0, 1.0, 0.0), com_offset=1.0)
