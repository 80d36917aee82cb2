import time

import numpy as np
import pytest

from src.dynamics.newton_euler import (
    christoffel_coriolis_matrix,
    coriolis_matrix,
    gravity_vector,
    inverse_dynamics,
    joint_space_dynamics,
    kinetic_energy,
    mass_matrix,
    mass_matrix_lagrangian,
    potential_energy,
)
from tests.helpers import random_configurations


def test_mass_matrix_matches_lagrangian_oracle(arm_model, rng):
    started = time.perf_counter()
    for q in random_configurations(rng, 50, spread=np.pi):
        M = mass_matrix(arm_model, q)
        oracle = mass_matrix_lagrangian(arm_model, q)
        assert np.linalg.norm(M - oracle) <= 1e-8 * np.linalg.norm(oracle)
    assert time.perf_counter() - started < 10.0


def test_mass_matrix_is_symmetric_positive_definite(arm_model, rng):
    for q in random_configurations(rng, 10, spread=np.pi):
        M = mass_matrix(arm_model, q)
        np.testing.assert_allclose(M, M.T, atol=1e-14)
        assert np.all(np.linalg.eigvalsh(M) > 0)


def test_gravity_is_gradient_of_potential(arm_model, rng):
    h = 1e-6
    for q in random_configurations(rng, 20, spread=np.pi):
        grad = np.empty(7)
        for i in range(7):
            step = np.zeros(7)
            step[i] = h
            grad[i] = (potential_energy(arm_model, q + step) - potential_energy(arm_model, q - step)) / (2 * h)
        np.testing.assert_allclose(gravity_vector(arm_model, q), grad, atol=1e-6)


def test_coriolis_matches_christoffel_product(arm_model, rng):
    # factorizations differ; their product with qd may not
    for q in random_configurations(rng, 10, spread=np.pi):
        qd = rng.normal(size=7)
        np.testing.assert_allclose(
            coriolis_matrix(arm_model, q, qd) @ qd,
            christoffel_coriolis_matrix(arm_model, q, qd) @ qd,
            atol=1e-6,
        )


def test_mdot_minus_two_c_is_skew(arm_model, rng):
    h = 1e-6
    for q in random_configurations(rng, 100, spread=np.pi):
        qd = rng.normal(size=7)
        x = rng.normal(size=7)
        M_dot = (mass_matrix(arm_model, q + h * qd) - mass_matrix(arm_model, q - h * qd)) / (2 * h)
        N = M_dot - 2.0 * coriolis_matrix(arm_model, q, qd)
        assert abs(x @ N @ x) <= 1e-6


def test_inverse_dynamics_is_sum_of_terms(arm_model, rng):
    for q in random_configurations(rng, 5, spread=np.pi):
        qd = rng.normal(size=7)
        qdd = rng.normal(size=7)
        dyn = joint_space_dynamics(arm_model, q, qd)
        np.testing.assert_allclose(
            inverse_dynamics(arm_model, q, qd, qdd), dyn.M @ qdd + dyn.C @ qd + dyn.g, atol=1e-10
        )


def test_single_link_inertia(flat_link):
    # I_zz + m r^2 = 0.1 + 2 * 0.5^2
    assert inverse_dynamics(flat_link, [0.4], [0.0], [1.0])[0] == pytest.approx(0.6)
    assert inverse_dynamics(flat_link, [0.4], [3.0], [0.0])[0] == pytest.approx(0.0, abs=1e-12)


def test_pendulum_gravity_torque(pendulum):
    # lifting torque of a horizontal 1 kg, 1 m pendulum; positive rotation about y lowers the tip
    assert gravity_vector(pendulum, [0.0])[0] == pytest.approx(-9.81)
    assert gravity_vector(pendulum, [np.pi / 2])[0] == pytest.approx(0.0, abs=1e-12)
    assert inverse_dynamics(pendulum, [0.0], [0.0], [0.0], gravity_on=False)[0] == 0.0


def test_kinetic_energy_of_spinning_link(flat_link):
    assert kinetic_energy(flat_link, [1.0], [2.0]) == pytest.approx(0.5 * 0.6 * 4.0)
